#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "uwbloc/experiments.hpp"

using namespace uwbloc;

namespace {

const std::string kConfigs = UWBLOC_CONFIG_DIR;

Scenario tiny(EstimatorKind kind)
{
  Scenario s = xrloc_scenario();
  s.estimator = kind;
  s.trials = 2;
  s.grid_res = 1.0;
  s.search_res = 0.05;
  s.pf_updates = 2;
  s.pf.density = 50.0;
  return s;
}

}  // namespace

TEST_CASE("enum names round trip")
{
  for (auto k : { EstimatorKind::Twr, EstimatorKind::Tdoa, EstimatorKind::Aoa, EstimatorKind::Fused,
                  EstimatorKind::XrlocGrid, EstimatorKind::XrlocPf })
    CHECK(parse_estimator_kind(to_string(k)) == k);
  CHECK(parse_estimator_kind("XRLOC_PF") == EstimatorKind::XrlocPf);
  for (auto m : { Modality::Fused, Modality::TdoaOnly, Modality::PdoaOnly }) CHECK(parse_modality(to_string(m)) == m);
  for (auto a : { MicrobenchAxis::Modality, MicrobenchAxis::Aperture, MicrobenchAxis::Antennas, MicrobenchAxis::Pattern,
                  MicrobenchAxis::Calibration })
    CHECK(parse_microbench_axis(to_string(a)) == a);
  CHECK_THROWS_AS(parse_layout_kind("circle"), std::invalid_argument);
  CHECK_THROWS_AS(parse_trajectory_kind("spiral"), std::invalid_argument);
}

TEST_CASE("scenario JSON round trip and digest")
{
  for (const auto& s : gdop_scenarios()) {
    const auto back = Scenario::from_json(s.to_json());
    CHECK(back.to_json() == s.to_json());
    CHECK(back.digest() == s.digest());
    CHECK(s.digest().size() == 16);
  }
  Scenario a = xrloc_scenario();
  Scenario b = a;
  b.seed = 2;
  CHECK(a.digest() != b.digest());
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);

  auto j = a.to_json();
  j["trials"] = 0;
  CHECK_THROWS_AS(Scenario::from_json(j), std::invalid_argument);
  j = a.to_json();
  j["estimator"] = "sonar";
  CHECK_THROWS(Scenario::from_json(j));
}

TEST_CASE("shipped GDOP configs match the built-in scenarios")
{
  for (const auto& s : gdop_scenarios()) {
    const auto loaded = Scenario::load(kConfigs + "/gdop_" + s.name + ".json");
    CHECK(loaded.digest() == s.digest());
  }
}

TEST_CASE("shipped configs parse")
{
  for (const char* name : { "track_static.json", "track_figure_eight.json", "sweep_noise.json", "calibrate_demo.json" }) {
    const auto j = nlohmann::json::parse(read_text_file(kConfigs + "/" + name));
    CHECK_NOTHROW(Scenario::from_json(j.contains("scenario") ? j.at("scenario") : j));
  }
  CHECK_NOTHROW(AmbiguityConfig::from_json(nlohmann::json::parse(read_text_file(kConfigs + "/ambiguity.json"))));
  for (const char* name : { "mac_tdma.json", "mac_unslotted.json" })
    CHECK_NOTHROW(MacConfig::from_json_text(read_text_file(kConfigs + "/" + name)));
}

TEST_CASE("ResultTable CSV")
{
  ResultTable t;
  t.columns = { "a", "b", "c" };
  t.add_row({ 1.0, std::int64_t{ 2 }, std::string("x") });
  t.add_row({ 0.1 + 0.2, std::int64_t{ -3 }, std::string("y") });
  t.set_meta("seed", "7");
  t.set_meta("ratio", 0.5);
  CHECK_THROWS_AS(t.add_row({ 1.0 }), std::invalid_argument);
  CHECK(t.csv_body() == "a,b,c\n1,2,x\n0.3,-3,y\n");
  CHECK(t.to_csv() == "# seed: 7\n# ratio: 0.5\na,b,c\n1,2,x\n0.3,-3,y\n");
  CHECK(strip_metadata(t.to_csv()) == t.csv_body());
  CHECK(t.meta("seed") == "7");
  CHECK(t.meta("absent").empty());
  CHECK(t.column("b") == std::vector<double>{ 2.0, -3.0 });
  CHECK_THROWS(t.column("c"));
  CHECK_THROWS(t.column_index("d"));
  CHECK(format_number(1e-12) == "1e-12");
  CHECK(format_number(123456789.0) == "123456789");
  CHECK(median_of({ 3.0, 1.0, 2.0 }) == 2.0);
  CHECK(median_of({ 4.0, 1.0, 2.0, 3.0 }) == 2.5);
  CHECK(quantile_of({ 0.0, 10.0 }, 0.9) == doctest::Approx(9.0));
  CHECK(std::isnan(median_of({})));

  const std::string path = "uwbloc_test_table.csv";
  t.write(path);
  CHECK(read_text_file(path) == t.to_csv());
  std::remove(path.c_str());
}

TEST_CASE("trajectory builders")
{
  TrajectorySpec s;
  s.duration = 1.0;
  s.rate = 10.0;
  const auto still = s.build();
  REQUIRE(still.size() == 10);
  CHECK(still[9].t == doctest::Approx(0.9));
  for (const auto& tp : still) CHECK(tp.p == s.start);

  s.kind = TrajectoryKind::Line;
  const auto line = s.build();
  CHECK(line.front().p == s.start);
  CHECK(line.back().p.x == doctest::Approx(s.end.x));

  s.kind = TrajectoryKind::Rectangle;
  s.rate = 1000.0;
  const auto rect = s.build();
  for (const auto& tp : rect) {
    const bool on_edge = std::abs(tp.p.x - 1.0) < 1e-9 || std::abs(tp.p.x - 2.0) < 1e-9 ||
                         std::abs(tp.p.y - 1.0) < 1e-9 || std::abs(tp.p.y - 2.0) < 1e-9;
    CHECK(on_edge);
  }
  CHECK(distance(rect.back().p, s.start) < 1e-9);

  s.kind = TrajectoryKind::FigureEight;
  const auto eight = s.build();
  CHECK(distance(eight.front().p, s.center) < 1e-12);
  CHECK(distance(eight.back().p, s.center) < 1e-9);
  for (const auto& tp : eight) CHECK(std::abs(tp.p.x - s.center.x) <= s.radius + 1e-12);

  const std::string path = "uwbloc_test_traj.csv";
  {
    std::ofstream f(path);
    f << "t,x,y\n0,1,1\n0.5,1.2,1.1\n";
  }
  s.kind = TrajectoryKind::File;
  s.path = path;
  const auto file = s.build();
  REQUIRE(file.size() == 2);
  CHECK(file[1].p == Position{ 1.2, 1.1 });
  std::remove(path.c_str());
}

TEST_CASE("sub_threshold_minima")
{
  const Environment env(1.0, 1.0);
  const auto shape = grid_shape(env, 0.1);
  std::vector<double> score(shape.size(), 100.0);
  score[2 * 10 + 2] = 1.0;
  score[2 * 10 + 3] = 2.0;   // same region as (2, 2)
  score[7 * 10 + 7] = 0.5;   // separate region
  score[7 * 10 + 9] = 0.7;   // separate region, but 0.2 m from (7, 7)
  auto minima = sub_threshold_minima(score, env, shape, 5.0, 0.1);
  REQUIRE(minima.size() == 3);
  CHECK(minima[0].score == 0.5);
  CHECK(minima[1].score == 0.7);
  CHECK(minima[2].score == 1.0);
  CHECK(minima[2].position.x == doctest::Approx(0.25));
  minima = sub_threshold_minima(score, env, shape, 5.0, 0.25);
  CHECK(minima.size() == 2);
  CHECK(sub_threshold_minima(score, env, shape, 0.1, 0.1).empty());
}

TEST_CASE("small experiment runs are deterministic")
{
  for (auto kind : { EstimatorKind::XrlocGrid, EstimatorKind::XrlocPf, EstimatorKind::Tdoa }) {
    const auto s = tiny(kind);
    const auto a = run_heatmap(s);
    const auto b = run_heatmap(s);
    CHECK(a.csv_body() == b.csv_body());
    CHECK(a.rows.size() == 9);
    CHECK(a.meta("config_digest") == s.digest());
    CHECK_FALSE(a.meta("wall_time_s").empty());
  }

  Scenario s = tiny(EstimatorKind::XrlocGrid);
  s.trials = 3;
  const auto sweep = run_noise_sweep(s, { 1.0, 5.0 }, { 50.0 });
  CHECK(sweep.rows.size() == 2);
  CHECK(sweep.csv_body() == run_noise_sweep(s, { 1.0, 5.0 }, { 50.0 }).csv_body());

  const auto micro = run_microbench(s, MicrobenchAxis::Antennas);
  CHECK(micro.rows.size() == 3);
}

TEST_CASE("trial runner localizes noiseless packets")
{
  Scenario s = xrloc_scenario();
  s.noise = { 1e-3, 1e-3, 0.0, 0.0 };
  s.search_res = 0.05;
  const TrialRunner runner(s);
  RandomStream rng(1);
  const auto out = runner.run({ 1.37, 1.81 }, rng);
  CHECK(out.error < 1e-3);
  CHECK_FALSE(out.flagged);

  s.bias = BiasRanges{};
  const TrialRunner biased(s);
  REQUIRE(biased.injected_bias());
  CHECK(biased.injected_bias()->size() == 6);
  CHECK(biased.estimator_array().has_calibration());
  CHECK_FALSE(biased.hardware_array().has_calibration());
}

TEST_CASE("simulated calibration recovers the injected bias")
{
  const auto a = make_ula(6, 1.0, { 1.5, 0.0 });
  RandomStream draw(3);
  const auto bias = BiasRanges{}.draw(6, draw);
  CalibrationProtocol protocol;
  protocol.sigma_phase_deg = 0.0;
  RandomStream rng(4);
  const auto fits = simulate_calibration(a, bias, protocol, rng);
  REQUIRE(fits.size() == 6);
  for (std::size_t k = 0; k < 6; ++k)
    for (double d = 0.4; d < 3.2; d += 0.3)
      CHECK(std::abs(phase_bias(d, fits[k].params) - phase_bias(d, bias[k])) < 1e-6);
}
