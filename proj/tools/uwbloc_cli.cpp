#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "uwbloc/experiments.hpp"
#include "uwbloc/mac_sim.hpp"
#include "uwbloc/scenario.hpp"

using namespace uwbloc;

namespace {

struct Common
{
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<int> trials;
  std::optional<double> grid_res;
};

void add_common(CLI::App* cmd, Common& c)
{
  cmd->add_option("--config", c.config, "JSON configuration file")->check(CLI::ExistingFile);
  cmd->add_option("--seed", c.seed, "Override the configured seed");
  cmd->add_option("--out", c.out, "Output CSV path (stdout when omitted)");
  cmd->add_option("--trials", c.trials, "Override the trial count")->check(CLI::PositiveNumber);
  cmd->add_option("--grid-res", c.grid_res, "Override the evaluation grid resolution, m")->check(CLI::PositiveNumber);
}

nlohmann::json load_json(const std::string& path)
{
  return path.empty() ? nlohmann::json::object() : nlohmann::json::parse(read_text_file(path));
}

// A config is either a bare scenario or {"scenario": {...}, ...extras}.
Scenario scenario_from(const nlohmann::json& j, const Scenario& fallback, const Common& c)
{
  Scenario s = fallback;
  if (j.contains("scenario")) s = Scenario::from_json(j.at("scenario"));
  else if (!j.empty()) s = Scenario::from_json(j);
  if (c.seed) s.seed = *c.seed;
  if (c.trials) s.trials = *c.trials;
  if (c.grid_res) s.grid_res = *c.grid_res;
  s.validate();
  return s;
}

void emit(const ResultTable& t, const std::string& path)
{
  if (path.empty()) std::cout << t.to_csv();
  else t.write(path);
}

Scenario named_scenario(const std::string& name)
{
  for (const auto& s : gdop_scenarios()) {
    if (s.name == name) return s;
  }
  throw CLI::ValidationError("--scenario", "unknown scenario " + name);
}

}  // namespace

int main(int argc, char** argv)
{
  CLI::App app{ "UWB array localization simulator" };
  app.require_subcommand(1);
  std::string log_level = "warn";
  app.add_option("--log-level", log_level, "spdlog level")->check(CLI::IsMember({ "trace", "debug", "info", "warn", "error", "off" }));

  Common heat_c;
  std::string heat_name = "xrloc";
  auto* heat = app.add_subcommand("heatmap", "Per-position error statistics over an evaluation grid");
  add_common(heat, heat_c);
  heat->add_option("--scenario", heat_name, "Built-in scenario when no --config is given");

  Common sweep_c;
  auto* sweep = app.add_subcommand("sweep-noise", "Median error over a sigma_theta x sigma_t grid");
  add_common(sweep, sweep_c);

  Common micro_c;
  std::string axis = "modality";
  auto* micro = app.add_subcommand("microbench", "One-axis microbenchmark sweep");
  add_common(micro, micro_c);
  micro->add_option("--axis", axis, "modality | aperture | antennas | pattern | calibration")
      ->check(CLI::IsMember({ "modality", "aperture", "antennas", "pattern", "calibration" }));

  Common track_c;
  std::string traj_kind;
  auto* track = app.add_subcommand("track", "Particle filter along a trajectory");
  add_common(track, track_c);
  track->add_option("--trajectory", traj_kind, "static | line | rectangle | figure-eight");

  Common amb_c;
  std::string summary_out;
  auto* amb = app.add_subcommand("ambiguity", "PDoA / TDoA / fused likelihood surfaces");
  add_common(amb, amb_c);
  amb->add_option("--summary-out", summary_out, "Minima summary CSV path");

  Common mac_c;
  std::string mac_mode;
  double duration = 0.0;
  std::string series_out;
  auto* mac = app.add_subcommand("mac", "Discrete-event TDMA / unslotted MAC simulation");
  add_common(mac, mac_c);
  mac->add_option("--mode", mac_mode, "tdma | unslotted")->check(CLI::IsMember({ "tdma", "unslotted" }));
  mac->add_option("--duration", duration, "Simulated seconds")->check(CLI::PositiveNumber);
  mac->add_option("--timeseries-out", series_out, "Per-window success CSV path");

  Common cal_c;
  auto* cal = app.add_subcommand("calibrate-demo", "Three-point calibration on injected phase biases");
  add_common(cal, cal_c);

  CLI11_PARSE(app, argc, argv);
  spdlog::set_level(spdlog::level::from_str(log_level));

  try {
    if (*heat) {
      const Scenario base = heat_c.config.empty() ? named_scenario(heat_name) : Scenario{};
      emit(run_heatmap(scenario_from(load_json(heat_c.config), base, heat_c)), heat_c.out);
    } else if (*sweep) {
      const auto j = load_json(sweep_c.config);
      Scenario base = xrloc_scenario();
      base.trials = 500;
      const Scenario s = scenario_from(j, base, sweep_c);
      const auto thetas = j.value("sigma_theta_deg", std::vector<double>{ 0.5, 1, 2, 3, 4, 5, 6, 8, 10 });
      const auto times = j.value("sigma_t_ps", std::vector<double>{ 3, 50, 150, 250, 500 });
      emit(run_noise_sweep(s, thetas, times), sweep_c.out);
    } else if (*micro) {
      const auto j = load_json(micro_c.config);
      Scenario base = xrloc_scenario();
      base.trials = 500;
      const Scenario s = scenario_from(j, base, micro_c);
      emit(run_microbench(s, parse_microbench_axis(j.value("axis", axis))), micro_c.out);
    } else if (*track) {
      Scenario base = xrloc_scenario();
      base.trajectory = TrajectorySpec{};
      Scenario s = scenario_from(load_json(track_c.config), base, track_c);
      if (!s.trajectory) s.trajectory = TrajectorySpec{};
      if (!traj_kind.empty()) {
        s.trajectory->kind = parse_trajectory_kind(traj_kind);
        // Moving tags need the dynamic random-walk scale unless the config chose one.
        if (track_c.config.empty() && s.trajectory->kind != TrajectoryKind::Static) s.pf.process_noise = 0.03;
      }
      emit(run_tracking(s), track_c.out);
    } else if (*amb) {
      AmbiguityConfig c = AmbiguityConfig::from_json(load_json(amb_c.config));
      if (amb_c.seed) c.seed = *amb_c.seed;
      if (amb_c.grid_res) c.resolution = *amb_c.grid_res;
      const AmbiguityResult r = run_ambiguity_maps(c);
      emit(r.surfaces, amb_c.out);
      if (!summary_out.empty()) r.summary.write(summary_out);
      else if (!amb_c.out.empty()) std::cout << r.summary.to_csv();
    } else if (*mac) {
      const auto j = load_json(mac_c.config);
      MacConfig c = j.empty() ? MacConfig{} : MacConfig::from_json_text(j.dump());
      const std::uint64_t seed = mac_c.seed.value_or(j.value("seed", std::uint64_t{ 1 }));
      if (mac_mode == "tdma") c.mode = MacMode::Tdma;
      if (mac_mode == "unslotted") c.mode = MacMode::Unslotted;
      if (duration > 0.0) c.sim_duration = duration;
      c.validate();
      RandomStream rng(seed);
      const MacReport report = run_mac(c, rng);
      nlohmann::json config = j;
      config["mode"] = c.mode == MacMode::Tdma ? "tdma" : "unslotted";
      config["sim_duration"] = c.sim_duration;
      ResultTable t = mac_table(report);
      stamp_metadata(t, config, seed, 0.0);
      emit(t, mac_c.out);
      if (!series_out.empty()) {
        ResultTable ts = mac_timeseries_table(report);
        stamp_metadata(ts, config, seed, 0.0);
        ts.write(series_out);
      }
    } else if (*cal) {
      Scenario base = xrloc_scenario();
      base.trials = 200;
      base.bias = BiasRanges{};
      emit(run_calibration_demo(scenario_from(load_json(cal_c.config), base, cal_c)), cal_c.out);
    }
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 0;
}
