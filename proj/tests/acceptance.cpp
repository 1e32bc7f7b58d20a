// Acceptance suite: one [PASS]/[FAIL] line per criterion, non-zero exit if any fail.
#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "uwbloc/calibration.hpp"
#include "uwbloc/experiments.hpp"
#include "uwbloc/mac_sim.hpp"
#include "uwbloc/particle_filter.hpp"

using namespace uwbloc;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Check
{
  bool ok{ true };
  std::vector<std::string> notes;

  void expect(bool cond, const std::string& what)
  {
    ok = ok && cond;
    notes.push_back(fmt::format("{}{}", cond ? "" : "!", what));
  }
};

int failures = 0;

void report(int n, const Check& c, double seconds)
{
  std::string joined;
  for (const auto& s : c.notes) joined += (joined.empty() ? "" : "; ") + s;
  std::printf("[%s] criterion %d: %s (%.1f s)\n", c.ok ? "PASS" : "FAIL", n, joined.c_str(), seconds);
  std::fflush(stdout);
  if (!c.ok) ++failures;
}

bool within(double value, double target, double rel)
{
  return std::abs(value - target) <= rel * target;
}

std::string cm(double m)
{
  return fmt::format("{:.2f} cm", 100.0 * m);
}

double global_median(const ResultTable& t)
{
  return std::stod(t.meta("global_median_err_m"));
}

// 1. GDOP study at 5 cm grid, 50 trials.
void criterion_1()
{
  const auto t0 = Clock::now();
  Check c;
  std::map<std::string, double> med;
  for (const auto& s : gdop_scenarios()) med[s.name] = global_median(run_heatmap(s));
  const double wall = seconds_since(t0);

  c.expect(within(med["twr-diverse"], 0.029, 0.30), "TWR diverse " + cm(med["twr-diverse"]) + " vs 2.9 +-30%");
  const double ratio = med["twr-constrained"] / med["twr-diverse"];
  c.expect(ratio >= 6.0, fmt::format("TWR constrained/diverse {:.2f}x >= 6x", ratio));
  c.expect(within(med["tdoa-constrained"], 0.544, 0.30), "TDoA " + cm(med["tdoa-constrained"]) + " vs 54.4 +-30%");
  c.expect(within(med["aoa-constrained"], 0.409, 0.30), "AoA " + cm(med["aoa-constrained"]) + " vs 40.9 +-30%");
  c.expect(within(med["fused-constrained"], 0.233, 0.30), "fused " + cm(med["fused-constrained"]) + " vs 23.3 +-30%");
  c.expect(within(med["xrloc"], 0.033, 0.30), "XRLoc " + cm(med["xrloc"]) + " vs 3.3 +-30%");
  c.expect(med["xrloc"] < med["fused-constrained"] && med["fused-constrained"] < med["aoa-constrained"] &&
               med["aoa-constrained"] < med["tdoa-constrained"],
           "ordering XRLoc < fused < AoA < TDoA");
  c.expect(wall <= 600.0, fmt::format("runtime {:.0f} s <= 600 s", wall));
  report(1, c, wall);
}

// 2. Noise sweep over sigma_theta x sigma_t, 500 trials per cell.
void criterion_2()
{
  const auto t0 = Clock::now();
  Check c;
  Scenario base = xrloc_scenario();
  base.trials = 500;
  const std::vector<double> thetas{ 0.5, 1, 2, 3, 4, 5, 6, 8, 10 };
  const std::vector<double> times{ 3, 50, 150, 250, 500 };
  const ResultTable t = run_noise_sweep(base, thetas, times);
  const auto th = t.column("sigma_theta_deg"), ts = t.column("sigma_t_ps"), med = t.column("median_err_m");
  auto cell = [&](double theta, double time) {
    for (std::size_t k = 0; k < med.size(); ++k)
      if (th[k] == theta && ts[k] == time) return med[k];
    throw std::runtime_error("missing sweep cell");
  };

  double lo = 1e9, hi = 0.0;
  for (double time : { 3.0, 50.0, 150.0, 250.0 }) {
    lo = std::min(lo, cell(5.0, time));
    hi = std::max(hi, cell(5.0, time));
  }
  c.expect(hi / lo < 2.0, fmt::format("sigma_theta=5: max/min over 3..250 ps {:.2f}x < 2x", hi / lo));
  const double jump = cell(5.0, 500.0) / cell(5.0, 150.0);
  c.expect(jump >= 3.0, fmt::format("500 ps / 150 ps {:.2f}x >= 3x ({} vs {})", jump, cm(cell(5.0, 500.0)),
                                    cm(cell(5.0, 150.0))));
  int violations = 0;
  std::string first;
  for (double time : times) {
    for (std::size_t i = 1; i < thetas.size(); ++i) {
      if (cell(thetas[i], time) < cell(thetas[i - 1], time)) {
        ++violations;
        if (first.empty()) first = fmt::format(" first at {} ps, {} deg", time, thetas[i]);
      }
    }
  }
  c.expect(violations == 0, fmt::format("monotone in sigma_theta: {} violations{}", violations, first));
  report(2, c, seconds_since(t0));
}

// PF localization errors at `truth`, 5 packets per trial, noise from derive(seed, {i}).
std::vector<double> pf_errors(Modality modality, const Position& truth, int trials, std::uint64_t seed)
{
  Scenario s = xrloc_scenario();
  s.estimator = EstimatorKind::XrlocPf;
  s.modality = modality;
  s.seed = seed;
  const TrialRunner runner(s);
  std::vector<double> out;
  for (int i = 0; i < trials; ++i) {
    RandomStream rng = RandomStream::derive(seed, { static_cast<std::uint64_t>(i) });
    out.push_back(runner.run(truth, rng).error);
  }
  return out;
}

// 3. Ambiguity resolution.
void criterion_3()
{
  const auto t0 = Clock::now();
  Check c;
  AmbiguityConfig config;
  config.counts = { 6 };
  const auto r = run_ambiguity_maps(config);
  const auto& sum = r.summary;
  const std::size_t mod = sum.column_index("modality");
  const auto minima = sum.column("minima"), sep = sum.column("max_separation_m");
  for (std::size_t k = 0; k < sum.rows.size(); ++k) {
    const auto name = std::get<std::string>(sum.rows[k][mod]);
    if (name == "pdoa-only") {
      c.expect(minima[k] >= 2 && sep[k] > 0.10,
               fmt::format("PDoA-only minima {} (max separation {}) >= 2 and > 10 cm", minima[k], cm(sep[k])));
    } else if (name == "fused") {
      c.expect(minima[k] == 1, fmt::format("fused minima {} == 1", minima[k]));
    }
  }

  // Same setup as the surfaces: tag at the configured center position.
  const auto fused = pf_errors(Modality::Fused, config.tag, 100, 31);
  const auto fused_ok = std::count_if(fused.begin(), fused.end(), [](double e) { return e <= 0.05; });
  c.expect(fused_ok >= 95, fmt::format("fused PF within 5 cm: {}/100 >= 95", fused_ok));
  const auto pdoa = pf_errors(Modality::PdoaOnly, config.tag, 100, 31);
  const auto pdoa_bad = std::count_if(pdoa.begin(), pdoa.end(), [](double e) { return e > 0.10; });
  c.expect(pdoa_bad >= 30, fmt::format("PDoA-only PF beyond 10 cm: {}/100 >= 30", pdoa_bad));
  report(3, c, seconds_since(t0));
}

// 4. PF after 5 updates vs the 1 cm batch grid search over the same 5 packets.
void criterion_4()
{
  const auto t0 = Clock::now();
  Check c;
  const Scenario s = xrloc_scenario();
  const Environment env = s.environment();
  const AnchorArray array = s.array();
  const LikelihoodSpec spec = s.likelihood();
  const auto pairs = s.measurement_pairs();
  const LikelihoodGrid grid(env, 0.01, array, spec.pairing, spec.use_calibration);

  std::vector<double> gaps;
  bool weights_ok = true, deterministic = true;
  for (std::uint64_t i = 0; i < 50; ++i) {
    RandomStream rng = RandomStream::derive(404, { i });
    const Position truth = random_position(env, rng);
    std::vector<MeasurementSet> packets;
    for (int u = 0; u < 5; ++u) packets.push_back(sample_measurements(truth, array, pairs, s.noise.model(), rng));

    // Oracle: exhaustive argmin of the summed score, independent of the filter.
    std::vector<double> total(grid.size(), 0.0);
    for (const auto& m : packets) {
      const auto sc = grid.score_all(m, spec);
      for (std::size_t k = 0; k < sc.size(); ++k) total[k] += sc[k];
    }
    const Position batch = grid.point(static_cast<std::size_t>(std::min_element(total.begin(), total.end()) - total.begin()));

    auto run_pf = [&] {
      ParticleFilter pf(env, s.pf, RandomStream::derive(404, { kTrackStream, i }));
      for (const auto& m : packets) {
        pf.update(m, array, spec);
        const double w = std::accumulate(pf.weights().begin(), pf.weights().end(), 0.0);
        weights_ok = weights_ok && std::abs(w - 1.0) < 1e-9 && pf.size() >= pf.min_count() &&
                     pf.size() <= pf.initial_count();
      }
      return pf.estimate();
    };
    const Position a = run_pf(), b = run_pf();
    deterministic = deterministic && a == b;
    gaps.push_back(distance(a, batch));
  }
  const double med = median_of(gaps);
  c.expect(med <= 0.02, "median |PF - grid| " + cm(med) + " <= 2 cm");
  c.expect(weights_ok, "weights sum to 1 and count bounds hold");
  c.expect(deterministic, "bit-identical reruns");
  report(4, c, seconds_since(t0));
}

// 5. Calibration round trip and downstream improvement.
void criterion_5()
{
  const auto t0 = Clock::now();
  Check c;
  const AnchorArray array = make_ula(6, 1.0, { 1.5, 0.0 });
  const std::vector<Position> points{ { 1.5, 0.4 }, { 1.5, 1.5 }, { 1.5, 2.8 } };
  RandomStream rng(55);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const HardwareBias truth = BiasRanges{}.draw(array.size(), rng);
    std::vector<CalibrationSample> samples;
    for (const auto& p : points) {
      CalibrationSample cs{ p, {} };
      for (std::size_t k = 0; k < array.size(); ++k) {
        const double d = distance(p, array[k]);
        cs.phase.push_back(kTwoPi * d / array.wavelength() - truth[k].alpha - truth[k].beta * std::pow(d, truth[k].gamma));
      }
      samples.push_back(cs);
    }
    const auto fits = fit_three_point(samples, array);
    for (std::size_t k = 0; k < array.size(); ++k) {
      for (double d = 0.35; d < 4.2; d += 0.1) {
        const double oracle = truth[k].alpha + truth[k].beta * std::pow(d, truth[k].gamma);
        worst = std::max(worst, std::abs(phase_bias(d, fits[k].params) - oracle));
      }
    }
  }
  c.expect(worst < 1e-6, fmt::format("noiseless round trip max curve error {:.2e} rad < 1e-6", worst));

  Scenario s = xrloc_scenario();
  s.trials = 200;
  s.bias = BiasRanges{};
  const ResultTable t = run_calibration_demo(s);
  const double cal = std::stod(t.meta("calibrated_median_err_m"));
  const double uncal = std::stod(t.meta("uncalibrated_median_err_m"));
  c.expect(cal <= uncal / 1.5, fmt::format("calibrated {} <= uncalibrated {} / 1.5 (ratio {:.1f}x)", cm(cal), cm(uncal),
                                           uncal / cal));
  report(5, c, seconds_since(t0));
}

// 6. Microbenchmarks.
void criterion_6()
{
  const auto t0 = Clock::now();
  Check c;
  Scenario base = xrloc_scenario();
  base.trials = 500;

  const auto ap = run_microbench(base, MicrobenchAxis::Aperture);
  const auto ap_med = ap.column("median_err_m");  // 1.0, 0.8, 0.6, 0.4
  bool monotone = true;
  for (std::size_t k = 1; k < ap_med.size(); ++k) monotone = monotone && ap_med[k] >= ap_med[k - 1];
  c.expect(monotone, fmt::format("aperture medians 1.0..0.4 m: {}, {}, {}, {} non-increasing in aperture", cm(ap_med[0]),
                                 cm(ap_med[1]), cm(ap_med[2]), cm(ap_med[3])));
  c.expect(ap_med[3] >= 3.0 * ap_med[0], fmt::format("0.4 m / 1.0 m {:.2f}x >= 3x", ap_med[3] / ap_med[0]));

  const auto an = run_microbench(base, MicrobenchAxis::Antennas);
  const auto p90 = an.column("p90_err_m");  // 6, 5, 4
  c.expect(p90[2] >= 2.0 * p90[0], fmt::format("4-antenna p90 / 6-antenna p90 {:.2f}x >= 2x ({} vs {})", p90[2] / p90[0],
                                               cm(p90[2]), cm(p90[0])));

  const auto mo = run_microbench(base, MicrobenchAxis::Modality);
  const auto mo_med = mo.column("median_err_m");  // tdoa, pdoa, fused
  c.expect(mo_med[1] >= 5.0 * mo_med[2], fmt::format("PDoA-only / fused {:.2f}x >= 5x ({} vs {})", mo_med[1] / mo_med[2],
                                                      cm(mo_med[1]), cm(mo_med[2])));

  const auto pa = run_microbench(base, MicrobenchAxis::Pattern);
  const auto pa_med = pa.column("median_err_m");  // ula, coprime
  c.expect(pa_med[1] <= 2.0 * pa_med[0] && pa_med[0] <= 2.0 * pa_med[1],
           fmt::format("co-prime {} within 2x of ULA {}", cm(pa_med[1]), cm(pa_med[0])));
  report(6, c, seconds_since(t0));
}

// 7. MAC at 10 tags x 100 Hz x 1800 s.
void criterion_7()
{
  const auto t0 = Clock::now();
  Check c;
  MacConfig tdma;
  RandomStream r1(7);
  const MacReport a = run_mac(tdma, r1);
  MacConfig aloha;
  aloha.mode = MacMode::Unslotted;
  RandomStream r2(7);
  const MacReport b = run_mac(aloha, r2);
  const double wall = seconds_since(t0);

  c.expect(a.overall_success() >= 0.995, fmt::format("TDMA success {:.5f} >= 0.995", a.overall_success()));
  c.expect(b.mean_ratio() >= 0.55 && b.mean_ratio() <= 0.90,
           fmt::format("unslotted mean {:.3f} in [0.55, 0.90]", b.mean_ratio()));
  c.expect(b.min_ratio() < b.max_ratio() - 0.05,
           fmt::format("unslotted min {:.3f} < max {:.3f} - 0.05", b.min_ratio(), b.max_ratio()));
  bool conserved = true;
  double worst_slot = 0.0;
  for (const auto* r : { &a, &b }) {
    for (const auto& t : r->tags) {
      conserved = conserved && t.sent == t.delivered + t.collided;
      if (r == &a) worst_slot = std::max(worst_slot, t.max_slot_error);
    }
  }
  c.expect(conserved, "sent = delivered + collided for every tag");
  c.expect(worst_slot <= 500e-6, fmt::format("max slot error {:.1f} us <= 500 us", 1e6 * worst_slot));
  c.expect(wall <= 120.0, fmt::format("runtime {:.1f} s <= 120 s", wall));
  report(7, c, wall);
}

std::string read_all(const std::string& path)
{
  try {
    return read_text_file(path);
  } catch (const std::exception&) {
    return "<missing>";
  }
}

// Drops only the timing metadata lines.
std::string without_timing(const std::string& csv)
{
  std::istringstream in(csv);
  std::string line, out;
  while (std::getline(in, line)) {
    if (line.rfind("# wall_time_s", 0) == 0 || line.rfind("# pf_latency", 0) == 0) continue;
    out += line + "\n";
  }
  return out;
}

// 8. Every subcommand rerun with the same seed and config gives identical CSVs.
void criterion_8()
{
  const auto t0 = Clock::now();
  Check c;
  const std::string cli = UWBLOC_CLI;
  const auto dir = std::filesystem::temp_directory_path() / "uwbloc_acceptance";
  std::filesystem::create_directories(dir);
  const std::vector<std::pair<std::string, std::string>> runs{
    { "heatmap", "heatmap --seed 3 --trials 3 --grid-res 0.5" },
    { "sweep-noise", "sweep-noise --seed 3 --trials 20" },
    { "microbench", "microbench --axis antennas --seed 3 --trials 20" },
    { "track", "track --trajectory figure-eight --seed 3" },
    { "ambiguity", "ambiguity --seed 3 --grid-res 0.1" },
    { "mac", "mac --mode unslotted --duration 30 --seed 3" },
    { "calibrate-demo", "calibrate-demo --seed 3 --trials 20" },
  };
  for (const auto& [name, args] : runs) {
    std::array<std::string, 2> outputs;
    bool ran = true;
    for (int k = 0; k < 2; ++k) {
      const std::string base = (dir / fmt::format("{}_{}", name, k)).string();
      std::string cmd = fmt::format("\"{}\" {} --out \"{}.csv\"", cli, args, base);
      if (name == "ambiguity") cmd += fmt::format(" --summary-out \"{}_summary.csv\"", base);
      if (name == "mac") cmd += fmt::format(" --timeseries-out \"{}_series.csv\"", base);
      ran = ran && std::system(cmd.c_str()) == 0;
      outputs[k] = without_timing(read_all(base + ".csv"));
      if (name == "ambiguity") outputs[k] += without_timing(read_all(base + "_summary.csv"));
      if (name == "mac") outputs[k] += without_timing(read_all(base + "_series.csv"));
    }
    c.expect(ran && outputs[0] == outputs[1] && outputs[0].size() > 10, name);
  }
  std::filesystem::remove_all(dir);
  report(8, c, seconds_since(t0));
}

}  // namespace

int main(int argc, char** argv)
{
  std::vector<std::function<void()>> all{ criterion_1, criterion_2, criterion_3, criterion_4,
                                          criterion_5, criterion_6, criterion_7, criterion_8 };
  std::vector<int> pick;
  for (int i = 1; i < argc; ++i) pick.push_back(std::atoi(argv[i]));
  for (int n = 1; n <= static_cast<int>(all.size()); ++n) {
    if (!pick.empty() && std::find(pick.begin(), pick.end(), n) == pick.end()) continue;
    try {
      all[static_cast<std::size_t>(n - 1)]();
    } catch (const std::exception& e) {
      std::printf("[FAIL] criterion %d: exception: %s\n", n, e.what());
      ++failures;
    }
  }
  return failures == 0 ? 0 : 1;
}
