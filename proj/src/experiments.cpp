#include "uwbloc/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <stdexcept>

#include <boost/math/distributions/chi_squared.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "uwbloc/baselines.hpp"
#include "uwbloc/particle_filter.hpp"

namespace uwbloc {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::optional<HardwareBias> scenario_bias(const Scenario& s, std::size_t anchors)
{
  if (!s.bias) return std::nullopt;
  RandomStream rng = RandomStream::derive(s.seed, { kBiasStream });
  return s.bias->draw(anchors, rng);
}

struct ErrorStats
{
  double median;
  double p90;
  double mean;
};

ErrorStats stats_of(const std::vector<double>& errors)
{
  double sum = 0.0;
  for (double e : errors) sum += e;
  return { median_of(errors), quantile_of(errors, 0.9),
           errors.empty() ? 0.0 : sum / static_cast<double>(errors.size()) };
}

// Errors of trial i at a uniform position drawn from derive(seed, {i}).
std::vector<double> uniform_trials(const TrialRunner& runner, std::uint64_t seed, int trials)
{
  const Environment env = runner.scenario().environment();
  std::vector<double> errors(static_cast<std::size_t>(trials));
#pragma omp parallel for schedule(dynamic, 8)
  for (int i = 0; i < trials; ++i) {
    RandomStream rng = RandomStream::derive(seed, { static_cast<std::uint64_t>(i) });
    const Position truth = random_position(env, rng);
    errors[static_cast<std::size_t>(i)] = runner.run(truth, rng).error;
  }
  return errors;
}

}  // namespace

Position random_position(const Environment& env, RandomStream& rng)
{
  const double x = rng.uniform(0.0, env.width());
  const double y = rng.uniform(0.0, env.height());
  return { x, y };
}

TrialRunner::TrialRunner(const Scenario& scenario, std::optional<std::vector<CalibrationParams>> estimator_calibration)
    : scenario_(scenario),
      env_(scenario.environment()),
      hardware_(scenario.array()),
      estimator_(hardware_),
      pairs_(scenario.measurement_pairs()),
      spec_(scenario.likelihood())
{
  scenario_.validate();
  bias_ = scenario_bias(scenario_, hardware_.size());
  if (estimator_calibration) {
    estimator_ = hardware_.with_calibration(*estimator_calibration);
  } else if (bias_ && scenario_.use_calibration) {
    estimator_ = hardware_.with_calibration(*bias_);
  }
  sample_options_.with_twr = scenario_.estimator == EstimatorKind::Twr || scenario_.estimator == EstimatorKind::Fused;
  sample_options_.aoa_pairs = scenario_.aoa_pairs;
  sample_options_.hardware_bias = bias_;
  if (scenario_.estimator == EstimatorKind::Twr || scenario_.estimator == EstimatorKind::Aoa) pairs_.clear();
  if (scenario_.estimator == EstimatorKind::XrlocGrid) {
    grid_.emplace(env_, scenario_.search_res, estimator_, scenario_.pairing, scenario_.use_calibration);
  }
}

MeasurementSet TrialRunner::sample(const Position& truth, RandomStream& rng) const
{
  return sample_measurements(truth, hardware_, pairs_, scenario_.noise.model(), rng, sample_options_);
}

TrialRunner::Outcome TrialRunner::run(const Position& truth, RandomStream& rng) const
{
  Outcome out;
  switch (scenario_.estimator) {
  case EstimatorKind::Twr:
  case EstimatorKind::Tdoa:
  case EstimatorKind::Aoa:
  case EstimatorKind::Fused: {
    const MeasurementSet meas = sample(truth, rng);
    const BaselineKind kind = scenario_.estimator == EstimatorKind::Twr    ? BaselineKind::Twr
                              : scenario_.estimator == EstimatorKind::Tdoa ? BaselineKind::Tdoa
                              : scenario_.estimator == EstimatorKind::Aoa  ? BaselineKind::Aoa
                                                                           : BaselineKind::Fused;
    try {
      const LocateResult r = locate_baseline(kind, meas, estimator_, env_);
      out.estimate = r.position;
      out.flagged = r.flagged;
    } catch (const std::invalid_argument&) {
      // Degenerate draws (e.g. parallel bearings) count as a failed trial at the room center.
      out.estimate = env_.center();
      out.flagged = true;
    }
    break;
  }
  case EstimatorKind::XrlocGrid: {
    const MeasurementSet meas = sample(truth, rng);
    out.estimate = scenario_.refine ? grid_refined_locate(*grid_, meas, spec_) : grid_->point(grid_->argmin(meas, spec_));
    break;
  }
  case EstimatorKind::XrlocPf: {
    ParticleFilter pf(env_, scenario_.pf, RandomStream(rng.engine()()));
    for (int u = 0; u < scenario_.pf_updates; ++u) out.estimate = pf.update(sample(truth, rng), estimator_, spec_);
    out.flagged = pf.reinitializations() > 0;
    break;
  }
  }
  out.error = distance(out.estimate, truth);
  return out;
}

void stamp_metadata(ResultTable& table, const nlohmann::json& config, std::uint64_t seed, double wall_seconds)
{
  table.set_meta("seed", std::to_string(seed));
  table.set_meta("config_digest", fmt::format("{:016x}", fnv1a64(config.dump())));
  table.set_meta("config", config.dump());
  table.set_meta("wall_time_s", wall_seconds);
}

ResultTable run_heatmap(const Scenario& scenario)
{
  const auto t0 = Clock::now();
  const TrialRunner runner(scenario);
  const Environment env = scenario.environment();
  const GridShape shape = grid_shape(env, scenario.grid_res);
  const std::size_t points = shape.size();
  const auto trials = static_cast<std::size_t>(scenario.trials);

  std::vector<double> errors(points * trials);
  std::vector<std::int64_t> flagged(points, 0);
#pragma omp parallel for schedule(dynamic, 4)
  for (std::int64_t k = 0; k < static_cast<std::int64_t>(points); ++k) {
    const auto ku = static_cast<std::size_t>(k);
    const Position truth = grid_point(env, shape, ku);
    for (std::size_t t = 0; t < trials; ++t) {
      RandomStream rng = RandomStream::derive(scenario.seed, { ku, t });
      const auto o = runner.run(truth, rng);
      errors[ku * trials + t] = o.error;
      flagged[ku] += o.flagged ? 1 : 0;
    }
  }

  ResultTable table;
  table.columns = { "x", "y", "median_err_m", "p90_err_m", "trials", "diverged" };
  for (std::size_t k = 0; k < points; ++k) {
    const std::vector<double> e(errors.begin() + static_cast<std::ptrdiff_t>(k * trials),
                                errors.begin() + static_cast<std::ptrdiff_t>((k + 1) * trials));
    const Position p = grid_point(env, shape, k);
    table.add_row({ p.x, p.y, median_of(e), quantile_of(e, 0.9), static_cast<std::int64_t>(trials), flagged[k] });
  }
  const ErrorStats all = stats_of(errors);
  table.set_meta("scenario", scenario.name);
  table.set_meta("global_median_err_m", all.median);
  table.set_meta("global_p90_err_m", all.p90);
  stamp_metadata(table, scenario.to_json(), scenario.seed, seconds_since(t0));
  return table;
}

ResultTable run_noise_sweep(const Scenario& base, const std::vector<double>& sigma_theta_deg,
                            const std::vector<double>& sigma_t_ps)
{
  const auto t0 = Clock::now();
  ResultTable table;
  table.columns = { "sigma_theta_deg", "sigma_t_ps", "median_err_m", "p90_err_m", "trials" };
  for (double st : sigma_t_ps) {
    for (double sth : sigma_theta_deg) {
      Scenario s = base;
      s.noise.sigma_t_ps = st;
      s.noise.sigma_theta_deg = sth;
      const TrialRunner runner(s);
      const ErrorStats e = stats_of(uniform_trials(runner, base.seed, base.trials));
      table.add_row({ sth, st, e.median, e.p90, static_cast<std::int64_t>(base.trials) });
    }
  }
  nlohmann::json config = base.to_json();
  config["sigma_theta_deg_list"] = sigma_theta_deg;
  config["sigma_t_ps_list"] = sigma_t_ps;
  stamp_metadata(table, config, base.seed, seconds_since(t0));
  return table;
}

std::string to_string(MicrobenchAxis axis)
{
  switch (axis) {
  case MicrobenchAxis::Modality: return "modality";
  case MicrobenchAxis::Aperture: return "aperture";
  case MicrobenchAxis::Antennas: return "antennas";
  case MicrobenchAxis::Pattern: return "pattern";
  case MicrobenchAxis::Calibration: return "calibration";
  }
  return "unknown";
}

MicrobenchAxis parse_microbench_axis(const std::string& name)
{
  for (auto a : { MicrobenchAxis::Modality, MicrobenchAxis::Aperture, MicrobenchAxis::Antennas,
                  MicrobenchAxis::Pattern, MicrobenchAxis::Calibration }) {
    if (to_string(a) == name) return a;
  }
  throw std::invalid_argument("unknown microbenchmark axis: " + name);
}

ResultTable run_microbench(const Scenario& base, MicrobenchAxis axis)
{
  const auto t0 = Clock::now();
  ResultTable table;
  table.columns = { "axis", "value", "median_err_m", "p90_err_m", "mean_err_m", "trials" };
  auto add = [&](const std::string& value, const TrialRunner& runner) {
    const ErrorStats e = stats_of(uniform_trials(runner, base.seed, base.trials));
    table.add_row({ to_string(axis), value, e.median, e.p90, e.mean, static_cast<std::int64_t>(base.trials) });
  };

  switch (axis) {
  case MicrobenchAxis::Modality:
    for (Modality m : { Modality::TdoaOnly, Modality::PdoaOnly, Modality::Fused }) {
      Scenario s = base;
      s.modality = m;
      add(to_string(m), TrialRunner(s));
    }
    break;
  case MicrobenchAxis::Aperture:
    for (double a : { 1.0, 0.8, 0.6, 0.4 }) {
      Scenario s = base;
      s.layout.aperture = a;
      add(format_number(a), TrialRunner(s));
    }
    break;
  case MicrobenchAxis::Antennas:
    for (int n : { 6, 5, 4 }) {
      Scenario s = base;
      s.layout.count = n;
      add(std::to_string(n), TrialRunner(s));
    }
    break;
  case MicrobenchAxis::Pattern:
    for (LayoutKind k : { LayoutKind::Ula, LayoutKind::Coprime }) {
      Scenario s = base;
      s.layout.kind = k;
      add(to_string(k), TrialRunner(s));
    }
    break;
  case MicrobenchAxis::Calibration: {
    Scenario s = base;
    if (!s.bias) s.bias = BiasRanges{};
    const TrialRunner probe(s);
    RandomStream cal_rng = RandomStream::derive(s.seed, { kCalibrationStream });
    const auto fits = simulate_calibration(probe.hardware_array(), *probe.injected_bias(), CalibrationProtocol{}, cal_rng);
    s.use_calibration = true;
    add("on", TrialRunner(s, fitted_params(fits)));
    s.use_calibration = false;
    add("off", TrialRunner(s));
    break;
  }
  }
  nlohmann::json config = base.to_json();
  config["axis"] = to_string(axis);
  stamp_metadata(table, config, base.seed, seconds_since(t0));
  return table;
}

std::vector<AnchorFit> simulate_calibration(const AnchorArray& hardware, const HardwareBias& bias,
                                            const CalibrationProtocol& protocol, RandomStream& rng)
{
  if (bias.size() != hardware.size()) throw std::invalid_argument("one bias entry per anchor is required");
  if (protocol.packets < 1) throw std::invalid_argument("calibration needs at least one packet per point");
  const double k = kTwoPi / hardware.wavelength();
  const double sigma = deg2rad(protocol.sigma_phase_deg);
  std::vector<CalibrationSample> samples;
  for (const Position& p : protocol.points) {
    CalibrationSample s{ p, std::vector<double>(hardware.size(), 0.0) };
    for (std::size_t a = 0; a < hardware.size(); ++a) {
      const double d = distance(p, hardware[a]);
      double noise = 0.0;
      for (int n = 0; n < protocol.packets; ++n) noise += rng.normal(sigma);
      s.phase[a] = k * d - phase_bias(d, bias[a]) + noise / protocol.packets;
    }
    samples.push_back(std::move(s));
  }
  return fit_three_point(samples, hardware);
}

ResultTable run_calibration_demo(const Scenario& scenario, const CalibrationProtocol& protocol)
{
  const auto t0 = Clock::now();
  Scenario s = scenario;
  if (!s.bias) s.bias = BiasRanges{};
  const TrialRunner probe(s);
  const HardwareBias& truth = *probe.injected_bias();
  RandomStream cal_rng = RandomStream::derive(s.seed, { kCalibrationStream });
  const auto fits = simulate_calibration(probe.hardware_array(), truth, protocol, cal_rng);

  ResultTable table;
  table.columns = { "anchor",    "true_alpha", "true_beta",   "true_gamma",        "fit_alpha",
                    "fit_beta",  "fit_gamma",  "fit_rms_rad", "max_curve_err_rad" };
  for (std::size_t a = 0; a < fits.size(); ++a) {
    double worst = 0.0;
    for (int i = 0; i <= 100; ++i) {
      const double d = 0.1 + 4.1 * i / 100.0;
      worst = std::max(worst, std::abs(phase_bias(d, fits[a].params) - phase_bias(d, truth[a])));
    }
    const auto& t = truth[a];
    const auto& f = fits[a].params;
    table.add_row({ static_cast<std::int64_t>(a), t.alpha, t.beta, t.gamma, f.alpha, f.beta, f.gamma,
                    fits[a].rms_residual, worst });
  }

  s.use_calibration = true;
  const double calibrated = median_of(uniform_trials(TrialRunner(s, fitted_params(fits)), s.seed, s.trials));
  s.use_calibration = false;
  const double uncalibrated = median_of(uniform_trials(TrialRunner(s), s.seed, s.trials));
  table.set_meta("calibrated_median_err_m", calibrated);
  table.set_meta("uncalibrated_median_err_m", uncalibrated);
  table.set_meta("improvement_ratio", uncalibrated / calibrated);
  nlohmann::json config = scenario.to_json();
  config["calibration_packets"] = protocol.packets;
  config["calibration_sigma_phase_deg"] = protocol.sigma_phase_deg;
  stamp_metadata(table, config, scenario.seed, seconds_since(t0));
  return table;
}

ResultTable run_tracking(const Scenario& scenario)
{
  const auto t0 = Clock::now();
  const TrajectorySpec traj = scenario.trajectory.value_or(TrajectorySpec{});
  const auto path = traj.build();
  const TrialRunner runner(scenario);
  const LikelihoodSpec spec = scenario.likelihood();
  ParticleFilter pf(scenario.environment(), scenario.pf, RandomStream::derive(scenario.seed, { kTrackStream }));

  ResultTable table;
  table.columns = { "t", "true_x", "true_y", "est_x", "est_y", "err_m", "spread_m", "particles" };
  std::vector<double> latency_ms;
  for (std::size_t k = 0; k < path.size(); ++k) {
    RandomStream rng = RandomStream::derive(scenario.seed, { k });
    const MeasurementSet meas = runner.sample(path[k].p, rng);
    const auto u0 = Clock::now();
    const Position est = pf.update(meas, runner.estimator_array(), spec);
    latency_ms.push_back(1e3 * seconds_since(u0));
    table.add_row({ path[k].t, path[k].p.x, path[k].p.y, est.x, est.y, distance(est, path[k].p), pf.spread(),
                    static_cast<std::int64_t>(pf.size()) });
  }
  // Cold-start latency includes the tempered start and is reported apart from steady state.
  table.set_meta("pf_latency_first_ms", latency_ms.front());
  if (latency_ms.size() > 1) {
    const std::vector<double> steady(latency_ms.begin() + 1, latency_ms.end());
    table.set_meta("pf_latency_median_ms", median_of(steady));
    table.set_meta("pf_latency_max_ms", *std::max_element(steady.begin(), steady.end()));
  }
  table.set_meta("reinitializations", static_cast<double>(pf.reinitializations()));
  stamp_metadata(table, scenario.to_json(), scenario.seed, seconds_since(t0));
  return table;
}

nlohmann::json AmbiguityConfig::to_json() const
{
  return { { "apertures", apertures },
           { "counts", counts },
           { "tag", { tag.x, tag.y } },
           { "array_center", { array_center.x, array_center.y } },
           { "room", { room_width, room_height } },
           { "resolution", resolution },
           { "analysis_resolution", analysis_resolution },
           { "merge_distance", merge_distance },
           { "quantile", quantile },
           { "noise", { { "sigma_t_ps", noise.sigma_t_ps }, { "sigma_theta_deg", noise.sigma_theta_deg } } },
           { "seed", seed } };
}

AmbiguityConfig AmbiguityConfig::from_json(const nlohmann::json& j)
{
  AmbiguityConfig c;
  c.apertures = j.value("apertures", c.apertures);
  c.counts = j.value("counts", c.counts);
  auto pos = [&](const char* key, Position& p) {
    if (j.contains(key)) p = { j.at(key).at(0).get<double>(), j.at(key).at(1).get<double>() };
  };
  pos("tag", c.tag);
  pos("array_center", c.array_center);
  if (j.contains("room")) {
    c.room_width = j.at("room").at(0).get<double>();
    c.room_height = j.at("room").at(1).get<double>();
  }
  c.resolution = j.value("resolution", c.resolution);
  c.analysis_resolution = j.value("analysis_resolution", c.analysis_resolution);
  c.merge_distance = j.value("merge_distance", c.merge_distance);
  c.quantile = j.value("quantile", c.quantile);
  if (j.contains("noise")) {
    c.noise.sigma_t_ps = j.at("noise").value("sigma_t_ps", c.noise.sigma_t_ps);
    c.noise.sigma_theta_deg = j.at("noise").value("sigma_theta_deg", c.noise.sigma_theta_deg);
  }
  c.seed = j.value("seed", c.seed);
  if (c.apertures.empty() || c.counts.empty()) throw std::invalid_argument("ambiguity config needs apertures and counts");
  if (!(c.resolution > 0.0) || !(c.analysis_resolution > 0.0)) throw std::invalid_argument("resolutions must be positive");
  if (!(c.quantile > 0.0 && c.quantile < 1.0)) throw std::invalid_argument("quantile must lie in (0, 1)");
  return c;
}

std::vector<Minimum> sub_threshold_minima(const std::vector<double>& score, const Environment& env,
                                          const GridShape& shape, double threshold, double merge_distance)
{
  if (score.size() != shape.size()) throw std::invalid_argument("score grid does not match its shape");
  std::vector<int> label(score.size(), -1);
  std::vector<Minimum> regions;
  std::vector<std::size_t> stack;
  for (std::size_t seed = 0; seed < score.size(); ++seed) {
    if (label[seed] >= 0 || !(score[seed] < threshold)) continue;
    const int id = static_cast<int>(regions.size());
    std::size_t best = seed;
    label[seed] = id;
    stack.push_back(seed);
    while (!stack.empty()) {
      const std::size_t c = stack.back();
      stack.pop_back();
      if (score[c] < score[best]) best = c;
      const auto cx = static_cast<std::int64_t>(c % shape.nx), cy = static_cast<std::int64_t>(c / shape.nx);
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        for (std::int64_t dx = -1; dx <= 1; ++dx) {
          const std::int64_t x = cx + dx, y = cy + dy;
          if (x < 0 || y < 0 || x >= static_cast<std::int64_t>(shape.nx) || y >= static_cast<std::int64_t>(shape.ny)) continue;
          const auto n = static_cast<std::size_t>(y) * shape.nx + static_cast<std::size_t>(x);
          if (label[n] < 0 && score[n] < threshold) {
            label[n] = id;
            stack.push_back(n);
          }
        }
      }
    }
    regions.push_back({ grid_point(env, shape, best), score[best] });
  }
  std::sort(regions.begin(), regions.end(), [](const Minimum& a, const Minimum& b) { return a.score < b.score; });
  std::vector<Minimum> kept;
  for (const auto& r : regions) {
    const bool near = std::any_of(kept.begin(), kept.end(),
                                  [&](const Minimum& k) { return distance(k.position, r.position) < merge_distance; });
    if (!near) kept.push_back(r);
  }
  return kept;
}

AmbiguityResult run_ambiguity_maps(const AmbiguityConfig& config)
{
  const auto t0 = Clock::now();
  const Environment env(config.room_width, config.room_height);
  AmbiguityResult out;
  out.surfaces.columns = { "aperture_m", "n_antennas", "x", "y", "pdoa_nll", "tdoa_nll", "fused_nll" };
  out.summary.columns = { "aperture_m", "n_antennas", "modality", "threshold", "minima", "max_separation_m",
                          "truth_score", "truth_region_found" };
  const std::pair<Modality, const char*> modalities[] = {
    { Modality::PdoaOnly, "pdoa-only" }, { Modality::TdoaOnly, "tdoa-only" }, { Modality::Fused, "fused" }
  };

  for (std::size_t ai = 0; ai < config.apertures.size(); ++ai) {
    for (std::size_t ni = 0; ni < config.counts.size(); ++ni) {
      const double aperture = config.apertures[ai];
      const int n = config.counts[ni];
      const AnchorArray array = make_ula(n, aperture, config.array_center);
      const auto pairs = make_pairs(PairingScheme::Reference, array.size());
      RandomStream rng = RandomStream::derive(config.seed, { ai, ni });
      const MeasurementSet meas = sample_measurements(config.tag, array, pairs, config.noise.model(), rng);

      LikelihoodSpec base;
      base.sigma_t = config.noise.model().sigma_t;
      base.sigma_theta = config.noise.model().sigma_theta;
      base.use_calibration = false;
      std::vector<LikelihoodSpec> specs;
      for (const auto& [m, _] : modalities) {
        LikelihoodSpec s = base;
        s.modality = m;
        specs.push_back(s);
      }

      const GridShape fine = grid_shape(env, config.analysis_resolution);
      for (std::size_t mi = 0; mi < specs.size(); ++mi) {
        const LikelihoodEvaluator nll(meas, array, specs[mi]);
        std::vector<double> score(fine.size());
#pragma omp parallel for schedule(static)
        for (std::int64_t k = 0; k < static_cast<std::int64_t>(fine.size()); ++k) {
          score[static_cast<std::size_t>(k)] = nll(grid_point(env, fine, static_cast<std::size_t>(k)));
        }
        const double threshold = boost::math::quantile(
            boost::math::chi_squared(static_cast<double>(nll.dimension())), config.quantile);
        const auto minima = sub_threshold_minima(score, env, fine, threshold, config.merge_distance);
        double sep = 0.0;
        bool truth_found = false;
        for (const auto& a : minima) {
          truth_found = truth_found || distance(a.position, config.tag) < config.merge_distance;
          for (const auto& b : minima) sep = std::max(sep, distance(a.position, b.position));
        }
        out.summary.add_row({ aperture, static_cast<std::int64_t>(n), std::string(modalities[mi].second), threshold,
                              static_cast<std::int64_t>(minima.size()), sep, nll(config.tag),
                              static_cast<std::int64_t>(truth_found) });
      }

      const GridShape coarse = grid_shape(env, config.resolution);
      const LikelihoodEvaluator pd(meas, array, specs[0]), td(meas, array, specs[1]), fu(meas, array, specs[2]);
      for (std::size_t k = 0; k < coarse.size(); ++k) {
        const Position p = grid_point(env, coarse, k);
        out.surfaces.add_row({ aperture, static_cast<std::int64_t>(n), p.x, p.y, pd(p), td(p), fu(p) });
      }
    }
  }
  const double wall = seconds_since(t0);
  stamp_metadata(out.surfaces, config.to_json(), config.seed, wall);
  stamp_metadata(out.summary, config.to_json(), config.seed, wall);
  return out;
}

ResultTable mac_table(const MacReport& report)
{
  ResultTable t;
  t.columns = { "tag_id", "sent", "delivered", "ratio" };
  for (const auto& tag : report.tags) {
    t.add_row({ static_cast<std::int64_t>(tag.tag), static_cast<std::int64_t>(tag.sent),
                static_cast<std::int64_t>(tag.delivered), tag.ratio() });
  }
  t.set_meta("overall_success", report.overall_success());
  t.set_meta("mean_ratio", report.mean_ratio());
  t.set_meta("min_ratio", report.min_ratio());
  t.set_meta("max_ratio", report.max_ratio());
  t.set_meta("corrections", static_cast<double>(report.corrections.size()));
  t.set_meta("rejected", static_cast<double>(report.rejected.size()));
  return t;
}

ResultTable mac_timeseries_table(const MacReport& report)
{
  ResultTable t;
  t.columns = { "window_start_s", "tag_id", "ratio" };
  for (const auto& w : report.windows) t.add_row({ w.window_start, static_cast<std::int64_t>(w.tag), w.ratio() });
  return t;
}

}  // namespace uwbloc
