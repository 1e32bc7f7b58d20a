#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "uwbloc/calibration.hpp"
#include "uwbloc/estimator.hpp"
#include "uwbloc/mac_sim.hpp"
#include "uwbloc/result_table.hpp"
#include "uwbloc/scenario.hpp"

namespace uwbloc {

/// Stream-path tags, so that bias draws, calibration and trials never share a stream.
inline constexpr std::uint64_t kBiasStream = 0xb1a5;
inline constexpr std::uint64_t kCalibrationStream = 0xca1b;
inline constexpr std::uint64_t kTrackStream = 0x7ac4;

/// Localizes one synthetic packet at a time for a scenario. Built once, then shared read-only
/// across trials; each trial brings its own stream.
class TrialRunner
{
public:
  /// `estimator_calibration` overrides what the estimator believes about the hardware bias.
  /// By default it is the injected bias itself when the scenario calibrates, nothing otherwise.
  explicit TrialRunner(const Scenario& scenario,
                       std::optional<std::vector<CalibrationParams>> estimator_calibration = std::nullopt);

  struct Outcome
  {
    Position estimate;
    double error{ 0.0 };  // m
    bool flagged{ false };
  };

  /// Samples one measurement set at `truth` from `rng` and localizes it. XRLoc-PF consumes
  /// scenario.pf_updates packets.
  Outcome run(const Position& truth, RandomStream& rng) const;

  MeasurementSet sample(const Position& truth, RandomStream& rng) const;

  const Scenario& scenario() const { return scenario_; }
  const AnchorArray& hardware_array() const { return hardware_; }
  const AnchorArray& estimator_array() const { return estimator_; }
  const std::optional<HardwareBias>& injected_bias() const { return bias_; }

private:
  Scenario scenario_;
  Environment env_;
  AnchorArray hardware_;
  AnchorArray estimator_;
  std::optional<HardwareBias> bias_;
  std::vector<AnchorPair> pairs_;
  SampleOptions sample_options_;
  LikelihoodSpec spec_;
  std::optional<LikelihoodGrid> grid_;
};

/// Uniform position in the room drawn from `rng`.
Position random_position(const Environment& env, RandomStream& rng);

/// Per eval-grid point error statistics, row-major. Metadata carries the pooled median and p90.
/// Trial (k, t) uses RandomStream::derive(seed, {k, t}).
ResultTable run_heatmap(const Scenario& scenario);

/// Cross-product sweep over sigma_theta (deg) and sigma_t (ps). Trial i draws a uniform tag
/// position and its noise from derive(seed, {i}) in every cell (common random numbers).
ResultTable run_noise_sweep(const Scenario& base, const std::vector<double>& sigma_theta_deg,
                            const std::vector<double>& sigma_t_ps);

enum class MicrobenchAxis
{
  Modality,
  Aperture,
  Antennas,
  Pattern,
  Calibration,
};

std::string to_string(MicrobenchAxis axis);
MicrobenchAxis parse_microbench_axis(const std::string& name);

/// One row per axis value with median/p90/mean error over base.trials uniform positions.
ResultTable run_microbench(const Scenario& base, MicrobenchAxis axis);

/// Known-position calibration protocol: phases averaged over `packets` packets per point.
struct CalibrationProtocol
{
  std::vector<Position> points{ { 1.5, 0.4 }, { 1.5, 1.5 }, { 1.5, 2.8 } };
  int packets{ 100 };
  double sigma_phase_deg{ 5.0 };  // per-anchor, per packet
};

/// Simulates the calibration measurements for `hardware` with bias `bias` and fits them.
std::vector<AnchorFit> simulate_calibration(const AnchorArray& hardware, const HardwareBias& bias,
                                            const CalibrationProtocol& protocol, RandomStream& rng);

/// Per-anchor true vs fitted parameters; metadata carries calibrated and uncalibrated medians
/// over scenario.trials uniform positions.
ResultTable run_calibration_demo(const Scenario& scenario, const CalibrationProtocol& protocol = {});

/// Particle filter through the scenario's trajectory. Latency goes in metadata only.
ResultTable run_tracking(const Scenario& scenario);

struct AmbiguityConfig
{
  std::vector<double> apertures{ 1.0 };
  std::vector<int> counts{ 2, 4, 6 };
  Position tag{ 1.5, 1.5 };
  Position array_center{ 1.5, 0.0 };
  double room_width{ 3.0 };
  double room_height{ 3.0 };
  double resolution{ 0.01 };           // m, emitted surfaces
  double analysis_resolution{ 0.002 }; // m, minima counting
  double merge_distance{ 0.10 };       // m
  double quantile{ 0.99 };             // of chi-square with the measurement dimension
  NoiseSpec noise;
  std::uint64_t seed{ 1 };

  nlohmann::json to_json() const;
  static AmbiguityConfig from_json(const nlohmann::json& j);
};

/// Distinct sub-threshold minima of a row-major score grid: 8-connected sub-threshold regions,
/// each represented by its lowest cell, with representatives closer than `merge_distance` fused
/// (keeping the lower). Sorted by score.
struct Minimum
{
  Position position;
  double score{ 0.0 };
};
std::vector<Minimum> sub_threshold_minima(const std::vector<double>& score, const Environment& env,
                                          const GridShape& shape, double threshold,
                                          double merge_distance);

struct AmbiguityResult
{
  ResultTable surfaces;  // aperture_m,n_antennas,x,y,pdoa_nll,tdoa_nll,fused_nll
  ResultTable summary;   // one row per (aperture, N, modality)
};

AmbiguityResult run_ambiguity_maps(const AmbiguityConfig& config);

/// mac_report_csv() plus a run-metadata preamble, as a table.
ResultTable mac_table(const MacReport& report);
ResultTable mac_timeseries_table(const MacReport& report);

/// Seed, scenario digest, canonical config and wall time.
void stamp_metadata(ResultTable& table, const nlohmann::json& config, std::uint64_t seed, double wall_seconds);

}  // namespace uwbloc
