#pragma once

#include <cstddef>
#include <vector>

#include "uwbloc/estimator.hpp"
#include "uwbloc/geometry.hpp"
#include "uwbloc/measurement.hpp"
#include "uwbloc/random.hpp"

namespace uwbloc {

struct ParticleFilterOptions
{
  double density{ 500.0 };               // particles per m^2 at (re)initialization
  std::size_t min_count{ 100 };
  double particles_per_meter{ 5000.0 };  // adaptive count = this * spread
  bool adaptive{ true };
  double process_noise{ 0.003 };         // m, random-walk std per update (0.03 for moving tags)
  double resample_fraction{ 0.5 };       // resample when ESS < fraction * N
  int divergence_patience{ 5 };          // consecutive gated updates before re-initializing
  double divergence_quantile{ 0.999 };
  /// Cold starts bring the likelihood in gradually (ESS-controlled exponent steps with
  /// Metropolis moves in between) instead of in one shot. The target posterior is the same;
  /// this only keeps the particle set from collapsing onto a single lucky particle when the
  /// phase lobes are much narrower than the initial particle spacing.
  bool tempered_start{ true };
  int move_sweeps{ 3 };

  /// Throws std::invalid_argument for non-positive density or out-of-range fractions.
  void validate() const;
};

/// Particle count the adaptation rule asks for: clamp(round(k * spread), min_count, initial).
std::size_t adapted_count(double spread, const ParticleFilterOptions& options, std::size_t initial);

/// Static-or-slow tag tracker over the joint TDoA/PDoA likelihood.
///
/// Owns its random stream, so a fixed seed and fixed inputs give a bit-identical trajectory.
class ParticleFilter
{
public:
  ParticleFilter(const Environment& env, const ParticleFilterOptions& options, RandomStream rng);

  /// Predict, weight, estimate, resample and adapt. Returns the new estimate.
  Position update(const MeasurementSet& meas, const AnchorArray& array, const LikelihoodSpec& spec);

  /// Resamples to adapted_count(spread()). No-op when the count is unchanged.
  void adapt();

  std::size_t size() const { return particles_.size(); }
  std::size_t initial_count() const { return initial_count_; }
  std::size_t min_count() const;
  const std::vector<Position>& positions() const { return particles_; }
  const std::vector<double>& weights() const { return weights_; }
  Position estimate() const { return estimate_; }
  /// sqrt(trace) of the weighted position covariance, m. Used as the confidence figure.
  double spread() const { return spread_; }
  double effective_sample_size() const;
  int update_count() const { return updates_; }
  int reinitializations() const { return reinitializations_; }
  /// Tempering stages used by the most recent cold start.
  int last_tempering_stages() const { return last_stages_; }
  const Environment& environment() const { return env_; }
  const ParticleFilterOptions& options() const { return options_; }

private:
  void reinitialize();
  void predict();
  void tempered_start(const LikelihoodEvaluator& nll);
  void metropolis_moves(const LikelihoodEvaluator& nll, double exponent, std::vector<double>& cost,
                        double& step);
  void resample(std::size_t count);
  void refresh_moments();
  Position reflect(Position p) const;

  Environment env_;
  ParticleFilterOptions options_;
  RandomStream rng_;
  std::size_t initial_count_;
  std::vector<Position> particles_;
  std::vector<double> weights_;
  Position estimate_;
  double spread_{ 0.0 };
  bool cold_{ true };
  int updates_{ 0 };
  int gated_streak_{ 0 };
  int reinitializations_{ 0 };
  int last_stages_{ 0 };
};

/// Uniform particles at `density` per m^2 over the room, equal weights.
ParticleFilter pf_init(const Environment& env, double density, RandomStream rng,
                       ParticleFilterOptions options = {});

Position pf_update(ParticleFilter& pf, const MeasurementSet& meas, const AnchorArray& array,
                   const LikelihoodSpec& spec);

void pf_adapt(ParticleFilter& pf);

}  // namespace uwbloc
