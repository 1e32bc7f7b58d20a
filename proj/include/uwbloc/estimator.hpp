#pragma once

#include <cstddef>
#include <vector>

#include "uwbloc/geometry.hpp"
#include "uwbloc/measurement.hpp"
#include "uwbloc/solver.hpp"

namespace uwbloc {

/// Which measurement families enter the joint likelihood.
enum class Modality
{
  Fused,
  TdoaOnly,
  PdoaOnly,
};

/// Diagonal-covariance joint TDoA/PDoA likelihood.
struct LikelihoodSpec
{
  double sigma_t{ 150e-12 };              // s
  double sigma_theta{ deg2rad(5.0) };     // rad
  PairingScheme pairing{ PairingScheme::Reference };
  bool use_calibration{ true };
  Modality modality{ Modality::Fused };

  bool uses_tdoa() const { return modality != Modality::PdoaOnly; }
  bool uses_pdoa() const { return modality != Modality::TdoaOnly; }

  /// Number of scalar measurements in the likelihood for `pair_count` pairs.
  std::size_t dimension(std::size_t pair_count) const
  {
    return pair_count * ((uses_tdoa() ? 1 : 0) + (uses_pdoa() ? 1 : 0));
  }

  /// Throws std::invalid_argument unless both sigmas are positive.
  void validate() const;
};

/// Throws std::invalid_argument when the measurement pairs do not match the spec's pairing.
void check_consistent(const MeasurementSet& meas, const AnchorArray& array, const LikelihoodSpec& spec);

/// Sum over pairs of (t - t_hat)^2 / sigma_t^2 + wrap(theta - theta_hat)^2 / sigma_theta^2.
/// Phases use the array's calibration when spec.use_calibration is set.
double neg_log_likelihood(const Position& p, const MeasurementSet& meas, const AnchorArray& array,
                          const LikelihoodSpec& spec);

/// neg_log_likelihood() with the consistency checks and per-pair setup hoisted out, for
/// evaluating one measurement set at many positions. Keeps references to `meas` and `array`.
class LikelihoodEvaluator
{
public:
  static constexpr std::size_t kMaxAnchors = 64;

  LikelihoodEvaluator(const MeasurementSet& meas, const AnchorArray& array, const LikelihoodSpec& spec);

  double operator()(const Position& p) const;
  std::size_t dimension() const { return dimension_; }

private:
  const MeasurementSet* meas_;
  const AnchorArray* array_;
  double k_;
  double inv_t_;
  double inv_p_;
  bool use_t_;
  bool use_p_;
  bool calibrated_;
  std::size_t dimension_;
};

/// Whitened residuals whose squared norm is neg_log_likelihood(); for local refinement.
ResidualFn likelihood_residuals(const MeasurementSet& meas, const AnchorArray& array,
                                const LikelihoodSpec& spec);

/// Expected TDoA/PDoA precomputed on a cell-center grid, so repeated searches over the same
/// geometry only pay for the scoring loop.
class LikelihoodGrid
{
public:
  LikelihoodGrid(const Environment& env, double resolution, const AnchorArray& array,
                 PairingScheme pairing, bool use_calibration);

  std::size_t size() const { return shape_.size(); }
  const GridShape& shape() const { return shape_; }
  const Environment& environment() const { return env_; }
  const AnchorArray& array() const { return array_; }
  Position point(std::size_t k) const { return grid_point(env_, shape_, k); }

  /// Score of every node, row-major.
  std::vector<double> score_all(const MeasurementSet& meas, const LikelihoodSpec& spec) const;

  /// Index of the minimum-score node; ties resolve to the lowest row-major index.
  std::size_t argmin(const MeasurementSet& meas, const LikelihoodSpec& spec) const;

private:
  Environment env_;
  GridShape shape_;
  AnchorArray array_;
  std::vector<AnchorPair> pairs_;
  bool use_calibration_;
  std::vector<double> path_diff_;  // m, node-major then pair
  std::vector<double> phase_;      // rad, unwrapped expected phase difference
};

/// Brute-force minimizer of neg_log_likelihood over the cell-center grid.
Position grid_search_locate(const MeasurementSet& meas, const AnchorArray& array,
                            const Environment& env, double resolution, const LikelihoodSpec& spec);

/// Grid search followed by damped Gauss-Newton on the whitened residuals from the best node.
/// The refined point is kept only if it stays inside the room.
Position grid_refined_locate(const LikelihoodGrid& grid, const MeasurementSet& meas,
                             const LikelihoodSpec& spec);

}  // namespace uwbloc
