#include "uwbloc/estimator.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "uwbloc/calibration.hpp"

namespace uwbloc {

void LikelihoodSpec::validate() const
{
  if (!(sigma_t > 0.0) || !(sigma_theta > 0.0)) {
    throw std::invalid_argument("likelihood sigmas must be positive");
  }
}

void check_consistent(const MeasurementSet& meas, const AnchorArray& array, const LikelihoodSpec& spec)
{
  if (meas.pairs != make_pairs(spec.pairing, array.size())) {
    throw std::invalid_argument("measurement pairs do not match the likelihood pairing scheme");
  }
  if (meas.tdoa.size() != meas.pairs.size() || meas.pdoa.size() != meas.pairs.size()) {
    throw std::invalid_argument("measurement vectors do not match the pair list");
  }
}

namespace {

struct PhaseModel
{
  double k;  // 2 pi / lambda
  const AnchorArray* array;
  bool calibrated;

  double anchor_phase(std::size_t a, double d) const
  {
    return calibrated ? k * d - phase_bias(d, array->calibration(a)) : k * d;
  }
  // d(anchor_phase)/d(distance)
  double anchor_slope(std::size_t a, double d) const
  {
    if (!calibrated) return k;
    const auto& c = array->calibration(a);
    if (c.beta == 0.0 || !(d > 0.0)) return k;
    return k - c.beta * c.gamma * std::pow(d, c.gamma - 1.0);
  }
};

PhaseModel phase_model(const AnchorArray& array, const LikelihoodSpec& spec)
{
  return { kTwoPi / array.wavelength(), &array, spec.use_calibration && array.has_calibration() };
}

}  // namespace

LikelihoodEvaluator::LikelihoodEvaluator(const MeasurementSet& meas, const AnchorArray& array,
                                         const LikelihoodSpec& spec)
    : meas_(&meas), array_(&array)
{
  spec.validate();
  check_consistent(meas, array, spec);
  if (array.size() > kMaxAnchors) {
    throw std::invalid_argument("too many anchors for the likelihood evaluator");
  }
  const PhaseModel model = phase_model(array, spec);
  k_ = model.k;
  calibrated_ = model.calibrated;
  inv_t_ = 1.0 / (spec.sigma_t * spec.sigma_t);
  inv_p_ = 1.0 / (spec.sigma_theta * spec.sigma_theta);
  use_t_ = spec.uses_tdoa();
  use_p_ = spec.uses_pdoa();
  dimension_ = spec.dimension(meas.pairs.size());
}

double LikelihoodEvaluator::operator()(const Position& p) const
{
  const std::size_t n = array_->size();
  double d[kMaxAnchors];
  double phase[kMaxAnchors];
  for (std::size_t a = 0; a < n; ++a) {
    d[a] = distance(p, (*array_)[a]);
    phase[a] = k_ * d[a];
    if (calibrated_ && use_p_) phase[a] -= phase_bias(d[a], array_->calibration(a));
  }
  double score = 0.0;
  const auto& pairs = meas_->pairs;
  for (std::size_t q = 0; q < pairs.size(); ++q) {
    const auto [i, j] = pairs[q];
    if (use_t_) {
      const double e = meas_->tdoa[q] - (d[i] - d[j]) / kSpeedOfLight;
      score += e * e * inv_t_;
    }
    if (use_p_) {
      const double e = wrap_phase(meas_->pdoa[q] - (phase[i] - phase[j]));
      score += e * e * inv_p_;
    }
  }
  return score;
}

double neg_log_likelihood(const Position& p, const MeasurementSet& meas, const AnchorArray& array,
                          const LikelihoodSpec& spec)
{
  return LikelihoodEvaluator(meas, array, spec)(p);
}

ResidualFn likelihood_residuals(const MeasurementSet& meas, const AnchorArray& array,
                                const LikelihoodSpec& spec)
{
  spec.validate();
  check_consistent(meas, array, spec);
  return [&meas, &array, spec](const Position& p, Eigen::VectorXd& r, Eigen::MatrixX2d* J) {
    const PhaseModel model = phase_model(array, spec);
    const std::size_t np = meas.pairs.size();
    const std::size_t rows = spec.dimension(np);
    r.resize(static_cast<Eigen::Index>(rows));
    if (J) J->resize(static_cast<Eigen::Index>(rows), 2);

    std::vector<double> d(array.size());
    std::vector<Vec2> u(array.size());
    for (std::size_t a = 0; a < array.size(); ++a) {
      const Vec2 v = p - array[a];
      d[a] = norm(v);
      u[a] = d[a] > 0.0 ? (1.0 / d[a]) * v : Vec2{};
    }
    Eigen::Index row = 0;
    for (std::size_t q = 0; q < np; ++q) {
      const auto [i, j] = meas.pairs[q];
      if (spec.uses_tdoa()) {
        r(row) = (meas.tdoa[q] - (d[i] - d[j]) / kSpeedOfLight) / spec.sigma_t;
        if (J) {
          const double s = -1.0 / (kSpeedOfLight * spec.sigma_t);
          (*J)(row, 0) = s * (u[i].x - u[j].x);
          (*J)(row, 1) = s * (u[i].y - u[j].y);
        }
        ++row;
      }
      if (spec.uses_pdoa()) {
        const double expected = model.anchor_phase(i, d[i]) - model.anchor_phase(j, d[j]);
        r(row) = wrap_phase(meas.pdoa[q] - expected) / spec.sigma_theta;
        if (J) {
          const double si = model.anchor_slope(i, d[i]);
          const double sj = model.anchor_slope(j, d[j]);
          (*J)(row, 0) = -(si * u[i].x - sj * u[j].x) / spec.sigma_theta;
          (*J)(row, 1) = -(si * u[i].y - sj * u[j].y) / spec.sigma_theta;
        }
        ++row;
      }
    }
  };
}

LikelihoodGrid::LikelihoodGrid(const Environment& env, double resolution, const AnchorArray& array,
                               PairingScheme pairing, bool use_calibration)
    : env_(env),
      shape_(grid_shape(env, resolution)),
      array_(array),
      pairs_(make_pairs(pairing, array.size())),
      use_calibration_(use_calibration)
{
  LikelihoodSpec spec;
  spec.use_calibration = use_calibration;
  const PhaseModel model = phase_model(array_, spec);
  const std::size_t np = pairs_.size();
  path_diff_.resize(shape_.size() * np);
  phase_.resize(shape_.size() * np);
  std::vector<double> d(array_.size());
  for (std::size_t k = 0; k < shape_.size(); ++k) {
    const Position p = point(k);
    for (std::size_t a = 0; a < array_.size(); ++a) d[a] = distance(p, array_[a]);
    for (std::size_t q = 0; q < np; ++q) {
      const auto [i, j] = pairs_[q];
      path_diff_[k * np + q] = d[i] - d[j];
      phase_[k * np + q] = model.anchor_phase(i, d[i]) - model.anchor_phase(j, d[j]);
    }
  }
}

std::vector<double> LikelihoodGrid::score_all(const MeasurementSet& meas, const LikelihoodSpec& spec) const
{
  spec.validate();
  if (meas.pairs != pairs_) {
    throw std::invalid_argument("measurement pairs do not match the grid's pairing scheme");
  }
  if (spec.use_calibration != use_calibration_) {
    throw std::invalid_argument("grid calibration mode does not match the likelihood spec");
  }
  const std::size_t np = pairs_.size();
  const double sd = kSpeedOfLight * spec.sigma_t;
  const double inv_d = 1.0 / (sd * sd);
  const double inv_p = 1.0 / (spec.sigma_theta * spec.sigma_theta);
  std::vector<double> out(size());
  for (std::size_t k = 0; k < size(); ++k) {
    double s = 0.0;
    for (std::size_t q = 0; q < np; ++q) {
      if (spec.uses_pdoa()) {
        const double e = wrap_phase(meas.pdoa[q] - phase_[k * np + q]);
        s += e * e * inv_p;
      }
      if (spec.uses_tdoa()) {
        const double e = meas.tdoa[q] * kSpeedOfLight - path_diff_[k * np + q];
        s += e * e * inv_d;
      }
    }
    out[k] = s;
  }
  return out;
}

std::size_t LikelihoodGrid::argmin(const MeasurementSet& meas, const LikelihoodSpec& spec) const
{
  spec.validate();
  if (meas.pairs != pairs_) {
    throw std::invalid_argument("measurement pairs do not match the grid's pairing scheme");
  }
  if (spec.use_calibration != use_calibration_) {
    throw std::invalid_argument("grid calibration mode does not match the likelihood spec");
  }
  const std::size_t np = pairs_.size();
  const double sd = kSpeedOfLight * spec.sigma_t;
  const double inv_d = 1.0 / (sd * sd);
  const double inv_p = 1.0 / (spec.sigma_theta * spec.sigma_theta);
  const bool use_t = spec.uses_tdoa();
  const bool use_p = spec.uses_pdoa();
  std::vector<double> tdoa_m(np);
  for (std::size_t q = 0; q < np; ++q) tdoa_m[q] = meas.tdoa[q] * kSpeedOfLight;

  std::size_t best = 0;
  double best_score = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < size(); ++k) {
    const double* pd = &path_diff_[k * np];
    const double* ph = &phase_[k * np];
    double s = 0.0;
    // Terms are non-negative, so a partial sum at or above the best can stop early.
    for (std::size_t q = 0; q < np && s < best_score; ++q) {
      if (use_p) {
        const double e = wrap_phase(meas.pdoa[q] - ph[q]);
        s += e * e * inv_p;
      }
      if (use_t) {
        const double e = tdoa_m[q] - pd[q];
        s += e * e * inv_d;
      }
    }
    if (s < best_score) {
      best_score = s;
      best = k;
    }
  }
  return best;
}

Position grid_search_locate(const MeasurementSet& meas, const AnchorArray& array,
                            const Environment& env, double resolution, const LikelihoodSpec& spec)
{
  check_consistent(meas, array, spec);
  const LikelihoodGrid grid(env, resolution, array, spec.pairing, spec.use_calibration);
  return grid.point(grid.argmin(meas, spec));
}

Position grid_refined_locate(const LikelihoodGrid& grid, const MeasurementSet& meas,
                             const LikelihoodSpec& spec)
{
  const std::size_t k = grid.argmin(meas, spec);
  const Position start = grid.point(k);
  const ResidualFn fn = likelihood_residuals(meas, grid.array(), spec);
  const SolveResult r = levenberg_marquardt(fn, start);
  if (!grid.environment().contains(r.position) || !(r.cost <= residual_cost(fn, start))) return start;
  return r.position;
}

}  // namespace uwbloc
