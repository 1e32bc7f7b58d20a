#include "uwbloc/baselines.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

namespace uwbloc {

std::string to_string(BaselineKind kind)
{
  switch (kind) {
  case BaselineKind::Twr: return "twr";
  case BaselineKind::Tdoa: return "tdoa";
  case BaselineKind::Aoa: return "aoa";
  case BaselineKind::Fused: return "fused";
  }
  return "unknown";
}

BaselineKind parse_baseline_kind(const std::string& name)
{
  std::string s = name;
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "twr") return BaselineKind::Twr;
  if (s == "tdoa") return BaselineKind::Tdoa;
  if (s == "aoa") return BaselineKind::Aoa;
  if (s == "fused") return BaselineKind::Fused;
  throw std::invalid_argument("unknown baseline kind: " + name);
}

namespace {

struct Unit
{
  double d;
  Vec2 u;
};

Unit unit_from(const Position& p, const Position& anchor)
{
  const Vec2 v = p - anchor;
  const double d = norm(v);
  return { d, d > 0.0 ? (1.0 / d) * v : Vec2{} };
}

// Bearing angle and its gradient with respect to the tag position.
double bearing_and_gradient(const Position& p, const Bearing& b, Vec2* grad)
{
  const Vec2 n = normalized(b.normal);
  const Vec2 t{ n.y, -n.x };
  const Vec2 v = p - b.center;
  const double s = dot(v, t);
  const double q = dot(v, n);
  if (grad) {
    const double r2 = s * s + q * q;
    *grad = r2 > 0.0 ? (1.0 / r2) * (q * t - s * n) : Vec2{};
  }
  return std::atan2(s, q);
}

std::vector<Bearing> bearings_of(const MeasurementSet& meas, const AnchorArray& anchors)
{
  std::vector<Bearing> out;
  for (const auto& obs : meas.aoa) {
    const auto [center, normal] = pair_frame(anchors, obs.pair);
    out.push_back({ center, normal, obs.angle });
  }
  return out;
}

double pick_sigma(double measured, double fallback)
{
  return measured > 0.0 ? measured : fallback;
}

}  // namespace

LocateResult trilaterate_twr(const std::vector<double>& ranges, const AnchorArray& anchors,
                             const Environment& env, const MultiStartOptions& options)
{
  if (anchors.size() < 3) {
    throw std::invalid_argument("trilateration needs at least three anchors");
  }
  if (ranges.size() != anchors.size()) {
    throw std::invalid_argument("one range per anchor is required");
  }
  ResidualFn fn = [&](const Position& p, Eigen::VectorXd& r, Eigen::MatrixX2d* J) {
    const auto n = static_cast<Eigen::Index>(anchors.size());
    r.resize(n);
    if (J) J->resize(n, 2);
    for (Eigen::Index i = 0; i < n; ++i) {
      const Unit a = unit_from(p, anchors[static_cast<std::size_t>(i)]);
      r(i) = a.d - kSpeedOfLight * ranges[static_cast<std::size_t>(i)];
      if (J) {
        (*J)(i, 0) = a.u.x;
        (*J)(i, 1) = a.u.y;
      }
    }
  };
  return solve_in_environment(fn, env, options);
}

LocateResult locate_tdoa(const MeasurementSet& meas, const AnchorArray& anchors, const Environment& env,
                         MultiStartOptions options)
{
  if (meas.pairs.empty() || meas.tdoa.size() != meas.pairs.size()) {
    throw std::invalid_argument("TDoA localization needs one value per pair");
  }
  for (const auto& [i, j] : meas.pairs) {
    anchors.check_index(i);
    anchors.check_index(j);
  }
  // Residuals in meters of path difference keep the normal equations well scaled.
  ResidualFn fn = [&](const Position& p, Eigen::VectorXd& r, Eigen::MatrixX2d* J) {
    const auto n = static_cast<Eigen::Index>(meas.pairs.size());
    r.resize(n);
    if (J) J->resize(n, 2);
    for (Eigen::Index k = 0; k < n; ++k) {
      const auto [i, j] = meas.pairs[static_cast<std::size_t>(k)];
      const Unit a = unit_from(p, anchors[i]);
      const Unit b = unit_from(p, anchors[j]);
      r(k) = kSpeedOfLight * meas.tdoa[static_cast<std::size_t>(k)] - (a.d - b.d);
      if (J) {
        (*J)(k, 0) = -(a.u.x - b.u.x);
        (*J)(k, 1) = -(a.u.y - b.u.y);
      }
    }
  };
  options.start_from_center = false;
  return solve_in_environment(fn, env, options);
}

LocateResult locate_aoa(const std::vector<Bearing>& bearings, const Environment& env,
                        const MultiStartOptions& options)
{
  if (bearings.size() < 2) {
    throw std::invalid_argument("AoA localization needs at least two bearings");
  }
  // Each bearing is the line through `center` along dir; its normal m gives m . q = m . center.
  Eigen::Matrix2d A = Eigen::Matrix2d::Zero();
  Eigen::Vector2d b = Eigen::Vector2d::Zero();
  for (const auto& br : bearings) {
    const Vec2 n = normalized(br.normal);
    const Vec2 t{ n.y, -n.x };
    const Vec2 dir = std::cos(br.angle) * n + std::sin(br.angle) * t;
    const Eigen::Vector2d m(-dir.y, dir.x);
    A += m * m.transpose();
    b += m * (m.x() * br.center.x + m.y() * br.center.y);
  }
  // A is a sum of rank-one projectors; a tiny determinant relative to its trace means the
  // lines are parallel.
  if (std::abs(A.determinant()) < 1e-10 * A.trace() * A.trace()) {
    throw std::invalid_argument("bearing lines are parallel; intersection is undefined");
  }
  const Eigen::Vector2d x0 = A.ldlt().solve(b);

  ResidualFn fn = [&](const Position& p, Eigen::VectorXd& r, Eigen::MatrixX2d* J) {
    const auto n = static_cast<Eigen::Index>(bearings.size());
    r.resize(n);
    if (J) J->resize(n, 2);
    for (Eigen::Index k = 0; k < n; ++k) {
      const Bearing& br = bearings[static_cast<std::size_t>(k)];
      Vec2 g;
      r(k) = wrap_phase(br.angle - bearing_and_gradient(p, br, J ? &g : nullptr));
      if (J) {
        (*J)(k, 0) = -g.x;
        (*J)(k, 1) = -g.y;
      }
    }
  };
  const SolveResult refined = levenberg_marquardt(fn, { x0(0), x0(1) }, options.solver);
  if (refined.converged && env.contains(refined.position, options.inside_tolerance)) {
    return { refined.position, refined.cost, true, true, false };
  }
  return solve_in_environment(fn, env, options);
}

LocateResult locate_aoa(const MeasurementSet& meas, const AnchorArray& anchors, const Environment& env,
                        const MultiStartOptions& options)
{
  return locate_aoa(bearings_of(meas, anchors), env, options);
}

LocateResult locate_fused(const MeasurementSet& meas, const AnchorArray& anchors, const Environment& env,
                          const MultiStartOptions& options, const BaselineSigmas& fallback)
{
  const bool has_twr = meas.twr.has_value();
  if (has_twr && meas.twr->size() != anchors.size()) {
    throw std::invalid_argument("one TWR value per anchor is required");
  }
  if (meas.tdoa.size() != meas.pairs.size()) {
    throw std::invalid_argument("TDoA values do not match the pair list");
  }
  const std::vector<Bearing> bearings = bearings_of(meas, anchors);
  const std::size_t rows = (has_twr ? anchors.size() : 0) + meas.pairs.size() + bearings.size();
  if (rows < 2) {
    throw std::invalid_argument("fused localization needs at least two measurements");
  }
  const double s_twr = kSpeedOfLight * pick_sigma(meas.noise.sigma_twr, fallback.twr);
  const double s_tdoa = kSpeedOfLight * pick_sigma(meas.noise.sigma_t, fallback.tdoa);
  const double s_aoa = pick_sigma(meas.noise.sigma_aoa, fallback.aoa);

  ResidualFn fn = [&](const Position& p, Eigen::VectorXd& r, Eigen::MatrixX2d* J) {
    r.resize(static_cast<Eigen::Index>(rows));
    if (J) J->resize(static_cast<Eigen::Index>(rows), 2);
    Eigen::Index row = 0;
    if (has_twr) {
      for (std::size_t i = 0; i < anchors.size(); ++i, ++row) {
        const Unit a = unit_from(p, anchors[i]);
        r(row) = (a.d - kSpeedOfLight * (*meas.twr)[i]) / s_twr;
        if (J) {
          (*J)(row, 0) = a.u.x / s_twr;
          (*J)(row, 1) = a.u.y / s_twr;
        }
      }
    }
    for (std::size_t k = 0; k < meas.pairs.size(); ++k, ++row) {
      const auto [i, j] = meas.pairs[k];
      const Unit a = unit_from(p, anchors[i]);
      const Unit b = unit_from(p, anchors[j]);
      r(row) = (kSpeedOfLight * meas.tdoa[k] - (a.d - b.d)) / s_tdoa;
      if (J) {
        (*J)(row, 0) = -(a.u.x - b.u.x) / s_tdoa;
        (*J)(row, 1) = -(a.u.y - b.u.y) / s_tdoa;
      }
    }
    for (const auto& br : bearings) {
      Vec2 g;
      r(row) = wrap_phase(br.angle - bearing_and_gradient(p, br, J ? &g : nullptr)) / s_aoa;
      if (J) {
        (*J)(row, 0) = -g.x / s_aoa;
        (*J)(row, 1) = -g.y / s_aoa;
      }
      ++row;
    }
  };
  return solve_in_environment(fn, env, options);
}

LocateResult locate_baseline(BaselineKind kind, const MeasurementSet& meas, const AnchorArray& anchors,
                             const Environment& env)
{
  switch (kind) {
  case BaselineKind::Twr:
    if (!meas.twr) throw std::invalid_argument("TWR baseline needs TWR measurements");
    return trilaterate_twr(*meas.twr, anchors, env);
  case BaselineKind::Tdoa: return locate_tdoa(meas, anchors, env);
  case BaselineKind::Aoa: return locate_aoa(meas, anchors, env);
  case BaselineKind::Fused: return locate_fused(meas, anchors, env);
  }
  throw std::invalid_argument("unknown baseline kind");
}

}  // namespace uwbloc
