#include "uwbloc/particle_filter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <boost/math/distributions/chi_squared.hpp>
#include <spdlog/spdlog.h>

namespace uwbloc {

void ParticleFilterOptions::validate() const
{
  if (!(density > 0.0) || !std::isfinite(density)) {
    throw std::invalid_argument("particle density must be positive");
  }
  if (!(particles_per_meter >= 0.0) || !(process_noise >= 0.0)) {
    throw std::invalid_argument("particle filter scales must be non-negative");
  }
  if (!(resample_fraction > 0.0 && resample_fraction <= 1.0)) {
    throw std::invalid_argument("resample fraction must lie in (0, 1]");
  }
  if (!(divergence_quantile > 0.0 && divergence_quantile < 1.0)) {
    throw std::invalid_argument("divergence quantile must lie in (0, 1)");
  }
  if (min_count == 0 || divergence_patience < 1 || move_sweeps < 0) {
    throw std::invalid_argument("invalid particle filter counts");
  }
}

std::size_t adapted_count(double spread, const ParticleFilterOptions& options, std::size_t initial)
{
  const std::size_t lo = std::min(options.min_count, initial);
  if (!std::isfinite(spread)) return initial;
  const double raw = std::round(options.particles_per_meter * std::max(spread, 0.0));
  if (raw >= static_cast<double>(initial)) return initial;
  return std::max(lo, static_cast<std::size_t>(raw));
}

namespace {

std::size_t initial_particle_count(const Environment& env, double density)
{
  const double n = std::round(density * env.area());
  return static_cast<std::size_t>(std::max(1.0, n));
}

// Systematic resampling: one uniform offset, `count` evenly spaced pointers into the CDF.
std::vector<std::size_t> systematic_indices(const std::vector<double>& w, std::size_t count,
                                            RandomStream& rng)
{
  std::vector<std::size_t> idx(count);
  const double step = 1.0 / static_cast<double>(count);
  double u = rng.uniform(0.0, step);
  double cdf = w.empty() ? 0.0 : w[0];
  std::size_t j = 0;
  for (std::size_t k = 0; k < count; ++k) {
    while (u > cdf && j + 1 < w.size()) cdf += w[++j];
    idx[k] = j;
    u += step;
  }
  return idx;
}

// Normalizes exp(logw) in place with the max subtracted; returns false if nothing survives.
bool normalize_log_weights(std::vector<double>& logw)
{
  double top = -std::numeric_limits<double>::infinity();
  for (double v : logw) top = std::max(top, v);
  if (!std::isfinite(top)) return false;
  double sum = 0.0;
  for (double& v : logw) {
    v = std::exp(v - top);
    sum += v;
  }
  if (!(sum > 0.0) || !std::isfinite(sum)) return false;
  for (double& v : logw) v /= sum;
  return true;
}

double ess_of(const std::vector<double>& w)
{
  double s = 0.0, s2 = 0.0;
  for (double v : w) {
    s += v;
    s2 += v * v;
  }
  return s2 > 0.0 ? s * s / s2 : 0.0;
}

}  // namespace

ParticleFilter::ParticleFilter(const Environment& env, const ParticleFilterOptions& options, RandomStream rng)
    : env_(env), options_(options), rng_(std::move(rng))
{
  options_.validate();
  initial_count_ = initial_particle_count(env_, options_.density);
  reinitialize();
}

std::size_t ParticleFilter::min_count() const
{
  return std::min(options_.min_count, initial_count_);
}

void ParticleFilter::reinitialize()
{
  particles_.resize(initial_count_);
  for (auto& p : particles_) {
    p.x = rng_.uniform(0.0, env_.width());
    p.y = rng_.uniform(0.0, env_.height());
  }
  weights_.assign(initial_count_, 1.0 / static_cast<double>(initial_count_));
  cold_ = true;
  gated_streak_ = 0;
  refresh_moments();
}

Position ParticleFilter::reflect(Position p) const
{
  auto fold = [](double v, double hi) {
    if (v < 0.0) v = -v;
    if (v > hi) v = 2.0 * hi - v;
    return std::clamp(v, 0.0, hi);
  };
  return { fold(p.x, env_.width()), fold(p.y, env_.height()) };
}

void ParticleFilter::predict()
{
  for (auto& p : particles_) {
    const double dx = rng_.normal(options_.process_noise);
    const double dy = rng_.normal(options_.process_noise);
    p = reflect({ p.x + dx, p.y + dy });
  }
}

void ParticleFilter::resample(std::size_t count)
{
  const auto idx = systematic_indices(weights_, count, rng_);
  std::vector<Position> next(count);
  for (std::size_t k = 0; k < count; ++k) next[k] = particles_[idx[k]];
  particles_ = std::move(next);
  weights_.assign(count, 1.0 / static_cast<double>(count));
}

void ParticleFilter::metropolis_moves(const LikelihoodEvaluator& nll, double exponent,
                                      std::vector<double>& cost, double& step)
{
  const double max_step = std::max(env_.width(), env_.height());
  for (int sweep = 0; sweep < options_.move_sweeps; ++sweep) {
    std::size_t accepted = 0;
    for (std::size_t i = 0; i < particles_.size(); ++i) {
      const Position prop{ particles_[i].x + rng_.normal(step), particles_[i].y + rng_.normal(step) };
      const double u = rng_.uniform();
      if (!env_.contains(prop)) continue;
      const double c = nll(prop);
      if (std::log(u) < -0.5 * exponent * (c - cost[i])) {
        particles_[i] = prop;
        cost[i] = c;
        ++accepted;
      }
    }
    const double rate = static_cast<double>(accepted) / static_cast<double>(particles_.size());
    if (rate < 0.2) step *= 0.5;
    else if (rate > 0.5) step *= 2.0;
    step = std::clamp(step, 1e-5, max_step);
  }
}

void ParticleFilter::tempered_start(const LikelihoodEvaluator& nll)
{
  const std::size_t n = particles_.size();
  std::vector<double> cost(n);
  for (std::size_t i = 0; i < n; ++i) cost[i] = nll(particles_[i]);

  const double target = options_.resample_fraction * static_cast<double>(n);
  std::vector<double> w(n);
  auto weigh = [&](double delta) {
    const double lo = *std::min_element(cost.begin(), cost.end());
    for (std::size_t i = 0; i < n; ++i) w[i] = std::exp(-0.5 * delta * (cost[i] - lo));
    return ess_of(w);
  };

  double phi = 0.0;
  double step = 0.1 * std::max(env_.width(), env_.height());
  int stages = 0;
  while (phi < 1.0 && stages < 1000) {
    ++stages;
    const double remaining = 1.0 - phi;
    double delta = remaining;
    if (n > 1 && weigh(remaining) < target) {
      double lo = 0.0, hi = remaining;
      for (int it = 0; it < 50; ++it) {
        const double mid = 0.5 * (lo + hi);
        (weigh(mid) >= target ? lo : hi) = mid;
      }
      delta = lo > 0.0 ? lo : hi;
    }
    phi = (remaining - delta <= 1e-12) ? 1.0 : phi + delta;
    weigh(delta);
    double sum = 0.0;
    for (double v : w) sum += v;
    for (std::size_t i = 0; i < n; ++i) weights_[i] = w[i] / sum;
    if (phi < 1.0) {
      const auto idx = systematic_indices(weights_, n, rng_);
      std::vector<Position> next(n);
      std::vector<double> next_cost(n);
      for (std::size_t k = 0; k < n; ++k) {
        next[k] = particles_[idx[k]];
        next_cost[k] = cost[idx[k]];
      }
      particles_ = std::move(next);
      cost = std::move(next_cost);
      weights_.assign(n, 1.0 / static_cast<double>(n));
      metropolis_moves(nll, phi, cost, step);
    }
  }
  last_stages_ = stages;
}

void ParticleFilter::refresh_moments()
{
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < particles_.size(); ++i) {
    mx += weights_[i] * particles_[i].x;
    my += weights_[i] * particles_[i].y;
  }
  double vx = 0.0, vy = 0.0;
  for (std::size_t i = 0; i < particles_.size(); ++i) {
    const double dx = particles_[i].x - mx;
    const double dy = particles_[i].y - my;
    vx += weights_[i] * dx * dx;
    vy += weights_[i] * dy * dy;
  }
  estimate_ = { mx, my };
  spread_ = std::sqrt(vx + vy);
}

double ParticleFilter::effective_sample_size() const
{
  return ess_of(weights_);
}

Position ParticleFilter::update(const MeasurementSet& meas, const AnchorArray& array,
                                const LikelihoodSpec& spec)
{
  const LikelihoodEvaluator nll(meas, array, spec);
  ++updates_;

  if (cold_) {
    cold_ = false;
    if (options_.tempered_start) {
      tempered_start(nll);
    } else {
      std::vector<double> logw(particles_.size());
      for (std::size_t i = 0; i < particles_.size(); ++i) logw[i] = -0.5 * nll(particles_[i]);
      normalize_log_weights(logw);
      weights_ = std::move(logw);
    }
  } else {
    predict();
    std::vector<double> logw(particles_.size());
    for (std::size_t i = 0; i < particles_.size(); ++i) {
      logw[i] = std::log(weights_[i]) - 0.5 * nll(particles_[i]);
    }
    if (!normalize_log_weights(logw)) {
      spdlog::warn("particle weights vanished after update {}; re-initializing", updates_);
      ++reinitializations_;
      reinitialize();
      --updates_;
      return update(meas, array, spec);
    }
    weights_ = std::move(logw);
  }

  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : particles_) best = std::min(best, nll(p));
  const boost::math::chi_squared gate_dist(static_cast<double>(std::max<std::size_t>(nll.dimension(), 1)));
  const double gate = boost::math::quantile(gate_dist, options_.divergence_quantile);
  gated_streak_ = best > gate ? gated_streak_ + 1 : 0;

  refresh_moments();
  if (gated_streak_ >= options_.divergence_patience) {
    spdlog::warn("particle filter diverged ({} consecutive gated updates); re-initializing",
                 gated_streak_);
    ++reinitializations_;
    reinitialize();
    --updates_;
    return update(meas, array, spec);
  }

  if (effective_sample_size() < options_.resample_fraction * static_cast<double>(size())) {
    resample(size());
  }
  if (options_.adaptive) adapt();
  return estimate_;
}

void ParticleFilter::adapt()
{
  const std::size_t target = adapted_count(spread_, options_, initial_count_);
  if (target != size()) resample(target);
}

ParticleFilter pf_init(const Environment& env, double density, RandomStream rng,
                       ParticleFilterOptions options)
{
  options.density = density;
  return ParticleFilter(env, options, std::move(rng));
}

Position pf_update(ParticleFilter& pf, const MeasurementSet& meas, const AnchorArray& array,
                   const LikelihoodSpec& spec)
{
  return pf.update(meas, array, spec);
}

void pf_adapt(ParticleFilter& pf)
{
  pf.adapt();
}

}  // namespace uwbloc
