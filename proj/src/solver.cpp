#include "uwbloc/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

namespace uwbloc {

double residual_cost(const ResidualFn& fn, const Position& p)
{
  Eigen::VectorXd r;
  fn(p, r, nullptr);
  return r.squaredNorm();
}

SolveResult levenberg_marquardt(const ResidualFn& fn, Position start, const SolverOptions& options)
{
  SolveResult out;
  out.position = start;
  Eigen::VectorXd r;
  Eigen::MatrixX2d J;
  fn(start, r, &J);
  out.cost = r.squaredNorm();
  if (!std::isfinite(out.cost)) return out;

  double lambda = options.lambda_start;
  for (int iter = 0; iter < options.max_iterations; ++iter) {
    out.iterations = iter + 1;
    const Eigen::Matrix2d JtJ = J.transpose() * J;
    const Eigen::Vector2d g = J.transpose() * r;
    bool accepted = false;
    double step_norm = 0.0;
    for (int tries = 0; tries < 20; ++tries) {
      Eigen::Matrix2d A = JtJ;
      A.diagonal() += lambda * JtJ.diagonal().cwiseMax(1e-12);
      const Eigen::Vector2d step = A.ldlt().solve(-g);
      if (!step.allFinite()) {
        lambda *= options.lambda_up;
        continue;
      }
      const Position trial{ out.position.x + step(0), out.position.y + step(1) };
      Eigen::VectorXd rt;
      fn(trial, rt, nullptr);
      const double cost = rt.squaredNorm();
      step_norm = step.norm();
      if (std::isfinite(cost) && cost <= out.cost) {
        out.position = trial;
        out.cost = cost;
        lambda = std::max(lambda / options.lambda_down, 1e-12);
        accepted = true;
        break;
      }
      lambda *= options.lambda_up;
      if (step_norm < options.step_tolerance) break;
    }
    if (!accepted || step_norm < options.step_tolerance) {
      // A rejected step that is already below tolerance means we sit at the minimum.
      out.converged = step_norm < options.step_tolerance;
      return out;
    }
    fn(out.position, r, &J);
  }
  return out;
}

LocateResult solve_in_environment(const ResidualFn& fn, const Environment& env,
                                  const MultiStartOptions& options)
{
  std::vector<SolveResult> runs;
  auto inside = [&](const Position& p) { return env.contains(p, options.inside_tolerance); };

  if (options.start_from_center) {
    SolveResult r = levenberg_marquardt(fn, env.center(), options.solver);
    if (r.converged && inside(r.position)) {
      return { r.position, r.cost, true, true, false };
    }
    runs.push_back(r);
  }

  // Coarse seeding grid; lowest cost first, ties broken by row-major index.
  const GridShape shape = grid_shape(env, options.seed_grid);
  std::vector<double> costs(shape.size());
  for (std::size_t k = 0; k < shape.size(); ++k) {
    costs[k] = residual_cost(fn, grid_point(env, shape, k));
    if (!std::isfinite(costs[k])) costs[k] = std::numeric_limits<double>::infinity();
  }
  std::vector<std::size_t> order(shape.size());
  std::iota(order.begin(), order.end(), std::size_t{ 0 });
  const std::size_t n_seeds = std::min<std::size_t>(static_cast<std::size_t>(options.seeds), order.size());
  std::partial_sort(order.begin(), order.begin() + n_seeds, order.end(),
                    [&](std::size_t a, std::size_t b) {
                      return costs[a] < costs[b] || (costs[a] == costs[b] && a < b);
                    });
  for (std::size_t s = 0; s < n_seeds; ++s) {
    runs.push_back(levenberg_marquardt(fn, grid_point(env, shape, order[s]), options.solver));
  }

  auto pick = [&](auto&& accept) -> const SolveResult* {
    const SolveResult* best = nullptr;
    for (const auto& r : runs) {
      if (accept(r) && std::isfinite(r.cost) && (!best || r.cost < best->cost)) best = &r;
    }
    return best;
  };
  if (const auto* b = pick([&](const SolveResult& r) { return r.converged && inside(r.position); })) {
    return { b->position, b->cost, true, true, false };
  }
  if (const auto* b = pick([&](const SolveResult& r) { return inside(r.position); })) {
    return { b->position, b->cost, b->converged, true, true };
  }
  if (const auto* b = pick([](const SolveResult&) { return true; })) {
    return { b->position, b->cost, b->converged, false, true };
  }
  return { env.center(), std::numeric_limits<double>::infinity(), false, true, true };
}

}  // namespace uwbloc
