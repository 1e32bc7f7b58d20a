#pragma once

#include <functional>

#include <Eigen/Core>

#include "uwbloc/geometry.hpp"

namespace uwbloc {

/// Residual callback: fills r (and J if non-null, one row per residual) at position p.
using ResidualFn = std::function<void(const Position& p, Eigen::VectorXd& r, Eigen::MatrixX2d* J)>;

struct SolverOptions
{
  double lambda_start{ 1e-3 };
  double lambda_up{ 10.0 };
  double lambda_down{ 10.0 };
  int max_iterations{ 100 };
  double step_tolerance{ 1e-7 };  // m
};

struct SolveResult
{
  Position position;
  double cost{ 0.0 };  // sum of squared residuals
  int iterations{ 0 };
  bool converged{ false };
};

/// Damped Gauss-Newton (Levenberg) from a single start.
SolveResult levenberg_marquardt(const ResidualFn& fn, Position start, const SolverOptions& options = {});

/// Sum of squared residuals at p.
double residual_cost(const ResidualFn& fn, const Position& p);

struct MultiStartOptions
{
  bool start_from_center{ true };
  double seed_grid{ 0.25 };  // m
  int seeds{ 5 };
  double inside_tolerance{ 0.02 };  // m, slack when testing in-environment
  SolverOptions solver;
};

struct LocateResult
{
  Position position;
  double cost{ 0.0 };
  bool converged{ false };
  bool inside{ false };
  /// True when no converged in-environment solution was found.
  bool flagged{ false };
};

/// Solver scaffold shared by the baseline localizers: a single start from the room center,
/// falling back to the best seeds of a coarse grid when that start fails to converge or leaves
/// the room. With start_from_center = false the grid seeds are always used.
LocateResult solve_in_environment(const ResidualFn& fn, const Environment& env,
                                  const MultiStartOptions& options = {});

}  // namespace uwbloc
