#pragma once

#include <string>
#include <vector>

#include "uwbloc/geometry.hpp"
#include "uwbloc/measurement.hpp"
#include "uwbloc/solver.hpp"

namespace uwbloc {

/// Comparison localizers.
enum class BaselineKind
{
  Twr,
  Tdoa,
  Aoa,
  Fused,
};

std::string to_string(BaselineKind kind);
/// Accepts "twr", "tdoa", "aoa", "fused" (case-insensitive); throws std::invalid_argument.
BaselineKind parse_baseline_kind(const std::string& name);

/// Noise levels the baselines weight their residuals with when the measurement set
/// carries none (noiseless inputs).
struct BaselineSigmas
{
  double twr{ 150e-12 };           // s
  double tdoa{ 140e-12 };          // s
  double aoa{ deg2rad(1.5) };      // rad
};

/// Minimizes sum (|p - x_i| - c r_i)^2 over the room. Needs at least three anchors.
LocateResult trilaterate_twr(const std::vector<double>& ranges, const AnchorArray& anchors,
                             const Environment& env = {}, const MultiStartOptions& options = {});

/// Minimizes sum (t_meas - t_hat)^2 over the measurement's pairs; always grid-seeded.
LocateResult locate_tdoa(const MeasurementSet& meas, const AnchorArray& anchors,
                         const Environment& env = {}, MultiStartOptions options = {});

/// A bearing from an anchor pair: angle measured from `normal` as in expected_aoa().
struct Bearing
{
  Position center;
  Vec2 normal;
  double angle{ 0.0 };
};

/// Least-squares intersection of bearing lines, then Gauss-Newton on the angular residuals.
/// Throws std::invalid_argument for fewer than two bearings or (near-)parallel lines.
LocateResult locate_aoa(const std::vector<Bearing>& bearings, const Environment& env = {},
                        const MultiStartOptions& options = {});

/// Bearings taken from meas.aoa using each pair's frame.
LocateResult locate_aoa(const MeasurementSet& meas, const AnchorArray& anchors,
                        const Environment& env = {}, const MultiStartOptions& options = {});

/// Variance-weighted joint fit of whatever TWR, TDoA and AoA values `meas` carries.
LocateResult locate_fused(const MeasurementSet& meas, const AnchorArray& anchors,
                          const Environment& env = {}, const MultiStartOptions& options = {},
                          const BaselineSigmas& fallback = {});

/// Dispatches on `kind`. TWR uses meas.twr (throws if absent).
LocateResult locate_baseline(BaselineKind kind, const MeasurementSet& meas, const AnchorArray& anchors,
                             const Environment& env = {});

}  // namespace uwbloc
