#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "uwbloc/geometry.hpp"

namespace uwbloc {

/// Phase bias alpha + beta * d^gamma at distance d (m). Throws std::invalid_argument for d <= 0
/// unless beta is zero.
double phase_bias(double d, const CalibrationParams& params);

/// Ideal phase 2 pi d / lambda plus the bias term alpha + beta * d^gamma (unwrapped).
double biased_phase(double d, const CalibrationParams& params, double wavelength);

/// Bias-corrected expected PDoA using the array's per-anchor calibration, wrapped to [-pi, pi):
/// wrap((2 pi d_i / lambda - bias_i(d_i)) - (2 pi d_j / lambda - bias_j(d_j))).
double expected_pdoa_calibrated(const Position& p, const AnchorArray& array, std::size_t i,
                                std::size_t j);

/// Unwrapped per-anchor phases measured with the tag at a known position.
struct CalibrationSample
{
  Position position;
  std::vector<double> phase;  // rad, one per anchor
};

struct CalibrationFitOptions
{
  double gamma_min{ -2.0 };
  double gamma_max{ 2.0 };
  int gamma_grid_points{ 401 };
};

struct AnchorFit
{
  CalibrationParams params;
  double rms_residual{ 0.0 };  // rad
};

/// Fits one anchor's bias curve to (distance, observed bias) pairs where the observed bias is
/// ideal phase minus measured phase. Grid over gamma with closed-form (alpha, beta), then
/// golden-section refinement and a Gauss-Newton polish.
AnchorFit fit_bias_curve(const std::vector<double>& distances, const std::vector<double>& bias,
                         const CalibrationFitOptions& options = {});

/// Three-point (or more) calibration: per-anchor parameters from known positions.
/// Throws std::invalid_argument for fewer than three samples, mismatched phase vectors, or
/// distances to an anchor that are not pairwise distinct.
std::vector<AnchorFit> fit_three_point(const std::vector<CalibrationSample>& known,
                                       const AnchorArray& array,
                                       const CalibrationFitOptions& options = {});

/// Convenience: just the parameters from fit_three_point.
std::vector<CalibrationParams> fitted_params(const std::vector<AnchorFit>& fits);

/// JSON text {"anchors":[{"index":i,"alpha":..,"beta":..,"gamma":..},..]}.
std::string calibration_to_json(const std::vector<CalibrationParams>& params);
std::vector<CalibrationParams> calibration_from_json(const std::string& text);
void save_calibration(const std::string& path, const std::vector<CalibrationParams>& params);
std::vector<CalibrationParams> load_calibration(const std::string& path);

}  // namespace uwbloc
