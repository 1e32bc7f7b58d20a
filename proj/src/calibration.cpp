#include "uwbloc/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <Eigen/Dense>
#include <json.hpp>

#include "uwbloc/measurement.hpp"

namespace uwbloc {

double phase_bias(double d, const CalibrationParams& params)
{
  if (params.beta == 0.0) return params.alpha;
  if (!(d > 0.0)) {
    throw std::invalid_argument("bias model needs a positive distance");
  }
  return params.alpha + params.beta * std::pow(d, params.gamma);
}

double biased_phase(double d, const CalibrationParams& params, double wavelength)
{
  if (!(d > 0.0)) {
    throw std::invalid_argument("bias model needs a positive distance");
  }
  return kTwoPi * d / wavelength + phase_bias(d, params);
}

double expected_pdoa_calibrated(const Position& p, const AnchorArray& array, std::size_t i,
                                std::size_t j)
{
  array.check_index(i);
  array.check_index(j);
  if (i == j) {
    throw std::invalid_argument("a measurement pair needs two distinct anchors");
  }
  const double k = kTwoPi / array.wavelength();
  const double di = distance(p, array[i]);
  const double dj = distance(p, array[j]);
  const double phi_i = k * di - phase_bias(di, array.calibration(i));
  const double phi_j = k * dj - phase_bias(dj, array.calibration(j));
  return wrap_phase(phi_i - phi_j);
}

namespace {

struct LinearFit
{
  double alpha;
  double beta;
  double ssr;
};

// Least squares for y = alpha + beta * d^gamma at fixed gamma.
LinearFit fit_at_gamma(const std::vector<double>& d, const std::vector<double>& y, double gamma)
{
  const std::size_t n = d.size();
  std::vector<double> x(n);
  double xm = 0.0;
  double ym = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    x[k] = std::pow(d[k], gamma);
    xm += x[k];
    ym += y[k];
  }
  xm /= n;
  ym /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    sxx += (x[k] - xm) * (x[k] - xm);
    sxy += (x[k] - xm) * (y[k] - ym);
  }
  double beta = 0.0;
  if (sxx > 1e-24 * std::max(1.0, xm * xm)) beta = sxy / sxx;
  const double alpha = ym - beta * xm;
  double ssr = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double r = alpha + beta * x[k] - y[k];
    ssr += r * r;
  }
  return { alpha, beta, ssr };
}

double ssr_of(const std::vector<double>& d, const std::vector<double>& y, const CalibrationParams& p)
{
  double s = 0.0;
  for (std::size_t k = 0; k < d.size(); ++k) {
    const double r = p.alpha + p.beta * std::pow(d[k], p.gamma) - y[k];
    s += r * r;
  }
  return s;
}

// Levenberg-damped Gauss-Newton on (alpha, beta, gamma), gamma kept inside the fit range.
CalibrationParams polish(const std::vector<double>& d, const std::vector<double>& y,
                         CalibrationParams p, const CalibrationFitOptions& opt)
{
  double cost = ssr_of(d, y, p);
  double lambda = 1e-6;
  for (int iter = 0; iter < 60 && cost > 0.0; ++iter) {
    Eigen::MatrixXd J(d.size(), 3);
    Eigen::VectorXd r(d.size());
    for (std::size_t k = 0; k < d.size(); ++k) {
      const double xg = std::pow(d[k], p.gamma);
      J(k, 0) = 1.0;
      J(k, 1) = xg;
      J(k, 2) = p.beta * xg * std::log(d[k]);
      r(k) = p.alpha + p.beta * xg - y[k];
    }
    const Eigen::Matrix3d JtJ = J.transpose() * J;
    const Eigen::Vector3d g = J.transpose() * r;
    bool improved = false;
    for (int tries = 0; tries < 12; ++tries) {
      Eigen::Matrix3d A = JtJ;
      A.diagonal() += lambda * JtJ.diagonal().cwiseMax(1e-12);
      const Eigen::Vector3d step = A.ldlt().solve(-g);
      if (!step.allFinite()) break;
      CalibrationParams trial{ p.alpha + step(0), p.beta + step(1), p.gamma + step(2) };
      if (trial.gamma < opt.gamma_min || trial.gamma > opt.gamma_max) {
        lambda *= 10.0;
        continue;
      }
      const double c = ssr_of(d, y, trial);
      if (c < cost) {
        p = trial;
        cost = c;
        lambda = std::max(lambda / 10.0, 1e-12);
        improved = true;
        break;
      }
      lambda *= 10.0;
    }
    if (!improved) break;
  }
  return p;
}

}  // namespace

AnchorFit fit_bias_curve(const std::vector<double>& distances, const std::vector<double>& bias,
                         const CalibrationFitOptions& options)
{
  if (distances.size() < 3 || distances.size() != bias.size()) {
    throw std::invalid_argument("calibration needs at least three (distance, phase) samples");
  }
  for (std::size_t a = 0; a < distances.size(); ++a) {
    if (!(distances[a] > 0.0)) {
      throw std::invalid_argument("calibration distances must be positive");
    }
    for (std::size_t b = 0; b < a; ++b) {
      if (std::abs(distances[a] - distances[b]) < 1e-9) {
        throw std::invalid_argument("calibration distances must be pairwise distinct");
      }
    }
  }
  if (!(options.gamma_max > options.gamma_min) || options.gamma_grid_points < 2) {
    throw std::invalid_argument("invalid gamma search range");
  }

  const double step = (options.gamma_max - options.gamma_min) / (options.gamma_grid_points - 1);
  double best_gamma = options.gamma_min;
  double best_ssr = std::numeric_limits<double>::infinity();
  for (int k = 0; k < options.gamma_grid_points; ++k) {
    const double g = options.gamma_min + k * step;
    const double s = fit_at_gamma(distances, bias, g).ssr;
    if (s < best_ssr) {
      best_ssr = s;
      best_gamma = g;
    }
  }

  // Golden-section search over the bracketing grid cells.
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double lo = std::max(options.gamma_min, best_gamma - step);
  double hi = std::min(options.gamma_max, best_gamma + step);
  double x1 = hi - phi * (hi - lo);
  double x2 = lo + phi * (hi - lo);
  double f1 = fit_at_gamma(distances, bias, x1).ssr;
  double f2 = fit_at_gamma(distances, bias, x2).ssr;
  for (int it = 0; it < 80; ++it) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - phi * (hi - lo);
      f1 = fit_at_gamma(distances, bias, x1).ssr;
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + phi * (hi - lo);
      f2 = fit_at_gamma(distances, bias, x2).ssr;
    }
  }
  double gamma = 0.5 * (lo + hi);
  LinearFit lin = fit_at_gamma(distances, bias, gamma);
  if (best_ssr < lin.ssr) {
    gamma = best_gamma;
    lin = fit_at_gamma(distances, bias, gamma);
  }

  CalibrationParams params{ lin.alpha, lin.beta, gamma };
  if (params.beta != 0.0) params = polish(distances, bias, params, options);

  AnchorFit fit;
  fit.params = params;
  fit.rms_residual = std::sqrt(ssr_of(distances, bias, params) / distances.size());
  return fit;
}

std::vector<AnchorFit> fit_three_point(const std::vector<CalibrationSample>& known,
                                       const AnchorArray& array,
                                       const CalibrationFitOptions& options)
{
  if (known.size() < 3) {
    throw std::invalid_argument("three-point calibration needs at least three known positions");
  }
  for (const auto& s : known) {
    if (s.phase.size() != array.size()) {
      throw std::invalid_argument("each calibration sample needs one phase per anchor");
    }
  }
  std::vector<AnchorFit> fits;
  fits.reserve(array.size());
  const double k = kTwoPi / array.wavelength();
  for (std::size_t a = 0; a < array.size(); ++a) {
    std::vector<double> d;
    std::vector<double> observed_bias;
    for (const auto& s : known) {
      const double da = distance(s.position, array[a]);
      d.push_back(da);
      // Ideal minus measured: the bias the measured phase carries.
      observed_bias.push_back(k * da - s.phase[a]);
    }
    fits.push_back(fit_bias_curve(d, observed_bias, options));
  }
  return fits;
}

std::vector<CalibrationParams> fitted_params(const std::vector<AnchorFit>& fits)
{
  std::vector<CalibrationParams> out;
  out.reserve(fits.size());
  for (const auto& f : fits) out.push_back(f.params);
  return out;
}

std::string calibration_to_json(const std::vector<CalibrationParams>& params)
{
  nlohmann::json j;
  j["anchors"] = nlohmann::json::array();
  for (std::size_t i = 0; i < params.size(); ++i) {
    j["anchors"].push_back({ { "index", i },
                             { "alpha", params[i].alpha },
                             { "beta", params[i].beta },
                             { "gamma", params[i].gamma } });
  }
  return j.dump(2);
}

std::vector<CalibrationParams> calibration_from_json(const std::string& text)
{
  const auto j = nlohmann::json::parse(text);
  const auto& anchors = j.at("anchors");
  std::vector<CalibrationParams> out(anchors.size());
  std::vector<bool> seen(anchors.size(), false);
  for (const auto& a : anchors) {
    const auto idx = a.at("index").get<std::size_t>();
    if (idx >= out.size() || seen[idx]) {
      throw std::invalid_argument("calibration indices must be unique and contiguous from 0");
    }
    seen[idx] = true;
    out[idx] = { a.at("alpha").get<double>(), a.at("beta").get<double>(), a.at("gamma").get<double>() };
  }
  return out;
}

void save_calibration(const std::string& path, const std::vector<CalibrationParams>& params)
{
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write calibration file: " + path);
  }
  out << calibration_to_json(params) << '\n';
}

std::vector<CalibrationParams> load_calibration(const std::string& path)
{
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open calibration file: " + path);
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return calibration_from_json(ss.str());
}

}  // namespace uwbloc
