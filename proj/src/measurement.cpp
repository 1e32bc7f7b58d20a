#include "uwbloc/measurement.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "uwbloc/calibration.hpp"

namespace uwbloc {

std::vector<AnchorPair> make_pairs(PairingScheme scheme, std::size_t anchor_count)
{
  std::vector<AnchorPair> pairs;
  if (scheme == PairingScheme::Reference) {
    for (std::size_t j = 1; j < anchor_count; ++j) pairs.emplace_back(0, j);
  } else {
    for (std::size_t i = 0; i < anchor_count; ++i)
      for (std::size_t j = i + 1; j < anchor_count; ++j) pairs.emplace_back(i, j);
  }
  return pairs;
}

void NoiseModel::validate() const
{
  for (double s : { sigma_t, sigma_theta, sigma_twr, sigma_aoa }) {
    if (!(s >= 0.0) || !std::isfinite(s)) {
      throw std::invalid_argument("noise standard deviations must be finite and >= 0");
    }
  }
}

namespace {

void check_pair(const AnchorArray& array, std::size_t i, std::size_t j)
{
  array.check_index(i);
  array.check_index(j);
  if (i == j) {
    throw std::invalid_argument("a measurement pair needs two distinct anchors");
  }
}

}  // namespace

double expected_tdoa(const Position& p, const AnchorArray& array, std::size_t i, std::size_t j)
{
  check_pair(array, i, j);
  return (distance(p, array[i]) - distance(p, array[j])) / kSpeedOfLight;
}

double expected_pdoa(const Position& p, const AnchorArray& array, std::size_t i, std::size_t j)
{
  check_pair(array, i, j);
  const double dd = distance(p, array[i]) - distance(p, array[j]);
  return wrap_phase(kTwoPi * dd / array.wavelength());
}

double far_field_pdoa(double theta, double spacing, double wavelength)
{
  return kTwoPi * spacing / wavelength * std::sin(theta);
}

double expected_twr(const Position& p, const Position& anchor)
{
  return distance(p, anchor) / kSpeedOfLight;
}

double expected_aoa(const Position& p, const Position& pair_center, const Vec2& normal)
{
  const Vec2 n = normalized(normal);
  const Vec2 t{ n.y, -n.x };
  const Vec2 v = p - pair_center;
  return std::atan2(dot(v, t), dot(v, n));
}

std::pair<Position, Vec2> pair_frame(const AnchorArray& array, const AnchorPair& pair)
{
  check_pair(array, pair.first, pair.second);
  const Position a = array[pair.first];
  const Position b = array[pair.second];
  return { 0.5 * (a + b), perp(normalized(b - a)) };
}

MeasurementSet sample_measurements(const Position& p, const AnchorArray& array,
                                   const std::vector<AnchorPair>& pairs, const NoiseModel& noise,
                                   RandomStream& rng, const SampleOptions& options)
{
  noise.validate();
  const std::size_t n = array.size();
  if (options.hardware_bias && options.hardware_bias->size() != n) {
    throw std::invalid_argument("hardware bias must have one entry per anchor");
  }

  std::vector<double> dist(n);
  for (std::size_t k = 0; k < n; ++k) dist[k] = distance(p, array[k]);

  // Raw per-anchor carrier phase (unwrapped), including any simulated hardware bias.
  std::vector<double> phase(n);
  for (std::size_t k = 0; k < n; ++k) {
    phase[k] = kTwoPi * dist[k] / array.wavelength();
    if (options.hardware_bias) phase[k] -= phase_bias(dist[k], (*options.hardware_bias)[k]);
  }

  MeasurementSet m;
  m.pairs = pairs;
  m.noise = noise;
  m.tdoa.reserve(pairs.size());
  m.pdoa.reserve(pairs.size());

  std::vector<double> tdoa_noise(pairs.size());
  std::vector<double> pdoa_noise(pairs.size());
  for (auto& e : tdoa_noise) e = rng.normal(noise.sigma_t);
  for (auto& e : pdoa_noise) e = rng.normal(noise.sigma_theta);
  std::vector<double> twr_noise(options.with_twr ? n : 0);
  for (auto& e : twr_noise) e = rng.normal(noise.sigma_twr);
  std::vector<double> aoa_noise(options.aoa_pairs.size());
  for (auto& e : aoa_noise) e = rng.normal(noise.sigma_aoa);

  // Optional non-direct-path delays: lengthen the timing path only.
  std::vector<double> timing_dist = dist;
  if (options.outlier_probability > 0.0) {
    for (std::size_t k = 0; k < n; ++k) {
      if (rng.bernoulli(options.outlier_probability)) {
        timing_dist[k] += rng.uniform(0.0, options.outlier_max_extra_path);
      }
    }
  }

  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto [i, j] = pairs[k];
    check_pair(array, i, j);
    m.tdoa.push_back((timing_dist[i] - timing_dist[j]) / kSpeedOfLight + tdoa_noise[k]);
    m.pdoa.push_back(wrap_phase(phase[i] - phase[j] + pdoa_noise[k]));
  }
  if (options.with_twr) {
    std::vector<double> twr(n);
    for (std::size_t k = 0; k < n; ++k) twr[k] = timing_dist[k] / kSpeedOfLight + twr_noise[k];
    m.twr = std::move(twr);
  }
  for (std::size_t k = 0; k < options.aoa_pairs.size(); ++k) {
    const auto [center, normal] = pair_frame(array, options.aoa_pairs[k]);
    m.aoa.push_back({ options.aoa_pairs[k], expected_aoa(p, center, normal) + aoa_noise[k] });
  }
  return m;
}

void OscillatorSpec::validate() const
{
  for (double f : { f_osc, f_s, f_t, delta_f }) {
    if (!(f > 0.0) || !std::isfinite(f)) {
      throw std::invalid_argument("oscillator frequencies must be positive");
    }
  }
  if (phase_noise.empty()) {
    throw std::invalid_argument("phase-noise table is empty");
  }
  for (const auto& row : phase_noise) {
    if (!(row.offset_hz > 0.0)) {
      throw std::invalid_argument("phase-noise offsets must be positive");
    }
  }
}

double OscillatorSpec::phase_noise_at(double offset_hz) const
{
  if (phase_noise.empty()) {
    throw std::invalid_argument("phase-noise table is empty");
  }
  auto rows = phase_noise;
  std::sort(rows.begin(), rows.end(),
            [](const auto& a, const auto& b) { return a.offset_hz < b.offset_hz; });
  for (const auto& row : rows) {
    if (row.offset_hz == offset_hz) return row.dbc_per_hz;
  }
  if (offset_hz < rows.front().offset_hz || offset_hz > rows.back().offset_hz) {
    throw std::out_of_range("offset outside the phase-noise table");
  }
  auto hi = std::upper_bound(rows.begin(), rows.end(), offset_hz,
                             [](double f, const auto& r) { return f < r.offset_hz; });
  auto lo = hi - 1;
  const double t = (std::log10(offset_hz) - std::log10(lo->offset_hz)) /
                   (std::log10(hi->offset_hz) - std::log10(lo->offset_hz));
  return lo->dbc_per_hz + t * (hi->dbc_per_hz - lo->dbc_per_hz);
}

OscillatorSpec OscillatorSpec::from_json_text(const std::string& text)
{
  const auto j = nlohmann::json::parse(text);
  OscillatorSpec spec;
  spec.f_osc = j.value("f_osc", spec.f_osc);
  spec.f_s = j.value("f_s", spec.f_s);
  spec.f_t = j.value("f_t", spec.f_t);
  spec.delta_f = j.value("delta_f", spec.delta_f);
  for (const auto& row : j.at("phase_noise")) {
    spec.phase_noise.push_back({ row.at("offset_hz").get<double>(), row.at("dbc_per_hz").get<double>() });
  }
  spec.validate();
  return spec;
}

OscillatorSpec OscillatorSpec::load(const std::string& path)
{
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open oscillator config: " + path);
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

OscillatorSpec crystek_oscillator()
{
  OscillatorSpec spec;
  spec.phase_noise = { { 100.0, -115.0 }, { 100e3, -160.0 } };
  return spec;
}

OscillatorSpec abracon_oscillator()
{
  OscillatorSpec spec;
  spec.phase_noise = { { 100.0, -109.0 }, { 100e3, -150.0 } };
  return spec;
}

double jitter_sigma(const OscillatorSpec& spec, double offset_hz)
{
  spec.validate();
  const double n_linear = std::pow(10.0, spec.phase_noise_at(offset_hz) / 10.0);
  return std::sqrt(2.0) / (kTwoPi * spec.f_osc) * std::sqrt(spec.delta_f * n_linear);
}

PhaseTimeSigmas phase_time_sigmas(const OscillatorSpec& spec, double jitter, double wavelength)
{
  if (!(jitter >= 0.0)) {
    throw std::invalid_argument("jitter must be non-negative");
  }
  return { kSpeedOfLight / wavelength * spec.f_osc / (kTwoPi * spec.f_s) * jitter,
           spec.f_osc / spec.f_t * jitter };
}

}  // namespace uwbloc
