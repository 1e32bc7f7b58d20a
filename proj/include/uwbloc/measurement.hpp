#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "uwbloc/geometry.hpp"
#include "uwbloc/random.hpp"

namespace uwbloc {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Phase quantization step of the receiver (8-bit phase). Not applied to synthetic data.
inline constexpr double kPhaseResolutionDeg = 1.4;

inline constexpr double deg2rad(double deg) { return deg * kPi / 180.0; }
inline constexpr double rad2deg(double rad) { return rad * 180.0 / kPi; }

/// Wraps an angle to [-pi, pi).
inline double wrap_phase(double phase)
{
  double w = phase - kTwoPi * std::floor((phase + kPi) / kTwoPi);
  // floor() rounding can land exactly on +pi for inputs just below an odd multiple of pi
  return w >= kPi ? w - kTwoPi : w;
}

using AnchorPair = std::pair<std::size_t, std::size_t>;

/// Which anchor pairs feed the TDoA/PDoA model.
enum class PairingScheme
{
  Reference,  // (0, j) for j = 1..N-1
  AllPairs,   // (i, j) for i < j
};

std::vector<AnchorPair> make_pairs(PairingScheme scheme, std::size_t anchor_count);

/// Zero-mean Gaussian noise levels; zero disables a term.
struct NoiseModel
{
  double sigma_t{ 0.0 };      // TDoA std, s
  double sigma_theta{ 0.0 };  // PDoA std, rad
  double sigma_twr{ 0.0 };    // TWR time-of-flight std, s
  double sigma_aoa{ 0.0 };    // AoA std, rad

  /// Throws std::invalid_argument for negative or non-finite entries.
  void validate() const;
};

/// One AoA observation from a closely spaced anchor pair.
struct AoaObservation
{
  AnchorPair pair;
  double angle{ 0.0 };  // rad, see expected_aoa()
};

/// One packet's worth of measurements.
struct MeasurementSet
{
  std::vector<AnchorPair> pairs;
  std::vector<double> tdoa;  // s, per pair
  std::vector<double> pdoa;  // rad in [-pi, pi), per pair
  std::optional<std::vector<double>> twr;  // s, per anchor
  std::vector<AoaObservation> aoa;
  NoiseModel noise;
};

double expected_tdoa(const Position& p, const AnchorArray& array, std::size_t i, std::size_t j);

/// Exact (near-field) phase difference, wrapped to [-pi, pi).
double expected_pdoa(const Position& p, const AnchorArray& array, std::size_t i, std::size_t j);

/// Unwrapped far-field phase difference for a pair of spacing d at arrival angle theta.
double far_field_pdoa(double theta, double spacing, double wavelength);

double expected_twr(const Position& p, const Position& anchor);

/// Signed angle of (p - pair_center) from `normal`; positive toward normal rotated -90 deg
/// (i.e. toward +x for a +y normal).
double expected_aoa(const Position& p, const Position& pair_center, const Vec2& normal);

/// Center and inward normal (axis rotated +90 deg) of an anchor pair.
std::pair<Position, Vec2> pair_frame(const AnchorArray& array, const AnchorPair& pair);

/// Per-anchor phase bias applied by simulated hardware: raw phase = ideal - bias(d).
using HardwareBias = std::vector<CalibrationParams>;

struct SampleOptions
{
  bool with_twr{ false };
  std::vector<AnchorPair> aoa_pairs;
  std::optional<HardwareBias> hardware_bias;
  /// Probability that an anchor sees an extra (non-direct-path) delay; off by default.
  double outlier_probability{ 0.0 };
  /// Maximum extra path length of an outlier, m.
  double outlier_max_extra_path{ 0.30 };
};

/// Expected values plus independent zero-mean Gaussian noise; deterministic for a fixed stream.
MeasurementSet sample_measurements(const Position& p, const AnchorArray& array,
                                   const std::vector<AnchorPair>& pairs, const NoiseModel& noise,
                                   RandomStream& rng, const SampleOptions& options = {});

/// Oscillator phase-noise description used for the clock-jitter noise budget.
struct OscillatorSpec
{
  struct PhaseNoisePoint
  {
    double offset_hz;
    double dbc_per_hz;
  };

  double f_osc{ 38.4e6 };   // Hz
  double f_s{ 1.0e9 };      // Hz, sampling frequency
  double f_t{ 63.8976e9 };  // Hz, timestamp clock
  double delta_f{ 499.2e6 };  // Hz, measurement bandwidth
  std::vector<PhaseNoisePoint> phase_noise;

  void validate() const;

  /// Phase noise in dBc/Hz at `offset_hz`, log-linear in log10(offset) between table rows.
  /// Throws std::out_of_range outside the table.
  double phase_noise_at(double offset_hz) const;

  /// Parses {"f_osc":..,"f_s":..,"f_t":..,"delta_f":..,"phase_noise":[{"offset_hz":..,
  /// "dbc_per_hz":..},..]}.
  static OscillatorSpec from_json_text(const std::string& text);
  static OscillatorSpec load(const std::string& path);
};

/// Crystek-class 38.4 MHz reference (-115 dBc/Hz at 100 Hz, -160 dBc/Hz at 100 kHz).
OscillatorSpec crystek_oscillator();
/// Abracon-class reference (-109 dBc/Hz at 100 Hz, -150 dBc/Hz at 100 kHz).
OscillatorSpec abracon_oscillator();

/// Clock jitter std: sqrt(2) / (2 pi f_osc) * sqrt(delta_f * N_phi_linear(offset)).
double jitter_sigma(const OscillatorSpec& spec, double offset_hz);

struct PhaseTimeSigmas
{
  double sigma_phi;  // rad
  double sigma_t;    // s
};

/// sigma_phi = (c / lambda) * f_osc / (2 pi f_s) * jitter; sigma_t = f_osc / f_t * jitter.
PhaseTimeSigmas phase_time_sigmas(const OscillatorSpec& spec, double jitter, double wavelength);

}  // namespace uwbloc
