#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "uwbloc/estimator.hpp"
#include "uwbloc/geometry.hpp"
#include "uwbloc/measurement.hpp"
#include "uwbloc/particle_filter.hpp"

namespace uwbloc {

enum class EstimatorKind
{
  Twr,
  Tdoa,
  Aoa,
  Fused,
  XrlocGrid,
  XrlocPf,
};

std::string to_string(EstimatorKind kind);
EstimatorKind parse_estimator_kind(const std::string& name);

std::string to_string(Modality modality);
Modality parse_modality(const std::string& name);

std::string to_string(PairingScheme scheme);
PairingScheme parse_pairing(const std::string& name);

enum class LayoutKind
{
  Diverse,
  Paired,
  Ula,
  Coprime,
};

std::string to_string(LayoutKind kind);
LayoutKind parse_layout_kind(const std::string& name);

struct LayoutSpec
{
  LayoutKind kind{ LayoutKind::Ula };
  int count{ 6 };
  double aperture{ 1.0 };                 // m
  Position center{ 1.5, 0.0 };
  Vec2 axis{ 1.0, 0.0 };
  std::pair<int, int> coprime{ 3, 4 };
  double inset{ 0.1 };                    // m, diverse layout only
};

AnchorArray build_layout(const LayoutSpec& layout, const Environment& env);

/// Noise levels in configuration units; converted to SI by model().
struct NoiseSpec
{
  double sigma_t_ps{ 150.0 };
  double sigma_theta_deg{ 5.0 };
  double sigma_twr_ps{ 0.0 };
  double sigma_aoa_deg{ 0.0 };

  NoiseModel model() const;
};

/// Ranges per-anchor hardware biases are drawn from (uniform).
struct BiasRanges
{
  std::pair<double, double> alpha{ -1.0, 1.0 };  // rad
  std::pair<double, double> beta{ 0.0, 1.0 };
  std::pair<double, double> gamma{ 0.5, 1.5 };

  HardwareBias draw(std::size_t anchors, RandomStream& rng) const;
};

enum class TrajectoryKind
{
  Static,
  Line,
  Rectangle,
  FigureEight,
  File,
};

std::string to_string(TrajectoryKind kind);
TrajectoryKind parse_trajectory_kind(const std::string& name);

struct TrajectoryPoint
{
  double t{ 0.0 };  // s
  Position p;
};

struct TrajectorySpec
{
  TrajectoryKind kind{ TrajectoryKind::Static };
  Position start{ 1.0, 1.0 };
  Position end{ 2.0, 2.0 };   // line end, or opposite rectangle corner
  Position center{ 1.5, 1.5 };
  double radius{ 0.6 };       // m, figure-eight half width
  double duration{ 2.0 };     // s
  double rate{ 100.0 };       // Hz, packet rate
  std::string path;           // CSV "t,x,y" for File

  std::vector<TrajectoryPoint> build() const;
};

/// Everything one Monte-Carlo study needs. Plain data; to_json()/from_json() round-trip.
struct Scenario
{
  std::string name{ "xrloc" };
  double room_width{ 3.0 };
  double room_height{ 3.0 };
  LayoutSpec layout;
  NoiseSpec noise;
  EstimatorKind estimator{ EstimatorKind::XrlocGrid };
  Modality modality{ Modality::Fused };
  PairingScheme pairing{ PairingScheme::Reference };
  bool use_calibration{ true };
  /// Explicit TDoA pairs for the baselines; empty means the pairing scheme's list.
  std::vector<AnchorPair> tdoa_pairs;
  std::vector<AnchorPair> aoa_pairs;
  int trials{ 50 };
  double grid_res{ 0.05 };     // m, evaluation grid
  double search_res{ 0.01 };   // m, estimator grid
  bool refine{ true };
  std::uint64_t seed{ 1 };
  std::optional<BiasRanges> bias;
  int pf_updates{ 5 };
  ParticleFilterOptions pf;
  std::optional<TrajectorySpec> trajectory;

  Environment environment() const { return { room_width, room_height }; }
  AnchorArray array() const { return build_layout(layout, environment()); }
  std::vector<AnchorPair> measurement_pairs() const;
  LikelihoodSpec likelihood() const;

  /// Throws std::invalid_argument for unusable settings.
  void validate() const;

  nlohmann::json to_json() const;
  static Scenario from_json(const nlohmann::json& j);
  static Scenario load(const std::string& path);

  /// FNV-1a 64 of the canonical JSON dump, as 16 hex digits.
  std::string digest() const;
};

std::uint64_t fnv1a64(const std::string& bytes);

/// Reads a whole file; throws std::runtime_error when it cannot be opened.
std::string read_text_file(const std::string& path);

/// Named scenarios of the GDOP comparison.
Scenario twr_diverse_scenario();
Scenario twr_constrained_scenario();
Scenario tdoa_constrained_scenario();
Scenario aoa_constrained_scenario();
Scenario fused_constrained_scenario();
Scenario xrloc_scenario();
std::vector<Scenario> gdop_scenarios();

}  // namespace uwbloc
