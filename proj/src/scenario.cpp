#include "uwbloc/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

namespace uwbloc {

namespace {

std::string lower(std::string s)
{
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  std::replace(s.begin(), s.end(), '_', '-');
  return s;
}

template <typename E, std::size_t N>
E parse_enum(const std::string& name, const std::pair<const char*, E> (&table)[N], const char* what)
{
  const std::string key = lower(name);
  for (const auto& [text, value] : table) {
    if (key == text) return value;
  }
  throw std::invalid_argument(fmt::format("unknown {}: {}", what, name));
}

template <typename E, std::size_t N>
std::string enum_name(E value, const std::pair<const char*, E> (&table)[N])
{
  for (const auto& [text, v] : table) {
    if (v == value) return text;
  }
  return "unknown";
}

constexpr std::pair<const char*, EstimatorKind> kEstimators[] = {
  { "twr", EstimatorKind::Twr },         { "tdoa", EstimatorKind::Tdoa },
  { "aoa", EstimatorKind::Aoa },         { "fused", EstimatorKind::Fused },
  { "xrloc-grid", EstimatorKind::XrlocGrid }, { "xrloc-pf", EstimatorKind::XrlocPf },
};
constexpr std::pair<const char*, Modality> kModalities[] = {
  { "fused", Modality::Fused }, { "tdoa-only", Modality::TdoaOnly }, { "pdoa-only", Modality::PdoaOnly },
};
constexpr std::pair<const char*, PairingScheme> kPairings[] = {
  { "reference", PairingScheme::Reference }, { "all-pairs", PairingScheme::AllPairs },
};
constexpr std::pair<const char*, LayoutKind> kLayouts[] = {
  { "diverse", LayoutKind::Diverse }, { "paired", LayoutKind::Paired },
  { "ula", LayoutKind::Ula },         { "coprime", LayoutKind::Coprime },
};
constexpr std::pair<const char*, TrajectoryKind> kTrajectories[] = {
  { "static", TrajectoryKind::Static },       { "line", TrajectoryKind::Line },
  { "rectangle", TrajectoryKind::Rectangle }, { "figure-eight", TrajectoryKind::FigureEight },
  { "file", TrajectoryKind::File },
};

nlohmann::json vec_json(const Vec2& v)
{
  return nlohmann::json::array({ v.x, v.y });
}

Vec2 vec_from(const nlohmann::json& j)
{
  if (!j.is_array() || j.size() != 2) throw std::invalid_argument("expected a [x, y] pair");
  return { j[0].get<double>(), j[1].get<double>() };
}

nlohmann::json pairs_json(const std::vector<AnchorPair>& pairs)
{
  auto out = nlohmann::json::array();
  for (const auto& [i, j] : pairs) out.push_back({ i, j });
  return out;
}

std::vector<AnchorPair> pairs_from(const nlohmann::json& j)
{
  std::vector<AnchorPair> out;
  for (const auto& p : j) out.emplace_back(p.at(0).get<std::size_t>(), p.at(1).get<std::size_t>());
  return out;
}

nlohmann::json range_json(const std::pair<double, double>& r)
{
  return nlohmann::json::array({ r.first, r.second });
}

std::pair<double, double> range_from(const nlohmann::json& j)
{
  const Vec2 v = vec_from(j);
  return { v.x, v.y };
}

}  // namespace

std::string to_string(EstimatorKind kind) { return enum_name(kind, kEstimators); }
EstimatorKind parse_estimator_kind(const std::string& name) { return parse_enum(name, kEstimators, "estimator"); }
std::string to_string(Modality modality) { return enum_name(modality, kModalities); }
Modality parse_modality(const std::string& name) { return parse_enum(name, kModalities, "modality"); }
std::string to_string(PairingScheme scheme) { return enum_name(scheme, kPairings); }
PairingScheme parse_pairing(const std::string& name) { return parse_enum(name, kPairings, "pairing"); }
std::string to_string(LayoutKind kind) { return enum_name(kind, kLayouts); }
LayoutKind parse_layout_kind(const std::string& name) { return parse_enum(name, kLayouts, "layout"); }
std::string to_string(TrajectoryKind kind) { return enum_name(kind, kTrajectories); }
TrajectoryKind parse_trajectory_kind(const std::string& name)
{
  return parse_enum(name, kTrajectories, "trajectory");
}

AnchorArray build_layout(const LayoutSpec& layout, const Environment& env)
{
  switch (layout.kind) {
  case LayoutKind::Diverse: return diverse_layout(env, layout.inset);
  case LayoutKind::Paired: return paired_layout(env, layout.aperture);
  case LayoutKind::Ula: return make_ula(layout.count, layout.aperture, layout.center, layout.axis);
  case LayoutKind::Coprime:
    return make_coprime(layout.count, layout.aperture, layout.center, layout.axis, layout.coprime);
  }
  throw std::invalid_argument("unknown layout kind");
}

NoiseModel NoiseSpec::model() const
{
  NoiseModel m;
  m.sigma_t = sigma_t_ps * 1e-12;
  m.sigma_theta = deg2rad(sigma_theta_deg);
  m.sigma_twr = sigma_twr_ps * 1e-12;
  m.sigma_aoa = deg2rad(sigma_aoa_deg);
  return m;
}

HardwareBias BiasRanges::draw(std::size_t anchors, RandomStream& rng) const
{
  HardwareBias out(anchors);
  for (auto& p : out) {
    p.alpha = rng.uniform(alpha.first, alpha.second);
    p.beta = rng.uniform(beta.first, beta.second);
    p.gamma = rng.uniform(gamma.first, gamma.second);
  }
  return out;
}

std::vector<TrajectoryPoint> TrajectorySpec::build() const
{
  if (kind == TrajectoryKind::File) {
    std::istringstream in(read_text_file(path));
    std::vector<TrajectoryPoint> out;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#' || std::isalpha(static_cast<unsigned char>(line[0]))) continue;
      std::replace(line.begin(), line.end(), ',', ' ');
      std::istringstream row(line);
      TrajectoryPoint tp;
      if (!(row >> tp.t >> tp.p.x >> tp.p.y)) throw std::invalid_argument("bad trajectory row: " + line);
      out.push_back(tp);
    }
    if (out.empty()) throw std::invalid_argument("trajectory file has no rows: " + path);
    return out;
  }
  if (!(rate > 0.0) || !(duration >= 0.0)) throw std::invalid_argument("trajectory needs rate > 0, duration >= 0");
  const auto n = static_cast<std::size_t>(std::max(1.0, std::round(duration * rate)));
  std::vector<TrajectoryPoint> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) / rate;
    const double s = n > 1 ? static_cast<double>(k) / static_cast<double>(n - 1) : 0.0;
    Position p = start;
    switch (kind) {
    case TrajectoryKind::Static: break;
    case TrajectoryKind::Line: p = start + s * (end - start); break;
    case TrajectoryKind::Rectangle: {
      const double w = std::abs(end.x - start.x), h = std::abs(end.y - start.y);
      const double sx = end.x >= start.x ? 1.0 : -1.0, sy = end.y >= start.y ? 1.0 : -1.0;
      double d = s * 2.0 * (w + h);
      if (d <= w) p = { start.x + sx * d, start.y };
      else if ((d -= w) <= h) p = { end.x, start.y + sy * d };
      else if ((d -= h) <= w) p = { end.x - sx * d, end.y };
      else p = { start.x, end.y - sy * (d - w) };
      break;
    }
    case TrajectoryKind::FigureEight: {
      const double a = kTwoPi * s;
      p = { center.x + radius * std::sin(a), center.y + 0.5 * radius * std::sin(2.0 * a) };
      break;
    }
    case TrajectoryKind::File: break;
    }
    out[k] = { t, p };
  }
  return out;
}

std::vector<AnchorPair> Scenario::measurement_pairs() const
{
  if (!tdoa_pairs.empty()) return tdoa_pairs;
  return make_pairs(pairing, array().size());
}

LikelihoodSpec Scenario::likelihood() const
{
  const NoiseModel m = noise.model();
  LikelihoodSpec spec;
  spec.sigma_t = m.sigma_t;
  spec.sigma_theta = m.sigma_theta;
  spec.pairing = pairing;
  spec.use_calibration = use_calibration;
  spec.modality = modality;
  return spec;
}

void Scenario::validate() const
{
  const Environment env = environment();
  const AnchorArray a = array();
  noise.model().validate();
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  if (!(grid_res > 0.0) || !(search_res > 0.0)) throw std::invalid_argument("grid resolutions must be positive");
  if (pf_updates < 1) throw std::invalid_argument("pf_updates must be >= 1");
  pf.validate();
  for (const auto& list : { tdoa_pairs, aoa_pairs }) {
    for (const auto& [i, j] : list) {
      a.check_index(i);
      a.check_index(j);
      if (i == j) throw std::invalid_argument("a pair needs two distinct anchors");
    }
  }
  switch (estimator) {
  case EstimatorKind::Twr:
    if (a.size() < 3) throw std::invalid_argument("TWR needs three anchors");
    break;
  case EstimatorKind::Aoa:
    if (aoa_pairs.size() < 2) throw std::invalid_argument("AoA needs at least two aoa_pairs");
    break;
  case EstimatorKind::XrlocGrid:
  case EstimatorKind::XrlocPf:
    if (!tdoa_pairs.empty()) throw std::invalid_argument("XRLoc estimators use the pairing scheme, not tdoa_pairs");
    if (noise.sigma_t_ps <= 0.0 || noise.sigma_theta_deg <= 0.0) {
      throw std::invalid_argument("XRLoc estimators need positive sigma_t and sigma_theta");
    }
    break;
  default: break;
  }
  if (trajectory && trajectory->kind != TrajectoryKind::File) trajectory->build();
  (void)env;
}

nlohmann::json Scenario::to_json() const
{
  nlohmann::json j;
  j["name"] = name;
  j["room"] = nlohmann::json::array({ room_width, room_height });
  j["layout"] = { { "kind", to_string(layout.kind) },     { "count", layout.count },
                  { "aperture", layout.aperture },         { "center", vec_json(layout.center) },
                  { "axis", vec_json(layout.axis) },       { "coprime", { layout.coprime.first, layout.coprime.second } },
                  { "inset", layout.inset } };
  j["noise"] = { { "sigma_t_ps", noise.sigma_t_ps },
                 { "sigma_theta_deg", noise.sigma_theta_deg },
                 { "sigma_twr_ps", noise.sigma_twr_ps },
                 { "sigma_aoa_deg", noise.sigma_aoa_deg } };
  j["estimator"] = to_string(estimator);
  j["modality"] = to_string(modality);
  j["pairing"] = to_string(pairing);
  j["use_calibration"] = use_calibration;
  j["tdoa_pairs"] = pairs_json(tdoa_pairs);
  j["aoa_pairs"] = pairs_json(aoa_pairs);
  j["trials"] = trials;
  j["grid_res"] = grid_res;
  j["search_res"] = search_res;
  j["refine"] = refine;
  j["seed"] = seed;
  if (bias) {
    j["bias"] = { { "alpha", range_json(bias->alpha) },
                  { "beta", range_json(bias->beta) },
                  { "gamma", range_json(bias->gamma) } };
  }
  j["pf_updates"] = pf_updates;
  j["pf"] = { { "density", pf.density },
              { "min_count", pf.min_count },
              { "particles_per_meter", pf.particles_per_meter },
              { "adaptive", pf.adaptive },
              { "process_noise", pf.process_noise },
              { "resample_fraction", pf.resample_fraction },
              { "divergence_patience", pf.divergence_patience },
              { "divergence_quantile", pf.divergence_quantile },
              { "tempered_start", pf.tempered_start },
              { "move_sweeps", pf.move_sweeps } };
  if (trajectory) {
    j["trajectory"] = { { "kind", to_string(trajectory->kind) },
                        { "start", vec_json(trajectory->start) },
                        { "end", vec_json(trajectory->end) },
                        { "center", vec_json(trajectory->center) },
                        { "radius", trajectory->radius },
                        { "duration", trajectory->duration },
                        { "rate", trajectory->rate },
                        { "path", trajectory->path } };
  }
  return j;
}

Scenario Scenario::from_json(const nlohmann::json& j)
{
  Scenario s;
  s.name = j.value("name", s.name);
  if (j.contains("room")) {
    const Vec2 r = vec_from(j.at("room"));
    s.room_width = r.x;
    s.room_height = r.y;
  }
  if (j.contains("layout")) {
    const auto& l = j.at("layout");
    if (l.contains("kind")) s.layout.kind = parse_layout_kind(l.at("kind").get<std::string>());
    s.layout.count = l.value("count", s.layout.count);
    s.layout.aperture = l.value("aperture", s.layout.aperture);
    if (l.contains("center")) s.layout.center = vec_from(l.at("center"));
    if (l.contains("axis")) s.layout.axis = vec_from(l.at("axis"));
    if (l.contains("coprime")) {
      s.layout.coprime = { l.at("coprime").at(0).get<int>(), l.at("coprime").at(1).get<int>() };
    }
    s.layout.inset = l.value("inset", s.layout.inset);
  }
  if (j.contains("noise")) {
    const auto& n = j.at("noise");
    s.noise.sigma_t_ps = n.value("sigma_t_ps", s.noise.sigma_t_ps);
    s.noise.sigma_theta_deg = n.value("sigma_theta_deg", s.noise.sigma_theta_deg);
    s.noise.sigma_twr_ps = n.value("sigma_twr_ps", s.noise.sigma_twr_ps);
    s.noise.sigma_aoa_deg = n.value("sigma_aoa_deg", s.noise.sigma_aoa_deg);
  }
  if (j.contains("estimator")) s.estimator = parse_estimator_kind(j.at("estimator").get<std::string>());
  if (j.contains("modality")) s.modality = parse_modality(j.at("modality").get<std::string>());
  if (j.contains("pairing")) s.pairing = parse_pairing(j.at("pairing").get<std::string>());
  s.use_calibration = j.value("use_calibration", s.use_calibration);
  if (j.contains("tdoa_pairs")) s.tdoa_pairs = pairs_from(j.at("tdoa_pairs"));
  if (j.contains("aoa_pairs")) s.aoa_pairs = pairs_from(j.at("aoa_pairs"));
  s.trials = j.value("trials", s.trials);
  s.grid_res = j.value("grid_res", s.grid_res);
  s.search_res = j.value("search_res", s.search_res);
  s.refine = j.value("refine", s.refine);
  s.seed = j.value("seed", s.seed);
  if (j.contains("bias") && !j.at("bias").is_null()) {
    const auto& b = j.at("bias");
    BiasRanges r;
    if (b.contains("alpha")) r.alpha = range_from(b.at("alpha"));
    if (b.contains("beta")) r.beta = range_from(b.at("beta"));
    if (b.contains("gamma")) r.gamma = range_from(b.at("gamma"));
    s.bias = r;
  }
  s.pf_updates = j.value("pf_updates", s.pf_updates);
  if (j.contains("pf")) {
    const auto& p = j.at("pf");
    s.pf.density = p.value("density", s.pf.density);
    s.pf.min_count = p.value("min_count", s.pf.min_count);
    s.pf.particles_per_meter = p.value("particles_per_meter", s.pf.particles_per_meter);
    s.pf.adaptive = p.value("adaptive", s.pf.adaptive);
    s.pf.process_noise = p.value("process_noise", s.pf.process_noise);
    s.pf.resample_fraction = p.value("resample_fraction", s.pf.resample_fraction);
    s.pf.divergence_patience = p.value("divergence_patience", s.pf.divergence_patience);
    s.pf.divergence_quantile = p.value("divergence_quantile", s.pf.divergence_quantile);
    s.pf.tempered_start = p.value("tempered_start", s.pf.tempered_start);
    s.pf.move_sweeps = p.value("move_sweeps", s.pf.move_sweeps);
  }
  if (j.contains("trajectory") && !j.at("trajectory").is_null()) {
    const auto& t = j.at("trajectory");
    TrajectorySpec tr;
    if (t.contains("kind")) tr.kind = parse_trajectory_kind(t.at("kind").get<std::string>());
    if (t.contains("start")) tr.start = vec_from(t.at("start"));
    if (t.contains("end")) tr.end = vec_from(t.at("end"));
    if (t.contains("center")) tr.center = vec_from(t.at("center"));
    tr.radius = t.value("radius", tr.radius);
    tr.duration = t.value("duration", tr.duration);
    tr.rate = t.value("rate", tr.rate);
    tr.path = t.value("path", tr.path);
    s.trajectory = tr;
  }
  s.validate();
  return s;
}

Scenario Scenario::load(const std::string& path)
{
  return from_json(nlohmann::json::parse(read_text_file(path)));
}

std::uint64_t fnv1a64(const std::string& bytes)
{
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string Scenario::digest() const
{
  return fmt::format("{:016x}", fnv1a64(to_json().dump()));
}

std::string read_text_file(const std::string& path)
{
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

Scenario twr_diverse_scenario()
{
  Scenario s;
  s.name = "twr-diverse";
  s.layout.kind = LayoutKind::Diverse;
  s.noise = { 0.0, 0.0, 150.0, 0.0 };
  s.estimator = EstimatorKind::Twr;
  return s;
}

Scenario twr_constrained_scenario()
{
  Scenario s = twr_diverse_scenario();
  s.name = "twr-constrained";
  s.layout.kind = LayoutKind::Paired;
  return s;
}

Scenario tdoa_constrained_scenario()
{
  Scenario s;
  s.name = "tdoa-constrained";
  s.layout.kind = LayoutKind::Paired;
  s.noise = { 140.0, 0.0, 0.0, 0.0 };
  s.estimator = EstimatorKind::Tdoa;
  return s;
}

Scenario aoa_constrained_scenario()
{
  Scenario s;
  s.name = "aoa-constrained";
  s.layout.kind = LayoutKind::Paired;
  s.noise = { 0.0, 0.0, 0.0, 1.5 };
  s.estimator = EstimatorKind::Aoa;
  s.aoa_pairs = { { 0, 1 }, { 2, 3 }, { 4, 5 } };
  return s;
}

Scenario fused_constrained_scenario()
{
  Scenario s;
  s.name = "fused-constrained";
  s.layout.kind = LayoutKind::Paired;
  s.noise = { 140.0, 0.0, 150.0, 1.5 };
  s.estimator = EstimatorKind::Fused;
  s.tdoa_pairs = { { 0, 2 }, { 0, 4 }, { 2, 4 } };
  s.aoa_pairs = { { 0, 1 }, { 2, 3 }, { 4, 5 } };
  return s;
}

Scenario xrloc_scenario()
{
  Scenario s;
  s.name = "xrloc";
  return s;
}

std::vector<Scenario> gdop_scenarios()
{
  return { twr_diverse_scenario(),      twr_constrained_scenario(), tdoa_constrained_scenario(),
           aoa_constrained_scenario(),  fused_constrained_scenario(), xrloc_scenario() };
}

}  // namespace uwbloc
