#include "uwbloc/geometry.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <stdexcept>

namespace uwbloc {

Vec2 normalized(const Vec2& v)
{
  const double n = norm(v);
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw std::invalid_argument("cannot normalize a zero or non-finite vector");
  }
  return { v.x / n, v.y / n };
}

Environment::Environment(double width, double height) : width_(width), height_(height)
{
  if (!(width > 0.0) || !(height > 0.0) || !std::isfinite(width) || !std::isfinite(height)) {
    throw std::invalid_argument("environment sides must be positive and finite");
  }
}

Position Environment::clamp(const Position& p) const
{
  return { std::clamp(p.x, 0.0, width_), std::clamp(p.y, 0.0, height_) };
}

AnchorArray::AnchorArray(std::vector<Position> anchors, double wavelength)
    : anchors_(std::move(anchors)), wavelength_(wavelength), calibration_(anchors_.size())
{
  if (anchors_.size() < 2) {
    throw std::invalid_argument("an anchor array needs at least two anchors");
  }
  if (!(wavelength > 0.0)) {
    throw std::invalid_argument("wavelength must be positive");
  }
  for (std::size_t i = 0; i < anchors_.size(); ++i) {
    if (!std::isfinite(anchors_[i].x) || !std::isfinite(anchors_[i].y)) {
      throw std::invalid_argument("anchor positions must be finite");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (distance(anchors_[i], anchors_[j]) < 1e-12) {
        throw std::invalid_argument("anchor positions must be pairwise distinct");
      }
    }
  }
}

bool AnchorArray::has_calibration() const
{
  return std::any_of(calibration_.begin(), calibration_.end(),
                     [](const CalibrationParams& c) { return c != CalibrationParams{}; });
}

AnchorArray AnchorArray::with_calibration(std::vector<CalibrationParams> params) const
{
  if (params.size() != anchors_.size()) {
    throw std::invalid_argument("calibration must have one entry per anchor");
  }
  AnchorArray out = *this;
  out.calibration_ = std::move(params);
  return out;
}

AnchorArray AnchorArray::with_wavelength(double wavelength) const
{
  AnchorArray out(anchors_, wavelength);
  out.calibration_ = calibration_;
  return out;
}

void AnchorArray::check_index(std::size_t i) const
{
  if (i >= anchors_.size()) {
    throw std::out_of_range("anchor index out of range");
  }
}

AnchorArray make_ula(int count, double aperture, Position center, Vec2 axis, double wavelength)
{
  if (count < 2) {
    throw std::invalid_argument("a ULA needs at least two anchors");
  }
  if (!(aperture > 0.0)) {
    throw std::invalid_argument("aperture must be positive");
  }
  const Vec2 u = normalized(axis);
  const double spacing = aperture / (count - 1);
  std::vector<Position> anchors;
  anchors.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    anchors.push_back(center + (-0.5 * aperture + k * spacing) * u);
  }
  return AnchorArray(std::move(anchors), wavelength);
}

AnchorArray make_coprime(int count, double aperture, Position center, Vec2 axis,
                         std::pair<int, int> pair, double wavelength)
{
  const auto [m, n] = pair;
  if (m < 1 || n < 1 || std::gcd(m, n) != 1) {
    throw std::invalid_argument("co-prime array needs a positive co-prime integer pair");
  }
  if (!(aperture > 0.0)) {
    throw std::invalid_argument("aperture must be positive");
  }
  // Lattice indices: n elements at pitch m, m elements at pitch n.
  std::set<int> lattice;
  for (int k = 0; k < n; ++k) lattice.insert(k * m);
  for (int k = 0; k < m; ++k) lattice.insert(k * n);
  if (lattice.size() < 2) {
    throw std::invalid_argument("co-prime pair yields fewer than two anchors");
  }
  if (static_cast<int>(lattice.size()) > count) {
    throw std::invalid_argument("co-prime pair yields more anchors than requested");
  }
  const Vec2 u = normalized(axis);
  const double extent = static_cast<double>(*lattice.rbegin());
  const double unit = aperture / extent;
  std::vector<Position> anchors;
  anchors.reserve(lattice.size());
  for (int idx : lattice) {
    anchors.push_back(center + (-0.5 * aperture + idx * unit) * u);
  }
  return AnchorArray(std::move(anchors), wavelength);
}

GridShape grid_shape(const Environment& env, double resolution)
{
  if (!(resolution > 0.0) || !std::isfinite(resolution)) {
    throw std::invalid_argument("grid resolution must be positive");
  }
  // Small slack so that e.g. 3 / 0.05 = 60.000000000000007 does not add a sliver column.
  auto cells = [resolution](double side) {
    return static_cast<std::size_t>(std::max(1.0, std::ceil(side / resolution - 1e-9)));
  };
  return { cells(env.width()), cells(env.height()), resolution };
}

Position grid_point(const Environment& env, const GridShape& shape, std::size_t k)
{
  const std::size_t ix = k % shape.nx;
  const std::size_t iy = k / shape.nx;
  // Cell center, with the last (possibly partial) cell clipped to the room.
  auto center = [&](std::size_t i, std::size_t n, double side) {
    const double lo = static_cast<double>(i) * shape.resolution;
    if (i + 1 < n) return lo + 0.5 * shape.resolution;
    return 0.5 * (lo + std::min(lo + shape.resolution, side));
  };
  return { center(ix, shape.nx, env.width()), center(iy, shape.ny, env.height()) };
}

std::vector<Position> eval_grid(const Environment& env, double resolution)
{
  const GridShape shape = grid_shape(env, resolution);
  std::vector<Position> points;
  points.reserve(shape.size());
  for (std::size_t k = 0; k < shape.size(); ++k) {
    points.push_back(grid_point(env, shape, k));
  }
  return points;
}

AnchorArray diverse_layout(const Environment& env, double inset, double wavelength)
{
  const double w = env.width();
  const double h = env.height();
  return AnchorArray({ { inset, inset },
                       { w - inset, inset },
                       { w - inset, 0.5 * h },
                       { w - inset, h - inset },
                       { inset, h - inset },
                       { inset, 0.5 * h } },
                     wavelength);
}

AnchorArray paired_layout(const Environment& env, double aperture, double wavelength)
{
  const double half_pair = 0.25 * wavelength;
  const double cx = 0.5 * env.width();
  const double centers[3] = { cx - 0.5 * aperture + half_pair, cx, cx + 0.5 * aperture - half_pair };
  std::vector<Position> anchors;
  for (double c : centers) {
    anchors.push_back({ c - half_pair, 0.0 });
    anchors.push_back({ c + half_pair, 0.0 });
  }
  return AnchorArray(std::move(anchors), wavelength);
}

}  // namespace uwbloc
