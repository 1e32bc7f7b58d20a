#pragma once

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

namespace uwbloc {

/// Speed of light in vacuum, m/s.
inline constexpr double kSpeedOfLight = 299'792'458.0;

/// UWB channel center frequency used for the default wavelength.
inline constexpr double kCenterFrequencyHz = 3.5e9;

/// Default carrier wavelength, c / 3.5 GHz (about 8.57 cm).
inline constexpr double kDefaultWavelength = kSpeedOfLight / kCenterFrequencyHz;

/// 2D point or displacement in meters.
struct Vec2
{
  double x{ 0.0 };
  double y{ 0.0 };

  constexpr Vec2& operator+=(const Vec2& o)
  {
    x += o.x;
    y += o.y;
    return *this;
  }
  constexpr Vec2& operator-=(const Vec2& o)
  {
    x -= o.x;
    y -= o.y;
    return *this;
  }
  friend constexpr Vec2 operator+(Vec2 a, const Vec2& b) { return a += b; }
  friend constexpr Vec2 operator-(Vec2 a, const Vec2& b) { return a -= b; }
  friend constexpr Vec2 operator*(double s, const Vec2& v) { return { s * v.x, s * v.y }; }
  friend constexpr Vec2 operator*(const Vec2& v, double s) { return { s * v.x, s * v.y }; }
  friend constexpr bool operator==(const Vec2&, const Vec2&) = default;
};

using Position = Vec2;

inline double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
inline double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Vec2& v) { return std::hypot(v.x, v.y); }
inline double distance(const Vec2& a, const Vec2& b) { return norm(a - b); }

/// Unit vector along v; throws std::invalid_argument for a zero vector.
Vec2 normalized(const Vec2& v);

/// v rotated by +90 degrees (counter-clockwise).
inline Vec2 perp(const Vec2& v) { return { -v.y, v.x }; }

/// Axis-aligned rectangular room spanning [0, width] x [0, height].
class Environment
{
public:
  /// Throws std::invalid_argument unless both sides are positive and finite.
  Environment(double width = 3.0, double height = 3.0);

  double width() const { return width_; }
  double height() const { return height_; }
  double area() const { return width_ * height_; }
  Position center() const { return { 0.5 * width_, 0.5 * height_ }; }

  bool contains(const Position& p, double tolerance = 0.0) const
  {
    return p.x >= -tolerance && p.x <= width_ + tolerance && p.y >= -tolerance &&
           p.y <= height_ + tolerance;
  }

  /// Nearest point inside the room.
  Position clamp(const Position& p) const;

private:
  double width_;
  double height_;
};

/// Per-anchor phase-bias parameters: bias(d) = alpha + beta * d^gamma.
struct CalibrationParams
{
  double alpha{ 0.0 };  // rad
  double beta{ 0.0 };   // rad * m^-gamma
  double gamma{ 0.0 };

  friend constexpr bool operator==(const CalibrationParams&, const CalibrationParams&) = default;
};

/// Ordered receiver positions plus carrier wavelength and per-anchor calibration.
class AnchorArray
{
public:
  /// Throws std::invalid_argument for fewer than two anchors, coincident anchors,
  /// or a non-positive wavelength.
  explicit AnchorArray(std::vector<Position> anchors, double wavelength = kDefaultWavelength);

  std::size_t size() const { return anchors_.size(); }
  const Position& operator[](std::size_t i) const { return anchors_[i]; }
  const std::vector<Position>& positions() const { return anchors_; }
  double wavelength() const { return wavelength_; }

  const std::vector<CalibrationParams>& calibration() const { return calibration_; }
  const CalibrationParams& calibration(std::size_t i) const { return calibration_[i]; }
  bool has_calibration() const;

  /// Copy of this array carrying the given per-anchor calibration (one entry per anchor).
  AnchorArray with_calibration(std::vector<CalibrationParams> params) const;
  AnchorArray with_wavelength(double wavelength) const;

  /// Throws std::out_of_range for an index past the end.
  void check_index(std::size_t i) const;

private:
  std::vector<Position> anchors_;
  double wavelength_;
  std::vector<CalibrationParams> calibration_;
};

/// Uniform linear array: `count` anchors spanning `aperture` along `axis`, centered on `center`.
AnchorArray make_ula(int count, double aperture, Position center = {}, Vec2 axis = { 1.0, 0.0 },
                     double wavelength = kDefaultWavelength);

/// Co-prime linear array built from the integer pair (m, n).
///
/// Sub-array A holds n elements on a lattice of pitch m, sub-array B holds m elements on a
/// lattice of pitch n; both start at lattice index 0. The union (m + n - 1 distinct indices,
/// spanning max((n-1)m, (m-1)n) units) is scaled so its extent equals `aperture`, then centered.
/// Throws std::invalid_argument when gcd(m, n) != 1 or the union exceeds `count` anchors.
AnchorArray make_coprime(int count, double aperture, Position center, Vec2 axis,
                         std::pair<int, int> pair, double wavelength = kDefaultWavelength);

/// Row-major cell-center lattice shape of an environment at the given resolution.
struct GridShape
{
  std::size_t nx{ 0 };
  std::size_t ny{ 0 };
  double resolution{ 0.0 };

  std::size_t size() const { return nx * ny; }
};

GridShape grid_shape(const Environment& env, double resolution);

/// Cell center of index `k` in a row-major grid (rows run along y, x varies fastest).
Position grid_point(const Environment& env, const GridShape& shape, std::size_t k);

/// All cell centers, row-major. Throws std::invalid_argument for a non-positive resolution.
std::vector<Position> eval_grid(const Environment& env, double resolution);

/// Six anchors near the walls: the four corners plus the left and right wall midpoints,
/// each inset by `inset` meters.
AnchorArray diverse_layout(const Environment& env, double inset = 0.1,
                           double wavelength = kDefaultWavelength);

/// Three half-wavelength pairs spread over `aperture` on the bottom wall (y = 0), centered
/// horizontally. Anchor order: pair 0 (a, b), pair 1 (a, b), pair 2 (a, b).
AnchorArray paired_layout(const Environment& env, double aperture = 1.0,
                          double wavelength = kDefaultWavelength);

}  // namespace uwbloc
