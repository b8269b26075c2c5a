#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace vqrf {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend bool operator==(Vec2 a, Vec2 b) = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
double distance(Vec2 a, Vec2 b);

/// Axis-aligned rectangle in meters. Closed for containment queries.
struct Rect {
  double x_min = 0.0;
  double x_max = 0.0;
  double y_min = 0.0;
  double y_max = 0.0;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  double area() const { return width() * height(); }
  bool contains(Vec2 p) const {
    return p.x >= x_min && p.x <= x_max && p.y >= y_min && p.y <= y_max;
  }
  bool contains_strictly(Vec2 p) const {
    return p.x > x_min && p.x < x_max && p.y > y_min && p.y < y_max;
  }
  bool within(const Rect& outer) const {
    return x_min >= outer.x_min && x_max <= outer.x_max &&
           y_min >= outer.y_min && y_max <= outer.y_max;
  }
};

struct TargetRegion {
  std::string name;
  Rect rect;
};

struct Scene {
  double carrier_frequency_hz = 2.14e9;
  Rect bounds{-70.0, 70.0, -30.0, 70.0};
  std::vector<Vec2> transmitters;
  std::vector<Rect> buildings;
  std::vector<TargetRegion> targets;

  const TargetRegion& target(std::string_view name) const;
  bool inside_building(Vec2 p) const;
};

/// Raised for malformed scene files. The message carries the offending field
/// path, e.g. `buildings[2]: degenerate rectangle`.
class SceneError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses and validates the JSON scene format.
Scene load_scene(std::string_view text);
Scene load_scene_file(const std::string& path);
std::string dump_scene(const Scene& scene);
void validate(const Scene& scene);

struct LocationSample {
  std::size_t index = 0;
  Vec2 position;
  int label = 1;
};

enum class SamplingMode { kUniform, kBalanced };

SamplingMode parse_sampling_mode(std::string_view name);
std::string_view to_string(SamplingMode mode);

/// 0 inside the closed target rectangle, 1 otherwise.
int label(Vec2 position, const TargetRegion& region);

/// Draws M receiver locations. Positions strictly inside a building are
/// rejected and redrawn. Balanced mode places round(M * inside_fraction)
/// samples inside the region and the rest outside, then shuffles the order.
std::vector<LocationSample> sample_locations(const Scene& scene,
                                             const TargetRegion& region,
                                             std::size_t count,
                                             SamplingMode mode,
                                             std::uint64_t seed,
                                             double inside_fraction = 0.5);

}  // namespace vqrf
