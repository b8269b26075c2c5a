#pragma once

#include <complex>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "vqrf/scene.hpp"

namespace vqrf {

inline constexpr double kSpeedOfLight = 2.99792458e8;  // m/s

/// One building face. `normal` points out of the building.
struct Wall {
  Vec2 a;
  Vec2 b;
  Vec2 normal;
  std::size_t building = 0;
};

/// Walls in a fixed order: for building i, ids 4i..4i+3 are bottom, right,
/// top, left.
std::vector<Wall> scene_walls(const Scene& scene);

struct Path {
  std::size_t transmitter = 0;
  std::vector<std::size_t> walls;  // reflecting wall ids, in travel order
  std::vector<Vec2> bounces;
  double length_m = 0.0;
  double delay_s = 0.0;
  std::complex<double> gain;

  std::size_t reflections() const { return walls.size(); }
};

struct PathSet {
  Vec2 receiver;
  std::vector<Path> paths;  // ascending delay
};

/// Specular propagation constants. The coupling folds the dipole moment and
/// polarization overlap into one real factor; transmit power is 1 and the
/// carrier symbol is 1 (unmodulated).
struct RadioConfig {
  double coupling = 1.0;
  double reflection_magnitude = 0.7;
  double reflection_phase = std::numbers::pi;
  int max_order = 2;
  double transmit_power = 1.0;

  void validate() const;
};

class RayTraceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// True iff the open segment pq misses every building interior. Grazing a
/// face or a corner counts as visible.
bool segment_visible(Vec2 p, Vec2 q, const Scene& scene);

/// Mirror image of p across the supporting line of the segment a-b.
Vec2 reflect_point(Vec2 p, Vec2 a, Vec2 b);
inline Vec2 reflect_point(Vec2 p, const Wall& wall) { return reflect_point(p, wall.a, wall.b); }

/// Free-space amplitude with a constant per-bounce reflection coefficient.
std::complex<double> path_gain(double length_m, std::size_t reflections, double wavelength_m,
                               const RadioConfig& config);

/// Image-method tracer: line-of-sight plus specular reflections up to
/// config.max_order bounces off building faces.
PathSet trace_paths(const Scene& scene, Vec2 rx, const RadioConfig& config);

/// Independent enumeration used as a test oracle: every ordered wall
/// sequence is unfolded by composing mirror maps, no pruning.
PathSet brute_force_paths(const Scene& scene, Vec2 rx, const RadioConfig& config);

/// Compares trace_paths with brute_force_paths on (transmitter, wall
/// sequence, length) within `tolerance_m`.
bool validate_against_oracle(const Scene& scene, Vec2 rx, const RadioConfig& config,
                             double tolerance_m = 1e-9);

}  // namespace vqrf
