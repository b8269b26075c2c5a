#include "vqrf/raytracer.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace vqrf {

namespace {

constexpr double kGeomEps = 1e-9;

// Open segment p->q against the open rectangle, slab clipping.
bool crosses_interior(Vec2 p, Vec2 q, const Rect& r) {
  double t0 = 0.0;
  double t1 = 1.0;
  const double d[2] = {q.x - p.x, q.y - p.y};
  const double o[2] = {p.x, p.y};
  const double lo[2] = {r.x_min, r.y_min};
  const double hi[2] = {r.x_max, r.y_max};
  for (int axis = 0; axis < 2; ++axis) {
    if (std::abs(d[axis]) < 1e-15) {
      if (!(o[axis] > lo[axis] + kGeomEps && o[axis] < hi[axis] - kGeomEps)) return false;
      continue;
    }
    double ta = (lo[axis] - o[axis]) / d[axis];
    double tb = (hi[axis] - o[axis]) / d[axis];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
  }
  const double len = std::hypot(d[0], d[1]);
  return (t1 - t0) * len > kGeomEps;
}

// Intersection of segment from->to with the wall, if it crosses the wall's
// extent at an interior point of the segment.
std::optional<Vec2> hit_wall(Vec2 from, Vec2 to, const Wall& wall) {
  const Vec2 d = to - from;
  const Vec2 e = wall.b - wall.a;
  const double denom = cross(d, e);
  if (std::abs(denom) < 1e-15) return std::nullopt;
  const Vec2 w = wall.a - from;
  const double t = cross(w, e) / denom;  // along from->to
  const double s = cross(w, d) / denom;  // along the wall
  if (t <= kGeomEps || t >= 1.0 - kGeomEps) return std::nullopt;
  if (s < -kGeomEps || s > 1.0 + kGeomEps) return std::nullopt;
  return from + t * d;
}

bool same_geometry(const Path& a, const Path& b) {
  if (a.transmitter != b.transmitter || a.bounces.size() != b.bounces.size()) return false;
  if (std::abs(a.length_m - b.length_m) > 1e-9) return false;
  for (std::size_t i = 0; i < a.bounces.size(); ++i) {
    if (distance(a.bounces[i], b.bounces[i]) > 1e-9) return false;
  }
  return true;
}

}  // namespace

void RadioConfig::validate() const {
  if (!(coupling > 0.0)) throw RayTraceError("coupling must be positive");
  if (!(reflection_magnitude > 0.0 && reflection_magnitude <= 1.0)) {
    throw RayTraceError("reflection magnitude must lie in (0, 1]");
  }
  if (max_order < 0) throw RayTraceError("max_order must be non-negative");
  if (!(transmit_power > 0.0)) throw RayTraceError("transmit power must be positive");
}

std::vector<Wall> scene_walls(const Scene& scene) {
  std::vector<Wall> walls;
  walls.reserve(scene.buildings.size() * 4);
  for (std::size_t i = 0; i < scene.buildings.size(); ++i) {
    const Rect& r = scene.buildings[i];
    walls.push_back({{r.x_min, r.y_min}, {r.x_max, r.y_min}, {0.0, -1.0}, i});
    walls.push_back({{r.x_max, r.y_min}, {r.x_max, r.y_max}, {1.0, 0.0}, i});
    walls.push_back({{r.x_max, r.y_max}, {r.x_min, r.y_max}, {0.0, 1.0}, i});
    walls.push_back({{r.x_min, r.y_max}, {r.x_min, r.y_min}, {-1.0, 0.0}, i});
  }
  return walls;
}

bool segment_visible(Vec2 p, Vec2 q, const Scene& scene) {
  for (const auto& b : scene.buildings) {
    if (crosses_interior(p, q, b)) return false;
  }
  return true;
}

Vec2 reflect_point(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 e = b - a;
  const double len2 = dot(e, e);
  if (!(len2 > 0.0)) throw RayTraceError("reflect_point: zero-length wall");
  const Vec2 ap = p - a;
  const Vec2 foot = a + (dot(ap, e) / len2) * e;
  return 2.0 * foot - p;
}

std::complex<double> path_gain(double length_m, std::size_t reflections, double wavelength_m,
                               const RadioConfig& config) {
  const double n = static_cast<double>(reflections);
  const double amplitude = config.coupling * std::sqrt(config.transmit_power) *
                           wavelength_m / (4.0 * std::numbers::pi * length_m) *
                           std::pow(config.reflection_magnitude, n);
  return std::polar(amplitude, n * config.reflection_phase);
}

namespace {

void finish(PathSet& set, const Scene& scene, const RadioConfig& config) {
  const double wavelength = kSpeedOfLight / scene.carrier_frequency_hz;
  for (auto& p : set.paths) {
    p.delay_s = p.length_m / kSpeedOfLight;
    p.gain = path_gain(p.length_m, p.reflections(), wavelength, config);
  }
  std::stable_sort(set.paths.begin(), set.paths.end(), [](const Path& a, const Path& b) {
    if (a.delay_s != b.delay_s) return a.delay_s < b.delay_s;
    if (a.transmitter != b.transmitter) return a.transmitter < b.transmitter;
    if (a.walls.size() != b.walls.size()) return a.walls.size() < b.walls.size();
    return a.walls < b.walls;
  });
}

void push_unique(std::vector<Path>& out, Path path) {
  for (const auto& existing : out) {
    if (same_geometry(existing, path)) return;
  }
  out.push_back(std::move(path));
}

void check_receiver(const Scene& scene, Vec2 rx, const RadioConfig& config) {
  config.validate();
  if (scene.inside_building(rx)) throw RayTraceError("receiver lies inside a building");
}

struct ImageTracer {
  const Scene& scene;
  const std::vector<Wall>& walls;
  Vec2 rx;
  int max_order;
  std::size_t tx = 0;
  std::vector<Path>* out = nullptr;

  // images[j] is the source mirrored through sequence[0..j-1].
  void descend(std::vector<Vec2>& images, std::vector<std::size_t>& sequence) {
    if (!sequence.empty()) emit(images, sequence);
    if (static_cast<int>(sequence.size()) == max_order) return;
    const Vec2 source = images.back();
    for (std::size_t w = 0; w < walls.size(); ++w) {
      if (!sequence.empty() && sequence.back() == w) continue;
      // Only a source in front of the face can illuminate it.
      if (dot(source - walls[w].a, walls[w].normal) <= kGeomEps) continue;
      images.push_back(reflect_point(source, walls[w]));
      sequence.push_back(w);
      descend(images, sequence);
      sequence.pop_back();
      images.pop_back();
    }
  }

  void emit(const std::vector<Vec2>& images, const std::vector<std::size_t>& sequence) {
    const std::size_t n = sequence.size();
    std::vector<Vec2> bounces(n);
    Vec2 target = rx;
    for (std::size_t j = n; j-- > 0;) {
      const auto hit = hit_wall(images[j + 1], target, walls[sequence[j]]);
      if (!hit) return;
      bounces[j] = *hit;
      target = *hit;
    }
    Vec2 from = images.front();
    for (std::size_t j = 0; j <= n; ++j) {
      const Vec2 to = j < n ? bounces[j] : rx;
      if (distance(from, to) <= kGeomEps || !segment_visible(from, to, scene)) return;
      from = to;
    }
    Path path;
    path.transmitter = tx;
    path.walls = sequence;
    path.bounces = std::move(bounces);
    path.length_m = distance(images.back(), rx);
    push_unique(*out, std::move(path));
  }
};

}  // namespace

PathSet trace_paths(const Scene& scene, Vec2 rx, const RadioConfig& config) {
  check_receiver(scene, rx, config);
  const auto walls = scene_walls(scene);
  PathSet set;
  set.receiver = rx;
  for (std::size_t k = 0; k < scene.transmitters.size(); ++k) {
    const Vec2 tx = scene.transmitters[k];
    if (distance(tx, rx) > kGeomEps && segment_visible(tx, rx, scene)) {
      Path los;
      los.transmitter = k;
      los.length_m = distance(tx, rx);
      set.paths.push_back(std::move(los));
    }
    ImageTracer tracer{scene, walls, rx, config.max_order, k, &set.paths};
    std::vector<Vec2> images{tx};
    std::vector<std::size_t> sequence;
    tracer.descend(images, sequence);
  }
  finish(set, scene, config);
  return set;
}

namespace {

// Affine mirror map x -> R x + t for one wall line.
struct Mirror {
  double r00 = 1, r01 = 0, r10 = 0, r11 = 1;
  double tx = 0, ty = 0;

  static Mirror across(const Wall& w) {
    const Vec2 e = w.b - w.a;
    const double len = std::hypot(e.x, e.y);
    const double nx = -e.y / len;
    const double ny = e.x / len;
    const double c = nx * w.a.x + ny * w.a.y;
    return {1 - 2 * nx * nx, -2 * nx * ny, -2 * nx * ny, 1 - 2 * ny * ny, 2 * c * nx, 2 * c * ny};
  }
  Vec2 operator()(Vec2 p) const { return {r00 * p.x + r01 * p.y + tx, r10 * p.x + r11 * p.y + ty}; }
  // (this ∘ inner)(p) = this(inner(p))
  Mirror after(const Mirror& inner) const {
    Mirror m;
    m.r00 = r00 * inner.r00 + r01 * inner.r10;
    m.r01 = r00 * inner.r01 + r01 * inner.r11;
    m.r10 = r10 * inner.r00 + r11 * inner.r10;
    m.r11 = r10 * inner.r01 + r11 * inner.r11;
    m.tx = r00 * inner.tx + r01 * inner.ty + tx;
    m.ty = r10 * inner.tx + r11 * inner.ty + ty;
    return m;
  }
};

// Solves one wall sequence by unfolding the receiver into the source frame:
// the real path is the straight line tx -> A(rx) folded back at each wall,
// where A = M_1 ∘ ... ∘ M_n.
std::optional<Path> unfold(const Scene& scene, const std::vector<Wall>& walls, std::size_t k,
                           Vec2 rx, const std::vector<std::size_t>& sequence) {
  const Vec2 tx = scene.transmitters[k];
  const std::size_t n = sequence.size();
  // prefix[j] = M_1 ∘ ... ∘ M_j (prefix[0] = identity)
  std::vector<Mirror> prefix(n + 1);
  for (std::size_t j = 0; j < n; ++j) {
    prefix[j + 1] = prefix[j].after(Mirror::across(walls[sequence[j]]));
  }
  const Vec2 unfolded_rx = prefix[n](rx);
  const Vec2 d = unfolded_rx - tx;
  std::vector<Vec2> bounces(n);
  double last_t = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const Wall& w = walls[sequence[j]];
    const Vec2 a = prefix[j](w.a);
    const Vec2 b = prefix[j](w.b);
    const Vec2 e = b - a;
    const double denom = cross(d, e);
    if (std::abs(denom) < 1e-15) return std::nullopt;
    const double t = cross(a - tx, e) / denom;
    const double s = cross(a - tx, d) / denom;
    if (t <= last_t + kGeomEps || t >= 1.0 - kGeomEps) return std::nullopt;
    if (s < -kGeomEps || s > 1.0 + kGeomEps) return std::nullopt;
    last_t = t;
    // Mirrors are involutions, so prefix[j]^{-1} applies them in reverse.
    Vec2 q = tx + t * d;
    for (std::size_t i = j; i-- > 0;) q = Mirror::across(walls[sequence[i]])(q);
    bounces[j] = q;
  }
  Vec2 from = tx;
  for (std::size_t j = 0; j <= n; ++j) {
    const Vec2 to = j < n ? bounces[j] : rx;
    if (distance(from, to) <= kGeomEps || !segment_visible(from, to, scene)) return std::nullopt;
    from = to;
  }
  Path path;
  path.transmitter = k;
  path.walls = sequence;
  path.bounces = std::move(bounces);
  path.length_m = std::hypot(d.x, d.y);
  return path;
}

void enumerate(const Scene& scene, const std::vector<Wall>& walls, std::size_t k, Vec2 rx,
               int max_order, std::vector<std::size_t>& sequence, std::vector<Path>& out) {
  if (auto p = unfold(scene, walls, k, rx, sequence)) push_unique(out, std::move(*p));
  if (static_cast<int>(sequence.size()) == max_order) return;
  for (std::size_t w = 0; w < walls.size(); ++w) {
    sequence.push_back(w);
    enumerate(scene, walls, k, rx, max_order, sequence, out);
    sequence.pop_back();
  }
}

}  // namespace

PathSet brute_force_paths(const Scene& scene, Vec2 rx, const RadioConfig& config) {
  check_receiver(scene, rx, config);
  const auto walls = scene_walls(scene);
  PathSet set;
  set.receiver = rx;
  for (std::size_t k = 0; k < scene.transmitters.size(); ++k) {
    std::vector<std::size_t> sequence;
    enumerate(scene, walls, k, rx, config.max_order, sequence, set.paths);
  }
  finish(set, scene, config);
  return set;
}

bool validate_against_oracle(const Scene& scene, Vec2 rx, const RadioConfig& config,
                             double tolerance_m) {
  const auto fast = trace_paths(scene, rx, config);
  const auto slow = brute_force_paths(scene, rx, config);
  if (fast.paths.size() != slow.paths.size()) return false;
  std::vector<bool> used(slow.paths.size(), false);
  for (const auto& p : fast.paths) {
    bool matched = false;
    for (std::size_t i = 0; i < slow.paths.size(); ++i) {
      const auto& q = slow.paths[i];
      if (used[i] || q.transmitter != p.transmitter || q.walls != p.walls) continue;
      if (std::abs(q.length_m - p.length_m) > tolerance_m) continue;
      used[i] = true;
      matched = true;
      break;
    }
    if (!matched) return false;
  }
  return true;
}

}  // namespace vqrf
