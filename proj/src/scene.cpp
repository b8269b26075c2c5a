#include "vqrf/scene.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

namespace vqrf {

using nlohmann::json;

double distance(Vec2 a, Vec2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

const TargetRegion& Scene::target(std::string_view name) const {
  for (const auto& t : targets) {
    if (t.name == name) return t;
  }
  throw SceneError("unknown target region '" + std::string(name) + "'");
}

bool Scene::inside_building(Vec2 p) const {
  for (const auto& b : buildings) {
    if (b.contains_strictly(p)) return true;
  }
  return false;
}

namespace {

double number_at(const json& obj, const char* key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) throw SceneError(path + "." + key + ": missing");
  if (!it->is_number()) throw SceneError(path + "." + key + ": expected number");
  return it->get<double>();
}

Rect rect_at(const json& obj, const std::string& path) {
  if (!obj.is_object()) throw SceneError(path + ": expected object");
  return Rect{number_at(obj, "x_min", path), number_at(obj, "x_max", path),
              number_at(obj, "y_min", path), number_at(obj, "y_max", path)};
}

void check_rect(const Rect& r, const std::string& path) {
  if (!(r.x_min < r.x_max) || !(r.y_min < r.y_max)) {
    throw SceneError(path + ": degenerate rectangle");
  }
}

json rect_json(const Rect& r) {
  return json{{"x_min", r.x_min}, {"x_max", r.x_max}, {"y_min", r.y_min}, {"y_max", r.y_max}};
}

}  // namespace

void validate(const Scene& scene) {
  if (!(scene.carrier_frequency_hz > 0.0)) {
    throw SceneError("carrier_frequency_hz: must be positive");
  }
  check_rect(scene.bounds, "bounds");
  if (scene.transmitters.empty()) throw SceneError("transmitters: at least one required");
  for (std::size_t i = 0; i < scene.buildings.size(); ++i) {
    const std::string path = "buildings[" + std::to_string(i) + "]";
    check_rect(scene.buildings[i], path);
    if (!scene.buildings[i].within(scene.bounds)) throw SceneError(path + ": outside bounds");
  }
  for (std::size_t i = 0; i < scene.targets.size(); ++i) {
    const std::string path = "targets[" + std::to_string(i) + "]";
    check_rect(scene.targets[i].rect, path);
    if (!scene.targets[i].rect.within(scene.bounds)) throw SceneError(path + ": outside bounds");
  }
}

Scene load_scene(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SceneError(std::string("parse error: ") + e.what());
  }
  if (!doc.is_object()) throw SceneError("scene: expected JSON object");

  Scene scene;
  scene.carrier_frequency_hz = number_at(doc, "carrier_frequency_hz", "scene");
  if (doc.contains("bounds")) scene.bounds = rect_at(doc["bounds"], "bounds");

  const auto txs = doc.value("transmitters", json::array());
  if (!txs.is_array()) throw SceneError("transmitters: expected array");
  for (std::size_t i = 0; i < txs.size(); ++i) {
    const auto& p = txs[i];
    if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
      throw SceneError("transmitters[" + std::to_string(i) + "]: expected [x, y]");
    }
    scene.transmitters.push_back({p[0].get<double>(), p[1].get<double>()});
  }

  const auto blds = doc.value("buildings", json::array());
  if (!blds.is_array()) throw SceneError("buildings: expected array");
  for (std::size_t i = 0; i < blds.size(); ++i) {
    scene.buildings.push_back(rect_at(blds[i], "buildings[" + std::to_string(i) + "]"));
  }

  const auto tgts = doc.value("targets", json::array());
  if (!tgts.is_array()) throw SceneError("targets: expected array");
  for (std::size_t i = 0; i < tgts.size(); ++i) {
    const std::string path = "targets[" + std::to_string(i) + "]";
    if (!tgts[i].contains("name") || !tgts[i]["name"].is_string()) {
      throw SceneError(path + ".name: expected string");
    }
    scene.targets.push_back({tgts[i]["name"].get<std::string>(), rect_at(tgts[i], path)});
  }

  validate(scene);
  return scene;
}

Scene load_scene_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SceneError("cannot open scene file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return load_scene(buf.str());
}

std::string dump_scene(const Scene& scene) {
  json doc;
  doc["carrier_frequency_hz"] = scene.carrier_frequency_hz;
  doc["bounds"] = rect_json(scene.bounds);
  doc["transmitters"] = json::array();
  for (const auto& t : scene.transmitters) doc["transmitters"].push_back({t.x, t.y});
  doc["buildings"] = json::array();
  for (const auto& b : scene.buildings) doc["buildings"].push_back(rect_json(b));
  doc["targets"] = json::array();
  for (const auto& t : scene.targets) {
    auto j = rect_json(t.rect);
    j["name"] = t.name;
    doc["targets"].push_back(j);
  }
  return doc.dump(2);
}

SamplingMode parse_sampling_mode(std::string_view name) {
  if (name == "uniform") return SamplingMode::kUniform;
  if (name == "balanced") return SamplingMode::kBalanced;
  throw std::invalid_argument("unknown sampling mode '" + std::string(name) + "'");
}

std::string_view to_string(SamplingMode mode) {
  return mode == SamplingMode::kUniform ? "uniform" : "balanced";
}

int label(Vec2 position, const TargetRegion& region) {
  return region.rect.contains(position) ? 0 : 1;
}

std::vector<LocationSample> sample_locations(const Scene& scene, const TargetRegion& region,
                                             std::size_t count, SamplingMode mode,
                                             std::uint64_t seed, double inside_fraction) {
  if (count == 0) throw std::invalid_argument("sample_locations: count must be positive");
  if (inside_fraction < 0.0 || inside_fraction > 1.0) {
    throw std::invalid_argument("sample_locations: inside_fraction must lie in [0, 1]");
  }
  std::mt19937_64 rng(seed);

  auto draw_in = [&](const Rect& r) {
    std::uniform_real_distribution<double> ux(r.x_min, r.x_max);
    std::uniform_real_distribution<double> uy(r.y_min, r.y_max);
    const double x = ux(rng);
    return Vec2{x, uy(rng)};
  };
  // Rejection keeps the draw uniform over the admissible set.
  constexpr int kMaxAttempts = 1'000'000;
  auto draw = [&](const Rect& r, auto&& accept) {
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
      const Vec2 p = draw_in(r);
      if (!scene.inside_building(p) && accept(p)) return p;
    }
    throw std::runtime_error("sample_locations: no admissible position found");
  };

  std::vector<Vec2> positions;
  positions.reserve(count);
  if (mode == SamplingMode::kUniform) {
    for (std::size_t i = 0; i < count; ++i) {
      positions.push_back(draw(scene.bounds, [](Vec2) { return true; }));
    }
  } else {
    const auto inside = static_cast<std::size_t>(std::llround(inside_fraction * count));
    Rect inner = region.rect;
    inner.x_min = std::max(inner.x_min, scene.bounds.x_min);
    inner.x_max = std::min(inner.x_max, scene.bounds.x_max);
    inner.y_min = std::max(inner.y_min, scene.bounds.y_min);
    inner.y_max = std::min(inner.y_max, scene.bounds.y_max);
    for (std::size_t i = 0; i < inside; ++i) {
      positions.push_back(draw(inner, [](Vec2) { return true; }));
    }
    for (std::size_t i = inside; i < count; ++i) {
      positions.push_back(
          draw(scene.bounds, [&](Vec2 p) { return !region.rect.contains(p); }));
    }
    std::shuffle(positions.begin(), positions.end(), rng);
  }

  std::vector<LocationSample> samples(count);
  for (std::size_t i = 0; i < count; ++i) {
    samples[i] = {i, positions[i], label(positions[i], region)};
  }
  return samples;
}

}  // namespace vqrf
