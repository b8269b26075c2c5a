#include <doctest.h>

#include <random>

#include "test_support.hpp"
#include "vqrf/raytracer.hpp"
#include "vqrf/scene.hpp"

using namespace vqrf;

namespace {

const TargetRegion kTargetA{"A", {-30, -20, 10, 20}};

}  // namespace

TEST_CASE("load_scene accepts a minimal file") {
  const auto s = load_scene(R"({"carrier_frequency_hz": 2.14e9, "transmitters": [[0, 0]]})");
  CHECK(s.transmitters.size() == 1);
  CHECK(s.buildings.empty());
  CHECK(s.bounds.x_min == -70);
  CHECK(s.bounds.y_max == 70);
}

TEST_CASE("load_scene rejects degenerate rectangles with the field path") {
  const char* text = R"({"carrier_frequency_hz": 1e9, "transmitters": [[0, 0]],
    "buildings": [{"x_min": 0, "x_max": 1, "y_min": 0, "y_max": 1},
                  {"x_min": 3, "x_max": 3, "y_min": 0, "y_max": 1}]})";
  try {
    load_scene(text);
    FAIL("expected SceneError");
  } catch (const SceneError& e) {
    CHECK(std::string(e.what()) == "buildings[1]: degenerate rectangle");
  }
}

TEST_CASE("load_scene reports other invariant violations") {
  CHECK_THROWS_AS(load_scene(R"({"carrier_frequency_hz": 1e9, "transmitters": []})"), SceneError);
  CHECK_THROWS_AS(load_scene(R"({"carrier_frequency_hz": 0, "transmitters": [[0,0]]})"), SceneError);
  CHECK_THROWS_AS(load_scene(R"({"carrier_frequency_hz": 1e9, "transmitters": [[0,0]],
      "buildings": [{"x_min": 60, "x_max": 80, "y_min": 0, "y_max": 1}]})"),
                  SceneError);
  CHECK_THROWS_AS(load_scene("{not json"), SceneError);
  CHECK_THROWS_AS(load_scene(R"({"transmitters": [[0,0]]})"), SceneError);
}

TEST_CASE("canonical scene") {
  const auto s = load_scene_file(test::canonical_scene_path());
  CHECK(s.transmitters.size() == 2);
  CHECK(s.buildings.size() == 6);
  CHECK(s.carrier_frequency_hz == doctest::Approx(2.14e9));
  const auto& a = s.target("A");
  const auto& b = s.target("B");
  CHECK(a.rect.width() == 10);
  CHECK(a.rect.height() == 10);
  CHECK(b.rect.width() == 10);
  CHECK(b.rect.height() == 10);
  CHECK_THROWS_AS(s.target("C"), SceneError);

  SUBCASE("dump and reload is lossless") {
    const auto again = load_scene(dump_scene(s));
    CHECK(again.buildings.size() == s.buildings.size());
    CHECK(again.targets[1].rect.x_min == s.targets[1].rect.x_min);
  }

  SUBCASE("target B is hidden from both transmitters") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> ux(b.rect.x_min, b.rect.x_max);
    std::uniform_real_distribution<double> uy(b.rect.y_min, b.rect.y_max);
    for (int i = 0; i < 500; ++i) {
      const Vec2 p{ux(rng), uy(rng)};
      for (const auto& tx : s.transmitters) CHECK_FALSE(segment_visible(tx, p, s));
    }
    for (double x : {b.rect.x_min, b.rect.x_max}) {
      for (double y : {b.rect.y_min, b.rect.y_max}) {
        for (const auto& tx : s.transmitters) CHECK_FALSE(segment_visible(tx, {x, y}, s));
      }
    }
  }

  SUBCASE("target A sees the nearby transmitter") {
    for (double x : {-30.0, -25.0, -20.0}) {
      for (double y : {10.0, 15.0, 20.0}) CHECK(segment_visible(s.transmitters[0], {x, y}, s));
    }
  }
}

TEST_CASE("label uses the closed rectangle") {
  CHECK(label({-25, 15}, kTargetA) == 0);
  CHECK(label({0, 0}, kTargetA) == 1);
  CHECK(label({-30, 10}, kTargetA) == 0);
  CHECK(label({-20, 20}, kTargetA) == 0);
  CHECK(label({-30.000001, 15}, kTargetA) == 1);
}

TEST_CASE("label matches the direct inequalities on random points") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> ux(-70, 70), uy(-30, 70);
  std::uniform_int_distribution<int> grid_x(-70, 70), grid_y(-30, 70);
  for (int i = 0; i < 20000; ++i) {
    // Half the draws land on the integer grid so the boundary is exercised.
    const Vec2 p = i % 2 ? Vec2{ux(rng), uy(rng)}
                         : Vec2{static_cast<double>(grid_x(rng)), static_cast<double>(grid_y(rng))};
    const bool inside = -30 <= p.x && p.x <= -20 && 10 <= p.y && p.y <= 20;
    REQUIRE(label(p, kTargetA) == (inside ? 0 : 1));
  }
}

TEST_CASE("sample_locations") {
  const auto canonical = load_scene_file(test::canonical_scene_path());
  const auto& region = canonical.target("A");

  SUBCASE("balanced mode places the requested fraction inside") {
    const auto samples = sample_locations(canonical, region, 100, SamplingMode::kBalanced, 3);
    REQUIRE(samples.size() == 100);
    const auto inside = std::count_if(samples.begin(), samples.end(),
                                      [](const LocationSample& s) { return s.label == 0; });
    CHECK(inside == 50);
    const auto tilted = sample_locations(canonical, region, 100, SamplingMode::kBalanced, 3, 0.3);
    CHECK(std::count_if(tilted.begin(), tilted.end(),
                        [](const LocationSample& s) { return s.label == 0; }) == 30);
  }

  SUBCASE("deterministic per seed") {
    const auto a = sample_locations(canonical, region, 200, SamplingMode::kUniform, 9);
    const auto b = sample_locations(canonical, region, 200, SamplingMode::kUniform, 9);
    const auto c = sample_locations(canonical, region, 200, SamplingMode::kUniform, 10);
    bool same = true, differs = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
      same = same && a[i].position == b[i].position && a[i].label == b[i].label;
      differs = differs || !(a[i].position == c[i].position);
    }
    CHECK(same);
    CHECK(differs);
  }

  SUBCASE("positions respect bounds, buildings and labels") {
    for (auto mode : {SamplingMode::kUniform, SamplingMode::kBalanced}) {
      for (const auto& s : sample_locations(canonical, region, 2000, mode, 21)) {
        REQUIRE(canonical.bounds.contains(s.position));
        REQUIRE_FALSE(canonical.inside_building(s.position));
        REQUIRE(s.label == label(s.position, region));
      }
    }
  }

  SUBCASE("uniform mode hits the region at the area ratio") {
    // Without buildings the expected count is M * 100 / 14000 = 14.29.
    const auto open = test::open_scene({{0, 0}});
    double total = 0;
    constexpr int kSeeds = 200;
    for (int seed = 0; seed < kSeeds; ++seed) {
      const auto samples = sample_locations(open, region, 2000, SamplingMode::kUniform, seed);
      total += static_cast<double>(std::count_if(
          samples.begin(), samples.end(), [](const LocationSample& s) { return s.label == 0; }));
    }
    // Binomial sd per draw is ~3.8, so the mean over 200 seeds has sd ~0.27.
    CHECK(total / kSeeds == doctest::Approx(2000.0 * 100 / 14000).epsilon(0.08));
  }

  CHECK_THROWS(sample_locations(canonical, region, 0, SamplingMode::kUniform, 1));
}
