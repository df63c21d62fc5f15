#include <doctest.h>

#include <random>

#include "lcr/ccl.hpp"
#include "support.hpp"

using namespace lcr;
using lcr::testing::random_raster;
using lcr::testing::same_partition;

TEST_SUITE("ccl") {

TEST_CASE("small fixtures") {
  Raster empty(5, 4);
  CHECK(two_pass_label(empty).map.count == 0);
  CHECK(two_pass_label(empty).stats.empty());
  CHECK_FALSE(is_single_component(empty));

  Raster block(2, 2, kInk);
  auto lab = two_pass_label(block, Connectivity::four);
  CHECK(lab.map.count == 1);
  CHECK(lab.stats.at(0).area == 4);

  Raster diag(2, 2);
  diag.at(0, 0) = kInk;
  diag.at(1, 1) = kInk;
  CHECK(two_pass_label(diag, Connectivity::four).map.count == 2);
  CHECK(two_pass_label(diag, Connectivity::eight).map.count == 1);
}

TEST_CASE("foreground threshold is 128") {
  Raster r(3, 1);
  r.at(0, 0) = 127;
  r.at(2, 0) = 128;
  auto lab = two_pass_label(r);
  CHECK(lab.map.count == 1);
  CHECK(lab.map.at(2, 0) == 1);
  CHECK(lab.map.at(0, 0) == 0);
}

TEST_CASE("first-occurrence numbering and stats") {
  // U shape: the right arm starts a provisional label that later merges.
  Raster r(5, 3);
  for (int y = 0; y < 3; ++y) {
    r.at(0, y) = kInk;
    r.at(4, y) = kInk;
  }
  for (int x = 0; x < 5; ++x) r.at(x, 2) = kInk;
  auto lab = two_pass_label(r);
  REQUIRE(lab.map.count == 1);
  const auto& s = lab.stats[0];
  CHECK(s.label == 1);
  CHECK(s.area == 9);
  CHECK(s.min_x == 0);
  CHECK(s.max_x == 4);
  CHECK(s.min_y == 0);
  CHECK(s.max_y == 2);
  CHECK(lab.map == flood_fill_label(r));
}

TEST_CASE("random rasters agree with the flood-fill oracle") {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 200; ++i) {
    const int w = 1 + static_cast<int>(rng() % 40), h = 1 + static_cast<int>(rng() % 40);
    const double p = 0.2 + 0.6 * (rng() % 100) / 100.0;
    Raster r = random_raster(w, h, p, rng);
    for (auto conn : {Connectivity::four, Connectivity::eight}) {
      auto lab = two_pass_label(r, conn);
      auto oracle = flood_fill_label(r, conn);
      CHECK(same_partition(lab.map, oracle));
      CHECK(lab.map == oracle);
      CHECK(lab.stats.size() == lab.map.count);
      std::size_t area = 0;
      for (const auto& s : lab.stats) area += s.area;
      CHECK(area == r.foreground_count());
    }
    CHECK(two_pass_label(r, Connectivity::eight).map.count <=
          two_pass_label(r, Connectivity::four).map.count);
  }
}

TEST_CASE("strip removes components strictly below the fraction") {
  // 400 px stroke block and a 9 px dot.
  Raster r(40, 25);
  for (int y = 0; y < 20; ++y)
    for (int x = 0; x < 20; ++x) r.at(x, y) = kInk;
  for (int y = 21; y < 24; ++y)
    for (int x = 30; x < 33; ++x) r.at(x, y) = kInk;
  auto lab = two_pass_label(r);
  REQUIRE(lab.map.count == 2);
  CHECK(lab.stats[0].area == 400);
  CHECK(lab.stats[1].area == 9);

  Raster s = strip_small_components(r, Connectivity::eight, 0.04);
  for (int y = 0; y < r.height(); ++y)
    for (int x = 0; x < r.width(); ++x) {
      if (y >= 21 && y < 24 && x >= 30 && x < 33)
        CHECK(s.at(x, y) == 0);
      else
        CHECK(s.at(x, y) == r.at(x, y));
    }
  CHECK(is_single_component(s));
  CHECK(strip_small_components(s, Connectivity::eight, 0.04) == s);
}

TEST_CASE("strip keeps single and equal components") {
  Raster one(8, 8);
  one.at(2, 2) = kInk;
  CHECK(strip_small_components(one, Connectivity::eight, 0.5) == one);

  Raster two(8, 8);
  two.at(0, 0) = two.at(1, 0) = kInk;
  two.at(5, 5) = two.at(6, 5) = kInk;
  CHECK(strip_small_components(two, Connectivity::eight, 0.99) == two);

  Raster empty(4, 4);
  CHECK(strip_small_components(empty, Connectivity::four, 0.04) == empty);
}

TEST_CASE("strip is monotone and idempotent on random input") {
  std::mt19937_64 rng(9);
  for (int i = 0; i < 50; ++i) {
    Raster r = random_raster(32, 32, 0.3, rng);
    Raster s = strip_small_components(r, Connectivity::eight, 0.1);
    for (std::size_t k = 0; k < r.size(); ++k)
      if (s.pixels()[k]) CHECK(r.pixels()[k] == s.pixels()[k]);
    CHECK(strip_small_components(s, Connectivity::eight, 0.1) == s);
  }
}

}
