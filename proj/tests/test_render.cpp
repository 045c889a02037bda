#include <doctest.h>

#include <set>

#include "evosand/render.hpp"

using namespace evosand;

TEST_CASE("PGM of a single zero cell") {
  CHECK(render_pgm(DenseGrid(0, 0), Palette::standard()) == "P2\n1 1\n255\n0\n");
}

TEST_CASE("PGM layout: top row first") {
  DenseGrid g(1, 1);
  g.set({0, 1}, 2);
  g.set({1, -1}, 1);
  const auto p = Palette::standard();
  const auto two = std::to_string(p.gray(2));
  const auto one = std::to_string(p.gray(1));
  CHECK(render_pgm(g, p) == "P2\n3 3\n255\n0 " + two + " 0\n0 0 0\n0 0 " + one + "\n");
}

TEST_CASE("standard palette grays are distinct and clamp") {
  const auto p = Palette::standard();
  std::set<int> grays;
  for (Grains v = 0; v < 8; ++v) grays.insert(p.gray(v));
  CHECK(grays.size() == 8);
  CHECK(p.gray(0) == 0);
  CHECK(p.color(1000) == p.color(7));
  // BT.601 luma of (33, 102, 172), rounded.
  CHECK(p.gray(1) == 89);
}

TEST_CASE("PNG signature and dimensions") {
  DenseGrid g(2, 1);
  g.set({0, 0}, 3);
  const auto png = render_png(g, Palette::standard());
  REQUIRE(png.size() > 33);
  const std::uint8_t sig[] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  CHECK(std::equal(std::begin(sig), std::end(sig), png.begin()));
  // IHDR width and height, big-endian.
  CHECK(png[16 + 3] == 5);
  CHECK(png[20 + 3] == 3);
  CHECK(render_png(g, Palette::standard()) == png);
  CHECK_THROWS_AS(render_png(DenseGrid::empty(), Palette::standard()), InputError);
}

TEST_CASE("grid CSV lists nonzero cells top row first") {
  DenseGrid g(1, 1);
  g.set({-1, -1}, 1);
  g.set({1, 1}, 3);
  g.set({0, 1}, 2);
  CHECK(grid_to_csv(g) == "i,j,value\n0,1,2\n1,1,3\n-1,-1,1\n");
}
