#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "evosand/lattice.hpp"

namespace evosand {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;
  bool operator==(const Rgb&) const = default;
};

// Color per grain count; counts past the last entry use the last color.
struct Palette {
  std::vector<Rgb> colors;

  // Eight colors for 0..7 with pairwise distinct gray levels; 0 is black.
  static Palette standard();

  Rgb color(Grains value) const;
  // BT.601 luma of color(value), rounded.
  std::uint8_t gray(Grains value) const;
};

// Textual PGM (P2, maxval 255): one pixel per cell of the grid's box, top
// row first, gray levels from the palette.
std::string render_pgm(const DenseGrid& grid, const Palette& palette);

// 8-bit RGB PNG with the same layout.
std::vector<std::uint8_t> render_png(const DenseGrid& grid, const Palette& palette);

// `i,j,value` header then one row per nonzero cell, top row first, left to
// right within a row.
std::string grid_to_csv(const DenseGrid& grid);

}  // namespace evosand
