#include "evosand/render.hpp"

#include <algorithm>
#include <sstream>

#include <png.h>

namespace evosand {

Palette Palette::standard() {
  return Palette{{
      {0, 0, 0},
      {33, 102, 172},
      {103, 169, 207},
      {209, 229, 240},
      {253, 219, 199},
      {239, 138, 98},
      {178, 24, 43},
      {255, 255, 255},
  }};
}

Rgb Palette::color(Grains value) const {
  if (colors.empty()) throw InputError("palette has no colors");
  const auto last = static_cast<Grains>(colors.size() - 1);
  return colors[static_cast<std::size_t>(std::clamp<Grains>(value, 0, last))];
}

std::uint8_t Palette::gray(Grains value) const {
  const auto c = color(value);
  return static_cast<std::uint8_t>((299 * c.r + 587 * c.g + 114 * c.b + 500) / 1000);
}

namespace {

void require_area(const DenseGrid& grid) {
  if (grid.zero_area()) throw InputError("cannot render a zero-area grid");
}

void write_to_vector(png_structp png, png_bytep data, png_size_t length) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + length);
}

void flush_noop(png_structp) {}

}  // namespace

std::string render_pgm(const DenseGrid& grid, const Palette& palette) {
  require_area(grid);
  std::ostringstream os;
  os << "P2\n" << grid.width() << ' ' << grid.height() << "\n255\n";
  for (std::int64_t j = grid.ry(); j >= -grid.ry(); --j) {
    for (std::int64_t i = -grid.rx(); i <= grid.rx(); ++i) {
      if (i != -grid.rx()) os << ' ';
      os << static_cast<unsigned>(palette.gray(grid.at(i, j)));
    }
    os << '\n';
  }
  return os.str();
}

std::vector<std::uint8_t> render_png(const DenseGrid& grid, const Palette& palette) {
  require_area(grid);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw std::runtime_error("png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw std::runtime_error("png_create_info_struct failed");
  }

  std::vector<std::uint8_t> out;
  const auto w = static_cast<std::size_t>(grid.width());
  const auto h = static_cast<std::size_t>(grid.height());
  std::vector<std::uint8_t> row(3 * w);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("PNG encoding failed");
  }
  png_set_write_fn(png, &out, write_to_vector, flush_noop);
  png_set_IHDR(png, info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h), 8,
               PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (std::int64_t j = grid.ry(); j >= -grid.ry(); --j) {
    std::size_t k = 0;
    for (std::int64_t i = -grid.rx(); i <= grid.rx(); ++i) {
      const auto c = palette.color(grid.at(i, j));
      row[k++] = c.r;
      row[k++] = c.g;
      row[k++] = c.b;
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

std::string grid_to_csv(const DenseGrid& grid) {
  std::ostringstream os;
  os << "i,j,value\n";
  if (grid.zero_area()) return os.str();
  for (std::int64_t j = grid.ry(); j >= -grid.ry(); --j) {
    for (std::int64_t i = -grid.rx(); i <= grid.rx(); ++i) {
      if (auto v = grid.at(i, j)) os << i << ',' << j << ',' << v << '\n';
    }
  }
  return os.str();
}

}  // namespace evosand
