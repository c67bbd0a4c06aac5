#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "scanres/error.hpp"

namespace scanres {

// Canonical scan resolutions. 300 dpi is the base resolution every page is
// scanned at; the lower levels are emulated from it.
enum class Dpi : int { k100 = 100, k150 = 150, k200 = 200, k300 = 300 };

inline constexpr Dpi kBaseDpi = Dpi::k300;
inline constexpr std::array<Dpi, 4> kAllDpis = {Dpi::k100, Dpi::k150, Dpi::k200, Dpi::k300};

constexpr int value(Dpi dpi) { return static_cast<int>(dpi); }
std::optional<Dpi> dpi_from_int(int dpi);
// Throws InvalidParameter for values outside the canonical set.
Dpi parse_dpi(int dpi);

// Row-major 2D grid. Used for luminance images as well as derived scalar maps
// (gradient magnitudes, edge maps).
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(int width, int height, T fill = T{})
      : width_(width), height_(height), data_(checked_size(width, height), fill) {}
  Grid(int width, int height, std::vector<T> data) : width_(width), height_(height), data_(std::move(data)) {
    if (data_.size() != checked_size(width, height)) fail(ErrorCode::InvalidDimensions, "pixel count does not match dimensions");
  }

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T& at(int x, int y) { return data_[static_cast<std::size_t>(y) * width_ + x]; }
  const T& at(int x, int y) const { return data_[static_cast<std::size_t>(y) * width_ + x]; }

  // Replicate-padded access.
  const T& clamped(int x, int y) const {
    x = x < 0 ? 0 : (x >= width_ ? width_ - 1 : x);
    y = y < 0 ? 0 : (y >= height_ ? height_ - 1 : y);
    return at(x, y);
  }

  std::span<T> pixels() { return data_; }
  std::span<const T> pixels() const { return data_; }

  bool operator==(const Grid&) const = default;

 private:
  static std::size_t checked_size(int width, int height) {
    if (width < 1 || height < 1) fail(ErrorCode::InvalidDimensions, "grid dimensions must be positive");
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

using Field = Grid<double>;
using BinaryMap = Grid<std::uint8_t>;

// 8-bit luminance raster tagged with its sampling resolution.
class GrayImage {
 public:
  GrayImage() = default;
  GrayImage(int width, int height, Dpi dpi, std::uint8_t fill = 0) : grid_(width, height, fill), dpi_(dpi) {}
  GrayImage(int width, int height, Dpi dpi, std::vector<std::uint8_t> pixels)
      : grid_(width, height, std::move(pixels)), dpi_(dpi) {}

  int width() const { return grid_.width(); }
  int height() const { return grid_.height(); }
  Dpi dpi() const { return dpi_; }
  void set_dpi(Dpi dpi) { dpi_ = dpi; }
  bool empty() const { return grid_.empty(); }

  std::uint8_t& at(int x, int y) { return grid_.at(x, y); }
  std::uint8_t at(int x, int y) const { return grid_.at(x, y); }
  std::uint8_t clamped(int x, int y) const { return grid_.clamped(x, y); }

  std::span<std::uint8_t> pixels() { return grid_.pixels(); }
  std::span<const std::uint8_t> pixels() const { return grid_.pixels(); }

  bool operator==(const GrayImage&) const = default;

 private:
  Grid<std::uint8_t> grid_;
  Dpi dpi_ = kBaseDpi;
};

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  bool operator==(const Rgb&) const = default;
};

using RgbImage = Grid<Rgb>;

bool same_dims(const GrayImage& a, const GrayImage& b);
void require_same_dims(const GrayImage& a, const GrayImage& b);

// BT.601 luma, rounded to nearest.
GrayImage to_grayscale(const RgbImage& rgb, Dpi dpi = kBaseDpi);

double mean_intensity(const GrayImage& img);

}  // namespace scanres
