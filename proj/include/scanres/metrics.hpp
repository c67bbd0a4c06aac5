#pragma once

#include <vector>

#include "scanres/image.hpp"

namespace scanres {

// Physical tile of roughly 0.04 in at every resolution.
constexpr int tile_size(Dpi dpi) {
  switch (dpi) {
    case Dpi::k300: return 12;
    case Dpi::k200: return 8;
    case Dpi::k150: return 6;
    case Dpi::k100: return 4;
  }
  return 12;
}

struct Tile {
  int x = 0;
  int y = 0;
  int size = 0;
  bool operator==(const Tile&) const = default;
};

// Non-overlapping size x size tiles in row-major order. Partial tiles at the
// right and bottom edges are dropped. Throws MapTooSmall if none fit.
std::vector<Tile> tile_partition(int width, int height, int size);

template <typename T>
std::vector<Tile> tile_partition(const Grid<T>& map, int size) {
  return tile_partition(map.width(), map.height(), size);
}

struct TileStats {
  double mean = 0.0;
  double stddev = 0.0;  // population (divide by N)
};

TileStats tile_stats(const std::vector<double>& per_tile);

// 3x3 Sobel gradient magnitude with replicate padding.
Field sobel_magnitude(const GrayImage& img);

// Differential spatial activity: RMS difference of the Sobel magnitude maps.
double dsa(const GrayImage& ref, const GrayImage& test);

TileStats mse_tiles(const GrayImage& ref, const GrayImage& test, int tile);

// Per tile: mean absolute difference between the normalized power spectra
// |DFT|^2 / tile^2 of the two tiles.
TileStats psd_tiles(const GrayImage& ref, const GrayImage& test, int tile);

struct CannyParams {
  double sigma = 1.0;
  int kernel_size = 5;
  double low_ratio = 0.1;   // of the maximum gradient magnitude
  double high_ratio = 0.2;
};

// Binary edge map (1 = edge).
BinaryMap canny_edges(const GrayImage& img, const CannyParams& params = {});

// Fraction of edge pixels per tile of a binary map.
TileStats edge_density(const BinaryMap& edges, int tile);
TileStats edge_density(const GrayImage& native_lowres, int tile);

struct SsimParams {
  int window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double dynamic_range = 255.0;

  double c1() const { return (k1 * dynamic_range) * (k1 * dynamic_range); }
  double c2() const { return (k2 * dynamic_range) * (k2 * dynamic_range); }
};

// Single-scale Gaussian-window SSIM averaged over all valid window positions.
double ssim(const GrayImage& ref, const GrayImage& test, const SsimParams& params = {});

// SSIM per tile using one uniform window covering the whole tile.
TileStats tile_ssim(const GrayImage& ref, const GrayImage& test, int tile, const SsimParams& params = {});

}  // namespace scanres
