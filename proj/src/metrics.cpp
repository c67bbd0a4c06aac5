#include "scanres/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

namespace scanres {
namespace {

// Separable filtering with a 1D kernel and replicate padding.
Field convolve_separable(const Field& src, const std::vector<double>& kernel) {
  const int r = static_cast<int>(kernel.size()) / 2;
  Field tmp(src.width(), src.height());
  for (int y = 0; y < src.height(); ++y) {
    for (int x = 0; x < src.width(); ++x) {
      double acc = 0.0;
      for (int k = -r; k <= r; ++k) acc += kernel[k + r] * src.clamped(x + k, y);
      tmp.at(x, y) = acc;
    }
  }
  Field out(src.width(), src.height());
  for (int y = 0; y < src.height(); ++y) {
    for (int x = 0; x < src.width(); ++x) {
      double acc = 0.0;
      for (int k = -r; k <= r; ++k) acc += kernel[k + r] * tmp.clamped(x, y + k);
      out.at(x, y) = acc;
    }
  }
  return out;
}

std::vector<double> gaussian_kernel(int size, double sigma) {
  std::vector<double> k(size);
  const int r = size / 2;
  double sum = 0.0;
  for (int i = 0; i < size; ++i) {
    const double d = i - r;
    k[i] = std::exp(-d * d / (2.0 * sigma * sigma));
    sum += k[i];
  }
  for (auto& v : k) v /= sum;
  return k;
}

Field to_field(const GrayImage& img) {
  Field f(img.width(), img.height());
  auto src = img.pixels();
  auto dst = f.pixels();
  std::copy(src.begin(), src.end(), dst.begin());
  return f;
}

struct Gradients {
  Field gx, gy, magnitude;
};

Gradients sobel(const Field& f) {
  Gradients g{Field(f.width(), f.height()), Field(f.width(), f.height()), Field(f.width(), f.height())};
  for (int y = 0; y < f.height(); ++y) {
    for (int x = 0; x < f.width(); ++x) {
      const double tl = f.clamped(x - 1, y - 1), tc = f.clamped(x, y - 1), tr = f.clamped(x + 1, y - 1);
      const double ml = f.clamped(x - 1, y), mr = f.clamped(x + 1, y);
      const double bl = f.clamped(x - 1, y + 1), bc = f.clamped(x, y + 1), br = f.clamped(x + 1, y + 1);
      const double gx = (tr + 2.0 * mr + br) - (tl + 2.0 * ml + bl);
      const double gy = (bl + 2.0 * bc + br) - (tl + 2.0 * tc + tr);
      g.gx.at(x, y) = gx;
      g.gy.at(x, y) = gy;
      g.magnitude.at(x, y) = std::sqrt(gx * gx + gy * gy);
    }
  }
  return g;
}

void require_min_dims(const GrayImage& img, int min_side, const char* what) {
  if (img.width() < min_side || img.height() < min_side) {
    fail(ErrorCode::ImageTooSmall, std::string(what) + " needs at least " + std::to_string(min_side) + "x" +
                                       std::to_string(min_side) + " pixels");
  }
}

// Row-major DFT of a square tile: F = W X W^T with W[k][n] = exp(-2 pi i k n / N).
class TileDft {
 public:
  explicit TileDft(int n) : n_(n), twiddle_(static_cast<std::size_t>(n) * n) {
    for (int k = 0; k < n; ++k) {
      for (int m = 0; m < n; ++m) {
        const double angle = -2.0 * std::numbers::pi * ((static_cast<long>(k) * m) % n) / n;
        twiddle_[static_cast<std::size_t>(k) * n + m] = std::polar(1.0, angle);
      }
    }
    rows_.resize(static_cast<std::size_t>(n) * n);
  }

  // Normalized power spectrum |F|^2 / N^2 of the tile at (x0, y0).
  const std::vector<double>& power(const GrayImage& img, int x0, int y0) {
    const int n = n_;
    for (int y = 0; y < n; ++y) {
      for (int k = 0; k < n; ++k) {
        std::complex<double> acc = 0.0;
        for (int x = 0; x < n; ++x) acc += twiddle_[static_cast<std::size_t>(k) * n + x] * double(img.at(x0 + x, y0 + y));
        rows_[static_cast<std::size_t>(y) * n + k] = acc;
      }
    }
    power_.assign(static_cast<std::size_t>(n) * n, 0.0);
    const double norm = static_cast<double>(n) * n;
    for (int l = 0; l < n; ++l) {
      for (int k = 0; k < n; ++k) {
        std::complex<double> acc = 0.0;
        for (int y = 0; y < n; ++y) acc += twiddle_[static_cast<std::size_t>(l) * n + y] * rows_[static_cast<std::size_t>(y) * n + k];
        power_[static_cast<std::size_t>(l) * n + k] = std::norm(acc) / norm;
      }
    }
    return power_;
  }

 private:
  int n_;
  std::vector<std::complex<double>> twiddle_;
  std::vector<std::complex<double>> rows_;
  std::vector<double> power_;
};

double tile_ssim_value(const GrayImage& ref, const GrayImage& test, const Tile& t, const SsimParams& params) {
  const double n = static_cast<double>(t.size) * t.size;
  double sum_a = 0.0, sum_b = 0.0;
  for (int y = t.y; y < t.y + t.size; ++y) {
    for (int x = t.x; x < t.x + t.size; ++x) {
      sum_a += ref.at(x, y);
      sum_b += test.at(x, y);
    }
  }
  const double mu_a = sum_a / n, mu_b = sum_b / n;
  double var_a = 0.0, var_b = 0.0, cov = 0.0;
  for (int y = t.y; y < t.y + t.size; ++y) {
    for (int x = t.x; x < t.x + t.size; ++x) {
      const double da = ref.at(x, y) - mu_a, db = test.at(x, y) - mu_b;
      var_a += da * da;
      var_b += db * db;
      cov += da * db;
    }
  }
  var_a /= n;
  var_b /= n;
  cov /= n;
  const double c1 = params.c1(), c2 = params.c2();
  return ((2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)) / ((mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2));
}

}  // namespace

std::vector<Tile> tile_partition(int width, int height, int size) {
  if (size < 1) fail(ErrorCode::InvalidParameter, "tile size must be positive");
  if (width < size || height < size) {
    fail(ErrorCode::MapTooSmall, std::to_string(width) + "x" + std::to_string(height) + " map is smaller than one " +
                                     std::to_string(size) + "px tile");
  }
  std::vector<Tile> tiles;
  for (int y = 0; y + size <= height; y += size) {
    for (int x = 0; x + size <= width; x += size) tiles.push_back({x, y, size});
  }
  return tiles;
}

TileStats tile_stats(const std::vector<double>& per_tile) {
  if (per_tile.empty()) fail(ErrorCode::MapTooSmall, "no tiles to summarize");
  double sum = 0.0;
  for (double v : per_tile) sum += v;
  const double mean = sum / static_cast<double>(per_tile.size());
  double sq = 0.0;
  for (double v : per_tile) sq += (v - mean) * (v - mean);
  return {mean, std::sqrt(sq / static_cast<double>(per_tile.size()))};
}

Field sobel_magnitude(const GrayImage& img) {
  require_min_dims(img, 3, "Sobel");
  return sobel(to_field(img)).magnitude;
}

double dsa(const GrayImage& ref, const GrayImage& test) {
  require_same_dims(ref, test);
  const Field a = sobel_magnitude(ref);
  const Field b = sobel_magnitude(test);
  double sum = 0.0;
  auto pa = a.pixels(), pb = b.pixels();
  for (std::size_t i = 0; i < pa.size(); ++i) sum += (pa[i] - pb[i]) * (pa[i] - pb[i]);
  return std::sqrt(sum / static_cast<double>(pa.size()));
}

TileStats mse_tiles(const GrayImage& ref, const GrayImage& test, int tile) {
  require_same_dims(ref, test);
  const auto tiles = tile_partition(ref.width(), ref.height(), tile);
  std::vector<double> values;
  values.reserve(tiles.size());
  for (const Tile& t : tiles) {
    double sum = 0.0;
    for (int y = t.y; y < t.y + t.size; ++y) {
      for (int x = t.x; x < t.x + t.size; ++x) {
        const double d = double(ref.at(x, y)) - double(test.at(x, y));
        sum += d * d;
      }
    }
    values.push_back(sum / (static_cast<double>(t.size) * t.size));
  }
  return tile_stats(values);
}

TileStats psd_tiles(const GrayImage& ref, const GrayImage& test, int tile) {
  require_same_dims(ref, test);
  const auto tiles = tile_partition(ref.width(), ref.height(), tile);
  TileDft dft_ref(tile), dft_test(tile);
  std::vector<double> values;
  values.reserve(tiles.size());
  for (const Tile& t : tiles) {
    const auto& pa = dft_ref.power(ref, t.x, t.y);
    const auto& pb = dft_test.power(test, t.x, t.y);
    double sum = 0.0;
    for (std::size_t i = 0; i < pa.size(); ++i) sum += std::abs(pa[i] - pb[i]);
    values.push_back(sum / static_cast<double>(pa.size()));
  }
  return tile_stats(values);
}

BinaryMap canny_edges(const GrayImage& img, const CannyParams& params) {
  require_min_dims(img, params.kernel_size, "Canny");
  const Field smooth = convolve_separable(to_field(img), gaussian_kernel(params.kernel_size, params.sigma));
  const Gradients g = sobel(smooth);
  const int w = img.width(), h = img.height();

  double max_mag = 0.0;
  for (double m : g.magnitude.pixels()) max_mag = std::max(max_mag, m);
  BinaryMap edges(w, h, 0);
  if (max_mag <= 0.0) return edges;

  auto mag_or_zero = [&](int x, int y) { return (x < 0 || y < 0 || x >= w || y >= h) ? 0.0 : g.magnitude.at(x, y); };

  // Non-maximum suppression along the quantized gradient direction. The pixel
  // must beat its "behind" neighbour strictly and tie-or-beat the one ahead,
  // so a two-pixel plateau thins to a single line.
  Field thin(w, h, 0.0);
  const double tan22 = std::tan(std::numbers::pi / 8.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double m = g.magnitude.at(x, y);
      if (m <= 0.0) continue;
      const double gx = g.gx.at(x, y), gy = g.gy.at(x, y);
      const double ax = std::abs(gx), ay = std::abs(gy);
      int dx, dy;
      if (ay <= tan22 * ax) {
        dx = 1, dy = 0;
      } else if (ax <= tan22 * ay) {
        dx = 0, dy = 1;
      } else if ((gx > 0) == (gy > 0)) {
        dx = 1, dy = 1;
      } else {
        dx = 1, dy = -1;
      }
      const double behind = mag_or_zero(x - dx, y - dy);
      const double ahead = mag_or_zero(x + dx, y + dy);
      if (m > behind && m >= ahead) thin.at(x, y) = m;
    }
  }

  const double high = params.high_ratio * max_mag;
  const double low = params.low_ratio * max_mag;
  std::vector<std::pair<int, int>> stack;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (thin.at(x, y) >= high && !edges.at(x, y)) {
        edges.at(x, y) = 1;
        stack.emplace_back(x, y);
        while (!stack.empty()) {
          auto [cx, cy] = stack.back();
          stack.pop_back();
          for (int ny = cy - 1; ny <= cy + 1; ++ny) {
            for (int nx = cx - 1; nx <= cx + 1; ++nx) {
              if (nx < 0 || ny < 0 || nx >= w || ny >= h || edges.at(nx, ny)) continue;
              if (thin.at(nx, ny) >= low) {
                edges.at(nx, ny) = 1;
                stack.emplace_back(nx, ny);
              }
            }
          }
        }
      }
    }
  }
  return edges;
}

TileStats edge_density(const BinaryMap& edges, int tile) {
  const auto tiles = tile_partition(edges, tile);
  std::vector<double> values;
  values.reserve(tiles.size());
  for (const Tile& t : tiles) {
    int count = 0;
    for (int y = t.y; y < t.y + t.size; ++y) {
      for (int x = t.x; x < t.x + t.size; ++x) count += edges.at(x, y) ? 1 : 0;
    }
    values.push_back(static_cast<double>(count) / (static_cast<double>(t.size) * t.size));
  }
  return tile_stats(values);
}

TileStats edge_density(const GrayImage& native_lowres, int tile) {
  // Tiling is checked first so an undersized map reports MapTooSmall.
  tile_partition(native_lowres.width(), native_lowres.height(), tile);
  return edge_density(canny_edges(native_lowres), tile);
}

double ssim(const GrayImage& ref, const GrayImage& test, const SsimParams& params) {
  require_same_dims(ref, test);
  require_min_dims(ref, params.window, "SSIM");
  const int w = ref.width(), h = ref.height(), win = params.window;
  const auto kernel = gaussian_kernel(win, params.sigma);

  // Weighted window moments at every valid position, computed separably.
  const int vw = w - win + 1, vh = h - win + 1;
  auto window_sums = [&](auto&& value) {
    Field horiz(vw, h);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < vw; ++x) {
        double acc = 0.0;
        for (int k = 0; k < win; ++k) acc += kernel[k] * value(x + k, y);
        horiz.at(x, y) = acc;
      }
    }
    Field out(vw, vh);
    for (int y = 0; y < vh; ++y) {
      for (int x = 0; x < vw; ++x) {
        double acc = 0.0;
        for (int k = 0; k < win; ++k) acc += kernel[k] * horiz.at(x, y + k);
        out.at(x, y) = acc;
      }
    }
    return out;
  };
  auto a = [&](int x, int y) { return double(ref.at(x, y)); };
  auto b = [&](int x, int y) { return double(test.at(x, y)); };
  const Field mu_a = window_sums(a);
  const Field mu_b = window_sums(b);
  const Field aa = window_sums([&](int x, int y) { return a(x, y) * a(x, y); });
  const Field bb = window_sums([&](int x, int y) { return b(x, y) * b(x, y); });
  const Field ab = window_sums([&](int x, int y) { return a(x, y) * b(x, y); });

  const double c1 = params.c1(), c2 = params.c2();
  double total = 0.0;
  for (int y = 0; y < vh; ++y) {
    for (int x = 0; x < vw; ++x) {
      const double ma = mu_a.at(x, y), mb = mu_b.at(x, y);
      const double va = aa.at(x, y) - ma * ma;
      const double vb = bb.at(x, y) - mb * mb;
      const double cov = ab.at(x, y) - ma * mb;
      total += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
    }
  }
  return total / (static_cast<double>(vw) * vh);
}

TileStats tile_ssim(const GrayImage& ref, const GrayImage& test, int tile, const SsimParams& params) {
  require_same_dims(ref, test);
  if (tile < 4) fail(ErrorCode::InvalidParameter, "tile-SSIM needs tiles of at least 4 pixels");
  const auto tiles = tile_partition(ref.width(), ref.height(), tile);
  std::vector<double> values;
  values.reserve(tiles.size());
  for (const Tile& t : tiles) values.push_back(tile_ssim_value(ref, test, t, params));
  return tile_stats(values);
}

}  // namespace scanres
