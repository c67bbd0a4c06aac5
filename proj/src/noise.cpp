#include "scanres/noise.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "scanres/metrics.hpp"
#include "scanres/seed.hpp"

namespace scanres {

std::string_view to_string(NoiseKind kind) { return kind == NoiseKind::Gaussian ? "gaussian" : "sp"; }

NoiseKind parse_noise_kind(std::string_view text) {
  if (text == "gaussian") return NoiseKind::Gaussian;
  if (text == "sp" || text == "salt_pepper") return NoiseKind::SaltPepper;
  fail(ErrorCode::ParseError, "unknown noise kind '" + std::string(text) + "'");
}

double max_parameter(NoiseKind kind) { return kind == NoiseKind::Gaussian ? 0.25 : 0.5; }

GrayImage add_gaussian(const GrayImage& img, double variance, std::uint64_t seed) {
  if (!(variance >= 0.0) || variance > max_parameter(NoiseKind::Gaussian)) {
    fail(ErrorCode::InvalidParameter, "gaussian variance must lie in [0, 0.25]");
  }
  if (variance == 0.0) return img;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double sd = std::sqrt(variance);
  GrayImage out = img;
  for (auto& p : out.pixels()) {
    const double v = std::clamp(p / 255.0 + sd * normal(rng), 0.0, 1.0);
    p = static_cast<std::uint8_t>(std::lround(v * 255.0));
  }
  return out;
}

GrayImage add_salt_pepper(const GrayImage& img, double density, std::uint64_t seed) {
  if (!(density >= 0.0) || density > max_parameter(NoiseKind::SaltPepper)) {
    fail(ErrorCode::InvalidParameter, "salt-and-pepper density must lie in [0, 0.5]");
  }
  GrayImage out = img;
  const std::size_t total = out.pixels().size();
  const auto count = static_cast<std::size_t>(std::llround(density * static_cast<double>(total)));
  if (count == 0) return out;

  // Partial Fisher-Yates: the first `count` slots are a uniform sample without
  // replacement, and a larger density selects a superset under the same seed.
  std::vector<std::size_t> order(total);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  auto px = out.pixels();
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, total - 1);
    std::swap(order[i], order[pick(rng)]);
    px[order[i]] = (rng() & 1U) ? 255 : 0;
  }
  return out;
}

GrayImage apply_noise(const GrayImage& img, const NoiseSpec& spec) {
  return spec.kind == NoiseKind::Gaussian ? add_gaussian(img, spec.parameter, spec.seed)
                                          : add_salt_pepper(img, spec.parameter, spec.seed);
}

CalibrationResult calibrate_parameter(const std::function<double(double)>& f, double p_max,
                                      const CalibrationTarget& target) {
  if (!(target.target_mean_ssim > 0.0 && target.target_mean_ssim <= 1.0)) {
    fail(ErrorCode::InvalidParameter, "calibration target must lie in (0, 1]");
  }
  if (!(target.tolerance > 0.0)) fail(ErrorCode::InvalidParameter, "calibration tolerance must be positive");

  CalibrationResult result;
  double best_gap = std::numeric_limits<double>::infinity();
  auto eval = [&](double p) {
    const double v = f(p);
    ++result.evaluations;
    const double gap = std::abs(v - target.target_mean_ssim);
    if (gap < best_gap) {
      best_gap = gap;
      result.parameter = p;
      result.mean_ssim = v;
    }
    return v;
  };
  auto done = [&] { return best_gap <= target.tolerance; };

  const double f0 = eval(0.0);
  if (done()) return result;
  const double f_max = eval(p_max);
  if (done()) return result;
  if (f_max > target.target_mean_ssim) {
    fail(ErrorCode::TargetUnreachable, "maximum noise still yields mean SSIM " + std::to_string(f_max));
  }

  // Monotonicity probe on a log ladder ending at p_max.
  const std::array<double, 5> ladder = {1e-4, 1e-3, 1e-2, 1e-1, 1.0};
  double prev = f0;
  bool monotone = true;
  for (double frac : ladder) {
    const double v = frac == 1.0 ? f_max : eval(frac * p_max);
    if (done()) return result;
    if (v > prev + 1e-12) monotone = false;
    prev = v;
  }

  if (monotone) {
    double lo = 0.0, hi = p_max;
    for (int iter = 0; iter < 40 && !done(); ++iter) {
      const double mid = 0.5 * (lo + hi);
      if (eval(mid) > target.target_mean_ssim) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    return result;
  }

  result.grid_fallback = true;
  constexpr int kGridPoints = 200;
  constexpr int kRefinePoints = 100;
  const double log_lo = std::log(p_max * 1e-6), log_hi = std::log(p_max);
  std::vector<double> grid = {0.0};
  for (int i = 0; i < kGridPoints; ++i) grid.push_back(std::exp(log_lo + (log_hi - log_lo) * i / (kGridPoints - 1)));
  grid.back() = p_max;
  std::size_t best = 0;
  double best_grid_gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.size() && !done(); ++i) {
    const double gap = std::abs(eval(grid[i]) - target.target_mean_ssim);
    if (gap < best_grid_gap) best_grid_gap = gap, best = i;
  }
  // Linear scan between the neighbours of the best grid point.
  const double lo = grid[best == 0 ? 0 : best - 1];
  const double hi = grid[std::min(best + 1, grid.size() - 1)];
  for (int i = 1; i < kRefinePoints && !done(); ++i) eval(lo + (hi - lo) * i / kRefinePoints);
  return result;
}

double mean_noisy_ssim(NoiseKind kind, std::span<const GrayImage> images, double parameter, std::uint64_t seed) {
  if (images.empty()) fail(ErrorCode::EmptyInput, "no calibration images");
  double sum = 0.0;
  for (std::size_t i = 0; i < images.size(); ++i) {
    const NoiseSpec spec{kind, parameter, derive_seed(seed, {i})};
    sum += ssim(images[i], apply_noise(images[i], spec));
  }
  return sum / static_cast<double>(images.size());
}

CalibrationResult calibrate_noise(NoiseKind kind, std::span<const GrayImage> images, const CalibrationTarget& target,
                                  std::uint64_t seed) {
  if (images.empty()) fail(ErrorCode::EmptyInput, "no calibration images");
  return calibrate_parameter([&](double p) { return mean_noisy_ssim(kind, images, p, seed); }, max_parameter(kind),
                             target);
}

}  // namespace scanres
