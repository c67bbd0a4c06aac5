#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string_view>

#include "scanres/image.hpp"

namespace scanres {

enum class NoiseKind { Gaussian, SaltPepper };

std::string_view to_string(NoiseKind kind);
NoiseKind parse_noise_kind(std::string_view text);  // "gaussian" | "sp" | "salt_pepper"

// Upper bound of the parameter range: variance 0.25 or density 0.5.
double max_parameter(NoiseKind kind);

struct NoiseSpec {
  NoiseKind kind = NoiseKind::Gaussian;
  double parameter = 0.0;
  std::uint64_t seed = 0;
};

// Zero-mean Gaussian noise of the given variance on [0,1]-scaled intensities.
GrayImage add_gaussian(const GrayImage& img, double variance, std::uint64_t seed);

// Sets exactly round(density * pixels) distinct positions to 0 or 255.
GrayImage add_salt_pepper(const GrayImage& img, double density, std::uint64_t seed);

GrayImage apply_noise(const GrayImage& img, const NoiseSpec& spec);

struct CalibrationTarget {
  double target_mean_ssim = 0.63;
  double tolerance = 0.01;
  double reference_std = 0.06;  // informational only
};

struct CalibrationResult {
  double parameter = 0.0;
  double mean_ssim = 0.0;  // f(parameter) as evaluated during the search
  int evaluations = 0;
  bool grid_fallback = false;
};

// Root search for f(p) = target on [0, p_max] where f is expected to be
// non-increasing. Bisection is used when f is monotone on a 5-point ladder;
// otherwise a log-spaced grid scan, refined linearly around its best point,
// picks the closest value.
CalibrationResult calibrate_parameter(const std::function<double(double)>& f, double p_max,
                                      const CalibrationTarget& target);

// Mean SSIM between each image and its noisy copy. Image i always uses the
// noise seed derive_seed(seed, {i}), so f is a deterministic function of p.
double mean_noisy_ssim(NoiseKind kind, std::span<const GrayImage> images, double parameter, std::uint64_t seed);

CalibrationResult calibrate_noise(NoiseKind kind, std::span<const GrayImage> images, const CalibrationTarget& target,
                                  std::uint64_t seed);

}  // namespace scanres
