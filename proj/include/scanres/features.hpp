#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>

#include "scanres/image.hpp"
#include "scanres/raster.hpp"

namespace scanres {

// Canonical feature order. Indices are stable: they key feature masks,
// persisted models, and selection rankings.
enum class Feature : std::size_t {
  Dsa = 0,
  PsdStd = 1,
  PsdMean = 2,
  EdStd = 3,
  EdMean = 4,
  TssimStd = 5,
  MseStd = 6,
  TssimMean = 7,
  MseMean = 8,
};

inline constexpr std::size_t kFeatureCount = 9;

std::string_view feature_name(std::size_t index);
std::optional<std::size_t> feature_index(std::string_view name);

struct FeatureVector {
  std::array<double, kFeatureCount> values{};

  double& operator[](Feature f) { return values[static_cast<std::size_t>(f)]; }
  double operator[](Feature f) const { return values[static_cast<std::size_t>(f)]; }
  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }

  bool all_finite() const;
  bool operator==(const FeatureVector&) const = default;
};

// Features of a region against its emulated rendition at `dpi`. Full-reference
// features compare `ref` with pair.at_base using the base tile size; edge
// density is measured on pair.native_lowres with the tile size of `dpi`.
FeatureVector extract_features(const GrayImage& ref, const EmulatedPair& pair, Dpi dpi);

// Convenience: emulate then extract.
FeatureVector extract_features(const GrayImage& ref, Dpi dpi);

// Features of a clean base-resolution region against a degraded copy of it.
// All features use the base tile size; edge density is taken on the degraded
// image.
FeatureVector extract_degraded_features(const GrayImage& clean, const GrayImage& degraded);

}  // namespace scanres
