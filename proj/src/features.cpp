#include "scanres/features.hpp"

#include <cmath>
#include <string>

#include "scanres/metrics.hpp"

namespace scanres {
namespace {

constexpr std::array<std::string_view, kFeatureCount> kNames = {
    "dsa", "psd_std", "psd_mean", "ed_std", "ed_mean", "tssim_std", "mse_std", "tssim_mean", "mse_mean",
};

FeatureVector assemble(const GrayImage& ref, const GrayImage& test, const TileStats& ed) {
  const int base_tile = tile_size(kBaseDpi);
  const TileStats mse = mse_tiles(ref, test, base_tile);
  const TileStats psd = psd_tiles(ref, test, base_tile);
  const TileStats tssim = tile_ssim(ref, test, base_tile);

  FeatureVector v;
  v[Feature::Dsa] = dsa(ref, test);
  v[Feature::PsdStd] = psd.stddev;
  v[Feature::PsdMean] = psd.mean;
  v[Feature::EdStd] = ed.stddev;
  v[Feature::EdMean] = ed.mean;
  v[Feature::TssimStd] = tssim.stddev;
  v[Feature::MseStd] = mse.stddev;
  v[Feature::TssimMean] = tssim.mean;
  v[Feature::MseMean] = mse.mean;
  if (!v.all_finite()) fail(ErrorCode::InvalidFeature, "non-finite feature value");
  return v;
}

}  // namespace

std::string_view feature_name(std::size_t index) {
  if (index >= kFeatureCount) fail(ErrorCode::InvalidParameter, "feature index out of range");
  return kNames[index];
}

std::optional<std::size_t> feature_index(std::string_view name) {
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    if (kNames[i] == name) return i;
  }
  return std::nullopt;
}

bool FeatureVector::all_finite() const {
  for (double v : values) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

FeatureVector extract_features(const GrayImage& ref, const EmulatedPair& pair, Dpi dpi) {
  if (ref.dpi() != kBaseDpi) fail(ErrorCode::InvalidParameter, "reference must be a 300 dpi raster");
  if (pair.native_lowres.dpi() != dpi) fail(ErrorCode::InvalidParameter, "emulated pair does not match the candidate dpi");
  return assemble(ref, pair.at_base, edge_density(pair.native_lowres, tile_size(dpi)));
}

FeatureVector extract_features(const GrayImage& ref, Dpi dpi) { return extract_features(ref, emulate_dpi(ref, dpi), dpi); }

FeatureVector extract_degraded_features(const GrayImage& clean, const GrayImage& degraded) {
  return assemble(clean, degraded, edge_density(degraded, tile_size(kBaseDpi)));
}

}  // namespace scanres
