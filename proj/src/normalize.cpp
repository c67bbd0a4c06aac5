#include "scanres/learn.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace scanres {

std::string_view to_string(Label label) { return label == Label::Acceptable ? "acceptable" : "unacceptable"; }

Label parse_label(std::string_view text) {
  if (text == "acceptable") return Label::Acceptable;
  if (text == "unacceptable") return Label::Unacceptable;
  fail(ErrorCode::ParseError, "unknown label '" + std::string(text) + "'");
}

FeatureMask mask_of(std::span<const std::size_t> indices) {
  FeatureMask m{};
  for (std::size_t i : indices) {
    if (i >= kFeatureCount) fail(ErrorCode::InvalidParameter, "feature index " + std::to_string(i) + " out of range");
    m[i] = true;
  }
  return m;
}

std::vector<std::size_t> mask_indices(const FeatureMask& mask) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    if (mask[i]) out.push_back(i);
  }
  return out;
}

std::string_view to_string(NormKind kind) { return kind == NormKind::ZScore ? "zscore" : "minmax"; }

NormKind parse_norm_kind(std::string_view text) {
  if (text == "zscore") return NormKind::ZScore;
  if (text == "minmax") return NormKind::MinMax;
  fail(ErrorCode::ParseError, "unknown normalization '" + std::string(text) + "'");
}

std::size_t Normalizer::dims() const { return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), true)); }

std::vector<double> Normalizer::apply(const FeatureVector& x) const {
  std::vector<double> z;
  z.reserve(dims());
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    if (mask[i]) z.push_back((x[i] - stats[i].offset) / stats[i].scale);
  }
  return z;
}

std::vector<std::size_t> degenerate_features(std::span<const FeatureVector> rows, const FeatureMask& mask) {
  std::vector<std::size_t> out;
  if (rows.empty()) return out;
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    if (!mask[i]) continue;
    const double first = rows.front()[i];
    const bool constant = std::all_of(rows.begin(), rows.end(), [&](const FeatureVector& r) { return r[i] == first; });
    if (constant) out.push_back(i);
  }
  return out;
}

Normalizer normalize_fit(std::span<const FeatureVector> rows, const FeatureMask& mask, NormKind kind) {
  if (rows.size() < 2) fail(ErrorCode::TooFewSamples, "normalization needs at least 2 rows");
  Normalizer norm;
  norm.kind = kind;
  norm.mask = mask;
  const double n = static_cast<double>(rows.size());
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    if (!mask[i]) continue;
    for (const auto& r : rows) {
      if (!std::isfinite(r[i])) fail(ErrorCode::InvalidFeature, "non-finite value in " + std::string(feature_name(i)));
    }
    NormStat& s = norm.stats[i];
    if (kind == NormKind::ZScore) {
      double sum = 0.0;
      for (const auto& r : rows) sum += r[i];
      const double mean = sum / n;
      double sq = 0.0;
      for (const auto& r : rows) sq += (r[i] - mean) * (r[i] - mean);
      s = {mean, std::sqrt(sq / n)};
    } else {
      auto [lo, hi] = std::minmax_element(rows.begin(), rows.end(),
                                          [&](const FeatureVector& a, const FeatureVector& b) { return a[i] < b[i]; });
      s = {(*lo)[i], (*hi)[i] - (*lo)[i]};
    }
    if (!(s.scale > 0.0)) fail(ErrorCode::DegenerateFeature, "feature '" + std::string(feature_name(i)) + "' is constant");
  }
  return norm;
}

}  // namespace scanres
