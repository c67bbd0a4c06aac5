#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "scanres/features.hpp"
#include "scanres/segmentation.hpp"

namespace scanres {

enum class Label { Acceptable, Unacceptable };

std::string_view to_string(Label label);
Label parse_label(std::string_view text);
// Acceptable is the positive class.
constexpr int sign(Label label) { return label == Label::Acceptable ? +1 : -1; }

using FeatureMask = std::array<bool, kFeatureCount>;
constexpr FeatureMask all_features() {
  FeatureMask m{};
  m.fill(true);
  return m;
}
FeatureMask mask_of(std::span<const std::size_t> indices);
std::vector<std::size_t> mask_indices(const FeatureMask& mask);

// ---------------------------------------------------------------------------
// Normalization

enum class NormKind { ZScore, MinMax };

std::string_view to_string(NormKind kind);
NormKind parse_norm_kind(std::string_view text);

// z = (x - offset) / scale. For z-scores offset/scale are the training mean
// and population stddev; for min-max they are the minimum and the range.
struct NormStat {
  double offset = 0.0;
  double scale = 1.0;
  bool operator==(const NormStat&) const = default;
};

struct Normalizer {
  NormKind kind = NormKind::ZScore;
  FeatureMask mask = all_features();
  std::array<NormStat, kFeatureCount> stats{};

  std::size_t dims() const;
  // Projects onto the unmasked features, in canonical order.
  std::vector<double> apply(const FeatureVector& x) const;

  bool operator==(const Normalizer&) const = default;
};

// Throws TooFewSamples for < 2 rows and DegenerateFeature (naming the feature)
// when an unmasked column is constant.
Normalizer normalize_fit(std::span<const FeatureVector> rows, const FeatureMask& mask, NormKind kind = NormKind::ZScore);

// Unmasked features whose training column is constant.
std::vector<std::size_t> degenerate_features(std::span<const FeatureVector> rows, const FeatureMask& mask);

// ---------------------------------------------------------------------------
// Kernel SVM

enum class KernelKind { Linear, Rbf };

std::string_view to_string(KernelKind kind);
KernelKind parse_kernel_kind(std::string_view text);

struct Kernel {
  KernelKind kind = KernelKind::Rbf;
  double gamma = 1.0;

  double operator()(std::span<const double> a, std::span<const double> b) const;
  bool operator==(const Kernel&) const = default;
};

struct SvmParams {
  KernelKind kernel = KernelKind::Rbf;
  // Unset: 1 / (d * mean feature variance) of the training matrix.
  std::optional<double> gamma;
  double C = 1.0;
  // Per-class multipliers on C, for imbalance experiments.
  double c_scale_acceptable = 1.0;
  double c_scale_unacceptable = 1.0;
  double tolerance = 1e-3;
  long max_iterations = 10'000'000;
};

// Trained dual solution in normalized feature space.
struct KernelMachine {
  Kernel kernel;
  double C = 1.0;
  std::vector<std::vector<double>> support_vectors;
  std::vector<double> dual_coefficients;  // alpha_i * y_i
  double bias = 0.0;

  double decision(std::span<const double> x) const;
  bool operator==(const KernelMachine&) const = default;
};

struct SvmTrainInfo {
  long iterations = 0;
  // Dual objective (maximization form) after every SMO step.
  std::vector<double> objective_trace;
  bool record_objective = false;
  // Final alpha of every training row, in input order.
  std::vector<double> alpha;
};

double default_gamma(std::span<const std::vector<double>> rows);

// Soft-margin dual solved by SMO with maximal-violating-pair working-set
// selection (ties go to the lowest index), stopping when the KKT gap falls
// below params.tolerance.
KernelMachine train_svm(std::span<const std::vector<double>> rows, std::span<const Label> labels,
                        const SvmParams& params = {}, SvmTrainInfo* info = nullptr);

// ---------------------------------------------------------------------------
// Full classifier: normalization + machine + provenance.

struct TrainConfig {
  SvmParams svm;
  NormKind norm = NormKind::ZScore;
  FeatureMask mask = all_features();
  // Drop constant columns from the mask instead of failing.
  bool drop_degenerate = true;
};

struct Prediction {
  Label label = Label::Acceptable;
  double decision = 0.0;
};

struct SvmModel {
  static constexpr int kVersion = 1;

  Normalizer normalizer;
  KernelMachine machine;
  std::string training_digest;

  // acceptable iff decision >= 0
  Prediction predict(const FeatureVector& x) const;
  bool operator==(const SvmModel&) const = default;
};

SvmModel fit_model(std::span<const FeatureVector> rows, std::span<const Label> labels, const TrainConfig& config = {},
                   SvmTrainInfo* info = nullptr);

std::string training_digest(std::span<const FeatureVector> rows, std::span<const Label> labels);

nlohmann::json to_json(const SvmModel& model);
SvmModel model_from_json(const nlohmann::json& j);
void save_model(const std::filesystem::path& path, const SvmModel& model);
SvmModel load_model(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Resolution decision.

using Predictor = std::function<Prediction(const FeatureVector&)>;

// Smallest dpi in {100, 150, 200} predicted acceptable, otherwise 300.
Dpi min_acceptable_dpi(const Predictor& predictor, const GrayImage& region);
Dpi min_acceptable_dpi(const Predictor& predictor, const GrayImage& page, const RegionSpec& region);
Dpi min_acceptable_dpi(const SvmModel& model, const GrayImage& page, const RegionSpec& region);

}  // namespace scanres
