#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "scanres/features.hpp"
#include "scanres/learn.hpp"

namespace scanres {

enum class Origin { Rated, Augmented };

std::string_view to_string(Origin origin);
Origin parse_origin(std::string_view text);

struct Sample {
  FeatureVector features;
  Label label = Label::Acceptable;
  Dpi dpi = kBaseDpi;
  Origin origin = Origin::Rated;
  std::string region_id;

  bool operator==(const Sample&) const = default;
};

using Folds = std::vector<std::vector<std::size_t>>;

struct FoldSplit {
  Folds folds;
  // False when some stratum had fewer than k members and the split fell back
  // to an unstratified shuffle.
  bool stratified = true;
};

// Seeded (stratified when `strata` is non-empty) k-fold partition of 0..n-1.
// Fold sizes differ by at most one overall and within each stratum.
FoldSplit kfold_split(std::size_t n, std::size_t k, std::uint64_t seed, std::span<const Label> strata = {});

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
};

// Rows: actual class, columns: predicted class; index 0 acceptable, 1 unacceptable.
using CountMatrix = std::array<std::array<std::size_t, 2>, 2>;
using RateMatrix = std::array<std::array<double, 2>, 2>;

struct ClassificationMetrics {
  double accuracy = 0.0;
  ClassMetrics acceptable;
  ClassMetrics unacceptable;
  CountMatrix counts{};
  RateMatrix confusion{};  // row-normalized; an empty row stays zero
};

// Harmonic mean; 0 when precision + recall == 0.
double f1_score(double precision, double recall);

ClassificationMetrics metrics_from_counts(const CountMatrix& counts);
ClassificationMetrics classification_metrics(std::span<const Label> truth, std::span<const Label> predicted);

// Mean accuracy over a seeded stratified k-fold split of the rows, training a
// fresh model (normalization + SVM) on every fold.
double cv_accuracy(std::span<const FeatureVector> rows, std::span<const Label> labels, const TrainConfig& config,
                   std::size_t k, std::uint64_t seed);

// 3x3 search over C in {0.1, 1, 10} and gamma in {0.1, 1, 10}/d by cv_accuracy.
// The first best cell in row-major order wins.
TrainConfig grid_search(std::span<const FeatureVector> rows, std::span<const Label> labels, const TrainConfig& base,
                        std::size_t k, std::uint64_t seed);

struct CvConfig {
  std::size_t runs = 100;
  std::size_t k = 5;
  std::uint64_t base_seed = 0;
  TrainConfig train;
};

// Produces the test folds of one run as indices into the sample list. The
// default stratifies the rated samples only. Exposed so tests can inject a
// faulty protocol.
using FoldProvider = std::function<Folds(std::span<const Sample> samples, std::size_t k, std::uint64_t run_seed)>;

Folds rated_folds(std::span<const Sample> samples, std::size_t k, std::uint64_t run_seed);

struct EvalReport {
  std::size_t runs = 0;
  std::size_t k = 0;
  std::uint64_t base_seed = 0;
  std::size_t rated_samples = 0;
  std::size_t augmented_samples = 0;
  double mean_accuracy = 0.0;
  double variance_accuracy = 0.0;  // population variance over runs
  std::vector<double> per_run_accuracies;
  std::vector<ClassificationMetrics> per_run;
  ClassificationMetrics pooled;  // micro-pooled over all runs
};

// Repeated k-fold cross-validation. Augmented samples only ever join the
// training side; a test fold containing one raises ProtocolViolation.
EvalReport cross_validate(std::span<const Sample> samples, const CvConfig& config,
                          const FoldProvider& folds = rated_folds);

nlohmann::json to_json(const ClassificationMetrics& m);
nlohmann::json to_json(const EvalReport& report);
std::string format_report(const EvalReport& report);

}  // namespace scanres
