#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <json.hpp>

#include "scanres/features.hpp"
#include "scanres/learn.hpp"

namespace scanres {

using FeatureSubset = std::vector<std::size_t>;  // ascending feature indices

// Subset quality in [0, 1]; must be deterministic for memoization to hold.
using SubsetCriterion = std::function<double(const FeatureSubset&)>;

struct SubsetScore {
  FeatureSubset subset;
  double score = 0.0;
};

struct SelectionStep {
  enum class Kind { Forward, Backward } kind = Kind::Forward;
  std::size_t feature = 0;  // the feature added or removed
  SubsetScore result;
};

struct SelectionResult {
  FeatureSubset selected;
  // Features ordered by first inclusion into the best subset of each size.
  std::vector<std::size_t> ranking;
  // best[k-1] is the best subset of size k observed during the search.
  std::vector<SubsetScore> best;
  std::vector<SelectionStep> steps;
};

// Stratified k-fold accuracy of the default SVM restricted to `subset`.
double selection_criterion(std::span<const FeatureVector> rows, std::span<const Label> labels,
                           const FeatureSubset& subset, std::uint64_t eval_seed, const TrainConfig& base = {},
                           std::size_t folds = 5);

// Sequential floating forward selection over features 0..n_features-1. Each
// forward step adds the feature with the largest criterion (lowest index on
// ties); conditional backward steps then drop a feature while that strictly
// beats the best subset already seen at the smaller size.
SelectionResult sffs_select(std::size_t n_features, std::size_t d_target, const SubsetCriterion& criterion);

SelectionResult sffs_select(std::span<const FeatureVector> rows, std::span<const Label> labels, std::size_t d_target,
                            std::uint64_t eval_seed, std::size_t n_features = kFeatureCount);

std::vector<std::size_t> rank_features(std::span<const FeatureVector> rows, std::span<const Label> labels,
                                       std::uint64_t eval_seed, std::size_t n_features = kFeatureCount);

nlohmann::json to_json(const SelectionResult& result);

}  // namespace scanres
