#include "scanres/sffs.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <string>

#include "scanres/eval.hpp"

namespace scanres {
namespace {

constexpr double kImprovement = 1e-12;
constexpr int kMaxSteps = 200;

std::uint64_t bits_of(const FeatureSubset& s) {
  std::uint64_t b = 0;
  for (std::size_t f : s) b |= std::uint64_t{1} << f;
  return b;
}

class MemoCriterion {
 public:
  explicit MemoCriterion(const SubsetCriterion& f) : f_(f) {}

  double operator()(const FeatureSubset& s) {
    const auto key = bits_of(s);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    const double v = f_(s);
    cache_.emplace(key, v);
    return v;
  }

 private:
  const SubsetCriterion& f_;
  std::map<std::uint64_t, double> cache_;
};

FeatureSubset with(FeatureSubset s, std::size_t f) {
  s.insert(std::upper_bound(s.begin(), s.end(), f), f);
  return s;
}

FeatureSubset without(FeatureSubset s, std::size_t f) {
  s.erase(std::find(s.begin(), s.end(), f));
  return s;
}

}  // namespace

double selection_criterion(std::span<const FeatureVector> rows, std::span<const Label> labels,
                           const FeatureSubset& subset, std::uint64_t eval_seed, const TrainConfig& base,
                           std::size_t folds) {
  if (subset.empty()) fail(ErrorCode::InvalidParameter, "criterion needs a nonempty subset");
  TrainConfig config = base;
  config.mask = mask_of(subset);
  return cv_accuracy(rows, labels, config, folds, eval_seed);
}

SelectionResult sffs_select(std::size_t n_features, std::size_t d_target, const SubsetCriterion& criterion) {
  if (n_features == 0 || n_features > 63) fail(ErrorCode::InvalidDimension, "feature count out of range");
  if (d_target < 1 || d_target > n_features) {
    fail(ErrorCode::InvalidDimension, "target size " + std::to_string(d_target) + " outside 1.." + std::to_string(n_features));
  }
  MemoCriterion J(criterion);
  SelectionResult result;
  std::vector<double> best_score(n_features + 1, -std::numeric_limits<double>::infinity());
  std::vector<FeatureSubset> best_set(n_features + 1);

  // Every evaluated subset competes for the best-at-its-size slot.
  auto score = [&](const FeatureSubset& s) {
    const double v = J(s);
    if (v > best_score[s.size()] + kImprovement) {
      best_score[s.size()] = v;
      best_set[s.size()] = s;
    }
    return v;
  };

  FeatureSubset current;
  int steps = 0;
  while (current.size() < d_target) {
    if (++steps > kMaxSteps) break;

    std::size_t add = n_features;
    double add_score = -std::numeric_limits<double>::infinity();
    for (std::size_t f = 0; f < n_features; ++f) {
      if (std::binary_search(current.begin(), current.end(), f)) continue;
      const double v = score(with(current, f));
      if (v > add_score) {
        add_score = v;
        add = f;
      }
    }
    current = with(current, add);
    result.steps.push_back({SelectionStep::Kind::Forward, add, {current, add_score}});

    while (current.size() > 2 && steps <= kMaxSteps) {
      std::size_t drop = n_features;
      double drop_score = -std::numeric_limits<double>::infinity();
      const double known = best_score[current.size() - 1];
      for (std::size_t f : current) {
        const double v = J(without(current, f));
        if (v > drop_score) {
          drop_score = v;
          drop = f;
        }
      }
      const bool improves = drop_score > known + kImprovement;
      for (std::size_t f : current) score(without(current, f));
      if (!improves) break;
      ++steps;
      current = without(current, drop);
      result.steps.push_back({SelectionStep::Kind::Backward, drop, {current, drop_score}});
    }
  }

  for (std::size_t k = 1; k <= d_target; ++k) {
    if (best_set[k].empty()) continue;
    result.best.push_back({best_set[k], best_score[k]});
  }
  result.selected = best_set[d_target].empty() ? current : best_set[d_target];

  std::vector<bool> ranked(n_features, false);
  for (const auto& b : result.best) {
    for (std::size_t f : b.subset) {
      if (!ranked[f]) {
        ranked[f] = true;
        result.ranking.push_back(f);
      }
    }
  }
  for (std::size_t f = 0; f < n_features; ++f) {
    if (!ranked[f]) result.ranking.push_back(f);
  }
  return result;
}

SelectionResult sffs_select(std::span<const FeatureVector> rows, std::span<const Label> labels, std::size_t d_target,
                            std::uint64_t eval_seed, std::size_t n_features) {
  if (n_features == 0 || n_features > kFeatureCount) fail(ErrorCode::InvalidDimension, "feature count out of range");
  return sffs_select(n_features, d_target, [&](const FeatureSubset& s) {
    return selection_criterion(rows, labels, s, eval_seed);
  });
}

std::vector<std::size_t> rank_features(std::span<const FeatureVector> rows, std::span<const Label> labels,
                                       std::uint64_t eval_seed, std::size_t n_features) {
  return sffs_select(rows, labels, n_features, eval_seed, n_features).ranking;
}

nlohmann::json to_json(const SelectionResult& result) {
  nlohmann::json trace = nlohmann::json::array();
  for (const auto& b : result.best) trace.push_back({{"size", b.subset.size()}, {"subset", b.subset}, {"score", b.score}});
  nlohmann::json names = nlohmann::json::array();
  for (std::size_t f : result.ranking) names.push_back(f < kFeatureCount ? std::string(feature_name(f)) : std::to_string(f));
  return {{"ranking", result.ranking}, {"ranking_names", std::move(names)}, {"selected", result.selected}, {"trace", std::move(trace)}};
}

}  // namespace scanres
