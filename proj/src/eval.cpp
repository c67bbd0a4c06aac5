#include "scanres/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <random>
#include <sstream>

#include "scanres/seed.hpp"

namespace scanres {
namespace {

std::size_t class_index(Label l) { return l == Label::Acceptable ? 0 : 1; }

ClassMetrics class_metrics(const CountMatrix& c, std::size_t cls) {
  const std::size_t other = 1 - cls;
  const std::size_t tp = c[cls][cls];
  const std::size_t fp = c[other][cls];
  const std::size_t fn = c[cls][other];
  ClassMetrics m;
  m.support = tp + fn;
  m.precision = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  m.recall = tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  m.f1 = f1_score(m.precision, m.recall);
  return m;
}

void add_counts(CountMatrix& into, const CountMatrix& from) {
  for (int a = 0; a < 2; ++a) {
    for (int p = 0; p < 2; ++p) into[a][p] += from[a][p];
  }
}

}  // namespace

std::string_view to_string(Origin origin) { return origin == Origin::Rated ? "rated" : "augmented"; }

Origin parse_origin(std::string_view text) {
  if (text == "rated") return Origin::Rated;
  if (text == "augmented") return Origin::Augmented;
  fail(ErrorCode::ParseError, "unknown origin '" + std::string(text) + "'");
}

FoldSplit kfold_split(std::size_t n, std::size_t k, std::uint64_t seed, std::span<const Label> strata) {
  if (k < 2) fail(ErrorCode::InvalidParameter, "k-fold needs k >= 2");
  if (n < k) fail(ErrorCode::TooFewSamples, std::to_string(n) + " samples cannot fill " + std::to_string(k) + " folds");
  if (!strata.empty() && strata.size() != n) fail(ErrorCode::InvalidParameter, "strata length differs from n");

  std::mt19937_64 rng(seed);
  FoldSplit split;
  std::vector<std::vector<std::size_t>> groups;
  if (!strata.empty()) {
    groups.resize(2);
    for (std::size_t i = 0; i < n; ++i) groups[class_index(strata[i])].push_back(i);
    std::erase_if(groups, [](const auto& g) { return g.empty(); });
    split.stratified = std::all_of(groups.begin(), groups.end(), [&](const auto& g) { return g.size() >= k; });
  } else {
    split.stratified = false;
  }
  if (!split.stratified) {
    groups.assign(1, std::vector<std::size_t>(n));
    std::iota(groups[0].begin(), groups[0].end(), std::size_t{0});
  }

  // Dealing the concatenated shuffled strata round-robin keeps both the
  // per-stratum and the overall fold sizes within one of each other.
  split.folds.assign(k, {});
  std::size_t next = 0;
  for (auto& g : groups) {
    std::shuffle(g.begin(), g.end(), rng);
    for (std::size_t idx : g) split.folds[next++ % k].push_back(idx);
  }
  for (auto& f : split.folds) std::sort(f.begin(), f.end());
  return split;
}

double f1_score(double precision, double recall) {
  const double s = precision + recall;
  return s > 0.0 ? 2.0 * precision * recall / s : 0.0;
}

ClassificationMetrics metrics_from_counts(const CountMatrix& counts) {
  ClassificationMetrics m;
  m.counts = counts;
  const std::size_t total = counts[0][0] + counts[0][1] + counts[1][0] + counts[1][1];
  if (total == 0) fail(ErrorCode::EmptyInput, "no predictions to score");
  m.accuracy = static_cast<double>(counts[0][0] + counts[1][1]) / static_cast<double>(total);
  m.acceptable = class_metrics(counts, 0);
  m.unacceptable = class_metrics(counts, 1);
  for (int a = 0; a < 2; ++a) {
    const std::size_t row = counts[a][0] + counts[a][1];
    for (int p = 0; p < 2; ++p) {
      m.confusion[a][p] = row > 0 ? static_cast<double>(counts[a][p]) / static_cast<double>(row) : 0.0;
    }
  }
  return m;
}

ClassificationMetrics classification_metrics(std::span<const Label> truth, std::span<const Label> predicted) {
  if (truth.size() != predicted.size()) fail(ErrorCode::InvalidParameter, "label vectors differ in length");
  if (truth.empty()) fail(ErrorCode::EmptyInput, "no labels");
  CountMatrix counts{};
  for (std::size_t i = 0; i < truth.size(); ++i) ++counts[class_index(truth[i])][class_index(predicted[i])];
  return metrics_from_counts(counts);
}

double cv_accuracy(std::span<const FeatureVector> rows, std::span<const Label> labels, const TrainConfig& config,
                   std::size_t k, std::uint64_t seed) {
  const FoldSplit split = kfold_split(rows.size(), k, seed, labels);
  double acc_sum = 0.0;
  std::vector<FeatureVector> train_x;
  std::vector<Label> train_y;
  std::vector<char> in_test(rows.size());
  for (const auto& fold : split.folds) {
    std::fill(in_test.begin(), in_test.end(), 0);
    for (std::size_t i : fold) in_test[i] = 1;
    train_x.clear();
    train_y.clear();
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (!in_test[i]) {
        train_x.push_back(rows[i]);
        train_y.push_back(labels[i]);
      }
    }
    const SvmModel model = fit_model(train_x, train_y, config);
    std::size_t correct = 0;
    for (std::size_t i : fold) correct += model.predict(rows[i]).label == labels[i] ? 1 : 0;
    acc_sum += static_cast<double>(correct) / static_cast<double>(fold.size());
  }
  return acc_sum / static_cast<double>(split.folds.size());
}

TrainConfig grid_search(std::span<const FeatureVector> rows, std::span<const Label> labels, const TrainConfig& base,
                        std::size_t k, std::uint64_t seed) {
  const double d = static_cast<double>(mask_indices(base.mask).size());
  TrainConfig best = base;
  double best_score = -1.0;
  for (double c : {0.1, 1.0, 10.0}) {
    for (double g : {0.1, 1.0, 10.0}) {
      TrainConfig cfg = base;
      cfg.svm.C = c;
      cfg.svm.gamma = g / d;
      const double score = cv_accuracy(rows, labels, cfg, k, seed);
      if (score > best_score) {
        best_score = score;
        best = cfg;
      }
    }
  }
  return best;
}

Folds rated_folds(std::span<const Sample> samples, std::size_t k, std::uint64_t run_seed) {
  std::vector<std::size_t> rated;
  std::vector<Label> strata;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].origin == Origin::Rated) {
      rated.push_back(i);
      strata.push_back(samples[i].label);
    }
  }
  FoldSplit split = kfold_split(rated.size(), k, run_seed, strata);
  for (auto& fold : split.folds) {
    for (auto& idx : fold) idx = rated[idx];
  }
  return split.folds;
}

EvalReport cross_validate(std::span<const Sample> samples, const CvConfig& config, const FoldProvider& folds) {
  if (config.runs == 0) fail(ErrorCode::InvalidParameter, "need at least one run");
  EvalReport report;
  report.runs = config.runs;
  report.k = config.k;
  report.base_seed = config.base_seed;
  bool rated_pos = false, rated_neg = false;
  for (const auto& s : samples) {
    if (s.origin == Origin::Rated) {
      ++report.rated_samples;
      (s.label == Label::Acceptable ? rated_pos : rated_neg) = true;
    } else {
      ++report.augmented_samples;
    }
  }
  if (!rated_pos || !rated_neg) fail(ErrorCode::SingleClassError, "rated samples must contain both classes");

  CountMatrix pooled{};
  std::vector<char> in_test(samples.size());
  std::vector<FeatureVector> train_x;
  std::vector<Label> train_y;
  for (std::size_t run = 0; run < config.runs; ++run) {
    const std::uint64_t run_seed = derive_seed(config.base_seed, {run});
    const Folds run_folds = folds(samples, config.k, run_seed);

    // Structural protocol checks: only rated samples are tested, each exactly once.
    std::vector<int> times_tested(samples.size(), 0);
    for (const auto& fold : run_folds) {
      for (std::size_t i : fold) {
        if (i >= samples.size()) fail(ErrorCode::ProtocolViolation, "fold index out of range");
        if (samples[i].origin != Origin::Rated) {
          fail(ErrorCode::ProtocolViolation, "augmented sample " + std::to_string(i) + " (" + samples[i].region_id +
                                                 ") placed in a test fold in run " + std::to_string(run));
        }
        ++times_tested[i];
      }
    }
    for (std::size_t i = 0; i < samples.size(); ++i) {
      if (samples[i].origin == Origin::Rated && times_tested[i] != 1) {
        fail(ErrorCode::ProtocolViolation, "rated sample " + std::to_string(i) + " tested " +
                                               std::to_string(times_tested[i]) + " times in run " + std::to_string(run));
      }
    }

    CountMatrix counts{};
    for (const auto& fold : run_folds) {
      std::fill(in_test.begin(), in_test.end(), 0);
      for (std::size_t i : fold) in_test[i] = 1;
      train_x.clear();
      train_y.clear();
      for (std::size_t i = 0; i < samples.size(); ++i) {
        if (!in_test[i]) {
          train_x.push_back(samples[i].features);
          train_y.push_back(samples[i].label);
        }
      }
      const SvmModel model = fit_model(train_x, train_y, config.train);
      for (std::size_t i : fold) {
        ++counts[class_index(samples[i].label)][class_index(model.predict(samples[i].features).label)];
      }
    }
    add_counts(pooled, counts);
    report.per_run.push_back(metrics_from_counts(counts));
    report.per_run_accuracies.push_back(report.per_run.back().accuracy);
  }

  const double n = static_cast<double>(report.per_run_accuracies.size());
  double sum = 0.0;
  for (double a : report.per_run_accuracies) sum += a;
  report.mean_accuracy = sum / n;
  double sq = 0.0;
  for (double a : report.per_run_accuracies) sq += (a - report.mean_accuracy) * (a - report.mean_accuracy);
  report.variance_accuracy = sq / n;
  report.pooled = metrics_from_counts(pooled);
  return report;
}

nlohmann::json to_json(const ClassificationMetrics& m) {
  auto cls = [](const ClassMetrics& c) {
    return nlohmann::json{{"precision", c.precision}, {"recall", c.recall}, {"f1", c.f1}, {"support", c.support}};
  };
  return {
      {"accuracy", m.accuracy},
      {"per_class", {{"acceptable", cls(m.acceptable)}, {"unacceptable", cls(m.unacceptable)}}},
      {"counts", m.counts},
      {"confusion", m.confusion},
  };
}

nlohmann::json to_json(const EvalReport& report) {
  nlohmann::json per_run = nlohmann::json::array();
  for (const auto& m : report.per_run) per_run.push_back({{"accuracy", m.accuracy}, {"counts", m.counts}, {"confusion", m.confusion}});
  nlohmann::json pooled = to_json(report.pooled);
  return {
      {"runs", report.runs},
      {"k", report.k},
      {"base_seed", report.base_seed},
      {"rated_samples", report.rated_samples},
      {"augmented_samples", report.augmented_samples},
      {"mean_accuracy", report.mean_accuracy},
      {"variance_accuracy", report.variance_accuracy},
      {"per_run_accuracies", report.per_run_accuracies},
      {"per_class", pooled["per_class"]},
      {"confusion", pooled["confusion"]},
      {"counts", pooled["counts"]},
      {"per_run", std::move(per_run)},
  };
}

std::string format_report(const EvalReport& report) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof line, "%zu run(s) of %zu-fold CV, %zu rated + %zu augmented samples\n", report.runs,
                report.k, report.rated_samples, report.augmented_samples);
  out << line;
  std::snprintf(line, sizeof line, "mean accuracy %.4f   variance %.6g\n\n", report.mean_accuracy,
                report.variance_accuracy);
  out << line;
  out << "class          precision  recall     f1         support\n";
  const auto row = [&](const char* name, const ClassMetrics& c) {
    std::snprintf(line, sizeof line, "%-14s %-10.4f %-10.4f %-10.4f %zu\n", name, c.precision, c.recall, c.f1, c.support);
    out << line;
  };
  row("acceptable", report.pooled.acceptable);
  row("unacceptable", report.pooled.unacceptable);
  out << "\nnormalized confusion (rows actual, cols predicted)\n";
  out << "               acceptable unacceptable\n";
  const char* names[2] = {"acceptable", "unacceptable"};
  for (int a = 0; a < 2; ++a) {
    std::snprintf(line, sizeof line, "%-14s %-10.4f %-10.4f\n", names[a], report.pooled.confusion[a][0],
                  report.pooled.confusion[a][1]);
    out << line;
  }
  return out.str();
}

}  // namespace scanres
