#include "scanres/learn.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

#include "scanres/seed.hpp"

namespace scanres {
namespace {

constexpr double kTau = 1e-12;

void check_finite(std::span<const double> x) {
  for (double v : x) {
    if (!std::isfinite(v)) fail(ErrorCode::InvalidFeature, "non-finite feature value");
  }
}

// Dense SMO solver for
//   min 1/2 a'Qa - e'a   s.t.  y'a = 0,  0 <= a_i <= C_i
// with Q_ij = y_i y_j K(x_i, x_j).
class SmoSolver {
 public:
  SmoSolver(std::span<const std::vector<double>> rows, std::span<const int> y, std::vector<double> upper,
            const Kernel& kernel)
      : n_(rows.size()), y_(y.begin(), y.end()), upper_(std::move(upper)), q_(n_ * n_), alpha_(n_, 0.0), grad_(n_, -1.0) {
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = i; j < n_; ++j) {
        const double k = kernel(rows[i], rows[j]);
        q_[i * n_ + j] = q_[j * n_ + i] = y_[i] * y_[j] * k;
      }
    }
  }

  long solve(double eps, long max_iterations, SvmTrainInfo* info) {
    long iter = 0;
    while (iter < max_iterations) {
      std::size_t i = 0, j = 0;
      if (!select_working_set(eps, i, j)) break;
      update_pair(i, j);
      ++iter;
      if (info && info->record_objective) info->objective_trace.push_back(dual_objective());
    }
    return iter;
  }

  double rho() const {
    double ub = std::numeric_limits<double>::infinity(), lb = -ub, sum_free = 0.0;
    int n_free = 0;
    for (std::size_t i = 0; i < n_; ++i) {
      const double yg = y_[i] * grad_[i];
      if (at_upper(i)) {
        if (y_[i] == -1) ub = std::min(ub, yg); else lb = std::max(lb, yg);
      } else if (at_lower(i)) {
        if (y_[i] == +1) ub = std::min(ub, yg); else lb = std::max(lb, yg);
      } else {
        ++n_free;
        sum_free += yg;
      }
    }
    return n_free > 0 ? sum_free / n_free : 0.5 * (ub + lb);
  }

  // Maximization-form dual value: e'a - 1/2 a'Qa = -1/2 sum a_i (G_i - 1).
  double dual_objective() const {
    double v = 0.0;
    for (std::size_t i = 0; i < n_; ++i) v += alpha_[i] * (grad_[i] - 1.0);
    return -0.5 * v;
  }

  const std::vector<double>& alpha() const { return alpha_; }

 private:
  bool at_upper(std::size_t i) const { return alpha_[i] >= upper_[i]; }
  bool at_lower(std::size_t i) const { return alpha_[i] <= 0.0; }
  bool in_up(std::size_t t) const { return y_[t] == +1 ? !at_upper(t) : !at_lower(t); }
  bool in_low(std::size_t t) const { return y_[t] == +1 ? !at_lower(t) : !at_upper(t); }

  bool select_working_set(double eps, std::size_t& out_i, std::size_t& out_j) const {
    double g_max = -std::numeric_limits<double>::infinity();
    double g_min = std::numeric_limits<double>::infinity();
    bool have_i = false, have_j = false;
    for (std::size_t t = 0; t < n_; ++t) {
      const double v = -y_[t] * grad_[t];
      if (in_up(t) && v > g_max) {
        g_max = v;
        out_i = t;
        have_i = true;
      }
      if (in_low(t) && v < g_min) {
        g_min = v;
        out_j = t;
        have_j = true;
      }
    }
    return have_i && have_j && g_max - g_min >= eps;
  }

  void update_pair(std::size_t i, std::size_t j) {
    const double* qi = &q_[i * n_];
    const double* qj = &q_[j * n_];
    const double ci = upper_[i], cj = upper_[j];
    const double old_ai = alpha_[i], old_aj = alpha_[j];
    double& ai = alpha_[i];
    double& aj = alpha_[j];

    if (y_[i] != y_[j]) {
      double quad = qi[i] + qj[j] + 2.0 * qi[j];
      if (quad <= 0.0) quad = kTau;
      const double delta = (-grad_[i] - grad_[j]) / quad;
      const double diff = ai - aj;
      ai += delta;
      aj += delta;
      if (diff > 0) {
        if (aj < 0) { aj = 0; ai = diff; }
      } else {
        if (ai < 0) { ai = 0; aj = -diff; }
      }
      if (diff > ci - cj) {
        if (ai > ci) { ai = ci; aj = ci - diff; }
      } else {
        if (aj > cj) { aj = cj; ai = cj + diff; }
      }
    } else {
      double quad = qi[i] + qj[j] - 2.0 * qi[j];
      if (quad <= 0.0) quad = kTau;
      const double delta = (grad_[i] - grad_[j]) / quad;
      const double sum = ai + aj;
      ai -= delta;
      aj += delta;
      if (sum > ci) {
        if (ai > ci) { ai = ci; aj = sum - ci; }
      } else {
        if (aj < 0) { aj = 0; ai = sum; }
      }
      if (sum > cj) {
        if (aj > cj) { aj = cj; ai = sum - cj; }
      } else {
        if (ai < 0) { ai = 0; aj = sum; }
      }
    }

    const double dai = ai - old_ai, daj = aj - old_aj;
    for (std::size_t k = 0; k < n_; ++k) grad_[k] += qi[k] * dai + qj[k] * daj;
  }

  std::size_t n_;
  std::vector<int> y_;
  std::vector<double> upper_;
  std::vector<double> q_;
  std::vector<double> alpha_;
  std::vector<double> grad_;
};

}  // namespace

std::string_view to_string(KernelKind kind) { return kind == KernelKind::Rbf ? "rbf" : "linear"; }

KernelKind parse_kernel_kind(std::string_view text) {
  if (text == "rbf") return KernelKind::Rbf;
  if (text == "linear") return KernelKind::Linear;
  fail(ErrorCode::ParseError, "unknown kernel '" + std::string(text) + "'");
}

double Kernel::operator()(std::span<const double> a, std::span<const double> b) const {
  if (kind == KernelKind::Linear) {
    double dot = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
    return dot;
  }
  double d2 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d2 += (a[i] - b[i]) * (a[i] - b[i]);
  return std::exp(-gamma * d2);
}

double KernelMachine::decision(std::span<const double> x) const {
  check_finite(x);
  double sum = bias;
  for (std::size_t i = 0; i < support_vectors.size(); ++i) sum += dual_coefficients[i] * kernel(support_vectors[i], x);
  return sum;
}

double default_gamma(std::span<const std::vector<double>> rows) {
  if (rows.empty() || rows.front().empty()) fail(ErrorCode::EmptyInput, "no training features");
  const std::size_t d = rows.front().size();
  const double n = static_cast<double>(rows.size());
  double var_sum = 0.0;
  for (std::size_t c = 0; c < d; ++c) {
    double sum = 0.0;
    for (const auto& r : rows) sum += r[c];
    const double mean = sum / n;
    double sq = 0.0;
    for (const auto& r : rows) sq += (r[c] - mean) * (r[c] - mean);
    var_sum += sq / n;
  }
  const double mean_var = var_sum / static_cast<double>(d);
  return mean_var > 0.0 ? 1.0 / (static_cast<double>(d) * mean_var) : 1.0 / static_cast<double>(d);
}

KernelMachine train_svm(std::span<const std::vector<double>> rows, std::span<const Label> labels,
                        const SvmParams& params, SvmTrainInfo* info) {
  if (rows.size() != labels.size()) fail(ErrorCode::InvalidParameter, "row and label counts differ");
  if (rows.size() < 2) fail(ErrorCode::TooFewSamples, "SVM training needs at least 2 samples");
  if (!(params.C > 0.0)) fail(ErrorCode::InvalidParameter, "C must be positive");
  const std::size_t d = rows.front().size();
  if (d == 0) fail(ErrorCode::EmptyInput, "no features selected");
  for (const auto& r : rows) {
    if (r.size() != d) fail(ErrorCode::DimMismatch, "ragged training matrix");
    check_finite(r);
  }
  const bool has_pos = std::any_of(labels.begin(), labels.end(), [](Label l) { return l == Label::Acceptable; });
  const bool has_neg = std::any_of(labels.begin(), labels.end(), [](Label l) { return l == Label::Unacceptable; });
  if (!has_pos || !has_neg) fail(ErrorCode::SingleClassError, "training labels contain a single class");

  KernelMachine machine;
  machine.kernel.kind = params.kernel;
  machine.kernel.gamma = params.kernel == KernelKind::Rbf ? params.gamma.value_or(default_gamma(rows)) : 0.0;
  if (params.kernel == KernelKind::Rbf && !(machine.kernel.gamma > 0.0)) {
    fail(ErrorCode::InvalidParameter, "gamma must be positive");
  }
  machine.C = params.C;

  std::vector<int> y(labels.size());
  std::vector<double> upper(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    y[i] = sign(labels[i]);
    upper[i] = params.C * (labels[i] == Label::Acceptable ? params.c_scale_acceptable : params.c_scale_unacceptable);
  }

  SmoSolver solver(rows, y, upper, machine.kernel);
  const long iterations = solver.solve(params.tolerance, params.max_iterations, info);
  machine.bias = -solver.rho();

  const auto& alpha = solver.alpha();
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    if (alpha[i] > 0.0) {
      machine.support_vectors.push_back(rows[i]);
      machine.dual_coefficients.push_back(alpha[i] * y[i]);
    }
  }
  if (info) {
    info->iterations = iterations;
    info->alpha = alpha;
  }
  return machine;
}

Prediction SvmModel::predict(const FeatureVector& x) const {
  if (!x.all_finite()) fail(ErrorCode::InvalidFeature, "non-finite feature value");
  const double value = machine.decision(normalizer.apply(x));
  return {value >= 0.0 ? Label::Acceptable : Label::Unacceptable, value};
}

std::string training_digest(std::span<const FeatureVector> rows, std::span<const Label> labels) {
  std::uint64_t h = fnv1a("scanres-training");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (double v : rows[i].values) {
      h = fnv1a(std::string_view(reinterpret_cast<const char*>(&v), sizeof v), h);
    }
    h = fnv1a(to_string(labels[i]), h);
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

SvmModel fit_model(std::span<const FeatureVector> rows, std::span<const Label> labels, const TrainConfig& config,
                   SvmTrainInfo* info) {
  if (rows.size() != labels.size()) fail(ErrorCode::InvalidParameter, "row and label counts differ");
  FeatureMask mask = config.mask;
  if (config.drop_degenerate) {
    for (std::size_t i : degenerate_features(rows, mask)) mask[i] = false;
  }
  if (mask_indices(mask).empty()) fail(ErrorCode::DegenerateFeature, "no usable features remain");

  SvmModel model;
  model.normalizer = normalize_fit(rows, mask, config.norm);
  std::vector<std::vector<double>> projected;
  projected.reserve(rows.size());
  for (const auto& r : rows) projected.push_back(model.normalizer.apply(r));
  model.machine = train_svm(projected, labels, config.svm, info);
  model.training_digest = training_digest(rows, labels);
  return model;
}

}  // namespace scanres
