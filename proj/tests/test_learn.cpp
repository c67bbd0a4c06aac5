#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "oracles.hpp"
#include "scanres/learn.hpp"
#include "scanres/synth.hpp"

using namespace scanres;

namespace {

constexpr auto A = Label::Acceptable;
constexpr auto U = Label::Unacceptable;

FeatureVector fv(std::initializer_list<double> v) {
  FeatureVector f;
  std::copy(v.begin(), v.end(), f.values.begin());
  return f;
}

struct Blobs {
  std::vector<std::vector<double>> x;
  std::vector<Label> y;
};

Blobs blobs(std::uint64_t seed, int n_per_class, double separation) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 0.5);
  Blobs b;
  for (int i = 0; i < n_per_class; ++i) {
    b.x.push_back({separation + n(rng), separation + n(rng)});
    b.y.push_back(A);
    b.x.push_back({-separation + n(rng), -separation + n(rng)});
    b.y.push_back(U);
  }
  return b;
}

}  // namespace

TEST_CASE("labels and masks") {
  CHECK(parse_label("acceptable") == A);
  CHECK(to_string(U) == "unacceptable");
  CHECK_THROWS_AS(parse_label("maybe"), Error);
  CHECK(sign(A) == 1);
  CHECK(sign(U) == -1);
  const std::vector<std::size_t> idx = {0, 7};
  const FeatureMask m = mask_of(idx);
  CHECK(mask_indices(m) == idx);
  const std::vector<std::size_t> bad = {9};
  CHECK_THROWS_AS(mask_of(bad), Error);
}

TEST_CASE("normalize_fit") {
  const std::vector<FeatureVector> rows = {fv({0, 1, 2, 3, 4, 5, 6, 7, 8}), fv({2, 1, 4, 3, 4, 5, 6, 7, 10})};
  std::vector<std::size_t> keep = {0, 2, 8};
  const Normalizer n = normalize_fit(rows, mask_of(keep));
  CHECK(n.stats[0].offset == 1);
  CHECK(n.stats[0].scale == 1);
  CHECK(n.dims() == 3);

  keep = {1};
  try {
    normalize_fit(rows, mask_of(keep));
    FAIL("expected DegenerateFeature");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateFeature);
  }
  CHECK(degenerate_features(rows, all_features()) == std::vector<std::size_t>{1, 3, 4, 5, 6, 7});
  CHECK_THROWS_AS(normalize_fit(std::span(rows).first(1), all_features()), Error);
}

TEST_CASE("normalize_apply") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(3.0, 2.0);
  std::vector<FeatureVector> rows(50);
  for (auto& r : rows)
    for (auto& v : r.values) v = g(rng) * (1 + (&v - r.values.data()));
  const Normalizer n = normalize_fit(rows, all_features());

  FeatureVector means;
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    std::vector<double> col;
    for (const auto& r : rows) col.push_back(r[i]);
    const auto o = oracle::two_pass(col);
    CHECK(n.stats[i].offset == doctest::Approx(o.mean).epsilon(1e-12));
    CHECK(n.stats[i].scale == doctest::Approx(o.stddev).epsilon(1e-12));
    means[i] = o.mean;
  }
  for (double z : n.apply(means)) CHECK(std::abs(z) < 1e-12);

  std::vector<double> sum(kFeatureCount), sq(kFeatureCount);
  for (const auto& r : rows) {
    const auto z = n.apply(r);
    for (std::size_t i = 0; i < kFeatureCount; ++i) sum[i] += z[i], sq[i] += z[i] * z[i];
  }
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    CHECK(std::abs(sum[i] / rows.size()) < 1e-9);
    CHECK(std::abs(sq[i] / rows.size() - 1.0) < 1e-9);
  }

  const FeatureVector probe = fv({1, 2, 3, 4, 5, 6, 7, 8, 9});
  const std::vector<std::size_t> keep = {2, 5};
  const Normalizer masked = normalize_fit(rows, mask_of(keep));
  const auto z = masked.apply(probe);
  REQUIRE(z.size() == 2);
  CHECK(z[0] == doctest::Approx((3 - masked.stats[2].offset) / masked.stats[2].scale));
  CHECK(z[1] == doctest::Approx((6 - masked.stats[5].offset) / masked.stats[5].scale));

  const Normalizer mm = normalize_fit(rows, all_features(), NormKind::MinMax);
  for (const auto& r : rows)
    for (double v : mm.apply(r)) CHECK((v >= -1e-12 && v <= 1 + 1e-12));
}

TEST_CASE("svm separates blobs") {
  const Blobs b = blobs(2, 30, 2.0);
  for (KernelKind k : {KernelKind::Linear, KernelKind::Rbf}) {
    SvmParams p;
    p.kernel = k;
    const KernelMachine m = train_svm(b.x, b.y, p);
    for (std::size_t i = 0; i < b.x.size(); ++i) CHECK((m.decision(b.x[i]) >= 0) == (b.y[i] == A));
  }
}

TEST_CASE("svm fits XOR with rbf") {
  const std::vector<std::vector<double>> x = {{0, 0}, {1, 1}, {0, 1}, {1, 0}};
  const std::vector<Label> y = {A, A, U, U};
  SvmParams p;
  p.C = 10;
  p.gamma = 2.0;
  const KernelMachine m = train_svm(x, y, p);
  for (std::size_t i = 0; i < 4; ++i) CHECK((m.decision(x[i]) >= 0) == (y[i] == A));
}

TEST_CASE("svm KKT invariants") {
  const Blobs b = blobs(3, 40, 0.6);  // overlapping: some bounded support vectors
  SvmParams p;
  p.C = 0.7;
  SvmTrainInfo info;
  info.record_objective = true;
  const KernelMachine m = train_svm(b.x, b.y, p, &info);
  double sum = 0;
  for (double c : m.dual_coefficients) {
    CHECK(std::abs(c) <= p.C + 1e-12);
    sum += c;
  }
  CHECK(std::abs(sum) < 1e-8);
  CHECK(!m.support_vectors.empty());
  for (std::size_t k = 1; k < info.objective_trace.size(); ++k) {
    CHECK(info.objective_trace[k] >= info.objective_trace[k - 1] - 1e-9);
  }
  // Free support vectors sit on the margin; non-support vectors outside it.
  for (std::size_t i = 0; i < b.x.size(); ++i) {
    const double yf = sign(b.y[i]) * m.decision(b.x[i]);
    const double a = info.alpha[i];
    if (a > 1e-8 && a < p.C - 1e-8) CHECK(std::abs(yf - 1.0) < 2e-3);
    if (a <= 0.0) CHECK(yf >= 1.0 - 2e-3);
    if (a >= p.C) CHECK(yf <= 1.0 + 2e-3);
  }
}

TEST_CASE("svm determinism and errors") {
  const Blobs b = blobs(4, 20, 1.0);
  const KernelMachine m1 = train_svm(b.x, b.y);
  const KernelMachine m2 = train_svm(b.x, b.y);
  CHECK(m1 == m2);

  const std::vector<Label> one(b.y.size(), A);
  try {
    train_svm(b.x, one);
    FAIL("expected SingleClassError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SingleClassError);
  }
  auto bad = b.x;
  bad[3][1] = std::numeric_limits<double>::quiet_NaN();
  try {
    train_svm(bad, b.y);
    FAIL("expected InvalidFeature");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidFeature);
  }
}

TEST_CASE("default gamma on standardized data") {
  const Blobs b = blobs(5, 50, 1.0);
  std::vector<FeatureVector> rows;
  for (const auto& x : b.x) rows.push_back(fv({x[0], x[1], x[0] - x[1]}));
  const std::vector<std::size_t> keep = {0, 1, 2};
  const Normalizer n = normalize_fit(rows, mask_of(keep));
  std::vector<std::vector<double>> z;
  for (const auto& r : rows) z.push_back(n.apply(r));
  CHECK(default_gamma(z) == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
}

TEST_CASE("decision sign is stable under a duplicated training set") {
  const Blobs b = blobs(6, 25, 0.8);
  auto x2 = b.x;
  auto y2 = b.y;
  x2.insert(x2.end(), b.x.begin(), b.x.end());
  y2.insert(y2.end(), b.y.begin(), b.y.end());
  SvmParams p;
  p.gamma = 0.5;
  p.tolerance = 1e-8;
  const KernelMachine m1 = train_svm(b.x, b.y, p);
  p.C = 0.5;  // duplicating every point doubles the effective penalty
  const KernelMachine m2 = train_svm(x2, y2, p);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-3, 3);
  int agree = 0, total = 0;
  for (int i = 0; i < 200; ++i) {
    const std::vector<double> q = {u(rng), u(rng)};
    const double d1 = m1.decision(q);
    if (std::abs(d1) < 1e-4) continue;
    agree += (d1 >= 0) == (m2.decision(q) >= 0);
    ++total;
  }
  CHECK(agree == total);
}

TEST_CASE("permuted training order gives the same decisions") {
  const Blobs b = blobs(8, 30, 0.7);
  std::vector<std::size_t> order(b.x.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), std::mt19937_64(9));
  std::vector<std::vector<double>> xp;
  std::vector<Label> yp;
  for (auto i : order) xp.push_back(b.x[i]), yp.push_back(b.y[i]);
  SvmParams p;
  p.tolerance = 1e-10;
  const KernelMachine m1 = train_svm(b.x, b.y, p);
  const KernelMachine m2 = train_svm(xp, yp, p);
  for (double t = -2; t <= 2; t += 0.25) {
    const std::vector<double> q = {t, 0.3 * t - 0.1};
    CHECK(std::abs(m1.decision(q) - m2.decision(q)) < 1e-6);
  }
}

TEST_CASE("fit_model, predict and persistence") {
  std::mt19937_64 rng(10);
  std::normal_distribution<double> n(0, 1);
  std::vector<FeatureVector> rows;
  std::vector<Label> labels;
  for (int i = 0; i < 60; ++i) {
    const Label l = i % 2 ? A : U;
    FeatureVector f;
    for (auto& v : f.values) v = n(rng);
    f[Feature::TssimMean] += l == A ? 3 : -3;
    f[Feature::MseStd] = 4.0;  // constant column, dropped
    rows.push_back(f);
    labels.push_back(l);
  }
  const SvmModel model = fit_model(rows, labels);
  CHECK_FALSE(model.normalizer.mask[static_cast<std::size_t>(Feature::MseStd)]);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Prediction p = model.predict(rows[i]);
    CHECK(p.label == labels[i]);
    CHECK((p.decision >= 0) == (p.label == A));
  }
  FeatureVector inf = rows[0];
  inf[0] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(model.predict(inf), Error);

  const SvmModel back = model_from_json(nlohmann::json::parse(to_json(model).dump()));
  CHECK(back == model);
  CHECK(back.training_digest == training_digest(rows, labels));

  auto j = to_json(model);
  j["version"] = 2;
  try {
    model_from_json(j);
    FAIL("expected VersionError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::VersionError);
  }
  j = to_json(model);
  j.erase("bias");
  CHECK_THROWS_AS(model_from_json(j), Error);

  TrainConfig strict;
  strict.drop_degenerate = false;
  CHECK_THROWS_AS(fit_model(rows, labels, strict), Error);
}

TEST_CASE("min_acceptable_dpi") {
  const GrayImage region = synth_texture(Texture::BandLimitedNoise, 48, 3);
  const Predictor always = [](const FeatureVector&) { return Prediction{A, 1.0}; };
  const Predictor never = [](const FeatureVector& f) {
    return f[Feature::Dsa] == 0.0 ? Prediction{A, 1.0} : Prediction{U, -1.0};
  };
  CHECK(min_acceptable_dpi(always, region) == Dpi::k100);
  CHECK(min_acceptable_dpi(never, region) == Dpi::k300);

  // Threshold on tile-SSIM mean: the answer is the first dpi in the feature
  // table clearing it.
  const Predictor tssim = [](const FeatureVector& f) {
    return f[Feature::TssimMean] >= 0.9 ? Prediction{A, 1.0} : Prediction{U, -1.0};
  };
  Dpi expected = Dpi::k300;
  for (Dpi d : kAllDpis) {
    if (extract_features(region, d)[Feature::TssimMean] >= 0.9) {
      expected = d;
      break;
    }
  }
  CHECK(min_acceptable_dpi(tssim, region) == expected);

  GrayImage page(60, 60, Dpi::k300, 255);
  for (int y = 0; y < 48; ++y)
    for (int x = 0; x < 48; ++x) page.at(x + 5, y + 7) = region.at(x, y);
  const RegionSpec spec{"r", RegionClass::RasterImage, Rect{5, 7, 48, 48}};
  CHECK(min_acceptable_dpi(tssim, page, spec) == expected);
  CHECK_THROWS_AS(min_acceptable_dpi(tssim, page, RegionSpec{"t", RegionClass::Text, Rect{0, 0, 20, 20}}), Error);
}
