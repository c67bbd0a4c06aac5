#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "scanres/sffs.hpp"

using namespace scanres;

namespace {

struct Dataset {
  std::vector<FeatureVector> rows;
  std::vector<Label> labels;
};

// Column 0 carries the label; the rest are noise unless `extra` says otherwise.
Dataset informative_plus_noise(std::uint64_t seed, int n) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0, 1);
  Dataset d;
  for (int i = 0; i < n; ++i) {
    const Label l = i % 2 ? Label::Acceptable : Label::Unacceptable;
    FeatureVector f;
    for (auto& v : f.values) v = g(rng);
    f[0] = (l == Label::Acceptable ? 1.0 : -1.0) * (1.0 + std::abs(g(rng)));
    d.rows.push_back(f);
    d.labels.push_back(l);
  }
  return d;
}

// Exhaustive best subset per size; ties go to the first subset in bitmask order.
std::vector<double> exhaustive_best(std::size_t n, const SubsetCriterion& J) {
  std::vector<double> best(n + 1, -1.0);
  for (std::uint64_t m = 1; m < (std::uint64_t{1} << n); ++m) {
    FeatureSubset s;
    for (std::size_t f = 0; f < n; ++f)
      if (m >> f & 1) s.push_back(f);
    best[s.size()] = std::max(best[s.size()], J(s));
  }
  return best;
}

}  // namespace

TEST_CASE("sffs on an additive criterion") {
  const std::vector<double> w = {0.1, 0.5, 0.05, 0.3, 0.2};
  const SubsetCriterion J = [&](const FeatureSubset& s) {
    double v = 0;
    for (auto f : s) v += w[f];
    return v / 1.2;
  };
  const auto r = sffs_select(5, 5, J);
  CHECK(r.ranking == std::vector<std::size_t>{1, 3, 4, 0, 2});
  CHECK(r.selected == FeatureSubset{0, 1, 2, 3, 4});
  REQUIRE(r.best.size() == 5);
  CHECK(r.best[1].subset == FeatureSubset{1, 3});
  const auto r2 = sffs_select(5, 2, J);
  CHECK(r2.selected == FeatureSubset{1, 3});
}

TEST_CASE("sffs floating step escapes a nesting trap") {
  // Best single feature is 0, but the best pair is {1, 2}, and {1, 2, 3} beats
  // everything containing 0 at size 3.
  const SubsetCriterion J = [](const FeatureSubset& s) {
    const std::set<std::size_t> set(s.begin(), s.end());
    const bool has0 = set.count(0), has1 = set.count(1), has2 = set.count(2), has3 = set.count(3);
    double v = 0.5;
    if (has0) v += 0.2;
    if (has1 && has2) v += 0.35;
    else if (has1 || has2) v += 0.1;
    if (has3 && has1 && has2) v += 0.05;
    if (has0 && has1 && has2) v -= 0.2;
    return std::min(v, 1.0) - 0.001 * s.size();
  };
  const auto r = sffs_select(4, 3, J);
  const auto truth = exhaustive_best(4, J);
  for (const auto& b : r.best) CHECK(b.score == doctest::Approx(truth[b.subset.size()]));
  CHECK(r.best[1].subset == FeatureSubset{1, 2});
  bool saw_backward = false;
  for (const auto& s : r.steps) saw_backward |= s.kind == SelectionStep::Kind::Backward;
  CHECK(saw_backward);
}

TEST_CASE("sffs argument checks and determinism") {
  const SubsetCriterion J = [](const FeatureSubset& s) { return 0.1 * s.size(); };
  CHECK_THROWS_AS(sffs_select(5, 0, J), Error);
  CHECK_THROWS_AS(sffs_select(5, 6, J), Error);
  try {
    sffs_select(9, 10, J);
    FAIL("expected InvalidDimension");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidDimension);
  }
  const auto all = sffs_select(9, 9, J);
  CHECK(all.selected.size() == 9);
  auto sorted = all.ranking;
  std::sort(sorted.begin(), sorted.end());
  CHECK(sorted == std::vector<std::size_t>{0, 1, 2, 3, 4, 5, 6, 7, 8});
}

TEST_CASE("selection criterion") {
  const Dataset d = informative_plus_noise(1, 80);
  CHECK(selection_criterion(d.rows, d.labels, {0}, 3) == 1.0);
  CHECK(selection_criterion(d.rows, d.labels, {0}, 3) == selection_criterion(d.rows, d.labels, {0}, 3));
  double mean = 0;
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const Dataset n = informative_plus_noise(100 + seed, 80);
    mean += selection_criterion(n.rows, n.labels, {4}, seed);
  }
  mean /= 8;
  CHECK(std::abs(mean - 0.5) <= 0.1);
  CHECK_THROWS_AS(selection_criterion(d.rows, d.labels, {}, 3), Error);
}

TEST_CASE("rank_features puts the informative feature first") {
  const Dataset d = informative_plus_noise(2, 60);
  const auto ranking = rank_features(d.rows, d.labels, 5);
  CHECK(ranking.front() == 0);
  auto sorted = ranking;
  std::sort(sorted.begin(), sorted.end());
  CHECK(sorted == std::vector<std::size_t>{0, 1, 2, 3, 4, 5, 6, 7, 8});
}

TEST_CASE("duplicate feature is not paired with its original") {
  // f0 and f1 are identical noisy views of the label; f2 carries independent
  // information that complements them.
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0, 1);
  Dataset d;
  for (int i = 0; i < 120; ++i) {
    const double a = g(rng), b = g(rng);
    FeatureVector f;
    f[0] = f[1] = a;
    f[2] = b;
    d.rows.push_back(f);
    d.labels.push_back(a + b > 0 ? Label::Acceptable : Label::Unacceptable);
  }
  const auto r = sffs_select(d.rows, d.labels, 2, 4, 3);
  CHECK(r.selected != FeatureSubset{0, 1});
  CHECK(std::count(r.selected.begin(), r.selected.end(), 2) == 1);
}

TEST_CASE("two complementary features share the top of the ranking") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0, 1);
  Dataset d;
  for (int i = 0; i < 120; ++i) {
    FeatureVector f;
    for (auto& v : f.values) v = g(rng);
    d.rows.push_back(f);
    d.labels.push_back(f[3] + f[6] > 0 ? Label::Acceptable : Label::Unacceptable);
  }
  const auto ranking = rank_features(d.rows, d.labels, 6);
  const std::set<std::size_t> top(ranking.begin(), ranking.begin() + 2);
  CHECK(top == std::set<std::size_t>{3, 6});
}

TEST_CASE("selection JSON") {
  const SubsetCriterion J = [](const FeatureSubset& s) { return 1.0 / (1 + std::abs(double(s.size()) - 2)); };
  const auto j = to_json(sffs_select(4, 3, J));
  CHECK(j.at("ranking").size() == 4);
  CHECK(j.at("selected").size() == 3);
  CHECK(j.at("trace").size() == 3);
  CHECK(j.at("trace")[0].contains("score"));
}
