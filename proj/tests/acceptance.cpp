// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <string>

#include "oracles.hpp"
#include "scanres/corpus.hpp"
#include "scanres/eval.hpp"
#include "scanres/metrics.hpp"
#include "scanres/noise.hpp"
#include "scanres/raster.hpp"
#include "scanres/seed.hpp"
#include "scanres/sffs.hpp"
#include "scanres/synth.hpp"

using namespace scanres;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Outcome metric_oracles() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> side(12, 48);
  int pairs = 0, mismatches = 0, identity_failures = 0;
  auto check = [&](double got, double want) {
    if (!oracle::close_rel(got, want, 1e-6, 1e-12)) ++mismatches;
  };
  for (; pairs < 120; ++pairs) {
    const int w = side(rng), h = side(rng);
    const GrayImage a = pairs % 2 ? oracle::random_image(rng, w, h) : oracle::random_smooth(rng, w, h);
    const GrayImage b = oracle::perturb(rng, a, 8 + pairs % 60);
    const int tile = 12;

    check(dsa(a, b), oracle::dsa(a, b));
    const auto m = mse_tiles(a, b, tile);
    const auto mo = oracle::mse_tiles(a, b, tile);
    check(m.mean, mo.mean);
    check(m.stddev, mo.stddev);
    const auto p = psd_tiles(a, b, tile);
    const auto po = oracle::psd_tiles(a, b, tile);
    check(p.mean, po.mean);
    check(p.stddev, po.stddev);
    const auto s = tile_ssim(a, b, tile);
    const auto so = oracle::tile_ssim(a, b, tile);
    check(s.mean, so.mean);
    check(s.stddev, so.stddev);
    const auto e = edge_density(b, tile);
    const auto eo = oracle::edge_density(b, tile);
    check(e.mean, eo.mean);
    check(e.stddev, eo.stddev);

    const auto ms = mse_tiles(a, a, tile), ps = psd_tiles(a, a, tile), ss = tile_ssim(a, a, tile);
    if (dsa(a, a) != 0.0 || ms.mean != 0.0 || ms.stddev != 0.0 || ps.mean != 0.0 || ps.stddev != 0.0 ||
        ss.mean != 1.0 || ss.stddev != 0.0)
      ++identity_failures;
  }
  const double secs = seconds_since(t0);
  return {mismatches == 0 && identity_failures == 0 && secs < 30,
          fmt("%d pairs, %d mismatches, %d identity failures, %.1fs", pairs, mismatches, identity_failures, secs)};
}

Outcome ssim_reference() {
  std::mt19937_64 rng(7);
  int failures = 0;
  for (int i = 0; i < 20; ++i) {
    const GrayImage a = oracle::random_image(rng, 16 + i, 20);
    if (ssim(a, a) != 1.0) ++failures;
  }
  double worst = 0;
  for (int c1 = 0; c1 <= 255; c1 += 51)
    for (int c2 = 0; c2 <= 255; c2 += 17) {
      const GrayImage a(24, 24, Dpi::k300, static_cast<std::uint8_t>(c1));
      const GrayImage b(24, 24, Dpi::k300, static_cast<std::uint8_t>(c2));
      const double want = (2.0 * c1 * c2 + oracle::kC1) / (double(c1) * c1 + double(c2) * c2 + oracle::kC1);
      worst = std::max(worst, std::abs(ssim(a, b) - want));
    }
  return {failures == 0 && worst <= 1e-9, fmt("identity failures %d, worst closed-form error %.2e", failures, worst)};
}

Outcome f1_anchor() {
  // Counts whose precision and recall are 0.82 and 0.593 for the unacceptable
  // class, and 0.92 and 0.973 for the acceptable class.
  CountMatrix counts{};
  counts[1][1] = 48626;  // unacceptable predicted unacceptable
  counts[1][0] = 33374;  // unacceptable predicted acceptable
  counts[0][1] = 10674;  // acceptable predicted unacceptable
  counts[0][0] = 384660;  // acceptable predicted acceptable
  const auto m = metrics_from_counts(counts);
  const double f_low = m.unacceptable.f1;
  const double f_high = m.acceptable.f1;
  const bool pass = std::abs(f_low - 0.688) <= 0.001 && std::abs(f_high - 0.944) <= 0.003 &&
                    std::abs(f1_score(0.82, 0.593) - 0.688) <= 0.001;
  return {pass, fmt("F1 %.4f (P %.3f R %.3f), F1 %.4f", f_low, m.unacceptable.precision, m.unacceptable.recall, f_high)};
}

Outcome tile_mapping() {
  const std::map<int, int> want = {{300, 12}, {200, 8}, {150, 6}, {100, 4}};
  bool pass = true;
  for (Dpi d : kAllDpis) pass &= tile_size(d) == want.at(value(d));
  // A 300 dpi tile and its low-resolution tile cover the same physical area.
  std::mt19937_64 rng(3);
  const GrayImage img = oracle::random_image(rng, 72, 48);
  const auto base_tiles = tile_partition(img.width(), img.height(), tile_size(Dpi::k300));
  for (Dpi d : kAllDpis) {
    const GrayImage low = emulate_dpi(img, d).native_lowres;
    const int t = tile_size(d);
    const auto tiles = tile_partition(low.width(), low.height(), t);
    pass &= tiles.size() == base_tiles.size();
    for (std::size_t i = 0; pass && i < tiles.size(); ++i)
      pass &= tiles[i].x * 12 == base_tiles[i].x * t && tiles[i].y * 12 == base_tiles[i].y * t;
  }
  return {pass, "300:12 200:8 150:6 100:4"};
}

Outcome emulation_identity() {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> side(1, 64), block(1, 10);
  int identity_failures = 0, block_failures = 0;
  for (int i = 0; i < 1000; ++i) {
    const GrayImage img = oracle::random_image(rng, side(rng), side(rng));
    const auto same = emulate_dpi(img, Dpi::k300);
    if (!(same.at_base == img) || !(same.native_lowres == img)) ++identity_failures;
  }
  for (int i = 0; i < 200; ++i) {
    const int w = 6 * block(rng), h = 6 * block(rng);
    const GrayImage img = oracle::random_image(rng, w, h);
    for (auto [d, f] : {std::pair{Dpi::k150, 2}, std::pair{Dpi::k100, 3}}) {
      const auto e = emulate_dpi(img, d);
      bool ok = e.native_lowres.width() == w / f && e.native_lowres.height() == h / f;
      for (int y = 0; ok && y < h; ++y)
        for (int x = 0; ok && x < w; ++x) ok = e.at_base.at(x, y) == e.native_lowres.at(x / f, y / f);
      if (!ok) ++block_failures;
    }
  }
  return {identity_failures == 0 && block_failures == 0,
          fmt("1000 regions, %d identity failures, %d block failures", identity_failures, block_failures)};
}

Outcome noise_calibration() {
  const auto t0 = Clock::now();
  std::vector<GrayImage> images;
  const Texture textures[] = {Texture::BandLimitedNoise, Texture::Gradient, Texture::Halftone, Texture::Strokes};
  for (std::uint64_t i = 0; i < 20; ++i) images.push_back(synth_texture(textures[i % 4], 64, 100 + i));
  bool pass = true;
  std::string detail;
  for (NoiseKind kind : {NoiseKind::Gaussian, NoiseKind::SaltPepper}) {
    const std::uint64_t seed = 5;
    const auto r = calibrate_noise(kind, images, {0.63, 0.01}, seed);
    double sum = 0;
    for (std::size_t i = 0; i < images.size(); ++i) {
      const GrayImage noisy = apply_noise(images[i], {kind, r.parameter, derive_seed(seed, {i})});
      sum += oracle::ssim(images[i], noisy);
    }
    const double mean = sum / images.size();
    pass &= mean >= 0.62 && mean <= 0.64;
    detail += fmt("%s p=%.5g ssim=%.4f; ", std::string(to_string(kind)).c_str(), r.parameter, mean);
  }
  const double secs = seconds_since(t0);
  pass &= secs < 120;
  return {pass, detail + fmt("%.1fs", secs)};
}

Outcome sffs_equivalence() {
  int datasets = 0, score_mismatches = 0, subset_differences = 0;
  std::string shortfalls;
  for (std::uint64_t seed = 0; seed < 50; ++seed, ++datasets) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0, 1);
    std::uniform_real_distribution<double> u(0, 1.5);
    double weight[5];
    for (double& w : weight) w = u(rng);
    std::vector<FeatureVector> rows;
    std::vector<Label> labels;
    for (int i = 0; i < 100; ++i) {
      FeatureVector f;
      double score = 0;
      for (int k = 0; k < 5; ++k) {
        f[k] = g(rng);
        score += weight[k] * f[k];
      }
      rows.push_back(f);
      labels.push_back(score + 0.7 * g(rng) > 0 ? Label::Acceptable : Label::Unacceptable);
    }
    std::map<FeatureSubset, double> memo;
    const SubsetCriterion J = [&](const FeatureSubset& s) {
      auto [it, fresh] = memo.try_emplace(s, 0.0);
      if (fresh) it->second = selection_criterion(rows, labels, s, seed);
      return it->second;
    };
    const auto result = sffs_select(5, 5, J);
    std::vector<double> best(6, -1.0);
    std::vector<FeatureSubset> arg(6);
    for (unsigned m = 1; m < 32; ++m) {
      FeatureSubset s;
      for (std::size_t f = 0; f < 5; ++f)
        if (m >> f & 1) s.push_back(f);
      const double v = J(s);
      if (v > best[s.size()]) best[s.size()] = v, arg[s.size()] = s;
    }
    for (const auto& b : result.best) {
      if (b.score < best[b.subset.size()] - 1e-12) {
        ++score_mismatches;
        shortfalls += fmt(" [dataset %d size %zu: %.3f < %.3f]", int(seed), b.subset.size(), b.score, best[b.subset.size()]);
      }
      if (b.subset != arg[b.subset.size()]) ++subset_differences;
    }
    if (result.best.size() != 5) ++score_mismatches;
  }
  return {score_mismatches == 0,
          fmt("%d datasets, %d sizes below the exhaustive optimum, %d tied optima with a different subset", datasets,
              score_mismatches, subset_differences) +
              shortfalls};
}

Outcome svm_checks() {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0, 0.4);
  std::vector<std::vector<double>> x;
  std::vector<Label> y;
  for (int i = 0; i < 50; ++i) {
    x.push_back({2 + n(rng), 2 + n(rng)});
    y.push_back(Label::Acceptable);
    x.push_back({-2 + n(rng), -2 + n(rng)});
    y.push_back(Label::Unacceptable);
  }
  auto train_accuracy = [](const KernelMachine& m, const auto& xs, const auto& ys) {
    int ok = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) ok += (m.decision(xs[i]) > 0) == (ys[i] == Label::Acceptable);
    return double(ok) / xs.size();
  };
  SvmTrainInfo info;
  info.record_objective = true;
  SvmParams params;
  params.C = 1.0;
  const KernelMachine blobs = train_svm(x, y, params, &info);
  const double blob_acc = train_accuracy(blobs, x, y);

  const std::vector<std::vector<double>> xor_x = {{0, 0}, {1, 1}, {0, 1}, {1, 0}};
  const std::vector<Label> xor_y = {Label::Unacceptable, Label::Unacceptable, Label::Acceptable, Label::Acceptable};
  SvmParams xor_params;
  xor_params.C = 10;
  xor_params.gamma = 2;
  const double xor_acc = train_accuracy(train_svm(xor_x, xor_y, xor_params), xor_x, xor_y);

  bool kkt = true;
  double balance = 0;
  for (std::size_t i = 0; i < info.alpha.size(); ++i) {
    kkt &= info.alpha[i] >= 0 && info.alpha[i] <= params.C + 1e-12;
    balance += info.alpha[i] * sign(y[i]);
  }
  kkt &= std::abs(balance) < 1e-8;
  for (std::size_t i = 1; i < info.objective_trace.size(); ++i)
    kkt &= info.objective_trace[i] >= info.objective_trace[i - 1] - 1e-12;

  const bool deterministic = train_svm(x, y, params) == blobs;
  return {blob_acc == 1.0 && xor_acc == 1.0 && kkt && deterministic,
          fmt("blobs %.3f, xor %.3f, kkt %s, deterministic %s", blob_acc, xor_acc, kkt ? "yes" : "no",
              deterministic ? "yes" : "no")};
}

Outcome end_to_end() {
  const auto t0 = Clock::now();
  SynthSpec spec;
  spec.n_regions = 100;
  spec.seed = 1;
  const SynthCorpus corpus = synth_corpus(spec);
  const fs::path dir = fs::temp_directory_path() / "scanres_acceptance_corpus";
  fs::remove_all(dir);
  const CorpusManifest manifest = load_manifest(write_synth_corpus(dir, corpus));
  const auto regions = load_regions(manifest);

  AugmentationPlan none;
  AugmentationPlan plan;
  plan.gaussian_copies = 2;
  plan.salt_pepper_copies = 2;
  plan.seed = 3;
  const auto plain = build_dataset(regions, corpus.ratings, none);
  const auto augmented = build_dataset(regions, corpus.ratings, plan);

  std::size_t unacceptable = 0;
  for (const auto& s : plain.samples) unacceptable += s.label == Label::Unacceptable;

  CvConfig cfg;
  cfg.runs = 20;
  cfg.base_seed = 7;
  const auto without = cross_validate(plain.samples, cfg);
  const auto with = cross_validate(augmented.samples, cfg);
  int wins = 0;
  for (std::size_t r = 0; r < cfg.runs; ++r) wins += with.per_run[r].unacceptable.recall > without.per_run[r].unacceptable.recall;
  const double secs = seconds_since(t0);
  fs::remove_all(dir);
  return {regions.size() >= 80 && wins >= 16 && secs < 600,
          fmt("%zu regions, %zu/%zu rated samples unacceptable, recall(unacceptable) %.3f -> %.3f, "
              "better in %d/20 runs, accuracy %.3f -> %.3f, %.0fs",
              regions.size(), unacceptable, plain.samples.size(), without.pooled.unacceptable.recall,
              with.pooled.unacceptable.recall, wins, without.mean_accuracy, with.mean_accuracy, secs)};
}

Outcome protocol_guard() {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g(0, 1);
  std::vector<Sample> samples;
  for (int i = 0; i < 36; ++i) {
    Sample s;
    s.region_id = "r" + std::to_string(i);
    s.label = i % 3 ? Label::Acceptable : Label::Unacceptable;
    s.origin = i < 30 ? Origin::Rated : Origin::Augmented;
    if (s.origin == Origin::Augmented) s.label = Label::Unacceptable;
    for (auto& v : s.features.values) v = g(rng);
    samples.push_back(s);
  }
  const FoldProvider leaky = [](std::span<const Sample> s, std::size_t k, std::uint64_t seed) {
    auto folds = rated_folds(s, k, seed);
    folds[0].push_back(s.size() - 1);
    return folds;
  };
  CvConfig cfg;
  cfg.runs = 1;
  try {
    cross_validate(samples, cfg, leaky);
  } catch (const Error& e) {
    return {e.code() == ErrorCode::ProtocolViolation, std::string("aborted: ") + e.what()};
  }
  return {false, "evaluation completed despite a leaked augmented sample"};
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"metric oracle suite", metric_oracles},
      {"ssim reference", ssim_reference},
      {"f1 anchor", f1_anchor},
      {"tile-size mapping", tile_mapping},
      {"emulation identity", emulation_identity},
      {"noise calibration", noise_calibration},
      {"sffs oracle equivalence", sffs_equivalence},
      {"svm", svm_checks},
      {"end-to-end augmentation effect", end_to_end},
      {"protocol guard", protocol_guard},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
