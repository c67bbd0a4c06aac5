// scanres command-line front end.
//
// Exit codes: 0 success, 2 usage or validation error, 1 runtime failure.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "scanres/corpus.hpp"
#include "scanres/eval.hpp"
#include "scanres/image_io.hpp"
#include "scanres/learn.hpp"
#include "scanres/metrics.hpp"
#include "scanres/noise.hpp"
#include "scanres/raster.hpp"
#include "scanres/rating_server.hpp"
#include "scanres/seed.hpp"
#include "scanres/sffs.hpp"
#include "scanres/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace scanres;

namespace {

struct SeedOption {
  std::optional<std::uint64_t> flag;

  std::uint64_t get() const {
    if (flag) return *flag;
    if (const char* env = std::getenv("SCANRES_SEED")) {
      try {
        std::size_t used = 0;
        const unsigned long long v = std::stoull(env, &used, 0);
        if (used == std::string_view(env).size()) return v;
      } catch (const std::exception&) {
      }
      fail(ErrorCode::InvalidParameter, std::string("SCANRES_SEED is not an unsigned integer: ") + env);
    }
    return 0;
  }
};

void add_seed(CLI::App* cmd, SeedOption& seed) {
  cmd->add_option("--seed", seed.flag, "RNG seed (falls back to $SCANRES_SEED, then 0)");
}

// Writes to `path`, or stdout when path is empty or "-".
void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::fwrite(text.data(), 1, text.size(), stdout);
    std::fflush(stdout);
  } else {
    if (fs::path(path).has_parent_path()) fs::create_directories(fs::path(path).parent_path());
    write_file(path, text);
  }
}

// --- training options shared by train / evaluate / select -------------------

struct TrainOptions {
  std::string kernel = "rbf";
  double C = 1.0;
  std::optional<double> gamma;
  bool minmax = false;
  std::string mask;
  double c_acceptable = 1.0;
  double c_unacceptable = 1.0;

  void attach(CLI::App* cmd) {
    cmd->add_option("--kernel", kernel, "linear | rbf")->check(CLI::IsMember({"linear", "rbf"}));
    cmd->add_option("--C", C, "soft-margin penalty")->check(CLI::PositiveNumber);
    cmd->add_option("--gamma", gamma, "rbf width (default 1/(d * mean variance))")->check(CLI::PositiveNumber);
    cmd->add_flag("--minmax", minmax, "min-max instead of z-score normalization");
    cmd->add_option("--mask", mask, "comma-separated feature names or indices to keep");
    cmd->add_option("--c-acceptable", c_acceptable, "C multiplier for the acceptable class")->check(CLI::PositiveNumber);
    cmd->add_option("--c-unacceptable", c_unacceptable, "C multiplier for the unacceptable class")
        ->check(CLI::PositiveNumber);
  }

  TrainConfig config() const {
    TrainConfig cfg;
    cfg.svm.kernel = parse_kernel_kind(kernel);
    cfg.svm.C = C;
    cfg.svm.gamma = gamma;
    cfg.svm.c_scale_acceptable = c_acceptable;
    cfg.svm.c_scale_unacceptable = c_unacceptable;
    cfg.norm = minmax ? NormKind::MinMax : NormKind::ZScore;
    if (!mask.empty()) cfg.mask = parse_mask(mask);
    return cfg;
  }

  static FeatureMask parse_mask(const std::string& text) {
    std::vector<std::size_t> idx;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (item.empty()) continue;
      if (auto named = feature_index(item)) {
        idx.push_back(*named);
        continue;
      }
      std::size_t used = 0;
      std::size_t i = 0;
      try {
        i = std::stoul(item, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != item.size() || i >= kFeatureCount) fail(ErrorCode::InvalidParameter, "unknown feature '" + item + "'");
      idx.push_back(i);
    }
    if (idx.empty()) fail(ErrorCode::InvalidParameter, "--mask selects no features");
    return mask_of(idx);
  }
};

void split_xy(const std::vector<Sample>& samples, std::vector<FeatureVector>& rows, std::vector<Label>& labels,
              bool rated_only) {
  for (const auto& s : samples) {
    if (rated_only && s.origin != Origin::Rated) continue;
    rows.push_back(s.features);
    labels.push_back(s.label);
  }
}

std::vector<CorpusRegion> regions_from_inputs(const std::string& manifest, const std::vector<std::string>& images) {
  std::vector<CorpusRegion> regions;
  if (!manifest.empty()) regions = load_regions(load_manifest(manifest));
  for (const auto& path : images) regions.push_back({fs::path(path).stem().string(), path, read_image(path)});
  if (regions.empty()) fail(ErrorCode::InvalidParameter, "no input regions (use --manifest or --image)");
  return regions;
}

// --- subcommands -------------------------------------------------------------

struct SynthCmd {
  SynthSpec spec;
  SeedOption seed;
  std::string out;
  std::vector<double> mix;

  void attach(CLI::App* cmd) {
    cmd->add_option("--n", spec.n_regions, "number of raster regions")->check(CLI::Range(4, 100000));
    cmd->add_option("--size", spec.region_size, "region side length in pixels")->check(CLI::Range(24, 4096));
    cmd->add_option("--raters", spec.raters, "proxy raters per stimulus")->check(CLI::Range(1, 64));
    cmd->add_option("--mix", mix, "texture weights: noise,gradient,halftone,strokes")->expected(4)->delimiter(',');
    cmd->add_option("--out", out, "output directory")->required();
    add_seed(cmd, seed);
  }

  int run() {
    spec.seed = seed.get();
    if (!mix.empty()) std::copy(mix.begin(), mix.end(), spec.texture_mix.begin());
    const fs::path manifest = write_synth_corpus(out, synth_corpus(spec));
    std::cout << manifest.string() << "\n";
    return 0;
  }
};

struct EmulateCmd {
  std::string image;
  int dpi = 0;
  std::string out;
  std::string lowres;

  void attach(CLI::App* cmd) {
    cmd->add_option("--image", image, "300 dpi input (PNG or PGM)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--dpi", dpi, "target dpi: 100 | 150 | 200 | 300")->required();
    cmd->add_option("--out", out, "emulated image at base size")->required();
    cmd->add_option("--lowres", lowres, "also write the decimated raster");
  }

  int run() {
    const Dpi target = parse_dpi(dpi);
    const auto pair = emulate_dpi(read_image(image), target);
    write_image(out, pair.at_base);
    if (!lowres.empty()) write_image(lowres, pair.native_lowres);
    return 0;
  }
};

struct FeaturesCmd {
  std::string manifest;
  std::string ratings;
  std::string out;
  bool strict = false;
  AugmentationPlan plan;
  SeedOption seed;

  void attach(CLI::App* cmd) {
    cmd->add_option("--manifest", manifest, "corpus manifest")->required()->check(CLI::ExistingFile);
    cmd->add_option("--ratings", ratings, "ratings JSONL")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", out, "feature CSV (default stdout)");
    cmd->add_flag("--strict", strict, "only score A counts as acceptable");
    cmd->add_option("--gaussian", plan.gaussian_copies, "Gaussian-noise copies per region");
    cmd->add_option("--sp", plan.salt_pepper_copies, "salt-and-pepper copies per region");
    cmd->add_option("--gaussian-variance", plan.gaussian_variance)->check(CLI::Range(0.0, 0.25));
    cmd->add_option("--sp-density", plan.salt_pepper_density)->check(CLI::Range(0.0, 0.5));
    add_seed(cmd, seed);
  }

  int run() {
    plan.seed = seed.get();
    const auto result = build_dataset(load_manifest(manifest), load_ratings(ratings), plan,
                                      strict ? BinarizeMode::Strict : BinarizeMode::Standard);
    for (const auto& f : result.failures) std::cerr << "warning: " << f << "\n";
    FeatureTable table;
    table.samples = result.samples;
    table.metadata = {{"seed", std::to_string(plan.seed)},
                      {"binarize", strict ? "strict" : "standard"},
                      {"gaussian_copies", std::to_string(plan.gaussian_copies)},
                      {"sp_copies", std::to_string(plan.salt_pepper_copies)}};
    if (plan.gaussian_copies) table.metadata["gaussian_variance"] = json(plan.gaussian_variance).dump();
    if (plan.salt_pepper_copies) table.metadata["sp_density"] = json(plan.salt_pepper_density).dump();
    emit(out, serialize_features(table));
    return 0;
  }
};

struct CalibrateCmd {
  std::string kind;
  std::string manifest;
  std::vector<std::string> images;
  CalibrationTarget target;
  SeedOption seed;
  std::string out;

  void attach(CLI::App* cmd) {
    cmd->add_option("--kind", kind, "gaussian | sp")->required()->check(CLI::IsMember({"gaussian", "sp", "salt_pepper"}));
    cmd->add_option("--manifest", manifest, "calibrate on the corpus raster regions")->check(CLI::ExistingFile);
    cmd->add_option("--image", images, "calibration image (repeatable)")->check(CLI::ExistingFile);
    cmd->add_option("--target", target.target_mean_ssim, "target mean SSIM")->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--tol", target.tolerance, "accepted |mean SSIM - target|")->check(CLI::PositiveNumber);
    cmd->add_option("--out", out, "JSON result (default stdout)");
    add_seed(cmd, seed);
  }

  int run() {
    std::vector<GrayImage> imgs;
    for (auto& r : regions_from_inputs(manifest, images)) imgs.push_back(std::move(r.image));
    const NoiseKind k = parse_noise_kind(kind);
    const auto res = calibrate_noise(k, imgs, target, seed.get());
    const json j = {{"kind", std::string(to_string(k))},   {"parameter", res.parameter},
                    {"mean_ssim", res.mean_ssim},          {"target", target.target_mean_ssim},
                    {"tolerance", target.tolerance},       {"evaluations", res.evaluations},
                    {"grid_fallback", res.grid_fallback},  {"images", imgs.size()},
                    {"seed", seed.get()}};
    emit(out, j.dump(2) + "\n");
    return 0;
  }
};

struct AugmentCmd {
  std::string kind;
  std::optional<double> param;
  bool calibrate = false;
  CalibrationTarget target;
  std::string manifest;
  std::vector<std::string> images;
  std::size_t copies = 1;
  std::string out;
  SeedOption seed;

  void attach(CLI::App* cmd) {
    cmd->add_option("--kind", kind, "gaussian | sp")->required()->check(CLI::IsMember({"gaussian", "sp", "salt_pepper"}));
    auto* p = cmd->add_option("--param", param, "variance or density")->check(CLI::NonNegativeNumber);
    auto* c = cmd->add_flag("--calibrate", calibrate, "pick the parameter matching --target mean SSIM");
    p->excludes(c);
    cmd->add_option("--target", target.target_mean_ssim)->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--tol", target.tolerance)->check(CLI::PositiveNumber);
    cmd->add_option("--manifest", manifest, "augment the corpus raster regions")->check(CLI::ExistingFile);
    cmd->add_option("--image", images, "input image (repeatable)")->check(CLI::ExistingFile);
    cmd->add_option("--copies", copies, "noisy copies per input")->check(CLI::PositiveNumber);
    cmd->add_option("--out", out, "output directory")->required();
    add_seed(cmd, seed);
  }

  int run() {
    if (!param && !calibrate) fail(ErrorCode::InvalidParameter, "one of --param or --calibrate is required");
    const NoiseKind k = parse_noise_kind(kind);
    const auto regions = regions_from_inputs(manifest, images);
    const std::uint64_t base = seed.get();
    double parameter = param.value_or(0.0);
    if (calibrate) {
      std::vector<GrayImage> imgs;
      for (const auto& r : regions) imgs.push_back(r.image);
      parameter = calibrate_noise(k, imgs, target, derive_seed(base, {fnv1a("calibrate")})).parameter;
    }
    if (parameter > max_parameter(k)) fail(ErrorCode::InvalidParameter, "parameter exceeds the noise model range");
    fs::create_directories(out);
    std::string ledger;
    for (std::size_t i = 0; i < regions.size(); ++i) {
      for (std::size_t c = 0; c < copies; ++c) {
        const std::uint64_t s = augmentation_seed(base, i, k, c);
        const GrayImage noisy = apply_noise(regions[i].image, {k, parameter, s});
        const std::string name = regions[i].id + "_" + std::string(to_string(k)) + "_" + std::to_string(c) + ".png";
        write_image(fs::path(out) / name, noisy);
        ledger += json{{"source", regions[i].id},
                       {"output", name},
                       {"kind", std::string(to_string(k))},
                       {"parameter", parameter},
                       {"seed", s},
                       {"ssim", ssim(regions[i].image, noisy)}}
                      .dump() +
                  "\n";
      }
    }
    write_file(fs::path(out) / "augment.jsonl", ledger);
    return 0;
  }
};

struct TrainCmd {
  std::string features;
  std::string out;
  TrainOptions opts;
  bool grid = false;
  bool include_augmented = true;
  SeedOption seed;

  void attach(CLI::App* cmd) {
    cmd->add_option("--features", features, "feature CSV")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", out, "model JSON (default stdout)");
    cmd->add_flag("--grid", grid, "3x3 C/gamma grid search by 5-fold accuracy");
    cmd->add_flag("!--no-augmented", include_augmented, "train on rated samples only");
    opts.attach(cmd);
    add_seed(cmd, seed);
  }

  int run() {
    const auto table = load_features(features);
    std::vector<FeatureVector> rows;
    std::vector<Label> labels;
    split_xy(table.samples, rows, labels, !include_augmented);
    TrainConfig cfg = opts.config();
    if (grid) cfg = grid_search(rows, labels, cfg, 5, seed.get());
    emit(out, to_json(fit_model(rows, labels, cfg)).dump(2) + "\n");
    return 0;
  }
};

struct SelectCmd {
  std::string features;
  std::size_t d = kFeatureCount;
  std::string out;
  SeedOption seed;

  void attach(CLI::App* cmd) {
    cmd->add_option("--features", features, "feature CSV")->required()->check(CLI::ExistingFile);
    cmd->add_option("--d", d, "target subset size")->check(CLI::Range(std::size_t{1}, kFeatureCount));
    cmd->add_option("--out", out, "selection JSON (default stdout)");
    add_seed(cmd, seed);
  }

  int run() {
    std::vector<FeatureVector> rows;
    std::vector<Label> labels;
    split_xy(load_features(features).samples, rows, labels, true);
    emit(out, to_json(sffs_select(rows, labels, d, seed.get())).dump(2) + "\n");
    return 0;
  }
};

struct EvaluateCmd {
  std::string features;
  CvConfig cv;
  TrainOptions opts;
  std::string out;
  bool no_augmented = false;
  SeedOption seed;

  void attach(CLI::App* cmd) {
    cmd->add_option("--features", features, "feature CSV")->required()->check(CLI::ExistingFile);
    cmd->add_option("--runs", cv.runs, "repetitions of k-fold CV")->check(CLI::PositiveNumber);
    cmd->add_option("--k", cv.k, "folds")->check(CLI::Range(2, 100));
    cmd->add_option("--out", out, "report JSON; the table goes to stdout");
    cmd->add_flag("--no-augmented", no_augmented, "ignore augmented samples");
    opts.attach(cmd);
    add_seed(cmd, seed);
  }

  int run() {
    auto samples = load_features(features).samples;
    if (no_augmented) std::erase_if(samples, [](const Sample& s) { return s.origin == Origin::Augmented; });
    cv.base_seed = seed.get();
    cv.train = opts.config();
    const EvalReport report = cross_validate(samples, cv);
    const std::string j = to_json(report).dump(2) + "\n";
    if (out.empty()) {
      emit("", j);
      std::cerr << format_report(report);
    } else {
      emit(out, j);
      std::cout << format_report(report);
    }
    return 0;
  }
};

struct PredictCmd {
  std::string model;
  std::string page;
  std::string segmentation;
  std::string out;

  void attach(CLI::App* cmd) {
    cmd->add_option("--model", model, "model JSON")->required()->check(CLI::ExistingFile);
    cmd->add_option("--segmentation", segmentation, "page segmentation JSON")->required()->check(CLI::ExistingFile);
    cmd->add_option("--page", page, "page image (default: the map's page field)")->check(CLI::ExistingFile);
    cmd->add_option("--out", out, "result JSON (default stdout)");
  }

  int run() {
    const SvmModel m = load_model(model);
    const Segmentation seg = load_segmentation(segmentation);
    fs::path image = page;
    if (image.empty()) {
      image = seg.page;
      if (image.is_relative()) image = fs::path(segmentation).parent_path() / image;
    }
    const GrayImage img = read_image(image);
    json result = json::object();
    for (const auto& region : seg.regions) {
      if (region.cls != RegionClass::RasterImage) continue;
      result[region.id] = value(min_acceptable_dpi(m, img, region));
    }
    emit(out, result.dump(2) + "\n");
    return 0;
  }
};

struct ServeCmd {
  std::string manifest;
  std::string ledger = "ratings.jsonl";
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string static_dir;
  bool reference = false;
  SeedOption seed;

  void attach(CLI::App* cmd) {
    cmd->add_option("--manifest", manifest, "corpus manifest")->required()->check(CLI::ExistingFile);
    cmd->add_option("--ledger", ledger, "ratings JSONL to append to");
    cmd->add_option("--host", host);
    cmd->add_option("--port", port, "0 picks a free port")->check(CLI::Range(0, 65535));
    cmd->add_option("--static-dir", static_dir, "built rating UI assets")->check(CLI::ExistingDirectory);
    cmd->add_flag("--reference", reference, "offer the 300 dpi reference alongside each stimulus");
    add_seed(cmd, seed);
  }

  int run() {
    RatingSession session(load_regions(load_manifest(manifest)), ledger, seed.get(), reference);
    RatingServer server(session, static_dir);
    const int bound = server.bind(host, port);
    if (bound < 0) fail(ErrorCode::IoError, "cannot bind " + host + ":" + std::to_string(port));
    std::cout << "listening on http://" << host << ":" << bound << " (" << session.task_count() << " tasks)"
              << std::endl;
    return server.listen() ? 0 : 1;
  }
};

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidParameter:
    case ErrorCode::InvalidDimension:
    case ErrorCode::InvalidDimensions:
    case ErrorCode::ParseError:
    case ErrorCode::VersionError:
    case ErrorCode::WrongRegionClass:
    case ErrorCode::RegionOutOfBounds:
    case ErrorCode::UpsampleNotAllowed:
      return 2;
    default:
      return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scan resolution acceptability for raster regions of document pages"};
  app.require_subcommand(1);

  SynthCmd synth;
  EmulateCmd emulate;
  FeaturesCmd features;
  AugmentCmd augment;
  CalibrateCmd calibrate;
  TrainCmd train;
  SelectCmd select;
  EvaluateCmd evaluate;
  PredictCmd predict;
  ServeCmd serve;

  std::vector<std::pair<CLI::App*, std::function<int()>>> commands;
  auto add = [&](const char* name, const char* help, auto& cmd) {
    CLI::App* sub = app.add_subcommand(name, help);
    cmd.attach(sub);
    commands.emplace_back(sub, [&cmd] { return cmd.run(); });
  };
  add("synth", "generate a synthetic rated corpus", synth);
  add("emulate", "emulate a lower-dpi scan of a 300 dpi image", emulate);
  add("features", "extract labeled feature rows from a rated corpus", features);
  add("augment", "write noise-degraded copies of regions", augment);
  add("calibrate", "find the noise level matching a target mean SSIM", calibrate);
  add("train", "fit a normalization + SVM model", train);
  add("select", "rank features with sequential floating forward selection", select);
  add("evaluate", "repeated k-fold cross-validation", evaluate);
  add("predict", "minimum acceptable dpi per raster region of a page", predict);
  add("serve", "host the rating HTTP API", serve);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    for (auto& [sub, run] : commands) {
      if (sub->parsed()) return run();
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << " [" << to_string(e.code()) << "]\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
