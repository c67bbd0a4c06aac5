#include "scanres/learn.hpp"

#include "scanres/image_io.hpp"
#include "scanres/raster.hpp"

namespace scanres {

using nlohmann::json;

json to_json(const SvmModel& model) {
  const Normalizer& norm = model.normalizer;
  json mask = json::array();
  json stats = json::array();
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    mask.push_back(norm.mask[i]);
    stats.push_back({{"feature", std::string(feature_name(i))}, {"mean", norm.stats[i].offset}, {"stddev", norm.stats[i].scale}});
  }
  return {
      {"version", SvmModel::kVersion},
      {"kernel", std::string(to_string(model.machine.kernel.kind))},
      {"gamma", model.machine.kernel.gamma},
      {"C", model.machine.C},
      {"normalization", std::string(to_string(norm.kind))},
      {"feature_mask", std::move(mask)},
      {"norm_stats", std::move(stats)},
      {"support_vectors", model.machine.support_vectors},
      {"dual_coefficients", model.machine.dual_coefficients},
      {"bias", model.machine.bias},
      {"training_digest", model.training_digest},
  };
}

SvmModel model_from_json(const json& j) {
  try {
    if (!j.contains("version") || j.at("version").get<int>() != SvmModel::kVersion) {
      fail(ErrorCode::VersionError, "unsupported model version");
    }
    SvmModel model;
    model.machine.kernel.kind = parse_kernel_kind(j.at("kernel").get<std::string>());
    model.machine.kernel.gamma = j.at("gamma").get<double>();
    model.machine.C = j.at("C").get<double>();
    model.normalizer.kind = parse_norm_kind(j.value("normalization", std::string("zscore")));
    const auto& mask = j.at("feature_mask");
    const auto& stats = j.at("norm_stats");
    if (mask.size() != kFeatureCount || stats.size() != kFeatureCount) {
      fail(ErrorCode::ParseError, "feature_mask and norm_stats need 9 entries");
    }
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
      model.normalizer.mask[i] = mask[i].get<bool>();
      model.normalizer.stats[i] = {stats[i].at("mean").get<double>(), stats[i].at("stddev").get<double>()};
      if (model.normalizer.mask[i] && !(model.normalizer.stats[i].scale > 0.0)) {
        fail(ErrorCode::ParseError, "non-positive stddev for an active feature");
      }
    }
    model.machine.support_vectors = j.at("support_vectors").get<std::vector<std::vector<double>>>();
    model.machine.dual_coefficients = j.at("dual_coefficients").get<std::vector<double>>();
    model.machine.bias = j.at("bias").get<double>();
    model.training_digest = j.value("training_digest", std::string());
    if (model.machine.support_vectors.empty()) fail(ErrorCode::ParseError, "model has no support vectors");
    if (model.machine.support_vectors.size() != model.machine.dual_coefficients.size()) {
      fail(ErrorCode::ParseError, "support vector / coefficient count mismatch");
    }
    for (const auto& sv : model.machine.support_vectors) {
      if (sv.size() != model.normalizer.dims()) fail(ErrorCode::ParseError, "support vector width does not match the mask");
    }
    return model;
  } catch (const json::exception& e) {
    fail(ErrorCode::ParseError, std::string("malformed model: ") + e.what());
  }
}

void save_model(const std::filesystem::path& path, const SvmModel& model) {
  write_file(path, to_json(model).dump(2) + "\n");
}

SvmModel load_model(const std::filesystem::path& path) {
  try {
    return model_from_json(json::parse(read_file(path)));
  } catch (const json::parse_error& e) {
    fail(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
}

Dpi min_acceptable_dpi(const Predictor& predictor, const GrayImage& region) {
  for (Dpi dpi : kAllDpis) {
    if (dpi == kBaseDpi) break;
    if (predictor(extract_features(region, dpi)).label == Label::Acceptable) return dpi;
  }
  return kBaseDpi;
}

Dpi min_acceptable_dpi(const Predictor& predictor, const GrayImage& page, const RegionSpec& region) {
  return min_acceptable_dpi(predictor, crop_region(page, region, {.strict = true}));
}

Dpi min_acceptable_dpi(const SvmModel& model, const GrayImage& page, const RegionSpec& region) {
  return min_acceptable_dpi([&](const FeatureVector& x) { return model.predict(x); }, page, region);
}

}  // namespace scanres
