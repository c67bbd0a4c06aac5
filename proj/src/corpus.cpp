#include "scanres/corpus.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

#include "scanres/features.hpp"
#include "scanres/image_io.hpp"
#include "scanres/noise.hpp"
#include "scanres/raster.hpp"
#include "scanres/seed.hpp"

namespace scanres {

using nlohmann::json;

std::string_view to_string(Score score) {
  switch (score) {
    case Score::A: return "A";
    case Score::B: return "B";
    case Score::C: return "C";
    case Score::D: return "D";
  }
  return "D";
}

Score parse_score(std::string_view text) {
  if (text == "A") return Score::A;
  if (text == "B") return Score::B;
  if (text == "C") return Score::C;
  if (text == "D") return Score::D;
  fail(ErrorCode::ParseError, "invalid score '" + std::string(text) + "' (expected A, B, C or D)");
}

Label binarize(Score score, BinarizeMode mode) {
  if (mode == BinarizeMode::Strict) return score == Score::A ? Label::Acceptable : Label::Unacceptable;
  return (score == Score::A || score == Score::B) ? Label::Acceptable : Label::Unacceptable;
}

json to_json(const RatingRecord& r) {
  return {{"region_id", r.region_id},
          {"dpi", value(r.dpi)},
          {"rater_id", r.rater_id},
          {"score", std::string(to_string(r.score))},
          {"timestamp", r.timestamp}};
}

RatingRecord rating_from_json(const json& j) {
  try {
    RatingRecord r;
    r.region_id = j.at("region_id").get<std::string>();
    const auto dpi = dpi_from_int(j.at("dpi").get<int>());
    if (!dpi) fail(ErrorCode::ParseError, "rating has an unsupported dpi");
    r.dpi = *dpi;
    r.rater_id = j.at("rater_id").get<std::string>();
    r.score = parse_score(j.at("score").get<std::string>());
    r.timestamp = j.at("timestamp").get<std::string>();
    return r;
  } catch (const json::exception& e) {
    fail(ErrorCode::ParseError, std::string("malformed rating: ") + e.what());
  }
}

std::string rating_line(const RatingRecord& r) { return to_json(r).dump(); }

std::map<RatingKey, Label> aggregate_ratings(std::span<const RatingRecord> records, BinarizeMode mode) {
  std::map<RatingKey, std::pair<int, int>> votes;  // acceptable, unacceptable
  for (const auto& r : records) {
    auto& v = votes[{r.region_id, r.dpi}];
    (binarize(r.score, mode) == Label::Acceptable ? v.first : v.second) += 1;
  }
  std::map<RatingKey, Label> out;
  for (const auto& [key, v] : votes) out.emplace(key, v.first > v.second ? Label::Acceptable : Label::Unacceptable);
  return out;
}

std::vector<RatingRecord> load_ratings(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path.string());
  std::vector<RatingRecord> out;
  std::set<std::tuple<std::string, int, std::string>> seen;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      fail(ErrorCode::ParseError, path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    RatingRecord r = rating_from_json(j);
    if (!seen.emplace(r.region_id, value(r.dpi), r.rater_id).second) {
      fail(ErrorCode::ParseError, path.string() + ":" + std::to_string(line_no) + ": duplicate rating for " +
                                      r.region_id + "@" + std::to_string(value(r.dpi)) + " by " + r.rater_id);
    }
    out.push_back(std::move(r));
  }
  return out;
}

void save_ratings(const std::filesystem::path& path, std::span<const RatingRecord> records) {
  std::string text;
  for (const auto& r : records) text += rating_line(r) + "\n";
  write_file(path, text);
}

std::filesystem::path CorpusManifest::resolve(const std::string& p) const {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : root / path;
}

json to_json(const CorpusManifest& m) {
  json pages = json::array();
  for (const auto& p : m.pages) {
    json entry = {{"image", p.image}, {"dpi", p.dpi}, {"segmentation", p.segmentation}};
    if (!p.subset.empty()) entry["subset"] = p.subset;
    pages.push_back(std::move(entry));
  }
  return {{"version", CorpusManifest::kVersion}, {"pages", std::move(pages)}};
}

CorpusManifest manifest_from_json(const json& j, const std::filesystem::path& root) {
  try {
    if (!j.contains("version") || j.at("version").get<int>() != CorpusManifest::kVersion) {
      fail(ErrorCode::VersionError, "unsupported manifest version");
    }
    CorpusManifest m;
    m.root = root;
    for (const auto& p : j.at("pages")) {
      PageEntry e;
      e.image = p.at("image").get<std::string>();
      e.dpi = p.at("dpi").get<int>();
      e.segmentation = p.at("segmentation").get<std::string>();
      e.subset = p.value("subset", std::string());
      m.pages.push_back(std::move(e));
    }
    return m;
  } catch (const json::exception& e) {
    fail(ErrorCode::ParseError, std::string("malformed manifest: ") + e.what());
  }
}

CorpusManifest load_manifest(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    fail(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
  CorpusManifest m = manifest_from_json(j, path.parent_path());
  std::set<std::string> ids;
  for (const auto& page : m.pages) {
    if (page.dpi != value(kBaseDpi)) fail(ErrorCode::ParseError, page.image + ": pages must be scanned at 300 dpi");
    for (const auto& file : {page.image, page.segmentation}) {
      if (!std::filesystem::exists(m.resolve(file))) fail(ErrorCode::IoError, "missing file " + m.resolve(file).string());
    }
    const GrayImage image = read_image(m.resolve(page.image));
    const Segmentation seg = load_segmentation(m.resolve(page.segmentation));
    for (const auto& r : seg.regions) {
      validate_region(r, image.width(), image.height());
      if (!ids.insert(r.id).second) fail(ErrorCode::ParseError, "duplicate region id '" + r.id + "'");
    }
  }
  return m;
}

void save_manifest(const std::filesystem::path& path, const CorpusManifest& m) {
  write_file(path, to_json(m).dump(2) + "\n");
}

std::vector<CorpusRegion> load_regions(const CorpusManifest& manifest) {
  std::vector<CorpusRegion> out;
  for (const auto& page : manifest.pages) {
    const GrayImage image = read_image(manifest.resolve(page.image), parse_dpi(page.dpi));
    const Segmentation seg = load_segmentation(manifest.resolve(page.segmentation));
    for (const auto& region : seg.regions) {
      if (region.cls != RegionClass::RasterImage) continue;
      out.push_back({region.id, page.image, crop_region(image, region, {.strict = true})});
    }
  }
  return out;
}

std::uint64_t augmentation_seed(std::uint64_t plan_seed, std::size_t region_index, NoiseKind kind, std::size_t copy) {
  return derive_seed(plan_seed, {region_index, static_cast<std::uint64_t>(kind), copy});
}

BuildResult build_dataset(std::span<const CorpusRegion> regions, std::span<const RatingRecord> ratings,
                          const AugmentationPlan& plan, BinarizeMode mode) {
  if (ratings.empty()) fail(ErrorCode::EmptyInput, "no ratings");
  const auto labels = aggregate_ratings(ratings, mode);
  BuildResult result;

  std::set<std::string> known;
  for (const auto& region : regions) known.insert(region.id);
  for (const auto& [key, label] : labels) {
    if (!known.count(key.region_id)) result.failures.push_back("rating for unknown region '" + key.region_id + "'");
  }

  for (const auto& region : regions) {
    for (Dpi dpi : kAllDpis) {
      auto it = labels.find({region.id, dpi});
      if (it == labels.end()) continue;
      try {
        result.samples.push_back({extract_features(region.image, dpi), it->second, dpi, Origin::Rated, region.id});
      } catch (const Error& e) {
        result.failures.push_back(region.id + "@" + std::to_string(value(dpi)) + ": " + e.what());
      }
    }
  }

  for (std::size_t idx = 0; idx < regions.size(); ++idx) {
    const auto& region = regions[idx];
    auto augment = [&](NoiseKind kind, double parameter, std::size_t copies) {
      for (std::size_t c = 0; c < copies; ++c) {
        try {
          const GrayImage noisy = apply_noise(region.image, {kind, parameter, augmentation_seed(plan.seed, idx, kind, c)});
          result.samples.push_back(
              {extract_degraded_features(region.image, noisy), Label::Unacceptable, kBaseDpi, Origin::Augmented, region.id});
        } catch (const Error& e) {
          result.failures.push_back(region.id + " (" + std::string(to_string(kind)) + " copy " + std::to_string(c) +
                                    "): " + e.what());
        }
      }
    };
    augment(NoiseKind::Gaussian, plan.gaussian_variance, plan.gaussian_copies);
    augment(NoiseKind::SaltPepper, plan.salt_pepper_density, plan.salt_pepper_copies);
  }
  return result;
}

BuildResult build_dataset(const CorpusManifest& manifest, std::span<const RatingRecord> ratings,
                          const AugmentationPlan& plan, BinarizeMode mode) {
  const auto regions = load_regions(manifest);
  return build_dataset(regions, ratings, plan, mode);
}

}  // namespace scanres
