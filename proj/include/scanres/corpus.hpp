#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "scanres/eval.hpp"
#include "scanres/image.hpp"
#include "scanres/noise.hpp"
#include "scanres/segmentation.hpp"

namespace scanres {

// Four-level subjective score: A visually pleasant, B visually okay,
// C okay with some artifacts, D visually unacceptable.
enum class Score { A, B, C, D };

std::string_view to_string(Score score);
Score parse_score(std::string_view text);

enum class BinarizeMode {
  Standard,  // A, B acceptable
  Strict,    // only A acceptable
};

Label binarize(Score score, BinarizeMode mode = BinarizeMode::Standard);

struct RatingRecord {
  std::string region_id;
  Dpi dpi = kBaseDpi;
  std::string rater_id;
  Score score = Score::A;
  std::string timestamp;  // ISO-8601

  bool operator==(const RatingRecord&) const = default;
};

nlohmann::json to_json(const RatingRecord& r);
RatingRecord rating_from_json(const nlohmann::json& j);

struct RatingKey {
  std::string region_id;
  Dpi dpi = kBaseDpi;
  auto operator<=>(const RatingKey&) const = default;
};

// Majority vote of the binarized scores per (region, dpi); ties resolve to
// unacceptable.
std::map<RatingKey, Label> aggregate_ratings(std::span<const RatingRecord> records,
                                             BinarizeMode mode = BinarizeMode::Standard);

// One JSON object per line. Loading rejects duplicate (region, dpi, rater).
std::vector<RatingRecord> load_ratings(const std::filesystem::path& path);
void save_ratings(const std::filesystem::path& path, std::span<const RatingRecord> records);
std::string rating_line(const RatingRecord& r);  // without trailing newline

struct PageEntry {
  std::string image;         // relative to the manifest directory unless absolute
  int dpi = value(kBaseDpi);
  std::string segmentation;  // likewise
  std::string subset;        // optional tag

  bool operator==(const PageEntry&) const = default;
};

struct CorpusManifest {
  static constexpr int kVersion = 1;

  std::vector<PageEntry> pages;
  std::filesystem::path root;  // directory relative paths resolve against

  std::filesystem::path resolve(const std::string& p) const;
};

nlohmann::json to_json(const CorpusManifest& m);
CorpusManifest manifest_from_json(const nlohmann::json& j, const std::filesystem::path& root);
// Parses and validates: every referenced file exists and parses, pages are
// 300 dpi, region ids are unique across the corpus.
CorpusManifest load_manifest(const std::filesystem::path& path);
void save_manifest(const std::filesystem::path& path, const CorpusManifest& m);

struct CorpusRegion {
  std::string id;
  std::string page;
  GrayImage image;  // cropped 300 dpi raster
};

// All raster_image regions of the corpus, in manifest order.
std::vector<CorpusRegion> load_regions(const CorpusManifest& manifest);

struct AugmentationPlan {
  std::size_t gaussian_copies = 0;
  std::size_t salt_pepper_copies = 0;
  double gaussian_variance = 0.0005;
  double salt_pepper_density = 0.008;
  std::uint64_t seed = 0;
};

struct BuildResult {
  std::vector<Sample> samples;
  std::vector<std::string> failures;  // per-region problems; the build continues past them
};

// Rated samples for every aggregated (region, dpi) key, in region then dpi
// order, followed by the augmented copies of every region.
BuildResult build_dataset(std::span<const CorpusRegion> regions, std::span<const RatingRecord> ratings,
                          const AugmentationPlan& plan, BinarizeMode mode = BinarizeMode::Standard);
BuildResult build_dataset(const CorpusManifest& manifest, std::span<const RatingRecord> ratings,
                          const AugmentationPlan& plan, BinarizeMode mode = BinarizeMode::Standard);

// Seed used for augmented copy `copy` of kind `kind` on region `region_index`.
std::uint64_t augmentation_seed(std::uint64_t plan_seed, std::size_t region_index, NoiseKind kind, std::size_t copy);

// Feature table: a "# scanres-features version=1 key=value..." metadata line,
// then header region_id,dpi,origin,label,f0..f8. Values use round-trip
// precision so load(save(x)) == x.
struct FeatureTable {
  static constexpr int kVersion = 1;

  std::map<std::string, std::string> metadata;
  std::vector<Sample> samples;

  bool operator==(const FeatureTable&) const = default;
};

std::string serialize_features(const FeatureTable& table);
FeatureTable parse_features(std::string_view text);
void save_features(const std::filesystem::path& path, const FeatureTable& table);
FeatureTable load_features(const std::filesystem::path& path);

}  // namespace scanres
