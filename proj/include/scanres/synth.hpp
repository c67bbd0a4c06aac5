#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "scanres/corpus.hpp"
#include "scanres/image.hpp"
#include "scanres/segmentation.hpp"

namespace scanres {

enum class Texture { BandLimitedNoise, Gradient, Halftone, Strokes };

struct SynthSpec {
  std::size_t n_regions = 80;
  int region_size = 96;  // square raster regions, pixels at 300 dpi
  std::uint64_t seed = 0;
  // Relative frequency of each Texture, in enum order.
  std::array<double, 4> texture_mix = {0.35, 0.15, 0.3, 0.2};
  std::size_t raters = 3;
  // Proxy-rater SSIM cut points: A above the first, B above the second,
  // C above the third, D otherwise.
  std::array<double, 3> thresholds = {0.95, 0.80, 0.63};
  // Each rater shifts every cut point by a seeded uniform offset in +-jitter.
  double threshold_jitter = 0.02;
};

struct SynthPage {
  std::string name;
  GrayImage image;
  Segmentation segmentation;
};

struct SynthCorpus {
  std::vector<SynthPage> pages;
  std::vector<RatingRecord> ratings;
  std::vector<Texture> textures;  // per raster region, in page order
};

// Procedurally generated 300 dpi region texture.
GrayImage synth_texture(Texture texture, int size, std::uint64_t seed);

// Mean SSIM of region vs. its emulated rendition at each dpi, ascending dpi.
std::array<double, 4> emulation_ssim(const GrayImage& region);

// Pages hold one or two raster regions and a text strip. Regions whose
// emulation SSIM does not increase with dpi are regenerated, so a proxy
// rater's label never improves as dpi decreases.
SynthCorpus synth_corpus(const SynthSpec& spec);

// Writes pages (PNG), segmentation maps, manifest.json and ratings.jsonl under
// `dir`; returns the manifest path.
std::filesystem::path write_synth_corpus(const std::filesystem::path& dir, const SynthCorpus& corpus);

}  // namespace scanres
