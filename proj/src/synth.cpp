#include "scanres/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "scanres/image_io.hpp"
#include "scanres/metrics.hpp"
#include "scanres/raster.hpp"
#include "scanres/seed.hpp"

namespace scanres {
namespace {

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

std::vector<double> blur(const std::vector<double>& src, int size, double sigma) {
  const int r = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> k(2 * r + 1);
  double sum = 0.0;
  for (int i = -r; i <= r; ++i) sum += k[i + r] = std::exp(-0.5 * i * i / (sigma * sigma));
  for (auto& v : k) v /= sum;
  auto wrap = [size](int i) { return ((i % size) + size) % size; };
  std::vector<double> tmp(src.size()), out(src.size());
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      double acc = 0.0;
      for (int i = -r; i <= r; ++i) acc += k[i + r] * src[y * size + wrap(x + i)];
      tmp[y * size + x] = acc;
    }
  }
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      double acc = 0.0;
      for (int i = -r; i <= r; ++i) acc += k[i + r] * tmp[wrap(y + i) * size + x];
      out[y * size + x] = acc;
    }
  }
  return out;
}

// Smooth random field with zero mean and unit variance.
std::vector<double> smooth_field(int size, double sigma, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> white(static_cast<std::size_t>(size) * size);
  for (auto& v : white) v = normal(rng);
  auto f = blur(white, size, sigma);
  double mean = 0.0;
  for (double v : f) mean += v;
  mean /= static_cast<double>(f.size());
  double var = 0.0;
  for (double v : f) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / static_cast<double>(f.size()));
  for (auto& v : f) v = (v - mean) / (sd > 0 ? sd : 1.0);
  return f;
}

GrayImage from_values(const std::vector<double>& v, int size) {
  GrayImage img(size, size, kBaseDpi);
  auto px = img.pixels();
  for (std::size_t i = 0; i < v.size(); ++i) px[i] = static_cast<std::uint8_t>(std::clamp(std::lround(v[i]), 0L, 255L));
  return img;
}

double segment_distance(double px, double py, double ax, double ay, double bx, double by) {
  const double dx = bx - ax, dy = by - ay;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0 ? ((px - ax) * dx + (py - ay) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const double ex = ax + t * dx - px, ey = ay + t * dy - py;
  return std::sqrt(ex * ex + ey * ey);
}

void draw_strokes(std::vector<double>& v, int width, int height, int count, double max_width, double ink, Rng& rng) {
  for (int s = 0; s < count; ++s) {
    const double ax = uniform(rng, 0, width), ay = uniform(rng, 0, height);
    const double len = uniform(rng, 0.1, 0.5) * std::min(width, height);
    const double ang = uniform(rng, 0, std::numbers::pi);
    const double bx = ax + len * std::cos(ang), by = ay + len * std::sin(ang);
    const double half = 0.5 * uniform(rng, 1.0, max_width);
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        if (segment_distance(x + 0.5, y + 0.5, ax, ay, bx, by) <= half) v[y * width + x] = ink;
      }
    }
  }
}

std::string timestamp(std::size_t offset_seconds) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "2024-01-01T%02zu:%02zu:%02zuZ", (offset_seconds / 3600) % 24,
                (offset_seconds / 60) % 60, offset_seconds % 60);
  return buf;
}

Texture pick_texture(const std::array<double, 4>& mix, Rng& rng) {
  std::discrete_distribution<int> d(mix.begin(), mix.end());
  return static_cast<Texture>(d(rng));
}

}  // namespace

GrayImage synth_texture(Texture texture, int size, std::uint64_t seed) {
  if (size < 16) fail(ErrorCode::InvalidParameter, "synthetic regions must be at least 16 pixels");
  Rng rng(seed);
  std::vector<double> v(static_cast<std::size_t>(size) * size);
  switch (texture) {
    case Texture::BandLimitedNoise: {
      const double sigma = std::exp(uniform(rng, std::log(0.5), std::log(4.0)));
      const double contrast = uniform(rng, 25.0, 70.0);
      const double base = uniform(rng, 90.0, 170.0);
      const auto f = smooth_field(size, sigma, rng);
      for (std::size_t i = 0; i < v.size(); ++i) v[i] = base + contrast * f[i];
      break;
    }
    case Texture::Gradient: {
      const double ang = uniform(rng, 0, 2 * std::numbers::pi);
      const double lo = uniform(rng, 20, 120), hi = uniform(rng, 140, 240);
      const auto wobble = smooth_field(size, size / 6.0, rng);
      std::normal_distribution<double> grain(0.0, 1.5);
      for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
          const double t = 0.5 + ((x - size / 2.0) * std::cos(ang) + (y - size / 2.0) * std::sin(ang)) / (1.5 * size);
          v[y * size + x] = lo + (hi - lo) * t + 6.0 * wobble[y * size + x] + grain(rng);
        }
      }
      break;
    }
    case Texture::Halftone: {
      const int period = std::uniform_int_distribution<int>(3, 9)(rng);
      const double paper = uniform(rng, 215, 250), ink = uniform(rng, 10, 70);
      const auto tone_field = smooth_field(size, size / 5.0, rng);
      for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
          const double tone = std::clamp(0.5 + 0.25 * tone_field[y * size + x], 0.05, 0.95);
          const double radius = period * std::sqrt(tone / std::numbers::pi);
          const double cx = (std::floor(static_cast<double>(x) / period) + 0.5) * period;
          const double cy = (std::floor(static_cast<double>(y) / period) + 0.5) * period;
          const double d = std::hypot(x + 0.5 - cx, y + 0.5 - cy);
          v[y * size + x] = d <= radius ? ink : paper;
        }
      }
      break;
    }
    case Texture::Strokes: {
      const double paper = uniform(rng, 200, 245);
      std::fill(v.begin(), v.end(), paper);
      const int count = std::uniform_int_distribution<int>(6, 24)(rng);
      draw_strokes(v, size, size, count, uniform(rng, 1.5, 5.0), uniform(rng, 10, 90), rng);
      break;
    }
  }
  return from_values(v, size);
}

std::array<double, 4> emulation_ssim(const GrayImage& region) {
  std::array<double, 4> out{};
  for (std::size_t i = 0; i < kAllDpis.size(); ++i) out[i] = ssim(region, emulate_dpi(region, kAllDpis[i]).at_base);
  return out;
}

SynthCorpus synth_corpus(const SynthSpec& spec) {
  if (spec.n_regions < 4) fail(ErrorCode::InvalidParameter, "synthetic corpus needs at least 4 regions");
  if (spec.region_size < 16) fail(ErrorCode::InvalidParameter, "region size must be at least 16");
  if (spec.raters < 1) fail(ErrorCode::InvalidParameter, "need at least one proxy rater");

  Rng layout(derive_seed(spec.seed, {0}));
  SynthCorpus corpus;

  // Proxy raters: jittered, still ordered, cut points.
  std::vector<std::array<double, 3>> cuts(spec.raters);
  for (std::size_t r = 0; r < spec.raters; ++r) {
    Rng rng(derive_seed(spec.seed, {1, r}));
    for (int t = 0; t < 3; ++t) cuts[r][t] = spec.thresholds[t] + uniform(rng, -spec.threshold_jitter, spec.threshold_jitter);
    std::sort(cuts[r].begin(), cuts[r].end(), std::greater<>());
  }

  const int size = spec.region_size, margin = 10, strip = 20;
  std::size_t made = 0, rating_clock = 0;
  for (std::size_t page_no = 0; made < spec.n_regions; ++page_no) {
    const std::size_t per_page = std::min<std::size_t>(spec.n_regions - made, 1 + layout() % 2);
    const int width = static_cast<int>(per_page) * size + (static_cast<int>(per_page) + 1) * margin;
    const int height = size + strip + 3 * margin;

    char name[32];
    std::snprintf(name, sizeof name, "page_%03zu", page_no);
    SynthPage page{name, GrayImage(width, height, kBaseDpi, 250), {}};
    page.segmentation.page = std::string(name) + ".png";
    page.segmentation.dpi = value(kBaseDpi);

    for (std::size_t j = 0; j < per_page; ++j, ++made) {
      GrayImage region;
      Texture texture{};
      std::array<double, 4> s{};
      for (std::uint64_t attempt = 0;; ++attempt) {
        Rng pick(derive_seed(spec.seed, {2, made, attempt}));
        texture = pick_texture(spec.texture_mix, pick);
        region = synth_texture(texture, size, derive_seed(spec.seed, {3, made, attempt}));
        s = emulation_ssim(region);
        if (s[0] <= s[1] && s[1] <= s[2] && s[2] <= s[3]) break;
        if (attempt > 64) fail(ErrorCode::InvalidParameter, "could not generate a dpi-monotone region");
      }
      const int x0 = margin + static_cast<int>(j) * (size + margin);
      for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) page.image.at(x0 + x, margin + y) = region.at(x, y);
      }
      char id[48];
      std::snprintf(id, sizeof id, "p%03zu_r%zu", page_no, j);
      page.segmentation.regions.push_back({id, RegionClass::RasterImage, Rect{x0, margin, size, size}});
      corpus.textures.push_back(texture);

      for (std::size_t r = 0; r < spec.raters; ++r) {
        for (std::size_t d = 0; d < kAllDpis.size(); ++d) {
          Score score = Score::D;
          if (s[d] >= cuts[r][0]) score = Score::A;
          else if (s[d] >= cuts[r][1]) score = Score::B;
          else if (s[d] >= cuts[r][2]) score = Score::C;
          corpus.ratings.push_back({id, kAllDpis[d], "proxy" + std::to_string(r), score, timestamp(rating_clock++)});
        }
      }
    }

    // Text strip below the rasters; ignored by the raster pipeline.
    const int text_y = size + 2 * margin;
    std::vector<double> text(static_cast<std::size_t>(width - 2 * margin) * strip, 250.0);
    Rng glyphs(derive_seed(spec.seed, {4, page_no}));
    draw_strokes(text, width - 2 * margin, strip, 3 * static_cast<int>(per_page) + 4, 2.0, 20.0, glyphs);
    for (int y = 0; y < strip; ++y) {
      for (int x = 0; x < width - 2 * margin; ++x) {
        page.image.at(margin + x, text_y + y) = static_cast<std::uint8_t>(text[y * (width - 2 * margin) + x]);
      }
    }
    page.segmentation.regions.push_back(
        {"p" + std::string(name + 5) + "_text", RegionClass::Text, Rect{margin, text_y, width - 2 * margin, strip}});
    corpus.pages.push_back(std::move(page));
  }
  return corpus;
}

std::filesystem::path write_synth_corpus(const std::filesystem::path& dir, const SynthCorpus& corpus) {
  std::filesystem::create_directories(dir / "pages");
  CorpusManifest manifest;
  manifest.root = dir;
  for (const auto& page : corpus.pages) {
    const std::string image = "pages/" + page.name + ".png";
    const std::string seg = "pages/" + page.name + ".json";
    write_image(dir / image, page.image);
    save_segmentation(dir / seg, page.segmentation);
    manifest.pages.push_back({image, value(kBaseDpi), seg, "synthetic"});
  }
  save_manifest(dir / "manifest.json", manifest);
  save_ratings(dir / "ratings.jsonl", corpus.ratings);
  return dir / "manifest.json";
}

}  // namespace scanres
