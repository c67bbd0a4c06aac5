#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "scanres/features.hpp"
#include "scanres/metrics.hpp"
#include "scanres/raster.hpp"

using namespace scanres;

namespace {

GrayImage constant(int w, int h, std::uint8_t v) { return GrayImage(w, h, Dpi::k300, v); }

GrayImage offset(const GrayImage& img, int k) {
  GrayImage out = img;
  for (auto& p : out.pixels()) p = static_cast<std::uint8_t>(p + k);
  return out;
}

}  // namespace

TEST_CASE("tile sizes per dpi") {
  CHECK(tile_size(Dpi::k300) == 12);
  CHECK(tile_size(Dpi::k200) == 8);
  CHECK(tile_size(Dpi::k150) == 6);
  CHECK(tile_size(Dpi::k100) == 4);
}

TEST_CASE("tile_partition") {
  CHECK(tile_partition(24, 24, 12).size() == 4);
  const auto t = tile_partition(25, 25, 12);
  REQUIRE(t.size() == 4);
  CHECK(t[1] == Tile{12, 0, 12});
  CHECK(t[2] == Tile{0, 12, 12});
  try {
    tile_partition(30, 11, 12);
    FAIL("expected MapTooSmall");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MapTooSmall);
  }
}

TEST_CASE("tile_stats") {
  auto s = tile_stats({5, 5, 5});
  CHECK(s.mean == 5);
  CHECK(s.stddev == 0);
  s = tile_stats({0, 2});
  CHECK(s.mean == 1);
  CHECK(s.stddev == 1);
  CHECK_THROWS_AS(tile_stats({}), Error);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-50, 80);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> v(1 + rng() % 40);
    for (auto& x : v) x = u(rng);
    const auto o = oracle::two_pass(v);
    s = tile_stats(v);
    CHECK(s.mean == doctest::Approx(o.mean).epsilon(1e-12));
    CHECK(s.stddev == doctest::Approx(o.stddev).epsilon(1e-9));
  }
}

TEST_CASE("sobel_magnitude") {
  const Field zero = sobel_magnitude(constant(6, 5, 90));
  for (double v : zero.pixels()) CHECK(v == 0.0);

  GrayImage step = constant(8, 6, 0);
  for (int y = 0; y < 6; ++y)
    for (int x = 4; x < 8; ++x) step.at(x, y) = 255;
  const Field m = sobel_magnitude(step);
  for (int y = 1; y < 5; ++y) {
    CHECK(m.at(3, y) == 1020.0);
    CHECK(m.at(4, y) == 1020.0);
    CHECK(m.at(1, y) == 0.0);
  }

  GrayImage ramp(8, 8, Dpi::k300);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) ramp.at(x, y) = static_cast<std::uint8_t>(10 * x);
  const Field r = sobel_magnitude(ramp);
  for (int y = 1; y < 7; ++y)
    for (int x = 1; x < 7; ++x) CHECK(r.at(x, y) == 80.0);

  CHECK_THROWS_AS(sobel_magnitude(constant(2, 5, 0)), Error);

  std::mt19937_64 rng(2);
  const GrayImage img = oracle::random_image(rng, 9, 7);
  const Field s = sobel_magnitude(img);
  const auto o = oracle::sobel_magnitude(img);
  for (int y = 0; y < 7; ++y)
    for (int x = 0; x < 9; ++x) CHECK(s.at(x, y) == doctest::Approx(o[y][x]).epsilon(1e-12));
}

TEST_CASE("dsa") {
  std::mt19937_64 rng(3);
  const GrayImage a = oracle::random_image(rng, 8, 8);
  const GrayImage b = oracle::random_image(rng, 8, 8);
  CHECK(dsa(a, a) == 0.0);
  CHECK(dsa(a, b) == dsa(b, a));
  CHECK(dsa(a, b) == doctest::Approx(oracle::dsa(a, b)).epsilon(1e-12));
  CHECK_THROWS_AS(dsa(a, constant(8, 9, 0)), Error);
}

TEST_CASE("mse_tiles") {
  std::mt19937_64 rng(4);
  GrayImage a = oracle::random_image(rng, 24, 24);
  for (auto& p : a.pixels()) p = static_cast<std::uint8_t>(p % 200);
  auto s = mse_tiles(a, a, 12);
  CHECK(s.mean == 0);
  CHECK(s.stddev == 0);
  s = mse_tiles(a, offset(a, 10), 12);
  CHECK(s.mean == 100);
  CHECK(s.stddev == 0);

  const GrayImage b = oracle::random_image(rng, 24, 24);
  s = mse_tiles(a, b, 12);
  const auto o = oracle::mse_tiles(a, b, 12);
  CHECK(s.mean == doctest::Approx(o.mean).epsilon(1e-12));
  CHECK(s.stddev == doctest::Approx(o.stddev).epsilon(1e-9));
  CHECK(mse_tiles(b, a, 12).mean == s.mean);
  CHECK_THROWS_AS(mse_tiles(a, b, 25), Error);
}

TEST_CASE("psd_tiles") {
  std::mt19937_64 rng(5);
  const GrayImage a = oracle::random_image(rng, 24, 24);
  auto s = psd_tiles(a, a, 12);
  CHECK(s.mean == 0);
  CHECK(s.stddev == 0);

  // Zero reference against constant k: only the DC bin differs, by
  // (k * n^2)^2 / n^2 / n^2 averaged over n^2 bins, i.e. k^2.
  for (int k : {1, 7, 40}) {
    s = psd_tiles(constant(24, 24, 0), constant(24, 24, static_cast<std::uint8_t>(k)), 12);
    CHECK(s.mean == doctest::Approx(double(k) * k).epsilon(1e-12));
    CHECK(s.stddev == doctest::Approx(0.0));
  }
  // Nonzero constants c and c+k differ by (c+k)^2 - c^2 at DC.
  s = psd_tiles(constant(12, 12, 50), constant(12, 12, 53), 12);
  CHECK(s.mean == doctest::Approx(53.0 * 53 - 50.0 * 50).epsilon(1e-12));

  const GrayImage b = oracle::random_image(rng, 24, 24);
  s = psd_tiles(a, b, 12);
  const auto o = oracle::psd_tiles(a, b, 12);
  CHECK(oracle::close_rel(s.mean, o.mean, 1e-9));
  CHECK(oracle::close_rel(s.stddev, o.stddev, 1e-6));
  CHECK(psd_tiles(b, a, 12).mean == doctest::Approx(s.mean).epsilon(1e-12));
}

TEST_CASE("canny_edges") {
  const BinaryMap flat = canny_edges(constant(12, 12, 100));
  for (auto v : flat.pixels()) CHECK(v == 0);

  GrayImage step = constant(16, 12, 0);
  for (int y = 0; y < 12; ++y)
    for (int x = 8; x < 16; ++x) step.at(x, y) = 255;
  const BinaryMap e = canny_edges(step);
  // Exactly one edge column, running the full height.
  int column = -1;
  for (int x = 0; x < 16; ++x) {
    int count = 0;
    for (int y = 0; y < 12; ++y) count += e.at(x, y);
    if (count) {
      CHECK(column == -1);
      column = x;
      CHECK(count == 12);
    }
  }
  CHECK((column == 7 || column == 8));

  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 10; ++trial) {
    const GrayImage img = trial % 2 ? oracle::random_image(rng, 20, 17) : oracle::random_smooth(rng, 20, 17);
    const BinaryMap got = canny_edges(img);
    const auto want = oracle::canny(img);
    for (int y = 0; y < img.height(); ++y)
      for (int x = 0; x < img.width(); ++x) {
        CHECK(got.at(x, y) <= 1);
        CHECK(int(got.at(x, y)) == want[y][x]);
      }
  }
  CHECK_THROWS_AS(canny_edges(constant(4, 8, 0)), Error);
}

TEST_CASE("edge_density") {
  auto s = edge_density(constant(24, 24, 10), 12);
  CHECK(s.mean == 0);
  CHECK(s.stddev == 0);
  s = edge_density(BinaryMap(24, 24, 1), 12);
  CHECK(s.mean == 1);
  CHECK(s.stddev == 0);
  std::mt19937_64 rng(7);
  const GrayImage img = oracle::random_smooth(rng, 32, 28);
  s = edge_density(img, 8);
  const auto o = oracle::edge_density(img, 8);
  CHECK(s.mean == doctest::Approx(o.mean).epsilon(1e-12));
  CHECK(s.stddev == doctest::Approx(o.stddev).epsilon(1e-9));
  CHECK_THROWS_AS(edge_density(constant(10, 10, 0), 12), Error);
}

TEST_CASE("ssim") {
  std::mt19937_64 rng(8);
  const GrayImage a = oracle::random_image(rng, 20, 16);
  const GrayImage b = oracle::perturb(rng, a, 30);
  CHECK(ssim(a, a) == 1.0);
  CHECK(ssim(a, b) == ssim(b, a));
  CHECK(ssim(a, b) == doctest::Approx(oracle::ssim(a, b)).epsilon(1e-9));
  const double c1 = 6.5025;
  CHECK(std::abs(ssim(constant(16, 16, 0), constant(16, 16, 255)) - c1 / (255.0 * 255 + c1)) <= 1e-9);
  CHECK_THROWS_AS(ssim(constant(10, 20, 0), constant(10, 20, 0)), Error);
  CHECK_THROWS_AS(ssim(a, constant(20, 17, 0)), Error);
}

TEST_CASE("ssim decreases along a noise ladder") {
  std::mt19937_64 rng(9);
  const GrayImage img = oracle::random_smooth(rng, 48, 48);
  double prev = 1.0;
  for (int amp : {2, 6, 12, 24, 48}) {
    std::mt19937_64 noise(100);
    const double s = ssim(img, oracle::perturb(noise, img, amp));
    CHECK(s < prev);
    prev = s;
  }
}

TEST_CASE("tile_ssim") {
  std::mt19937_64 rng(10);
  const GrayImage a = oracle::random_image(rng, 24, 24);
  auto s = tile_ssim(a, a, 12);
  CHECK(s.mean == 1.0);
  CHECK(s.stddev == 0.0);
  const GrayImage b = oracle::perturb(rng, a, 40);
  s = tile_ssim(a, b, 12);
  const auto o = oracle::tile_ssim(a, b, 12);
  CHECK(s.mean == doctest::Approx(o.mean).epsilon(1e-9));
  CHECK(s.stddev == doctest::Approx(o.stddev).epsilon(1e-6));
  // Every tile is the same pair of constants: no spread.
  s = tile_ssim(constant(24, 24, 30), constant(24, 24, 90), 12);
  CHECK(s.stddev == 0.0);
  CHECK_THROWS_AS(tile_ssim(a, b, 3), Error);
}

TEST_CASE("extract_features") {
  std::mt19937_64 rng(11);
  const GrayImage img = oracle::random_smooth(rng, 48, 48);

  const FeatureVector base = extract_features(img, Dpi::k300);
  CHECK(base[Feature::Dsa] == 0);
  CHECK(base[Feature::MseMean] == 0);
  CHECK(base[Feature::MseStd] == 0);
  CHECK(base[Feature::PsdMean] == 0);
  CHECK(base[Feature::PsdStd] == 0);
  CHECK(base[Feature::TssimMean] == 1);
  CHECK(base[Feature::TssimStd] == 0);
  const auto ed = edge_density(img, 12);
  CHECK(base[Feature::EdMean] == ed.mean);
  CHECK(base[Feature::EdStd] == ed.stddev);

  const FeatureVector flat = extract_features(constant(48, 48, 77), Dpi::k100);
  CHECK(flat[Feature::Dsa] == 0);
  CHECK(flat[Feature::EdMean] == 0);
  CHECK(flat[Feature::TssimMean] == 1);

  const auto pair = emulate_dpi(img, Dpi::k100);
  const FeatureVector f = extract_features(img, pair, Dpi::k100);
  CHECK(f.all_finite());
  CHECK(f[Feature::Dsa] == doctest::Approx(oracle::dsa(img, pair.at_base)));
  const auto mse = oracle::mse_tiles(img, pair.at_base, 12);
  CHECK(f[Feature::MseMean] == doctest::Approx(mse.mean));
  CHECK(f[Feature::MseStd] == doctest::Approx(mse.stddev));
  const auto psd = oracle::psd_tiles(img, pair.at_base, 12);
  CHECK(f[Feature::PsdMean] == doctest::Approx(psd.mean));
  CHECK(f[Feature::PsdStd] == doctest::Approx(psd.stddev));
  const auto ts = oracle::tile_ssim(img, pair.at_base, 12);
  CHECK(f[Feature::TssimMean] == doctest::Approx(ts.mean));
  CHECK(f[Feature::TssimStd] == doctest::Approx(ts.stddev));
  const auto e = oracle::edge_density(pair.native_lowres, 4);
  CHECK(f[Feature::EdMean] == doctest::Approx(e.mean));
  CHECK(f[Feature::EdStd] == doctest::Approx(e.stddev));
}

TEST_CASE("feature names") {
  CHECK(feature_name(0) == "dsa");
  CHECK(feature_name(7) == "tssim_mean");
  CHECK(feature_index("mse_mean") == 8u);
  CHECK_FALSE(feature_index("nope").has_value());
}
