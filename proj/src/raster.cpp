#include "scanres/raster.hpp"

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

namespace scanres {
namespace {

// Source-pixel coverage of each output cell along one axis, in units where a
// source pixel has width `target` and an output cell has width `base`. All
// weights are integers so the average is exact.
struct Span {
  int first = 0;
  int last = 0;  // inclusive
  std::vector<std::int64_t> weights;
};

std::vector<Span> coverage(int src_len, int out_len, int base, int target) {
  std::vector<Span> spans(out_len);
  const std::int64_t src_end = static_cast<std::int64_t>(src_len) * target;
  for (int o = 0; o < out_len; ++o) {
    const std::int64_t lo = static_cast<std::int64_t>(o) * base;
    const std::int64_t hi = (o == out_len - 1) ? src_end : std::min(src_end, lo + base);
    Span& span = spans[o];
    span.first = static_cast<int>(lo / target);
    span.last = static_cast<int>((hi - 1) / target);
    for (int s = span.first; s <= span.last; ++s) {
      const std::int64_t s_lo = static_cast<std::int64_t>(s) * target;
      const std::int64_t s_hi = s_lo + target;
      span.weights.push_back(std::min(hi, s_hi) - std::max(lo, s_lo));
    }
  }
  return spans;
}

}  // namespace

bool inside_polygon(const Polygon& poly, double px, double py) {
  bool inside = false;
  const std::size_t n = poly.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const double xi = poly[i].x, yi = poly[i].y;
    const double xj = poly[j].x, yj = poly[j].y;
    if ((yi > py) != (yj > py)) {
      const double x_cross = xj + (py - yj) * (xi - xj) / (yi - yj);
      if (px < x_cross) inside = !inside;
    }
  }
  return inside;
}

GrayImage crop_region(const GrayImage& page, const RegionSpec& region, CropOptions options) {
  if (options.strict && region.cls != RegionClass::RasterImage) {
    fail(ErrorCode::WrongRegionClass, "region '" + region.id + "' is " + std::string(to_string(region.cls)));
  }
  validate_region(region, page.width(), page.height());
  const Rect box = bounding_box(region);
  GrayImage out(box.w, box.h, page.dpi());
  const auto* poly = std::get_if<Polygon>(&region.shape);
  for (int y = 0; y < box.h; ++y) {
    for (int x = 0; x < box.w; ++x) {
      const int px = box.x + x, py = box.y + y;
      const bool keep = !poly || inside_polygon(*poly, px + 0.5, py + 0.5);
      out.at(x, y) = keep ? page.at(px, py) : 255;
    }
  }
  return out;
}

GrayImage downsample_box(const GrayImage& img, Dpi base, Dpi target) {
  if (value(target) > value(base)) fail(ErrorCode::UpsampleNotAllowed, "target dpi exceeds base dpi");
  if (img.dpi() != base) fail(ErrorCode::InvalidParameter, "image dpi does not match the declared base dpi");
  if (target == base) return img;

  const int b = value(base), t = value(target);
  const int out_w = std::max(1, static_cast<int>(static_cast<std::int64_t>(img.width()) * t / b));
  const int out_h = std::max(1, static_cast<int>(static_cast<std::int64_t>(img.height()) * t / b));
  const auto cols = coverage(img.width(), out_w, b, t);
  const auto rows = coverage(img.height(), out_h, b, t);

  GrayImage out(out_w, out_h, target);
  for (int oy = 0; oy < out_h; ++oy) {
    const Span& rs = rows[oy];
    for (int ox = 0; ox < out_w; ++ox) {
      const Span& cs = cols[ox];
      std::int64_t sum = 0, area = 0;
      for (int sy = rs.first; sy <= rs.last; ++sy) {
        const std::int64_t wy = rs.weights[sy - rs.first];
        for (int sx = cs.first; sx <= cs.last; ++sx) {
          const std::int64_t w = wy * cs.weights[sx - cs.first];
          sum += w * img.at(sx, sy);
          area += w;
        }
      }
      // round half up: floor(sum/area + 1/2)
      out.at(ox, oy) = static_cast<std::uint8_t>((2 * sum + area) / (2 * area));
    }
  }
  return out;
}

GrayImage upsample_nearest(const GrayImage& img, Dpi base, int out_width, int out_height) {
  if (out_width < 1 || out_height < 1) fail(ErrorCode::InvalidDimensions, "output dimensions must be positive");
  if (out_width < img.width() || out_height < img.height()) {
    fail(ErrorCode::InvalidDimensions, "nearest-neighbour upsampling cannot shrink an image");
  }
  GrayImage out(out_width, out_height, base);
  std::vector<int> src_x(out_width);
  for (int x = 0; x < out_width; ++x) {
    src_x[x] = static_cast<int>(static_cast<std::int64_t>(x) * img.width() / out_width);
  }
  for (int y = 0; y < out_height; ++y) {
    const int sy = static_cast<int>(static_cast<std::int64_t>(y) * img.height() / out_height);
    for (int x = 0; x < out_width; ++x) out.at(x, y) = img.at(src_x[x], sy);
  }
  return out;
}

EmulatedPair emulate_dpi(const GrayImage& region, Dpi target) {
  if (region.dpi() != kBaseDpi) fail(ErrorCode::InvalidParameter, "emulation expects a 300 dpi region");
  GrayImage low = downsample_box(region, kBaseDpi, target);
  GrayImage back = upsample_nearest(low, kBaseDpi, region.width(), region.height());
  return {std::move(low), std::move(back)};
}

}  // namespace scanres
