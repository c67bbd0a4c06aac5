#include "scanres/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace scanres {

std::optional<Dpi> dpi_from_int(int dpi) {
  for (Dpi level : kAllDpis) {
    if (value(level) == dpi) return level;
  }
  return std::nullopt;
}

Dpi parse_dpi(int dpi) {
  if (auto level = dpi_from_int(dpi)) return *level;
  fail(ErrorCode::InvalidParameter, "unsupported dpi " + std::to_string(dpi) + " (expected 100, 150, 200 or 300)");
}

bool same_dims(const GrayImage& a, const GrayImage& b) {
  return a.width() == b.width() && a.height() == b.height();
}

void require_same_dims(const GrayImage& a, const GrayImage& b) {
  if (!same_dims(a, b)) {
    fail(ErrorCode::DimMismatch, std::to_string(a.width()) + "x" + std::to_string(a.height()) + " vs " +
                                     std::to_string(b.width()) + "x" + std::to_string(b.height()));
  }
}

GrayImage to_grayscale(const RgbImage& rgb, Dpi dpi) {
  if (rgb.empty()) fail(ErrorCode::InvalidImage, "empty RGB image");
  GrayImage out(rgb.width(), rgb.height(), dpi);
  auto src = rgb.pixels();
  auto dst = out.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) {
    const double luma = 0.299 * src[i].r + 0.587 * src[i].g + 0.114 * src[i].b;
    dst[i] = static_cast<std::uint8_t>(std::clamp(std::lround(luma), 0L, 255L));
  }
  return out;
}

double mean_intensity(const GrayImage& img) {
  double sum = 0.0;
  for (auto p : img.pixels()) sum += p;
  return img.empty() ? 0.0 : sum / static_cast<double>(img.pixels().size());
}

}  // namespace scanres
