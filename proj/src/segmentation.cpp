#include "scanres/segmentation.hpp"

#include <algorithm>
#include <limits>

#include "scanres/image_io.hpp"

namespace scanres {

using nlohmann::json;

std::string_view to_string(RegionClass cls) {
  switch (cls) {
    case RegionClass::RasterImage: return "raster_image";
    case RegionClass::Text: return "text";
    case RegionClass::Other: return "other";
  }
  return "other";
}

RegionClass parse_region_class(std::string_view text) {
  if (text == "raster_image") return RegionClass::RasterImage;
  if (text == "text") return RegionClass::Text;
  if (text == "other") return RegionClass::Other;
  fail(ErrorCode::ParseError, "unknown region class '" + std::string(text) + "'");
}

Rect bounding_box(const RegionSpec& region) {
  if (const auto* rect = std::get_if<Rect>(&region.shape)) return *rect;
  const auto& poly = std::get<Polygon>(region.shape);
  if (poly.empty()) fail(ErrorCode::InvalidParameter, "polygon without vertices");
  int x0 = std::numeric_limits<int>::max(), y0 = x0;
  int x1 = std::numeric_limits<int>::min(), y1 = x1;
  for (const auto& p : poly) {
    x0 = std::min(x0, p.x);
    y0 = std::min(y0, p.y);
    x1 = std::max(x1, p.x);
    y1 = std::max(y1, p.y);
  }
  return {x0, y0, x1 - x0 + 1, y1 - y0 + 1};
}

void validate_region(const RegionSpec& region, int page_width, int page_height) {
  if (const auto* rect = std::get_if<Rect>(&region.shape)) {
    if (rect->w < 1 || rect->h < 1) fail(ErrorCode::InvalidParameter, "region '" + region.id + "' has an empty rectangle");
  } else if (std::get<Polygon>(region.shape).size() < 3) {
    fail(ErrorCode::InvalidParameter, "region '" + region.id + "' polygon needs at least 3 vertices");
  }
  const Rect box = bounding_box(region);
  if (box.x < 0 || box.y < 0 || box.x + box.w > page_width || box.y + box.h > page_height) {
    fail(ErrorCode::RegionOutOfBounds, "region '" + region.id + "' exceeds the " + std::to_string(page_width) + "x" +
                                           std::to_string(page_height) + " page");
  }
}

json to_json(const RegionSpec& region) {
  json j = {{"id", region.id}, {"class", std::string(to_string(region.cls))}};
  if (const auto* rect = std::get_if<Rect>(&region.shape)) {
    j["rect"] = {rect->x, rect->y, rect->w, rect->h};
  } else {
    json pts = json::array();
    for (const auto& p : std::get<Polygon>(region.shape)) pts.push_back({p.x, p.y});
    j["polygon"] = std::move(pts);
  }
  return j;
}

RegionSpec region_from_json(const json& j) {
  try {
    RegionSpec region;
    region.id = j.at("id").get<std::string>();
    region.cls = parse_region_class(j.at("class").get<std::string>());
    if (j.contains("rect")) {
      const auto& r = j.at("rect");
      if (!r.is_array() || r.size() != 4) fail(ErrorCode::ParseError, "rect must be [x, y, w, h]");
      region.shape = Rect{r[0].get<int>(), r[1].get<int>(), r[2].get<int>(), r[3].get<int>()};
    } else if (j.contains("polygon")) {
      Polygon poly;
      for (const auto& p : j.at("polygon")) {
        if (!p.is_array() || p.size() != 2) fail(ErrorCode::ParseError, "polygon vertex must be [x, y]");
        poly.push_back({p[0].get<int>(), p[1].get<int>()});
      }
      region.shape = std::move(poly);
    } else {
      fail(ErrorCode::ParseError, "region '" + region.id + "' has neither rect nor polygon");
    }
    return region;
  } catch (const json::exception& e) {
    fail(ErrorCode::ParseError, std::string("malformed region: ") + e.what());
  }
}

json to_json(const Segmentation& seg) {
  json regions = json::array();
  for (const auto& r : seg.regions) regions.push_back(to_json(r));
  return {{"page", seg.page}, {"dpi", seg.dpi}, {"regions", std::move(regions)}};
}

Segmentation segmentation_from_json(const json& j) {
  try {
    Segmentation seg;
    seg.page = j.at("page").get<std::string>();
    seg.dpi = j.at("dpi").get<int>();
    for (const auto& r : j.at("regions")) seg.regions.push_back(region_from_json(r));
    return seg;
  } catch (const json::exception& e) {
    fail(ErrorCode::ParseError, std::string("malformed segmentation: ") + e.what());
  }
}

Segmentation load_segmentation(const std::filesystem::path& path) {
  try {
    return segmentation_from_json(json::parse(read_file(path)));
  } catch (const json::parse_error& e) {
    fail(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
}

void save_segmentation(const std::filesystem::path& path, const Segmentation& seg) {
  write_file(path, to_json(seg).dump(2) + "\n");
}

}  // namespace scanres
