#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "scanres/image.hpp"

namespace scanres {

enum class RegionClass { RasterImage, Text, Other };

std::string_view to_string(RegionClass cls);
RegionClass parse_region_class(std::string_view text);

struct Rect {
  int x = 0, y = 0, w = 0, h = 0;
  bool operator==(const Rect&) const = default;
};

struct Point {
  int x = 0, y = 0;
  bool operator==(const Point&) const = default;
};

using Polygon = std::vector<Point>;

struct RegionSpec {
  std::string id;
  RegionClass cls = RegionClass::RasterImage;
  std::variant<Rect, Polygon> shape;

  bool operator==(const RegionSpec&) const = default;
};

// Pixel bounding box of the shape. For polygons, the box spans the vertex
// extremes inclusively.
Rect bounding_box(const RegionSpec& region);

// Throws InvalidParameter for empty rectangles or polygons with fewer than 3
// vertices, RegionOutOfBounds when the shape leaves a width x height page.
void validate_region(const RegionSpec& region, int page_width, int page_height);

// Page segmentation map: {page, dpi, regions: [{id, class, rect | polygon}]}.
struct Segmentation {
  std::string page;
  int dpi = value(kBaseDpi);
  std::vector<RegionSpec> regions;

  bool operator==(const Segmentation&) const = default;
};

nlohmann::json to_json(const RegionSpec& region);
RegionSpec region_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Segmentation& seg);
Segmentation segmentation_from_json(const nlohmann::json& j);

Segmentation load_segmentation(const std::filesystem::path& path);
void save_segmentation(const std::filesystem::path& path, const Segmentation& seg);

}  // namespace scanres
