#pragma once

#include "scanres/image.hpp"
#include "scanres/segmentation.hpp"

namespace scanres {

struct CropOptions {
  // Reject regions whose class is not raster_image.
  bool strict = false;
};

// Even-odd rule test for the point (px, py) against a closed polygon.
bool inside_polygon(const Polygon& poly, double px, double py);

// Bounding-box crop of a region. Polygon regions are rasterized with the
// even-odd rule at pixel centers; pixels outside the polygon become white.
GrayImage crop_region(const GrayImage& page, const RegionSpec& region, CropOptions options = {});

// Exact area-average decimation from base to target resolution. Output pixel
// x covers source span [x*f, (x+1)*f) with f = base/target; the last output
// column/row also absorbs the remainder so every source pixel contributes.
GrayImage downsample_box(const GrayImage& img, Dpi base, Dpi target);

// Nearest-neighbour enlargement, source index = floor(dest * src_dim / out_dim).
GrayImage upsample_nearest(const GrayImage& img, Dpi base, int out_width, int out_height);

struct EmulatedPair {
  GrayImage native_lowres;  // decimated raster at the candidate dpi
  GrayImage at_base;        // the same content replicated back to base size
};

// Emulates scanning `region` (a 300 dpi raster) at `target`.
EmulatedPair emulate_dpi(const GrayImage& region, Dpi target);

}  // namespace scanres
