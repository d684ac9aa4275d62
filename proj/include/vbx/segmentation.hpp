#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "vbx/image.hpp"

namespace vbx {

struct RegionMask {
    int height = 0;
    int width = 0;
    std::vector<std::uint8_t> foreground; // 1 = above threshold
    // Pixels of the selected largest 8-connected component, raster order.
    std::vector<std::pair<int, int>> largest_region_pixels;
    bool region_found = false;
};

struct RegionProps {
    std::int64_t area = 0;
    double eccentricity = 0.0;
    double solidity = 0.0;
};

// 256-level quantization used by thresholding: floor(v * 255) clamped to 255.
int gray_bin255(double v);

// Smallest threshold t in [0, 255] maximizing the between-class variance of
// the split {bins <= t} vs {bins > t}. The comparison is done in exact
// integer arithmetic so ties are broken identically everywhere. A constant
// image returns its own bin value, which leaves the foreground empty under
// the strictly-greater binarization rule.
int otsu_threshold(const GrayImage& image);

// Foreground = pixels whose 256-level bin is strictly above the threshold.
RegionMask binarize(const GrayImage& image, int threshold);

// 8-connectivity labeling; selects the component with the most pixels, ties
// broken by the earliest first pixel in raster order.
RegionMask largest_component(const RegionMask& mask);

// Area, moment eccentricity (with the +1/12 per-axis unit-pixel inertia
// term), and solidity as area / rasterized-convex-hull pixel count.
// Requires mask.region_found.
RegionProps region_props(const RegionMask& mask);

// Number of integer lattice points inside or on the convex hull of `points`.
// Exposed for direct testing against brute-force membership oracles.
std::int64_t convex_hull_raster_count(const std::vector<std::pair<int, int>>& points);

} // namespace vbx
