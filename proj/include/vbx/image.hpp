#pragma once

#include <cstddef>
#include <vector>

namespace vbx {

// Single-channel raster, row-major, intensities in [0, 1].
struct GrayImage {
    int height = 0;
    int width = 0;
    std::vector<double> pixels;

    GrayImage() = default;
    GrayImage(int h, int w, double fill = 0.0)
        : height(h), width(w), pixels(static_cast<std::size_t>(h) * w, fill) {}

    double at(int r, int c) const { return pixels[static_cast<std::size_t>(r) * width + c]; }
    double& at(int r, int c) { return pixels[static_cast<std::size_t>(r) * width + c]; }
    std::size_t size() const { return pixels.size(); }
};

// Mean-0.5 / std-0.5 normalized raster. Values produced by normalize() lie in
// [-1, 1]; additive noise may push them outside that range.
struct NormalizedImage {
    int height = 0;
    int width = 0;
    std::vector<double> pixels;

    NormalizedImage() = default;
    NormalizedImage(int h, int w, double fill = 0.0)
        : height(h), width(w), pixels(static_cast<std::size_t>(h) * w, fill) {}

    double at(int r, int c) const { return pixels[static_cast<std::size_t>(r) * width + c]; }
    double& at(int r, int c) { return pixels[static_cast<std::size_t>(r) * width + c]; }
    std::size_t size() const { return pixels.size(); }
};

// Bilinear resample with half-pixel-center sampling, no range clamp.
// Shared by image resizing and heatmap upsampling.
std::vector<double> bilinear_resize(const std::vector<double>& src, int in_h, int in_w, int out_h,
                                    int out_w);

// Bilinear resize of a gray image; output clamped to [0, 1]. Resizing to the
// source dimensions is an exact identity.
GrayImage resize(const GrayImage& image, int out_h, int out_w);

// (v - 0.5) / 0.5 per pixel.
NormalizedImage normalize(const GrayImage& image);

// v * 0.5 + 0.5 per pixel, clamped to [0, 1]. The clamp only matters for
// values pushed outside [-1, 1] by noise injection.
GrayImage denormalize_to_gray(const NormalizedImage& image);

} // namespace vbx
