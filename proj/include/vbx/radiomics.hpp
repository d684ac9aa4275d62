#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "vbx/image.hpp"
#include "vbx/segmentation.hpp"

namespace vbx {

// Symmetric, normalized gray-level co-occurrence matrix for the (0, +1)
// horizontal offset.
struct GlcmMatrix {
    int levels = 256;
    std::vector<double> p; // levels x levels, row-major

    double at(int i, int j) const { return p[static_cast<std::size_t>(i) * levels + j]; }
    double& at(int i, int j) { return p[static_cast<std::size_t>(i) * levels + j]; }
};

struct GlcmFeatures {
    double contrast = 0.0;
    double homogeneity = 1.0;
    double entropy = 0.0; // bits
};

// The 8 handcrafted descriptors, in the fixed order used everywhere
// (feature CSV columns, forest feature indices, importance reports).
struct RadiomicsVector {
    double area = 0.0;
    double eccentricity = 0.0;
    double solidity = 0.0;
    double mean_intensity = 0.0;
    double std_intensity = 0.0;
    double glcm_contrast = 0.0;
    double glcm_homogeneity = 1.0;
    double glcm_entropy = 0.0;

    std::array<double, 8> as_array() const {
        return {area,          eccentricity,     solidity,     mean_intensity,
                std_intensity, glcm_contrast,    glcm_homogeneity, glcm_entropy};
    }
    static const std::array<std::string, 8>& feature_names();
};

// Quantizes to min(floor(v * levels), levels - 1), accumulates horizontal
// pair counts, symmetrizes with the transpose and normalizes to sum 1.
// Throws DegenerateInputError when width < 2 (no horizontal pairs exist).
GlcmMatrix glcm(const GrayImage& image, int levels = 256);

GlcmFeatures glcm_features(const GlcmMatrix& m);

// Mean and population standard deviation over the selected region, or over
// the whole image when no region was found.
std::pair<double, double> intensity_stats(const GrayImage& image, const RegionMask& mask);

// Full descriptor pipeline: denormalize, Otsu, largest component, shape
// props (zeros when no region), masked/global intensity stats, full-image
// GLCM texture (contrast 0 / homogeneity 1 / entropy 0 when width < 2).
// Always returns a finite vector.
RadiomicsVector extract_radiomics(const NormalizedImage& image, int glcm_levels = 256);

} // namespace vbx
