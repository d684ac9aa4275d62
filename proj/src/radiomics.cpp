#include "vbx/radiomics.hpp"

#include <algorithm>
#include <cmath>

#include "vbx/error.hpp"

namespace vbx {

const std::array<std::string, 8>& RadiomicsVector::feature_names() {
    static const std::array<std::string, 8> names = {
        "area",          "eccentricity",  "solidity",         "mean_intensity",
        "std_intensity", "glcm_contrast", "glcm_homogeneity", "glcm_entropy"};
    return names;
}

GlcmMatrix glcm(const GrayImage& image, int levels) {
    if (levels < 2) throw RangeError("glcm: levels must be >= 2");
    if (image.width < 2) throw DegenerateInputError("glcm: image width < 2, no horizontal pairs");

    auto quantize = [levels](double v) {
        const int bin = static_cast<int>(std::floor(v * levels));
        return std::clamp(bin, 0, levels - 1);
    };

    std::vector<std::int64_t> counts(static_cast<std::size_t>(levels) * levels, 0);
    for (int r = 0; r < image.height; ++r) {
        for (int c = 0; c + 1 < image.width; ++c) {
            const int a = quantize(image.at(r, c));
            const int b = quantize(image.at(r, c + 1));
            counts[static_cast<std::size_t>(a) * levels + b]++;
        }
    }

    GlcmMatrix m;
    m.levels = levels;
    m.p.resize(counts.size());
    const std::int64_t pair_count = static_cast<std::int64_t>(image.height) * (image.width - 1);
    const double total = 2.0 * static_cast<double>(pair_count);
    for (int i = 0; i < levels; ++i) {
        for (int j = 0; j < levels; ++j) {
            const std::int64_t sym = counts[static_cast<std::size_t>(i) * levels + j] +
                                     counts[static_cast<std::size_t>(j) * levels + i];
            m.at(i, j) = static_cast<double>(sym) / total;
        }
    }
    return m;
}

GlcmFeatures glcm_features(const GlcmMatrix& m) {
    double contrast = 0.0, homogeneity = 0.0, neg_entropy = 0.0;
    for (int i = 0; i < m.levels; ++i) {
        for (int j = 0; j < m.levels; ++j) {
            const double p = m.at(i, j);
            if (p <= 0.0) continue;
            const double d = i - j;
            contrast += p * d * d;
            homogeneity += p / (1.0 + std::abs(d));
            neg_entropy += p * std::log2(p);
        }
    }
    GlcmFeatures f;
    f.contrast = contrast;
    f.homogeneity = homogeneity;
    f.entropy = -neg_entropy + 0.0; // +0.0 canonicalizes -0
    return f;
}

std::pair<double, double> intensity_stats(const GrayImage& image, const RegionMask& mask) {
    double sum = 0.0;
    std::size_t n = 0;
    if (mask.region_found) {
        n = mask.largest_region_pixels.size();
        for (const auto& [r, c] : mask.largest_region_pixels) sum += image.at(r, c);
    } else {
        n = image.pixels.size();
        for (const double v : image.pixels) sum += v;
    }
    if (n == 0) return {0.0, 0.0};
    const double mean = sum / static_cast<double>(n);

    double sq = 0.0;
    if (mask.region_found) {
        for (const auto& [r, c] : mask.largest_region_pixels) {
            const double d = image.at(r, c) - mean;
            sq += d * d;
        }
    } else {
        for (const double v : image.pixels) {
            const double d = v - mean;
            sq += d * d;
        }
    }
    return {mean, std::sqrt(sq / static_cast<double>(n))};
}

RadiomicsVector extract_radiomics(const NormalizedImage& image, int glcm_levels) {
    const GrayImage gray = denormalize_to_gray(image);
    const int threshold = otsu_threshold(gray);
    const RegionMask component = largest_component(binarize(gray, threshold));

    RadiomicsVector v;
    if (component.region_found) {
        const RegionProps props = region_props(component);
        v.area = static_cast<double>(props.area);
        v.eccentricity = props.eccentricity;
        v.solidity = props.solidity;
    } else {
        v.area = 0.0;
        v.eccentricity = 0.0;
        v.solidity = 0.0;
    }

    const auto [mean, stddev] = intensity_stats(gray, component);
    v.mean_intensity = mean;
    v.std_intensity = stddev;

    if (gray.width >= 2) {
        const GlcmFeatures f = glcm_features(glcm(gray, glcm_levels));
        v.glcm_contrast = f.contrast;
        v.glcm_homogeneity = f.homogeneity;
        v.glcm_entropy = f.entropy;
    } else {
        v.glcm_contrast = 0.0;
        v.glcm_homogeneity = 1.0;
        v.glcm_entropy = 0.0;
    }
    return v;
}

} // namespace vbx
