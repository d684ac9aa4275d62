#include "vbx/image.hpp"

#include <algorithm>
#include <cmath>

#include "vbx/error.hpp"

namespace vbx {

std::vector<double> bilinear_resize(const std::vector<double>& src, int in_h, int in_w, int out_h,
                                    int out_w) {
    if (in_h < 1 || in_w < 1 || out_h < 1 || out_w < 1) {
        throw ShapeError("bilinear_resize: dimensions must be positive");
    }
    std::vector<double> dst(static_cast<std::size_t>(out_h) * out_w);
    const double scale_y = static_cast<double>(in_h) / out_h;
    const double scale_x = static_cast<double>(in_w) / out_w;
    for (int dy = 0; dy < out_h; ++dy) {
        const double sy = (dy + 0.5) * scale_y - 0.5;
        int y0 = static_cast<int>(std::floor(sy));
        const double fy = sy - y0;
        const int y0c = std::clamp(y0, 0, in_h - 1);
        const int y1c = std::clamp(y0 + 1, 0, in_h - 1);
        for (int dx = 0; dx < out_w; ++dx) {
            const double sx = (dx + 0.5) * scale_x - 0.5;
            int x0 = static_cast<int>(std::floor(sx));
            const double fx = sx - x0;
            const int x0c = std::clamp(x0, 0, in_w - 1);
            const int x1c = std::clamp(x0 + 1, 0, in_w - 1);
            const double top = src[static_cast<std::size_t>(y0c) * in_w + x0c] * (1.0 - fx) +
                               src[static_cast<std::size_t>(y0c) * in_w + x1c] * fx;
            const double bot = src[static_cast<std::size_t>(y1c) * in_w + x0c] * (1.0 - fx) +
                               src[static_cast<std::size_t>(y1c) * in_w + x1c] * fx;
            dst[static_cast<std::size_t>(dy) * out_w + dx] = top * (1.0 - fy) + bot * fy;
        }
    }
    return dst;
}

GrayImage resize(const GrayImage& image, int out_h, int out_w) {
    if (out_h < 1 || out_w < 1) throw ShapeError("resize: target dimensions must be >= 1");
    GrayImage out(out_h, out_w);
    out.pixels = bilinear_resize(image.pixels, image.height, image.width, out_h, out_w);
    for (double& v : out.pixels) v = std::clamp(v, 0.0, 1.0);
    return out;
}

NormalizedImage normalize(const GrayImage& image) {
    NormalizedImage out(image.height, image.width);
    for (std::size_t i = 0; i < image.pixels.size(); ++i) {
        out.pixels[i] = (image.pixels[i] - 0.5) / 0.5;
    }
    return out;
}

GrayImage denormalize_to_gray(const NormalizedImage& image) {
    GrayImage out(image.height, image.width);
    for (std::size_t i = 0; i < image.pixels.size(); ++i) {
        out.pixels[i] = std::clamp(image.pixels[i] * 0.5 + 0.5, 0.0, 1.0);
    }
    return out;
}

} // namespace vbx
