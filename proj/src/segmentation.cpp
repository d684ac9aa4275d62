#include "vbx/segmentation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "vbx/error.hpp"

namespace vbx {

int gray_bin255(double v) {
    const int bin = static_cast<int>(std::floor(v * 255.0));
    return std::clamp(bin, 0, 255);
}

int otsu_threshold(const GrayImage& image) {
    std::array<std::int64_t, 256> hist{};
    for (const double v : image.pixels) hist[static_cast<std::size_t>(gray_bin255(v))]++;

    const auto n_total = static_cast<std::int64_t>(image.pixels.size());
    std::int64_t sum_total = 0;
    for (int b = 0; b < 256; ++b) sum_total += hist[static_cast<std::size_t>(b)] * b;

    // Between-class variance is proportional to D^2 / (n0 * n1) with
    // D = s0*n1 - s1*n0; candidates are compared by cross-multiplication in
    // 128-bit integers, which is exact.
    int best_t = -1;
    std::int64_t best_d = 0;
    std::int64_t best_w = 1;
    std::int64_t n0 = 0, s0 = 0;
    for (int t = 0; t < 255; ++t) {
        n0 += hist[static_cast<std::size_t>(t)];
        s0 += hist[static_cast<std::size_t>(t)] * t;
        const std::int64_t n1 = n_total - n0;
        if (n0 == 0 || n1 == 0) continue;
        const std::int64_t s1 = sum_total - s0;
        const std::int64_t d = s0 * n1 - s1 * n0;
        const unsigned __int128 lhs =
            static_cast<unsigned __int128>(static_cast<__int128>(d) * d) *
            static_cast<unsigned __int128>(best_w);
        const unsigned __int128 rhs =
            static_cast<unsigned __int128>(static_cast<__int128>(best_d) * best_d) *
            static_cast<unsigned __int128>(n0 * n1);
        if (best_t < 0 || lhs > rhs) {
            best_t = t;
            best_d = d;
            best_w = n0 * n1;
        }
    }
    if (best_t < 0) {
        // Constant image: every split leaves one class empty.
        for (int b = 0; b < 256; ++b) {
            if (hist[static_cast<std::size_t>(b)] > 0) return b;
        }
        return 0;
    }
    return best_t;
}

RegionMask binarize(const GrayImage& image, int threshold) {
    if (threshold < 0 || threshold > 255) throw RangeError("binarize: threshold must be in [0, 255]");
    RegionMask mask;
    mask.height = image.height;
    mask.width = image.width;
    mask.foreground.resize(image.pixels.size());
    for (std::size_t i = 0; i < image.pixels.size(); ++i) {
        mask.foreground[i] = gray_bin255(image.pixels[i]) > threshold ? 1 : 0;
    }
    return mask;
}

RegionMask largest_component(const RegionMask& mask) {
    RegionMask out = mask;
    out.largest_region_pixels.clear();
    out.region_found = false;

    const int h = mask.height, w = mask.width;
    std::vector<std::uint8_t> visited(mask.foreground.size(), 0);
    std::vector<std::pair<int, int>> best, current, stack;

    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            const std::size_t idx = static_cast<std::size_t>(r) * w + c;
            if (!mask.foreground[idx] || visited[idx]) continue;
            current.clear();
            stack.clear();
            stack.emplace_back(r, c);
            visited[idx] = 1;
            while (!stack.empty()) {
                const auto [pr, pc] = stack.back();
                stack.pop_back();
                current.emplace_back(pr, pc);
                for (int dr = -1; dr <= 1; ++dr) {
                    for (int dc = -1; dc <= 1; ++dc) {
                        if (dr == 0 && dc == 0) continue;
                        const int nr = pr + dr, nc = pc + dc;
                        if (nr < 0 || nr >= h || nc < 0 || nc >= w) continue;
                        const std::size_t nidx = static_cast<std::size_t>(nr) * w + nc;
                        if (mask.foreground[nidx] && !visited[nidx]) {
                            visited[nidx] = 1;
                            stack.emplace_back(nr, nc);
                        }
                    }
                }
            }
            // Scanning in raster order means the first component of a given
            // size is also the one whose first pixel comes earliest, so a
            // strictly-greater comparison implements the tie-break.
            if (current.size() > best.size()) best = current;
        }
    }

    std::sort(best.begin(), best.end());
    out.largest_region_pixels = std::move(best);
    out.region_found = !out.largest_region_pixels.empty();
    return out;
}

namespace {

using Point = std::pair<std::int64_t, std::int64_t>; // (x, y)

std::int64_t cross(const Point& o, const Point& a, const Point& b) {
    return (a.first - o.first) * (b.second - o.second) -
           (a.second - o.second) * (b.first - o.first);
}

// Monotone chain; returns a strictly convex CCW hull (collinear points
// dropped). Degenerate inputs yield 1 or 2 points.
std::vector<Point> convex_hull(std::vector<Point> pts) {
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    const std::size_t n = pts.size();
    if (n <= 2) return pts;
    std::vector<Point> hull(2 * n);
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    const std::size_t lower = k + 1;
    for (std::size_t i = n - 1; i-- > 0;) {
        while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    return hull;
}

} // namespace

std::int64_t convex_hull_raster_count(const std::vector<std::pair<int, int>>& points) {
    if (points.empty()) return 0;
    std::vector<Point> pts;
    pts.reserve(points.size());
    for (const auto& [r, c] : points) pts.emplace_back(c, r);
    const std::vector<Point> hull = convex_hull(std::move(pts));

    if (hull.size() == 1) return 1;
    if (hull.size() == 2) {
        const std::int64_t dx = std::llabs(hull[1].first - hull[0].first);
        const std::int64_t dy = std::llabs(hull[1].second - hull[0].second);
        return std::gcd(dx, dy) + 1; // lattice points on the segment
    }

    std::int64_t min_x = hull[0].first, max_x = hull[0].first;
    std::int64_t min_y = hull[0].second, max_y = hull[0].second;
    for (const Point& p : hull) {
        min_x = std::min(min_x, p.first);
        max_x = std::max(max_x, p.first);
        min_y = std::min(min_y, p.second);
        max_y = std::max(max_y, p.second);
    }

    std::int64_t count = 0;
    for (std::int64_t y = min_y; y <= max_y; ++y) {
        for (std::int64_t x = min_x; x <= max_x; ++x) {
            bool inside = true;
            for (std::size_t i = 0; i < hull.size(); ++i) {
                const Point& a = hull[i];
                const Point& b = hull[(i + 1) % hull.size()];
                if (cross(a, b, {x, y}) < 0) {
                    inside = false;
                    break;
                }
            }
            if (inside) ++count;
        }
    }
    return count;
}

RegionProps region_props(const RegionMask& mask) {
    if (!mask.region_found) throw Error("region_props: no region selected");
    const auto& pix = mask.largest_region_pixels;
    const auto n = static_cast<double>(pix.size());

    double mean_r = 0.0, mean_c = 0.0;
    for (const auto& [r, c] : pix) {
        mean_r += r;
        mean_c += c;
    }
    mean_r /= n;
    mean_c /= n;

    double var_r = 0.0, var_c = 0.0, cov = 0.0;
    for (const auto& [r, c] : pix) {
        const double dr = r - mean_r;
        const double dc = c - mean_c;
        var_r += dr * dr;
        var_c += dc * dc;
        cov += dr * dc;
    }
    // +1/12 per axis: second moment of a unit square about its center.
    var_r = var_r / n + 1.0 / 12.0;
    var_c = var_c / n + 1.0 / 12.0;
    cov /= n;

    const double half_trace = 0.5 * (var_r + var_c);
    const double disc = std::sqrt(0.25 * (var_r - var_c) * (var_r - var_c) + cov * cov);
    const double lambda1 = half_trace + disc;
    const double lambda2 = half_trace - disc;

    RegionProps props;
    props.area = static_cast<std::int64_t>(pix.size());
    props.eccentricity = lambda1 > 0.0 ? std::sqrt(std::max(0.0, 1.0 - lambda2 / lambda1)) : 0.0;
    const std::int64_t hull_count = convex_hull_raster_count(pix);
    props.solidity = static_cast<double>(props.area) / static_cast<double>(hull_count);
    return props;
}

} // namespace vbx
