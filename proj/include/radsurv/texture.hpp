#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "radsurv/errors.hpp"
#include "radsurv/preprocess.hpp"
#include "radsurv/volume.hpp"

namespace radsurv {

constexpr int kDefaultGrayLevels = 32;
constexpr std::size_t kDefaultLbpBins = 55;

struct GlcmOffset {
    int dx, dy;
};

/// Distance-1 offsets for 0, 45, 90 and 135 degrees (y points down).
inline std::vector<GlcmOffset> default_glcm_offsets() {
    return {{1, 0}, {1, -1}, {0, -1}, {-1, -1}};
}

struct QuantizedROI {
    int levels = 0;
    std::vector<int> codes;   // per ROI pixel, scan order, in [0, levels)
};

/// Linear min-max binning over the ROI's own range; a constant ROI maps
/// every pixel to code 0. Affine maps x -> ax+b (a>0) leave codes unchanged.
inline QuantizedROI quantize(const std::vector<double>& pixels, int levels) {
    if (pixels.empty()) throw EmptyROI("quantize on empty ROI");
    QuantizedROI q;
    q.levels = levels;
    q.codes.resize(pixels.size());
    const auto [mn_it, mx_it] = std::minmax_element(pixels.begin(), pixels.end());
    const double mn = *mn_it, range = *mx_it - *mn_it;
    if (range <= 0) return q;   // all codes 0
    for (std::size_t i = 0; i < pixels.size(); ++i) {
        int c = static_cast<int>(levels * (pixels[i] - mn) / range);
        q.codes[i] = std::min(c, levels - 1);
    }
    return q;
}

inline QuantizedROI quantize(const SliceROI& roi, int levels) {
    return quantize(roi.pixels, levels);
}

struct GLCM {
    int levels = 0;
    std::vector<double> p;   // levels x levels, row-major, sums to 1
    std::vector<double> px, py;
    double mu_x = 0, mu_y = 0, sigma_x = 0, sigma_y = 0;

    double at(int i, int j) const { return p[static_cast<std::size_t>(i) * levels + j]; }
};

namespace detail {

inline void glcm_finalize(GLCM& g) {
    const int G = g.levels;
    g.px.assign(G, 0.0);
    g.py.assign(G, 0.0);
    for (int i = 0; i < G; ++i)
        for (int j = 0; j < G; ++j) {
            g.px[i] += g.at(i, j);
            g.py[j] += g.at(i, j);
        }
    for (int i = 0; i < G; ++i) {
        g.mu_x += i * g.px[i];
        g.mu_y += i * g.py[i];
    }
    double vx = 0, vy = 0;
    for (int i = 0; i < G; ++i) {
        vx += (i - g.mu_x) * (i - g.mu_x) * g.px[i];
        vy += (i - g.mu_y) * (i - g.mu_y) * g.py[i];
    }
    g.sigma_x = std::sqrt(vx);
    g.sigma_y = std::sqrt(vy);
}

} // namespace detail

/// Symmetric co-occurrence matrix pooled over all offsets and their
/// negations; only pairs with both pixels inside the mask count.
inline GLCM glcm(const QuantizedROI& q, const MaskGrid& mask,
                 const std::vector<GlcmOffset>& offsets) {
    if (offsets.empty()) throw Error("glcm needs at least one offset");
    const int G = q.levels;
    // scatter codes onto the grid (-1 = outside ROI)
    std::vector<int> grid(mask.cells.size(), -1);
    std::size_t k = 0;
    for (std::size_t i = 0; i < mask.cells.size(); ++i)
        if (mask.cells[i]) grid[i] = q.codes[k++];
    if (k != q.codes.size())
        throw DimMismatch("ROI pixel count does not match mask");

    const auto W = static_cast<std::ptrdiff_t>(mask.width);
    const auto H = static_cast<std::ptrdiff_t>(mask.height);
    GLCM g;
    g.levels = G;
    g.p.assign(static_cast<std::size_t>(G) * G, 0.0);
    double total = 0;
    for (const auto& off : offsets)
        for (std::ptrdiff_t y = 0; y < H; ++y)
            for (std::ptrdiff_t x = 0; x < W; ++x) {
                const int a = grid[static_cast<std::size_t>(y * W + x)];
                if (a < 0) continue;
                const std::ptrdiff_t nx = x + off.dx, ny = y + off.dy;
                if (nx < 0 || nx >= W || ny < 0 || ny >= H) continue;
                const int b = grid[static_cast<std::size_t>(ny * W + nx)];
                if (b < 0) continue;
                g.p[static_cast<std::size_t>(a) * G + b] += 1.0;
                g.p[static_cast<std::size_t>(b) * G + a] += 1.0;
                total += 2.0;
            }
    if (total == 0)
        throw NoValidPairs("no co-occurring pixel pairs inside the ROI");
    for (auto& v : g.p) v /= total;
    detail::glcm_finalize(g);
    return g;
}

struct HaralickFeatures {
    double variance = 0;
    double std_dev_x = 0, std_dev_y = 0;
    double homogeneity = 0;   // sum of squared probabilities, as tabulated
    double contrast = 0;
    double correlation = 0;
    double inverse_difference_moment = 0;
    double entropy = 0;
    double sum_average = 0;
    double difference_entropy = 0;
    double sum_entropy = 0;
    double inertia = 0;
    double energy = 0;        // same formula as homogeneity, kept as its own slot
    double max_probability = 0;

    std::array<double, 14> as_array() const {
        return {variance, std_dev_x, std_dev_y, homogeneity, contrast,
                correlation, inverse_difference_moment, entropy, sum_average,
                difference_entropy, sum_entropy, inertia, energy,
                max_probability};
    }
};

/// The 14 GLCM scalars. Logs are base 2 with 0*log0 = 0; correlation is 0
/// when sigma_x*sigma_y vanishes.
inline HaralickFeatures haralick(const GLCM& g) {
    const int G = g.levels;
    HaralickFeatures f;
    std::vector<double> p_sum(2 * G - 1, 0.0);    // P_{x+y}
    std::vector<double> p_diff(G, 0.0);           // P_{|x-y|}
    double cross = 0;
    for (int i = 0; i < G; ++i)
        for (int j = 0; j < G; ++j) {
            const double p = g.at(i, j);
            p_sum[i + j] += p;
            p_diff[std::abs(i - j)] += p;
            f.variance += (i - g.mu_x) * (i - g.mu_x) * p;
            f.homogeneity += p * p;
            f.inverse_difference_moment += p / (1.0 + (i - j) * (i - j));
            if (p > 0) f.entropy -= p * std::log2(p);
            cross += i * j * p;
            f.max_probability = std::max(f.max_probability, p);
        }
    f.std_dev_x = g.sigma_x;
    f.std_dev_y = g.sigma_y;
    f.energy = f.homogeneity;
    const double ss = g.sigma_x * g.sigma_y;
    f.correlation = ss < 1e-12 ? 0.0 : (cross - g.mu_x * g.mu_y) / ss;
    for (int n = 0; n < G; ++n) {
        f.contrast += static_cast<double>(n) * n * p_diff[n];
        if (p_diff[n] > 0) f.difference_entropy -= p_diff[n] * std::log2(p_diff[n]);
    }
    f.inertia = f.contrast;
    for (int s = 0; s <= 2 * G - 2; ++s) {
        f.sum_average += s * p_sum[s];
        if (p_sum[s] > 0) f.sum_entropy -= p_sum[s] * std::log2(p_sum[s]);
    }
    return f;
}

struct LBPHistogram {
    std::vector<double> bins;   // normalized to sum 1
};

/// 8-bit codes per ROI pixel whose full 8-neighborhood lies inside the
/// image: bit for the top-left neighbor is the MSB, neighbors taken
/// clockwise, bit set when neighbor >= center. The 256 code counts are
/// pooled into B equal-width bins.
inline LBPHistogram lbp_histogram(const Slice2D& s, const MaskGrid& mask,
                                  std::size_t B = kDefaultLbpBins) {
    if (s.width != mask.width || s.height != mask.height)
        throw DimMismatch("slice and mask dims differ in lbp_histogram");
    // top-left, then clockwise
    static constexpr int dxs[8] = {-1, 0, 1, 1, 1, 0, -1, -1};
    static constexpr int dys[8] = {-1, -1, -1, 0, 1, 1, 1, 0};
    std::array<double, 256> counts{};
    double total = 0;
    for (std::size_t y = 1; y + 1 < s.height; ++y)
        for (std::size_t x = 1; x + 1 < s.width; ++x) {
            if (!mask.at(x, y)) continue;
            const double center = s.pixels[y * s.width + x];
            unsigned code = 0;
            for (int k = 0; k < 8; ++k) {
                const double nb =
                    s.pixels[(y + dys[k]) * s.width + (x + dxs[k])];
                code |= static_cast<unsigned>(nb >= center) << (7 - k);
            }
            counts[code] += 1.0;
            total += 1.0;
        }
    if (total == 0)
        throw NoInteriorPixels("no ROI pixel has a full 8-neighborhood");
    LBPHistogram h;
    h.bins.assign(B, 0.0);
    for (std::size_t code = 0; code < 256; ++code)
        h.bins[code * B / 256] += counts[code];
    for (auto& b : h.bins) b /= total;
    return h;
}

} // namespace radsurv
