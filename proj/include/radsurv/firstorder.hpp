#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "radsurv/errors.hpp"
#include "radsurv/preprocess.hpp"

namespace radsurv {

constexpr int kEntropyBins = 32;

struct FirstOrderFeatures {
    double mean = 0, median = 0, variance = 0, std_dev = 0;
    double skewness = 0, kurtosis = 0;   // Pearson, non-excess
    double entropy = 0, energy = 0;
    double minimum = 0, maximum = 0;

    std::array<double, 10> as_array() const {
        return {mean, median, variance, std_dev, skewness,
                kurtosis, entropy, energy, minimum, maximum};
    }
};

/// Ten first-order intensity statistics over the ROI pixels.
/// Population variance; entropy over a 32-bin histogram spanning [min, max];
/// skewness/kurtosis 0 by convention on (near-)constant input.
inline FirstOrderFeatures first_order(const std::vector<double>& pixels) {
    if (pixels.empty()) throw EmptyROI("first_order on empty ROI");
    const auto n = static_cast<double>(pixels.size());
    FirstOrderFeatures f;

    for (double x : pixels) {
        f.mean += x;
        f.energy += x * x;
    }
    f.mean /= n;

    std::vector<double> sorted(pixels);
    std::sort(sorted.begin(), sorted.end());
    f.minimum = sorted.front();
    f.maximum = sorted.back();
    const std::size_t half = sorted.size() / 2;
    f.median = sorted.size() % 2 ? sorted[half]
                                 : 0.5 * (sorted[half - 1] + sorted[half]);

    double m2 = 0, m3 = 0, m4 = 0;
    for (double x : pixels) {
        const double d = x - f.mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    m2 /= n; m3 /= n; m4 /= n;
    f.variance = m2;
    f.std_dev = std::sqrt(m2);
    if (f.std_dev >= 1e-12) {
        f.skewness = m3 / (f.std_dev * f.std_dev * f.std_dev);
        f.kurtosis = m4 / (m2 * m2);
    }

    std::array<double, kEntropyBins> hist{};
    const double range = f.maximum - f.minimum;
    if (range > 0) {
        for (double x : pixels) {
            int b = static_cast<int>(kEntropyBins * (x - f.minimum) / range);
            hist[std::min(b, kEntropyBins - 1)] += 1.0;
        }
        for (double h : hist)
            if (h > 0) {
                const double p = h / n;
                f.entropy -= p * std::log2(p);
            }
    }
    return f;
}

inline FirstOrderFeatures first_order(const SliceROI& roi) {
    return first_order(roi.pixels);
}

} // namespace radsurv
