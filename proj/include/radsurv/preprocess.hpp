#pragma once

#include <cmath>
#include <optional>
#include <string>

#include "radsurv/errors.hpp"
#include "radsurv/volume.hpp"

namespace radsurv {

/// Masked tumor pixels of one axial slice, scan order.
struct SliceROI {
    std::vector<double> pixels;
    MaskGrid mask2d;
    Modality modality = Modality::T1;
    std::string subject_id;
    std::size_t z_index = 0;
};

struct MeanStd {
    double mean = 0, std = 0;   // population std
};

inline MeanStd mean_std(const std::vector<double>& xs) {
    MeanStd r;
    if (xs.empty()) return r;
    double s = 0;
    for (double x : xs) s += x;
    r.mean = s / static_cast<double>(xs.size());
    double v = 0;
    for (double x : xs) v += (x - r.mean) * (x - r.mean);
    r.std = std::sqrt(v / static_cast<double>(xs.size()));
    return r;
}

/// Normalizes a slice to mean 0, population std 1.
/// Pass `stats` to normalize with externally computed statistics
/// (per-volume mode); default uses the slice's own.
inline Slice2D zscore_slice(const Slice2D& s,
                            std::optional<MeanStd> stats = std::nullopt) {
    MeanStd ms = stats ? *stats : mean_std(s.pixels);
    if (ms.std < 1e-12)
        throw DegenerateSlice("constant slice z=" + std::to_string(s.z_index));
    Slice2D out = s;
    for (auto& p : out.pixels) p = (p - ms.mean) / ms.std;
    return out;
}

inline MeanStd volume_stats(const Volume3D& v) { return mean_std(v.data); }

constexpr std::size_t kDefaultMinRoiPixels = 50;

/// Applies the mask slice to an intensity slice; tumor = any nonzero label.
/// Returns nullopt (skip) when fewer than min_pixels tumor pixels remain.
inline std::optional<SliceROI> extract_roi(const Slice2D& s, const MaskGrid& m,
                                           const std::string& subject,
                                           Modality mod,
                                           std::size_t min_pixels =
                                               kDefaultMinRoiPixels) {
    if (s.width != m.width || s.height != m.height)
        throw DimMismatch("slice and mask dims differ");
    SliceROI roi;
    roi.mask2d = m;
    roi.modality = mod;
    roi.subject_id = subject;
    roi.z_index = s.z_index;
    for (std::size_t i = 0; i < s.pixels.size(); ++i)
        if (m.cells[i]) roi.pixels.push_back(s.pixels[i]);
    if (roi.pixels.size() < min_pixels) return std::nullopt;
    return roi;
}

} // namespace radsurv
