#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "radsurv/dataset.hpp"
#include "radsurv/errors.hpp"
#include "radsurv/firstorder.hpp"
#include "radsurv/preprocess.hpp"
#include "radsurv/shape.hpp"
#include "radsurv/texture.hpp"
#include "radsurv/volume.hpp"
#include "radsurv/volume_io.hpp"

namespace radsurv {

struct ExtractConfig {
    int quant_levels = kDefaultGrayLevels;
    std::vector<GlcmOffset> glcm_offsets = default_glcm_offsets();
    std::size_t lbp_bins = kDefaultLbpBins;
    std::size_t min_roi_pixels = kDefaultMinRoiPixels;
    bool per_volume_normalization = false;
    bool include_fourier = false;
    std::size_t fourier_k = 10;
};

/// Names of the radiomic block, in emission order:
/// 10 first-order + 11 shape + 14 Haralick + 55 LBP (+ optional Fourier).
inline std::vector<std::string> radiomic_feature_names(
    const ExtractConfig& cfg) {
    std::vector<std::string> n = {
        "fo_mean", "fo_median", "fo_variance", "fo_std_dev", "fo_skewness",
        "fo_kurtosis", "fo_entropy", "fo_energy", "fo_minimum", "fo_maximum",
        "shape_area", "shape_perimeter", "shape_convex_area",
        "shape_convex_perimeter", "shape_concavity", "shape_diameter",
        "shape_major_axis", "shape_minor_axis", "shape_circularity",
        "shape_elongation", "shape_sphericity",
        "har_variance", "har_std_dev_x", "har_std_dev_y", "har_homogeneity",
        "har_contrast", "har_correlation", "har_idm", "har_entropy",
        "har_sum_average", "har_difference_entropy", "har_sum_entropy",
        "har_inertia", "har_energy", "har_max_probability"};
    for (std::size_t b = 0; b < cfg.lbp_bins; ++b) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "lbp_%02zu", b);
        n.emplace_back(buf);
    }
    if (cfg.include_fourier)
        for (std::size_t k = 1; k <= cfg.fourier_k; ++k) {
            char buf[16];
            std::snprintf(buf, sizeof(buf), "fd_%02zu", k);
            n.emplace_back(buf);
        }
    return n;
}

inline std::string feature_group(const std::string& name) {
    if (name.rfind("fo_", 0) == 0) return "firstorder";
    if (name.rfind("shape_", 0) == 0 || name.rfind("fd_", 0) == 0)
        return "shape";
    if (name.rfind("har_", 0) == 0) return "haralick";
    if (name.rfind("lbp_", 0) == 0) return "lbp";
    return "clinical";
}

/// Computes the radiomic vector for one z-scored slice; nullopt means the
/// slice is skipped (tiny ROI, no texture pairs, no interior pixels).
inline std::optional<std::vector<double>> slice_feature_vector(
    const Slice2D& zslice, const MaskGrid& mask, const std::string& subject,
    Modality mod, const ExtractConfig& cfg) {
    auto roi = extract_roi(zslice, mask, subject, mod, cfg.min_roi_pixels);
    if (!roi) return std::nullopt;

    std::vector<double> out;
    out.reserve(90 + (cfg.include_fourier ? cfg.fourier_k : 0));

    const FirstOrderFeatures fo = first_order(*roi);
    for (double v : fo.as_array()) out.push_back(v);

    const MaskGrid comp = largest_component(roi->mask2d);
    const ShapeFeatures sf = shape_features(comp);
    for (double v : sf.as_array()) out.push_back(v);

    HaralickFeatures hf;
    try {
        const GLCM g = glcm(quantize(*roi, cfg.quant_levels), roi->mask2d,
                            cfg.glcm_offsets);
        hf = haralick(g);
    } catch (const NoValidPairs&) {
        return std::nullopt;
    }
    for (double v : hf.as_array()) out.push_back(v);

    LBPHistogram lbp;
    try {
        lbp = lbp_histogram(zslice, roi->mask2d, cfg.lbp_bins);
    } catch (const NoInteriorPixels&) {
        return std::nullopt;
    }
    out.insert(out.end(), lbp.bins.begin(), lbp.bins.end());

    if (cfg.include_fourier) {
        std::vector<double> fd(cfg.fourier_k, 0.0);
        try {
            const Contour c = trace_boundary(comp);
            fd = fourier_descriptor(c, cfg.fourier_k).magnitudes;
        } catch (const ContourTooShort&) {
            // blob too small for the requested harmonics; zeros stand in
        }
        out.insert(out.end(), fd.begin(), fd.end());
    }
    return out;
}

/// One subject's on-disk layout: a directory holding
/// <id>_<modality>.<ext> for t1, t1ce, t2, flair plus <id>_seg.<ext>,
/// where <ext> is rawvol, nii, or nii.gz.
inline std::string find_subject_file(const std::filesystem::path& dir,
                                     const std::string& id,
                                     const std::string& tag) {
    for (const char* ext : {".rawvol", ".nii", ".nii.gz"}) {
        auto p = dir / (id + "_" + tag + ext);
        if (std::filesystem::exists(p)) return p.string();
    }
    throw Error("subject " + id + ": missing " + tag + " volume in " +
                dir.string());
}

/// Extracts all usable slices of one subject from the chosen feature
/// modality. The mask must match the volume dims exactly.
inline std::vector<SliceFeatures> extract_subject(
    const std::filesystem::path& dir, const std::string& id,
    Modality feature_modality, const ExtractConfig& cfg) {
    const Volume3D vol = load_volume(
        find_subject_file(dir, id, modality_name(feature_modality)),
        feature_modality);
    const MaskVolume mask = load_mask(find_subject_file(dir, id, "seg"));
    if (mask.dims != vol.dims)
        throw DimMismatch("subject " + id + ": mask dims do not match volume");

    std::optional<MeanStd> vol_stats;
    if (cfg.per_volume_normalization) vol_stats = volume_stats(vol);

    std::vector<SliceFeatures> out;
    for (std::size_t z = 0; z < vol.nz(); ++z) {
        Slice2D s = axial_slice(vol, z);
        Slice2D zs;
        try {
            zs = zscore_slice(s, vol_stats);
        } catch (const DegenerateSlice&) {
            continue;
        }
        auto fv = slice_feature_vector(zs, mask_slice(mask, z), id,
                                       feature_modality, cfg);
        if (!fv) continue;
        out.push_back({id, z, std::move(*fv)});
    }
    return out;
}

/// Verifies the other modality files exist (the pipeline contract expects
/// all four even though features come from one).
inline void check_subject_files(const std::filesystem::path& dir,
                                const std::string& id,
                                const std::vector<Modality>& modalities) {
    for (Modality m : modalities) find_subject_file(dir, id, modality_name(m));
    find_subject_file(dir, id, "seg");
}

} // namespace radsurv
