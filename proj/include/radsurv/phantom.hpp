#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "radsurv/classifiers/cart.hpp"   // detail::mix_seed
#include "radsurv/volume.hpp"
#include "radsurv/volume_io.hpp"

namespace radsurv {

/// Synthetic subject: an ellipsoidal "tumor" with concentric label shells
/// (1 core, 4 mid, 2 rim) on a noisy background. Four modalities share the
/// geometry but differ in contrast and texture grain.
struct PhantomSpec {
    std::string id;
    std::array<std::size_t, 3> dims{48, 48, 24};
    double rx = 10, ry = 8, rz = 7;
    double age = 55;
    std::optional<long> survival_days;
};

inline void write_phantom_subject(const std::filesystem::path& root,
                                  const PhantomSpec& spec,
                                  std::uint64_t seed) {
    namespace fs = std::filesystem;
    const fs::path dir = root / spec.id;
    fs::create_directories(dir);

    const double cx = static_cast<double>(spec.dims[0]) / 2.0;
    const double cy = static_cast<double>(spec.dims[1]) / 2.0;
    const double cz = static_cast<double>(spec.dims[2]) / 2.0;

    MaskVolume mask;
    mask.dims = spec.dims;
    mask.labels.assign(spec.dims[0] * spec.dims[1] * spec.dims[2], 0);
    std::vector<double> r2(mask.labels.size());
    std::size_t idx = 0;
    for (std::size_t z = 0; z < spec.dims[2]; ++z)
        for (std::size_t y = 0; y < spec.dims[1]; ++y)
            for (std::size_t x = 0; x < spec.dims[0]; ++x, ++idx) {
                const double dx = (static_cast<double>(x) - cx) / spec.rx;
                const double dy = (static_cast<double>(y) - cy) / spec.ry;
                const double dz = (static_cast<double>(z) - cz) / spec.rz;
                const double r = dx * dx + dy * dy + dz * dz;
                r2[idx] = r;
                if (r <= 0.25)
                    mask.labels[idx] = 1;
                else if (r <= 0.64)
                    mask.labels[idx] = 4;
                else if (r <= 1.0)
                    mask.labels[idx] = 2;
            }
    write_raw_mask((dir / (spec.id + "_seg.rawvol")).string(), mask);

    const Modality mods[4] = {Modality::T1, Modality::T1CE, Modality::T2,
                              Modality::FLAIR};
    for (int m = 0; m < 4; ++m) {
        std::mt19937_64 rng(detail::mix_seed(seed, static_cast<std::uint64_t>(m)));
        std::normal_distribution<double> noise(0.0, 1.0);
        Volume3D v;
        v.dims = spec.dims;
        v.spacing = {1, 1, 1};
        v.modality = mods[m];
        v.data.resize(mask.labels.size());
        const double tumor_gain = 2.0 + 0.7 * m;
        const double grain = 0.3 + 0.15 * m;
        for (std::size_t i = 0; i < v.data.size(); ++i) {
            double val = 10.0 + 0.02 * static_cast<double>(i % spec.dims[0]) +
                         0.5 * noise(rng);
            if (mask.labels[i] != 0)
                val += tumor_gain * (1.5 - r2[i]) + grain * noise(rng);
            v.data[i] = val;
        }
        write_raw_volume(
            (dir / (spec.id + "_" + modality_name(mods[m]) + ".rawvol"))
                .string(),
            v);
    }
}

/// Emits n subjects plus a clinical.csv under `root`. Survival days cycle
/// through short / missing / mid / long so all three classes appear.
inline std::vector<PhantomSpec> write_phantom_cohort(
    const std::filesystem::path& root, std::size_t n, std::uint64_t seed) {
    namespace fs = std::filesystem;
    fs::create_directories(root);
    std::vector<PhantomSpec> specs;
    for (std::size_t i = 0; i < n; ++i) {
        PhantomSpec s;
        char buf[32];
        std::snprintf(buf, sizeof(buf), "PHANTOM_%03zu", i);
        s.id = buf;
        s.rx = 9.0 + static_cast<double>(i % 3);
        s.ry = 8.0 + static_cast<double>((i + 1) % 3);
        s.rz = 7.0 + 0.5 * static_cast<double>(i % 2);
        s.age = 40.0 + 3.0 * static_cast<double>(i);
        switch (i % 4) {
            case 0: s.survival_days = 200; break;
            case 1: s.survival_days.reset(); break;   // missing -> short
            case 2: s.survival_days = 800; break;
            case 3: s.survival_days = 1500; break;
        }
        write_phantom_subject(root, s,
                              detail::mix_seed(seed, 1000 + i));
        specs.push_back(std::move(s));
    }
    std::ofstream csv(root / "clinical.csv");
    csv << "BraTS19ID,Age,Survival\n";
    for (const auto& s : specs) {
        csv << s.id << ',' << s.age << ',';
        if (s.survival_days) csv << *s.survival_days;
        csv << '\n';
    }
    return specs;
}

} // namespace radsurv
