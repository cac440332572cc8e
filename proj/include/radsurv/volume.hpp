#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "radsurv/errors.hpp"

namespace radsurv {

enum class Modality { T1, T1CE, T2, FLAIR };

inline const char* modality_name(Modality m) {
    switch (m) {
        case Modality::T1: return "t1";
        case Modality::T1CE: return "t1ce";
        case Modality::T2: return "t2";
        case Modality::FLAIR: return "flair";
    }
    return "?";
}

inline Modality modality_from_name(const std::string& s) {
    if (s == "t1") return Modality::T1;
    if (s == "t1ce") return Modality::T1CE;
    if (s == "t2") return Modality::T2;
    if (s == "flair") return Modality::FLAIR;
    throw Error("unknown modality '" + s + "'");
}

/// One MR modality as a voxel grid. Data is row-major: x fastest, then y,
/// then z. Immutable after construction.
struct Volume3D {
    std::array<std::size_t, 3> dims{};   // nx, ny, nz
    std::array<double, 3> spacing{};     // mm per voxel
    std::vector<double> data;
    Modality modality = Modality::T1;

    std::size_t nx() const { return dims[0]; }
    std::size_t ny() const { return dims[1]; }
    std::size_t nz() const { return dims[2]; }
    std::size_t voxel_count() const { return dims[0] * dims[1] * dims[2]; }

    double at(std::size_t x, std::size_t y, std::size_t z) const {
        return data[(z * dims[1] + y) * dims[0] + x];
    }
};

/// Ground-truth segmentation; labels follow the BraTS convention {0,1,2,4}.
struct MaskVolume {
    std::array<std::size_t, 3> dims{};
    std::vector<int> labels;

    std::size_t nx() const { return dims[0]; }
    std::size_t ny() const { return dims[1]; }
    std::size_t nz() const { return dims[2]; }

    int at(std::size_t x, std::size_t y, std::size_t z) const {
        return labels[(z * dims[1] + y) * dims[0] + x];
    }
};

struct Slice2D {
    std::size_t width = 0, height = 0;
    std::vector<double> pixels;   // row-major, length width*height
    std::size_t z_index = 0;
};

/// Binary grid marking tumor pixels on one slice.
struct MaskGrid {
    std::size_t width = 0, height = 0;
    std::vector<std::uint8_t> cells;   // 0/1, row-major

    bool at(std::size_t x, std::size_t y) const {
        return cells[y * width + x] != 0;
    }
    std::size_t count() const {
        std::size_t n = 0;
        for (auto c : cells) n += (c != 0);
        return n;
    }
};

inline Slice2D axial_slice(const Volume3D& vol, std::size_t z) {
    if (z >= vol.nz())
        throw IndexOutOfRange("slice index " + std::to_string(z) +
                              " out of range (nz=" + std::to_string(vol.nz()) + ")");
    Slice2D s;
    s.width = vol.nx();
    s.height = vol.ny();
    s.z_index = z;
    const std::size_t plane = s.width * s.height;
    s.pixels.assign(vol.data.begin() + z * plane,
                    vol.data.begin() + (z + 1) * plane);
    return s;
}

/// Binary slice of the mask: nonzero labels only.
inline MaskGrid mask_slice(const MaskVolume& m, std::size_t z) {
    if (z >= m.nz())
        throw IndexOutOfRange("mask slice index out of range");
    MaskGrid g;
    g.width = m.nx();
    g.height = m.ny();
    g.cells.resize(g.width * g.height);
    const std::size_t plane = g.width * g.height;
    for (std::size_t i = 0; i < plane; ++i)
        g.cells[i] = m.labels[z * plane + i] != 0 ? 1 : 0;
    return g;
}

} // namespace radsurv
