#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <zlib.h>

#include "radsurv/errors.hpp"
#include "radsurv/volume.hpp"

namespace radsurv {

namespace detail {

inline bool ends_with(const std::string& s, const std::string& suf) {
    return s.size() >= suf.size() &&
           s.compare(s.size() - suf.size(), suf.size(), suf) == 0;
}

/// Reads the whole file through zlib; handles plain and gzip-wrapped files.
inline std::vector<std::uint8_t> read_all_bytes(const std::string& path) {
    gzFile f = gzopen(path.c_str(), "rb");
    if (!f) throw Error("cannot open file: " + path);
    std::vector<std::uint8_t> out;
    std::uint8_t buf[1 << 16];
    int n;
    while ((n = gzread(f, buf, sizeof(buf))) > 0)
        out.insert(out.end(), buf, buf + n);
    bool bad = n < 0;
    gzclose(f);
    if (bad) throw Error("read error (bad gzip stream?): " + path);
    return out;
}

template <typename T>
T read_le(const std::uint8_t* p) {
    T v;
    std::memcpy(&v, p, sizeof(T));
    return v;
}

enum class Dtype { U8, I16, I32, F32, F64 };

inline Dtype dtype_from_name(const std::string& s) {
    if (s == "uint8") return Dtype::U8;
    if (s == "int16") return Dtype::I16;
    if (s == "int32") return Dtype::I32;
    if (s == "float32") return Dtype::F32;
    if (s == "float64") return Dtype::F64;
    throw UnsupportedFormat("unsupported dtype '" + s + "'");
}

inline std::size_t dtype_size(Dtype d) {
    switch (d) {
        case Dtype::U8: return 1;
        case Dtype::I16: return 2;
        case Dtype::I32: return 4;
        case Dtype::F32: return 4;
        case Dtype::F64: return 8;
    }
    return 0;
}

inline std::vector<double> decode_payload(const std::uint8_t* p,
                                          std::size_t nbytes, Dtype d,
                                          std::size_t count,
                                          const std::string& path) {
    if (nbytes < count * dtype_size(d))
        throw DimMismatch("payload shorter than header dims imply: " + path);
    std::vector<double> out(count);
    switch (d) {
        case Dtype::U8:
            for (std::size_t i = 0; i < count; ++i) out[i] = p[i];
            break;
        case Dtype::I16:
            for (std::size_t i = 0; i < count; ++i)
                out[i] = read_le<std::int16_t>(p + 2 * i);
            break;
        case Dtype::I32:
            for (std::size_t i = 0; i < count; ++i)
                out[i] = read_le<std::int32_t>(p + 4 * i);
            break;
        case Dtype::F32:
            for (std::size_t i = 0; i < count; ++i)
                out[i] = read_le<float>(p + 4 * i);
            break;
        case Dtype::F64:
            for (std::size_t i = 0; i < count; ++i)
                out[i] = read_le<double>(p + 8 * i);
            break;
    }
    return out;
}

// --- raw sidecar format -------------------------------------------------
//
// A .rawvol file is a small text sidecar:
//
//   rawvol 1
//   dims 240 240 155
//   spacing 1 1 1
//   dtype float32
//   data subject_t1.rawdat
//
// The payload file (relative to the sidecar) holds the voxels in
// little-endian order, x fastest.

struct RawSidecar {
    std::array<std::size_t, 3> dims{};
    std::array<double, 3> spacing{1, 1, 1};
    Dtype dtype = Dtype::F32;
    std::string data_path;
};

inline RawSidecar parse_sidecar(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open file: " + path);
    RawSidecar sc;
    std::string line, magic;
    int version = 0;
    if (!(in >> magic >> version) || magic != "rawvol" || version != 1)
        throw CorruptHeader("bad rawvol magic in " + path);
    std::getline(in, line);
    bool have_dims = false, have_data = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key == "dims") {
            if (!(ls >> sc.dims[0] >> sc.dims[1] >> sc.dims[2]))
                throw CorruptHeader("bad dims line in " + path);
            have_dims = true;
        } else if (key == "spacing") {
            if (!(ls >> sc.spacing[0] >> sc.spacing[1] >> sc.spacing[2]))
                throw CorruptHeader("bad spacing line in " + path);
        } else if (key == "dtype") {
            std::string name;
            ls >> name;
            sc.dtype = dtype_from_name(name);
        } else if (key == "data") {
            ls >> sc.data_path;
            have_data = true;
        } else {
            throw CorruptHeader("unknown sidecar key '" + key + "' in " + path);
        }
    }
    if (!have_dims || !have_data)
        throw CorruptHeader("sidecar missing dims or data: " + path);
    for (auto d : sc.dims)
        if (d < 1) throw CorruptHeader("non-positive dim in " + path);
    for (auto s : sc.spacing)
        if (!(s > 0)) throw CorruptHeader("non-positive spacing in " + path);
    return sc;
}

inline Volume3D load_raw(const std::string& path, Modality mod) {
    RawSidecar sc = parse_sidecar(path);
    auto payload_path =
        (std::filesystem::path(path).parent_path() / sc.data_path).string();
    std::ifstream in(payload_path, std::ios::binary);
    if (!in) throw Error("cannot open payload: " + payload_path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    Volume3D v;
    v.dims = sc.dims;
    v.spacing = sc.spacing;
    v.modality = mod;
    v.data = decode_payload(bytes.data(), bytes.size(), sc.dtype,
                            v.voxel_count(), payload_path);
    return v;
}

// --- NIfTI-1 ------------------------------------------------------------

inline Volume3D load_nifti(const std::string& path, Modality mod) {
    auto bytes = read_all_bytes(path);
    if (bytes.size() < 352)
        throw CorruptHeader("file too small for a NIfTI-1 header: " + path);
    const std::uint8_t* h = bytes.data();
    const char* magic = reinterpret_cast<const char*>(h + 344);
    if (std::strncmp(magic, "n+1", 3) != 0 && std::strncmp(magic, "ni1", 3) != 0)
        throw CorruptHeader("bad NIfTI magic in " + path);
    std::int32_t sizeof_hdr = read_le<std::int32_t>(h + 0);
    if (sizeof_hdr != 348) {
        // 348 byte-swapped; we only read little-endian files
        if (sizeof_hdr == 0x5C010000)
            throw UnsupportedFormat("big-endian NIfTI not supported: " + path);
        throw CorruptHeader("sizeof_hdr != 348 in " + path);
    }
    std::int16_t ndim = read_le<std::int16_t>(h + 40);
    if (ndim < 1 || ndim > 7)
        throw CorruptHeader("bad dim[0] in " + path);
    Volume3D v;
    v.modality = mod;
    for (int i = 0; i < 3; ++i) {
        std::int16_t d = i < ndim ? read_le<std::int16_t>(h + 40 + 2 * (i + 1))
                                  : std::int16_t{1};
        if (d < 1) throw CorruptHeader("non-positive dim in " + path);
        v.dims[i] = static_cast<std::size_t>(d);
        float px = read_le<float>(h + 76 + 4 * (i + 1));
        v.spacing[i] = px > 0 ? px : 1.0;
    }
    std::int16_t datatype = read_le<std::int16_t>(h + 70);
    Dtype dt;
    switch (datatype) {
        case 2: dt = Dtype::U8; break;
        case 4: dt = Dtype::I16; break;
        case 8: dt = Dtype::I32; break;
        case 16: dt = Dtype::F32; break;
        case 64: dt = Dtype::F64; break;
        default:
            throw UnsupportedFormat("NIfTI datatype " + std::to_string(datatype) +
                                    " not supported: " + path);
    }
    float vox_offset = read_le<float>(h + 108);
    std::size_t off = vox_offset >= 352.f
                          ? static_cast<std::size_t>(vox_offset)
                          : 352;
    if (off > bytes.size())
        throw DimMismatch("vox_offset past end of file: " + path);
    v.data = decode_payload(h + off, bytes.size() - off, dt, v.voxel_count(),
                            path);
    float slope = read_le<float>(h + 112);
    float inter = read_le<float>(h + 116);
    if (slope != 0.f && (slope != 1.f || inter != 0.f))
        for (auto& x : v.data) x = slope * x + inter;
    return v;
}

} // namespace detail

inline Volume3D load_volume(const std::string& path, Modality mod) {
    using detail::ends_with;
    if (ends_with(path, ".rawvol")) return detail::load_raw(path, mod);
    if (ends_with(path, ".nii") || ends_with(path, ".nii.gz"))
        return detail::load_nifti(path, mod);
    throw UnsupportedFormat("unrecognized volume extension: " + path);
}

inline MaskVolume load_mask(const std::string& path) {
    Volume3D v = load_volume(path, Modality::T1);
    MaskVolume m;
    m.dims = v.dims;
    m.labels.resize(v.data.size());
    for (std::size_t i = 0; i < v.data.size(); ++i) {
        double x = v.data[i];
        if (x != std::floor(x)) throw InvalidLabel(x);
        int lab = static_cast<int>(x);
        if (lab != 0 && lab != 1 && lab != 2 && lab != 4)
            throw InvalidLabel(lab);
        m.labels[i] = lab;
    }
    return m;
}

/// Bundled raw writer (float64 payload); round-trips bit-exactly.
inline void write_raw_volume(const std::string& sidecar_path,
                             const Volume3D& v) {
    namespace fs = std::filesystem;
    fs::path sp(sidecar_path);
    std::string data_name = sp.stem().string() + ".rawdat";
    {
        std::ofstream out(sidecar_path);
        if (!out) throw Error("cannot write sidecar: " + sidecar_path);
        out << "rawvol 1\n";
        out << "dims " << v.dims[0] << ' ' << v.dims[1] << ' ' << v.dims[2] << '\n';
        out.precision(17);
        out << "spacing " << v.spacing[0] << ' ' << v.spacing[1] << ' '
            << v.spacing[2] << '\n';
        out << "dtype float64\n";
        out << "data " << data_name << '\n';
    }
    std::ofstream out((sp.parent_path() / data_name).string(),
                      std::ios::binary);
    if (!out) throw Error("cannot write payload for: " + sidecar_path);
    out.write(reinterpret_cast<const char*>(v.data.data()),
              static_cast<std::streamsize>(v.data.size() * sizeof(double)));
}

inline void write_raw_mask(const std::string& sidecar_path,
                           const MaskVolume& m) {
    Volume3D v;
    v.dims = m.dims;
    v.spacing = {1, 1, 1};
    v.data.assign(m.labels.begin(), m.labels.end());
    write_raw_volume(sidecar_path, v);
}

} // namespace radsurv
