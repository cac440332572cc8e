#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "radsurv/errors.hpp"
#include "radsurv/volume.hpp"

namespace radsurv {

struct Point2 {
    double x = 0, y = 0;
    bool operator==(const Point2&) const = default;
};

struct Contour {
    std::vector<Point2> points;   // closed: first = last implied
    bool single_pixel = false;
};

struct ShapeFeatures {
    double area = 0;              // px^2
    double perimeter = 0;         // px
    double convex_area = 0;       // px^2, hull over boundary pixel centers
    double convex_perimeter = 0;  // px
    double concavity = 0;         // clamped to [0,1]
    double diameter = 0;          // max Feret, px
    double major_axis = 0, minor_axis = 0;
    double circularity = 0, elongation = 0, sphericity = 0;

    std::array<double, 11> as_array() const {
        return {area, perimeter, convex_area, convex_perimeter, concavity,
                diameter, major_axis, minor_axis, circularity, elongation,
                sphericity};
    }
};

struct FourierDescriptor {
    std::vector<double> magnitudes;   // K lowest frequencies, |F_k|/|F_1|
};

constexpr double kElongationCap = 1e6;

/// Largest 8-connected component; ties go to the component whose first
/// pixel comes first in scan order.
inline MaskGrid largest_component(const MaskGrid& m) {
    if (m.count() == 0) throw EmptyMask("largest_component on empty mask");
    const auto W = static_cast<std::ptrdiff_t>(m.width);
    const auto H = static_cast<std::ptrdiff_t>(m.height);
    std::vector<int> comp(m.cells.size(), -1);
    int n_comp = 0;
    std::vector<std::size_t> sizes;
    std::vector<std::size_t> stack;
    for (std::size_t seed = 0; seed < m.cells.size(); ++seed) {
        if (!m.cells[seed] || comp[seed] >= 0) continue;
        const int id = n_comp++;
        sizes.push_back(0);
        stack.assign(1, seed);
        comp[seed] = id;
        while (!stack.empty()) {
            const std::size_t p = stack.back();
            stack.pop_back();
            ++sizes[id];
            const auto px = static_cast<std::ptrdiff_t>(p % m.width);
            const auto py = static_cast<std::ptrdiff_t>(p / m.width);
            for (std::ptrdiff_t dy = -1; dy <= 1; ++dy)
                for (std::ptrdiff_t dx = -1; dx <= 1; ++dx) {
                    if (!dx && !dy) continue;
                    const auto nx = px + dx, ny = py + dy;
                    if (nx < 0 || nx >= W || ny < 0 || ny >= H) continue;
                    const auto q = static_cast<std::size_t>(ny * W + nx);
                    if (m.cells[q] && comp[q] < 0) {
                        comp[q] = id;
                        stack.push_back(q);
                    }
                }
        }
    }
    // first component with the maximal size wins (scan-order seeds)
    int best = 0;
    for (int i = 1; i < n_comp; ++i)
        if (sizes[i] > sizes[best]) best = i;
    MaskGrid out;
    out.width = m.width;
    out.height = m.height;
    out.cells.assign(m.cells.size(), 0);
    for (std::size_t i = 0; i < m.cells.size(); ++i)
        out.cells[i] = comp[i] == best ? 1 : 0;
    return out;
}

namespace detail {

// Moore neighborhood, clockwise with y pointing down: N NE E SE S SW W NW
constexpr std::array<std::array<int, 2>, 8> kRing = {{{0, -1},
                                                      {1, -1},
                                                      {1, 0},
                                                      {1, 1},
                                                      {0, 1},
                                                      {-1, 1},
                                                      {-1, 0},
                                                      {-1, -1}}};

struct Pix {
    std::ptrdiff_t x, y;
    bool operator==(const Pix&) const = default;
};

inline bool fg(const MaskGrid& m, std::ptrdiff_t x, std::ptrdiff_t y) {
    if (x < 0 || y < 0 || x >= static_cast<std::ptrdiff_t>(m.width) ||
        y >= static_cast<std::ptrdiff_t>(m.height))
        return false;
    return m.cells[static_cast<std::size_t>(y) * m.width +
                   static_cast<std::size_t>(x)] != 0;
}

inline int ring_index(Pix center, Pix p) {
    for (int i = 0; i < 8; ++i)
        if (center.x + kRing[i][0] == p.x && center.y + kRing[i][1] == p.y)
            return i;
    return -1;
}

} // namespace detail

/// Clockwise Moore-neighborhood boundary trace starting from the
/// topmost-leftmost foreground pixel. Coordinates are pixel centers.
inline Contour trace_boundary(const MaskGrid& m) {
    using detail::Pix;
    Pix start{-1, -1};
    for (std::size_t y = 0; y < m.height && start.x < 0; ++y)
        for (std::size_t x = 0; x < m.width; ++x)
            if (m.cells[y * m.width + x]) {
                start = {static_cast<std::ptrdiff_t>(x),
                         static_cast<std::ptrdiff_t>(y)};
                break;
            }
    if (start.x < 0) throw EmptyMask("trace_boundary on empty mask");

    Contour out;
    out.points.push_back({double(start.x), double(start.y)});

    Pix cur = start;
    Pix prev{start.x - 1, start.y};   // west of start is background
    const std::size_t cap = 8 * m.cells.size() + 16;
    for (std::size_t iter = 0; iter < cap; ++iter) {
        const int i = detail::ring_index(cur, prev);
        Pix next{-1, -1}, last_bg = prev;
        for (int j = 1; j <= 8; ++j) {
            const auto& d = detail::kRing[(i + j) % 8];
            Pix cand{cur.x + d[0], cur.y + d[1]};
            if (detail::fg(m, cand.x, cand.y)) {
                next = cand;
                break;
            }
            last_bg = cand;
        }
        if (next.x < 0) {   // isolated pixel
            out.single_pixel = true;
            return out;
        }
        if (cur == start && out.points.size() > 1 &&
            next.x == std::llround(out.points[1].x) &&
            next.y == std::llround(out.points[1].y))
            return out;   // about to repeat the first move: closed
        if (!(next == start))
            out.points.push_back({double(next.x), double(next.y)});
        prev = last_bg;
        cur = next;
    }
    return out;   // unreachable for well-formed masks
}

/// Andrew monotone chain; returns hull vertices in counterclockwise order
/// (no repeated endpoint). Collinear inputs yield a 2-point "hull".
inline std::vector<Point2> convex_hull(std::vector<Point2> pts) {
    std::sort(pts.begin(), pts.end(), [](const Point2& a, const Point2& b) {
        return a.x < b.x || (a.x == b.x && a.y < b.y);
    });
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    const std::size_t n = pts.size();
    if (n <= 2) return pts;
    auto cross = [](const Point2& o, const Point2& a, const Point2& b) {
        return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
    };
    std::vector<Point2> h(2 * n);
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
        while (k >= 2 && cross(h[k - 2], h[k - 1], pts[i]) <= 0) --k;
        h[k++] = pts[i];
    }
    for (std::size_t i = n - 1, t = k + 1; i-- > 0;) {
        while (k >= t && cross(h[k - 2], h[k - 1], pts[i]) <= 0) --k;
        h[k++] = pts[i];
    }
    h.resize(k - 1);
    return h;
}

inline double polygon_area(const std::vector<Point2>& poly) {
    if (poly.size() < 3) return 0;
    double s = 0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const auto& a = poly[i];
        const auto& b = poly[(i + 1) % poly.size()];
        s += a.x * b.y - b.x * a.y;
    }
    return std::abs(s) / 2.0;
}

inline double polygon_perimeter(const std::vector<Point2>& poly) {
    if (poly.size() < 2) return 0;
    double s = 0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const auto& a = poly[i];
        const auto& b = poly[(i + 1) % poly.size()];
        s += std::hypot(b.x - a.x, b.y - a.y);
    }
    // an open 2-point hull is a segment, not a loop
    if (poly.size() == 2) s /= 2.0;
    return s;
}

/// Contour length with unit steps for 4-neighbors and sqrt(2) for diagonals.
inline double contour_perimeter(const Contour& c) {
    if (c.points.size() < 2) return 0;
    double s = 0;
    for (std::size_t i = 0; i < c.points.size(); ++i) {
        const auto& a = c.points[i];
        const auto& b = c.points[(i + 1) % c.points.size()];
        const double dx = std::abs(b.x - a.x), dy = std::abs(b.y - a.y);
        s += (dx > 0 && dy > 0) ? std::numbers::sqrt2 : (dx + dy);
    }
    return s;
}

inline ShapeFeatures shape_features(const MaskGrid& mask) {
    ShapeFeatures f;
    const std::size_t n = mask.count();
    if (n == 0) throw EmptyMask("shape_features on empty mask");
    f.area = static_cast<double>(n);

    const Contour contour = trace_boundary(mask);
    f.perimeter = contour_perimeter(contour);

    const auto hull = convex_hull(contour.points);
    f.convex_area = polygon_area(hull);
    f.convex_perimeter = polygon_perimeter(hull);
    f.concavity = f.convex_area > 0
                      ? std::clamp((f.convex_area - f.area) / f.convex_area,
                                   0.0, 1.0)
                      : 0.0;

    // max Feret diameter over boundary pixel centers
    for (std::size_t i = 0; i < contour.points.size(); ++i)
        for (std::size_t j = i + 1; j < contour.points.size(); ++j)
            f.diameter = std::max(
                f.diameter, std::hypot(contour.points[i].x - contour.points[j].x,
                                       contour.points[i].y - contour.points[j].y));

    // ellipse axes from second central moments of all mask pixels
    double mx = 0, my = 0;
    for (std::size_t y = 0; y < mask.height; ++y)
        for (std::size_t x = 0; x < mask.width; ++x)
            if (mask.at(x, y)) {
                mx += static_cast<double>(x);
                my += static_cast<double>(y);
            }
    mx /= f.area;
    my /= f.area;
    double cxx = 0, cyy = 0, cxy = 0;
    for (std::size_t y = 0; y < mask.height; ++y)
        for (std::size_t x = 0; x < mask.width; ++x)
            if (mask.at(x, y)) {
                const double dx = static_cast<double>(x) - mx;
                const double dy = static_cast<double>(y) - my;
                cxx += dx * dx;
                cyy += dy * dy;
                cxy += dx * dy;
            }
    cxx /= f.area;
    cyy /= f.area;
    cxy /= f.area;
    const double tr = (cxx + cyy) / 2.0;
    const double det = std::sqrt(std::max(
        0.0, (cxx - cyy) * (cxx - cyy) / 4.0 + cxy * cxy));
    const double l1 = std::max(0.0, tr + det);
    const double l2 = std::max(0.0, tr - det);
    f.major_axis = 4.0 * std::sqrt(l1);
    f.minor_axis = 4.0 * std::sqrt(l2);
    f.elongation = f.minor_axis < 1e-9 ? kElongationCap
                                       : f.major_axis / f.minor_axis;
    if (f.perimeter > 1e-12) {
        f.circularity = 4.0 * std::numbers::pi * f.area /
                        (f.perimeter * f.perimeter);
        f.sphericity = 2.0 * std::sqrt(std::numbers::pi * f.area) / f.perimeter;
    }
    return f;
}

/// Translation/scale/rotation-normalized contour spectrum: boundary points
/// as x+iy, DFT, DC dropped, magnitudes divided by |F_1|; the K lowest
/// frequencies are kept.
inline FourierDescriptor fourier_descriptor(const Contour& c, std::size_t K) {
    const std::size_t n = c.points.size();
    if (n < 2 * K + 1)
        throw ContourTooShort("contour length " + std::to_string(n) +
                              " < 2K+1 = " + std::to_string(2 * K + 1));
    FourierDescriptor fd;
    fd.magnitudes.resize(K);
    std::vector<double> mags(K);
    // Anchoring on the first point leaves F_k (k >= 1) unchanged but makes
    // translation invariance hold bit for bit, not just analytically: the
    // dropped DC term would otherwise leak rounding noise into every bin.
    const double x0 = c.points[0].x, y0 = c.points[0].y;
    for (std::size_t k = 1; k <= K; ++k) {
        std::complex<double> acc{0, 0};
        for (std::size_t j = 0; j < n; ++j) {
            const double ang = -2.0 * std::numbers::pi *
                               static_cast<double>(j * k) /
                               static_cast<double>(n);
            acc += std::complex<double>(c.points[j].x - x0,
                                        c.points[j].y - y0) *
                   std::polar(1.0, ang);
        }
        mags[k - 1] = std::abs(acc);
    }
    if (mags[0] < 1e-12)
        throw ContourTooShort("degenerate contour: |F_1| ~ 0");
    for (std::size_t k = 0; k < K; ++k)
        fd.magnitudes[k] = mags[k] / mags[0];
    return fd;
}

} // namespace radsurv
