#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "oracles.hpp"
#include "radsurv/shape.hpp"

using namespace radsurv;

namespace {

MaskGrid grid(std::size_t w, std::size_t h, std::vector<std::uint8_t> c) {
    MaskGrid m;
    m.width = w;
    m.height = h;
    m.cells = std::move(c);
    return m;
}

MaskGrid filled(std::size_t w, std::size_t h) {
    return grid(w, h, std::vector<std::uint8_t>(w * h, 1));
}

} // namespace

TEST_CASE("largest_component") {
    SECTION("single blob is identity") {
        auto m = grid(3, 3, {1, 1, 0, 1, 1, 0, 0, 0, 0});
        CHECK(largest_component(m).cells == m.cells);
    }
    SECTION("bigger blob wins") {
        // 2x3 blob (6 px) left, single pixel right
        auto m = grid(6, 3,
                      {1, 1, 0, 0, 0, 1,
                       1, 1, 0, 0, 0, 0,
                       1, 1, 0, 0, 0, 0});
        auto r = largest_component(m);
        CHECK(r.count() == 6);
        CHECK_FALSE(r.at(5, 0));
    }
    SECTION("equal sizes: first scan-order seed wins") {
        auto m = grid(5, 1, {1, 1, 0, 1, 1});
        auto r = largest_component(m);
        CHECK(r.at(0, 0));
        CHECK_FALSE(r.at(3, 0));
    }
    SECTION("empty mask throws") {
        CHECK_THROWS_AS(largest_component(grid(2, 2, {0, 0, 0, 0})), EmptyMask);
    }
}

TEST_CASE("trace_boundary") {
    SECTION("3x3 full square: 8 boundary pixels clockwise") {
        auto c = trace_boundary(filled(3, 3));
        REQUIRE(c.points.size() == 8);
        const std::vector<Point2> want = {{0, 0}, {1, 0}, {2, 0}, {2, 1},
                                          {2, 2}, {1, 2}, {0, 2}, {0, 1}};
        for (std::size_t i = 0; i < 8; ++i) {
            CHECK(c.points[i].x == want[i].x);
            CHECK(c.points[i].y == want[i].y);
        }
        CHECK_FALSE(c.single_pixel);
    }
    SECTION("1x1 blob is flagged single pixel") {
        auto c = trace_boundary(grid(3, 3, {0, 0, 0, 0, 1, 0, 0, 0, 0}));
        REQUIRE(c.points.size() == 1);
        CHECK(c.single_pixel);
    }
    SECTION("2x1 domino: 2-pixel contour") {
        auto c = trace_boundary(grid(2, 1, {1, 1}));
        REQUIRE(c.points.size() == 2);
        CHECK(c.points[0].x == 0);
        CHECK(c.points[1].x == 1);
    }
}

TEST_CASE("shape_features on a 10x10 full square") {
    auto f = shape_features(filled(10, 10));
    CHECK(f.area == 100.0);
    CHECK(f.perimeter == Catch::Approx(36.0));
    // hull over pixel centers spans 9x9
    CHECK(f.convex_area == Catch::Approx(81.0));
    CHECK(f.convex_perimeter == Catch::Approx(36.0));
    CHECK(f.concavity == 0.0);   // clamped
    CHECK(f.diameter == Catch::Approx(9.0 * std::numbers::sqrt2));
    CHECK(f.elongation == Catch::Approx(1.0));
}

TEST_CASE("digital disk r=20 is nearly circular") {
    auto m = oracle::rasterized_disk(20);
    auto f = shape_features(m);
    CHECK(f.circularity >= 0.9);
    CHECK(f.circularity <= 1.1);
    CHECK(f.elongation >= 1.0);
    CHECK(f.elongation <= 1.05);
    CHECK(f.sphericity > 0);
    CHECK(f.sphericity <= 1.1);
}

TEST_CASE("1x30 line takes the degenerate path") {
    auto f = shape_features(filled(30, 1));
    CHECK(f.minor_axis < 1e-9);
    CHECK(f.elongation == kElongationCap);
}

TEST_CASE("90-degree rotation invariance") {
    std::mt19937_64 rng(31);
    for (int rep = 0; rep < 25; ++rep) {
        auto m = oracle::random_blob(rng);
        auto a = shape_features(m);
        auto b = shape_features(oracle::rotate90(m));
        CHECK(a.area == b.area);
        CHECK(std::abs(a.perimeter - b.perimeter) < 1e-9);
        CHECK(std::abs(a.diameter - b.diameter) < 1e-9);
        CHECK(std::abs(a.circularity - b.circularity) < 1e-9);
        CHECK(std::abs(a.convex_area - b.convex_area) < 1e-9);
        CHECK(std::abs(a.major_axis - b.major_axis) < 1e-9);
    }
}

TEST_CASE("agreement with the pixel-enumeration oracle") {
    std::mt19937_64 rng(37);
    for (int rep = 0; rep < 40; ++rep) {
        auto m = oracle::random_blob(rng);
        auto f = shape_features(m);
        auto ref = oracle::brute_shape(m);
        CHECK(std::abs(f.area - ref.area) < 1e-6);
        CHECK(std::abs(f.convex_area - ref.convex_area) < 1e-6);
        CHECK(std::abs(f.diameter - ref.diameter) < 1e-6);
    }
}

TEST_CASE("convex hull contains the contour polygon") {
    std::mt19937_64 rng(41);
    for (int rep = 0; rep < 25; ++rep) {
        auto m = oracle::random_blob(rng);
        auto c = trace_boundary(m);
        auto f = shape_features(m);
        CHECK(f.convex_area + 1e-9 >= polygon_area(c.points));
        CHECK(f.concavity >= 0.0);
        CHECK(f.concavity <= 1.0);
    }
}

TEST_CASE("fourier descriptor invariances") {
    auto m = oracle::rasterized_disk(50);
    auto c = trace_boundary(m);
    REQUIRE(c.points.size() >= 21);
    auto base = fourier_descriptor(c, 10);
    REQUIRE(base.magnitudes.size() == 10);
    CHECK(base.magnitudes[0] == Catch::Approx(1.0));

    SECTION("translation: exactly invariant") {
        Contour t = c;
        for (auto& p : t.points) {
            p.x += 13.75;
            p.y -= 4.5;
        }
        auto fd = fourier_descriptor(t, 10);
        for (std::size_t k = 0; k < 10; ++k)
            CHECK(fd.magnitudes[k] == base.magnitudes[k]);
    }
    SECTION("scaling: invariant within 1e-9") {
        Contour t = c;
        for (auto& p : t.points) {
            p.x *= 3.0;
            p.y *= 3.0;
        }
        auto fd = fourier_descriptor(t, 10);
        for (std::size_t k = 0; k < 10; ++k)
            CHECK(std::abs(fd.magnitudes[k] - base.magnitudes[k]) < 1e-9);
    }
    SECTION("circle is nearly pure fundamental") {
        for (std::size_t k = 1; k < 10; ++k)
            CHECK(base.magnitudes[k] <= 0.05);
    }
    SECTION("short contour rejected") {
        Contour t;
        t.points = {{0, 0}, {1, 0}, {1, 1}};
        CHECK_THROWS_AS(fourier_descriptor(t, 10), ContourTooShort);
    }
}
