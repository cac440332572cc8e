#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "oracles.hpp"
#include "radsurv/texture.hpp"

using namespace radsurv;

namespace {

MaskGrid full_mask(std::size_t w, std::size_t h) {
    MaskGrid m;
    m.width = w;
    m.height = h;
    m.cells.assign(w * h, 1);
    return m;
}

Slice2D make_slice(std::size_t w, std::size_t h, std::vector<double> px) {
    Slice2D s;
    s.width = w;
    s.height = h;
    s.pixels = std::move(px);
    return s;
}

struct RandomRoi {
    Slice2D slice;
    MaskGrid mask;
    QuantizedROI quant;
};

RandomRoi random_roi(std::mt19937_64& rng, std::size_t size = 12, int G = 8) {
    std::uniform_real_distribution<double> u(-2, 2);
    std::bernoulli_distribution coin(0.7);
    RandomRoi r;
    r.slice = make_slice(size, size, std::vector<double>(size * size));
    for (auto& x : r.slice.pixels) x = u(rng);
    r.mask.width = r.mask.height = size;
    r.mask.cells.resize(size * size);
    bool any = false;
    for (auto& c : r.mask.cells) {
        c = coin(rng);
        any = any || c;
    }
    if (!any) r.mask.cells[0] = 1;
    std::vector<double> roi_pixels;
    for (std::size_t i = 0; i < r.mask.cells.size(); ++i)
        if (r.mask.cells[i]) roi_pixels.push_back(r.slice.pixels[i]);
    r.quant = quantize(roi_pixels, G);
    return r;
}

} // namespace

TEST_CASE("quantize") {
    SECTION("two pixels, two levels") {
        auto q = quantize(std::vector<double>{0.0, 1.0}, 2);
        CHECK(q.codes == std::vector<int>{0, 1});
    }
    SECTION("constant ROI maps to code 0") {
        auto q = quantize(std::vector<double>{3.5, 3.5, 3.5}, 32);
        CHECK(q.codes == std::vector<int>{0, 0, 0});
    }
    SECTION("max value lands in the top bin") {
        auto q = quantize(std::vector<double>{0.0, 0.5, 1.0}, 4);
        CHECK(q.codes == std::vector<int>{0, 2, 3});
    }
    SECTION("empty throws") {
        CHECK_THROWS_AS(quantize(std::vector<double>{}, 32), EmptyROI);
    }
    SECTION("positive affine maps leave codes unchanged") {
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> u(-4, 4);
        for (int rep = 0; rep < 30; ++rep) {
            std::vector<double> xs(80), ys(80);
            for (auto& x : xs) x = u(rng);
            const double a = 0.1 + std::abs(u(rng));
            const double b = u(rng);
            for (std::size_t i = 0; i < xs.size(); ++i) ys[i] = a * xs[i] + b;
            CHECK(quantize(xs, 16).codes == quantize(ys, 16).codes);
        }
    }
}

TEST_CASE("glcm on the 2x2 two-level example") {
    // pixels 0 1 / 0 1 quantized at G=2: columns of equal code.
    auto q = quantize(std::vector<double>{0, 1, 0, 1}, 2);
    auto g = glcm(q, full_mask(2, 2), default_glcm_offsets());
    double sum = 0;
    for (double v : g.p) sum += v;
    CHECK(sum == Catch::Approx(1.0));
    CHECK(g.at(0, 1) == g.at(1, 0));   // symmetric
}

TEST_CASE("glcm of a constant ROI concentrates at (0,0)") {
    auto q = quantize(std::vector<double>{5, 5, 5, 5}, 32);
    auto g = glcm(q, full_mask(2, 2), default_glcm_offsets());
    CHECK(g.at(0, 0) == Catch::Approx(1.0));
}

TEST_CASE("single ROI pixel has no valid pairs") {
    MaskGrid m = full_mask(3, 3);
    m.cells.assign(9, 0);
    m.cells[4] = 1;
    auto q = quantize(std::vector<double>{1.0}, 32);
    CHECK_THROWS_AS(glcm(q, m, default_glcm_offsets()), NoValidPairs);
}

TEST_CASE("glcm is always symmetric and sums to 1") {
    std::mt19937_64 rng(13);
    for (int rep = 0; rep < 50; ++rep) {
        auto r = random_roi(rng);
        GLCM g;
        try {
            g = glcm(r.quant, r.mask, default_glcm_offsets());
        } catch (const NoValidPairs&) {
            continue;
        }
        double sum = 0;
        for (int i = 0; i < g.levels; ++i)
            for (int j = 0; j < g.levels; ++j) {
                sum += g.at(i, j);
                CHECK(g.at(i, j) == g.at(j, i));
            }
        CHECK(sum == Catch::Approx(1.0));
    }
}

TEST_CASE("glcm matches brute-force pair enumeration") {
    std::mt19937_64 rng(19);
    const auto offsets = default_glcm_offsets();
    for (int rep = 0; rep < 30; ++rep) {
        auto r = random_roi(rng, 10, 6);
        std::vector<int> grid(r.mask.cells.size(), -1);
        std::size_t k = 0;
        for (std::size_t i = 0; i < r.mask.cells.size(); ++i)
            if (r.mask.cells[i]) grid[i] = r.quant.codes[k++];
        auto ref = oracle::brute_glcm_counts(grid, r.mask.width, r.mask.height,
                                             6, offsets);
        double ref_total = 0;
        for (double v : ref) ref_total += v;
        if (ref_total == 0) {
            CHECK_THROWS_AS(glcm(r.quant, r.mask, offsets), NoValidPairs);
            continue;
        }
        auto g = glcm(r.quant, r.mask, offsets);
        for (std::size_t i = 0; i < ref.size(); ++i)
            CHECK(std::abs(g.p[i] - ref[i] / ref_total) < 1e-12);
    }
}

TEST_CASE("haralick on P = diag(0.5, 0.5)") {
    GLCM g;
    g.levels = 2;
    g.p = {0.5, 0.0, 0.0, 0.5};
    detail::glcm_finalize(g);
    auto f = haralick(g);
    CHECK(f.entropy == Catch::Approx(1.0));
    CHECK(f.contrast == Catch::Approx(0.0));
    CHECK(f.homogeneity == Catch::Approx(0.5));
    CHECK(f.energy == Catch::Approx(0.5));
    CHECK(f.correlation == Catch::Approx(1.0));
    CHECK(f.inverse_difference_moment == Catch::Approx(1.0));
    CHECK(f.max_probability == Catch::Approx(0.5));
    CHECK(f.sum_average == Catch::Approx(1.0));
    CHECK(f.inertia == f.contrast);
}

TEST_CASE("haralick degenerate: all mass at one cell") {
    GLCM g;
    g.levels = 2;
    g.p = {1.0, 0.0, 0.0, 0.0};
    detail::glcm_finalize(g);
    auto f = haralick(g);
    CHECK(f.entropy == 0.0);
    CHECK(f.correlation == 0.0);   // sigma_x * sigma_y vanishes
    CHECK(f.homogeneity == Catch::Approx(1.0));
    CHECK(f.max_probability == 1.0);
}

TEST_CASE("haralick matches direct formula evaluation") {
    std::mt19937_64 rng(43);
    for (int rep = 0; rep < 40; ++rep) {
        auto r = random_roi(rng, 12, 8);
        GLCM g;
        try {
            g = glcm(r.quant, r.mask, default_glcm_offsets());
        } catch (const NoValidPairs&) {
            continue;
        }
        auto got = haralick(g).as_array();
        auto ref = oracle::brute_haralick(g.p, g.levels).as_array();
        for (std::size_t i = 0; i < 14; ++i)
            CHECK(std::abs(got[i] - ref[i]) < 1e-9);
    }
}

TEST_CASE("lbp histogram") {
    SECTION("constant slice: every neighbor >= center, code 255") {
        auto s = make_slice(4, 4, std::vector<double>(16, 2.0));
        auto h = lbp_histogram(s, full_mask(4, 4), 55);
        CHECK(h.bins[255 * 55 / 256] == Catch::Approx(1.0));
    }
    SECTION("only the top-left neighbor above center sets the MSB") {
        std::vector<double> px(9, 0.0);
        px[4] = 0.5;         // center at (1,1)
        px[0] = 1.0;         // top-left neighbor
        auto h = lbp_histogram(make_slice(3, 3, px), full_mask(3, 3), 256);
        CHECK(h.bins[128] == Catch::Approx(1.0));   // code 1000 0000
    }
    SECTION("no interior ROI pixels throws") {
        MaskGrid edge = full_mask(3, 3);
        edge.cells[4] = 0;   // only border pixels remain
        auto s = make_slice(3, 3, std::vector<double>(9, 1.0));
        CHECK_THROWS_AS(lbp_histogram(s, edge, 55), NoInteriorPixels);
    }
    SECTION("bins sum to 1 and adding a constant changes nothing") {
        std::mt19937_64 rng(47);
        std::uniform_real_distribution<double> u(-1, 1);
        for (int rep = 0; rep < 25; ++rep) {
            auto s = make_slice(9, 9, std::vector<double>(81));
            for (auto& x : s.pixels) x = u(rng);
            auto h = lbp_histogram(s, full_mask(9, 9), 55);
            REQUIRE(h.bins.size() == 55);
            double sum = 0;
            for (double b : h.bins) sum += b;
            CHECK(sum == Catch::Approx(1.0));
            Slice2D t = s;
            for (auto& x : t.pixels) x += 17.25;
            auto h2 = lbp_histogram(t, full_mask(9, 9), 55);
            CHECK(h.bins == h2.bins);
        }
    }
}
