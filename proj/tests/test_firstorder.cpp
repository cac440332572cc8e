#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "oracles.hpp"
#include "radsurv/firstorder.hpp"

using namespace radsurv;

TEST_CASE("first_order on [1,2,3,4]") {
    auto f = first_order(std::vector<double>{1, 2, 3, 4});
    CHECK(f.mean == Catch::Approx(2.5));
    CHECK(f.median == Catch::Approx(2.5));
    CHECK(f.variance == Catch::Approx(1.25));
    CHECK(f.energy == Catch::Approx(30.0));
    CHECK(std::abs(f.skewness) < 1e-12);
    CHECK(f.minimum == 1.0);
    CHECK(f.maximum == 4.0);
}

TEST_CASE("constant ROI follows the degenerate convention") {
    auto f = first_order(std::vector<double>{7, 7, 7});
    CHECK(f.variance == 0.0);
    CHECK(f.skewness == 0.0);
    CHECK(f.kurtosis == 0.0);
    CHECK(f.entropy == 0.0);
}

TEST_CASE("empty ROI throws") {
    CHECK_THROWS_AS(first_order(std::vector<double>{}), EmptyROI);
}

TEST_CASE("uniform samples approach full 32-bin entropy") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0, 1);
    std::vector<double> xs(10000);
    for (auto& x : xs) x = u(rng);
    auto f = first_order(xs);
    CHECK(f.entropy == Catch::Approx(5.0).margin(0.1));   // log2(32)
    CHECK(f.entropy <= std::log2(32.0) + 1e-12);
}

TEST_CASE("shift invariance of central moments") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-10, 10);
    for (int rep = 0; rep < 30; ++rep) {
        std::vector<double> xs(200), ys(200);
        for (auto& x : xs) x = u(rng);
        const double shift = u(rng);
        for (std::size_t i = 0; i < xs.size(); ++i) ys[i] = xs[i] + shift;
        auto a = first_order(xs);
        auto b = first_order(ys);
        CHECK(std::abs(a.variance - b.variance) < 1e-9);
        CHECK(std::abs(a.std_dev - b.std_dev) < 1e-9);
        CHECK(std::abs(a.skewness - b.skewness) < 1e-8);
        CHECK(std::abs(a.kurtosis - b.kurtosis) < 1e-8);
        CHECK(b.mean == Catch::Approx(a.mean + shift));
    }
}

TEST_CASE("agreement with the naive two-pass oracle") {
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> u(-3, 3);
    std::uniform_int_distribution<std::size_t> len(1, 400);
    for (int rep = 0; rep < 200; ++rep) {
        std::vector<double> xs(len(rng));
        for (auto& x : xs) x = u(rng);
        auto got = first_order(xs).as_array();
        auto ref = oracle::naive_first_order(xs);
        const double want[10] = {ref.mean, ref.median, ref.variance,
                                 ref.std_dev, ref.skewness, ref.kurtosis,
                                 ref.entropy, ref.energy, ref.minimum,
                                 ref.maximum};
        for (int i = 0; i < 10; ++i)
            CHECK(std::abs(got[static_cast<std::size_t>(i)] - want[i]) < 1e-9);
    }
}
