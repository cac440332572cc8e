#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <random>

#include "radsurv/dataset.hpp"
#include "radsurv/pipeline.hpp"

using namespace radsurv;
namespace fs = std::filesystem;

namespace {

fs::path write_text(const std::string& name, const std::string& body) {
    auto dir = fs::temp_directory_path() / "radsurv_dataset_test";
    fs::create_directories(dir);
    auto p = dir / name;
    std::ofstream(p) << body;
    return p;
}

} // namespace

TEST_CASE("read_clinical_csv") {
    SECTION("typical BraTS header") {
        auto p = write_text("ok.csv",
                            "BraTS19ID,Age,Survival\n"
                            "X,60.5,400\n"
                            "Y,54.0,\n"
                            "Z,71.2,alive\n");
        auto recs = read_clinical_csv(p.string());
        REQUIRE(recs.size() == 3);
        CHECK(recs[0].subject_id == "X");
        CHECK(recs[0].age == 60.5);
        REQUIRE(recs[0].survival_days.has_value());
        CHECK(*recs[0].survival_days == 400);
        CHECK_FALSE(recs[1].survival_days.has_value());
        CHECK_FALSE(recs[2].survival_days.has_value());   // non-numeric
    }
    SECTION("missing Age column") {
        auto p = write_text("noage.csv", "ID,Survival\nX,400\n");
        CHECK_THROWS_AS(read_clinical_csv(p.string()), MissingColumn);
    }
    SECTION("malformed age") {
        auto p = write_text("badage.csv",
                            "ID,Age,Survival\nX,sixty,400\n");
        CHECK_THROWS_AS(read_clinical_csv(p.string()), MalformedRow);
    }
    SECTION("column named residual is not an ID column") {
        auto p = write_text("resid.csv",
                            "residual,Age,Survival\n1,60,400\n");
        CHECK_THROWS_AS(read_clinical_csv(p.string()), MissingColumn);
    }
}

TEST_CASE("bin_survival thresholds are half-open") {
    auto rec = [](std::optional<long> d) {
        ClinicalRecord r;
        r.subject_id = "S";
        r.survival_days = d;
        return r;
    };
    CHECK(bin_survival(rec(400)) == SurvivalClass::Short);
    CHECK(bin_survival(rec(599)) == SurvivalClass::Short);
    CHECK(bin_survival(rec(600)) == SurvivalClass::Mid);
    CHECK(bin_survival(rec(1299)) == SurvivalClass::Mid);
    CHECK(bin_survival(rec(1300)) == SurvivalClass::Long);
    CHECK(bin_survival(rec(1767)) == SurvivalClass::Long);
    CHECK(bin_survival(rec(std::nullopt)) == SurvivalClass::Short);

    SECTION("monotone in survival days") {
        SurvivalClass prev = SurvivalClass::Short;
        for (long d = 0; d < 2000; d += 37) {
            auto c = bin_survival(rec(d));
            CHECK(static_cast<int>(c) >= static_cast<int>(prev));
            prev = c;
        }
    }
}

TEST_CASE("assemble joins slices with clinical data") {
    std::vector<ClinicalRecord> clinical(2);
    clinical[0].subject_id = "A";
    clinical[0].age = 60;
    clinical[0].survival_days = 700;
    clinical[1].subject_id = "B";
    clinical[1].age = 45;
    clinical[1].survival_days = 100;

    ExtractConfig cfg;
    auto names = radiomic_feature_names(cfg);
    REQUIRE(names.size() == 90);

    auto slice = [&](std::string id, std::size_t z) {
        SliceFeatures s;
        s.subject_id = std::move(id);
        s.z_index = z;
        s.radiomics.assign(90, 0.5);
        return s;
    };
    std::vector<SliceFeatures> slices = {slice("B", 1), slice("A", 2),
                                         slice("A", 0), slice("B", 0),
                                         slice("A", 1), slice("B", 2)};

    auto d = assemble(slices, clinical, names);
    REQUIRE(d.rows.size() == 6);
    CHECK(d.n_features() == 91);
    CHECK(d.feature_names.back() == "clinical_age");
    // rows sorted by (subject, z)
    CHECK(d.rows[0].subject_id == "A");
    CHECK(d.rows[0].z_index == 0);
    CHECK(d.rows[3].subject_id == "B");
    CHECK(d.rows[0].label == SurvivalClass::Mid);
    CHECK(d.rows[3].label == SurvivalClass::Short);
    CHECK(d.rows[0].features.back() == 60.0);
    CHECK(d.rows[3].features.back() == 45.0);

    SECTION("unknown subject") {
        slices.push_back(slice("C", 0));
        CHECK_THROWS_AS(assemble(slices, clinical, names), UnknownSubject);
    }
    SECTION("input permutation does not change the result") {
        std::mt19937_64 rng(5);
        auto shuffled = slices;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        auto d2 = assemble(shuffled, clinical, names);
        REQUIRE(d2.rows.size() == d.rows.size());
        for (std::size_t i = 0; i < d.rows.size(); ++i) {
            CHECK(d2.rows[i].subject_id == d.rows[i].subject_id);
            CHECK(d2.rows[i].z_index == d.rows[i].z_index);
        }
    }
}

TEST_CASE("dataset CSV round trip") {
    Dataset d;
    d.feature_names = {"f0", "f1", "clinical_age"};
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-10, 10);
    for (int i = 0; i < 12; ++i) {
        DatasetRow r;
        r.subject_id = "S" + std::to_string(i / 3);
        r.z_index = static_cast<std::size_t>(i % 3);
        r.label = static_cast<SurvivalClass>(i % 3);
        r.features = {u(rng), u(rng), 40.0 + i};
        d.rows.push_back(std::move(r));
    }
    auto dir = fs::temp_directory_path() / "radsurv_dataset_test";
    fs::create_directories(dir);
    auto p = (dir / "round.csv").string();
    write_dataset_csv(p, d);
    auto r = read_dataset_csv(p);
    REQUIRE(r.rows.size() == d.rows.size());
    CHECK(r.feature_names == d.feature_names);
    for (std::size_t i = 0; i < d.rows.size(); ++i) {
        CHECK(r.rows[i].subject_id == d.rows[i].subject_id);
        CHECK(r.rows[i].z_index == d.rows[i].z_index);
        CHECK(r.rows[i].label == d.rows[i].label);
        for (std::size_t f = 0; f < 3; ++f)
            CHECK(r.rows[i].features[f] ==
                  Catch::Approx(d.rows[i].features[f]).epsilon(1e-15));
    }
}

TEST_CASE("feature name layout") {
    ExtractConfig cfg;
    auto names = radiomic_feature_names(cfg);
    REQUIRE(names.size() == 90);
    CHECK(names[0] == "fo_mean");
    CHECK(names[10] == "shape_area");
    CHECK(names[21] == "har_variance");
    CHECK(names[35] == "lbp_00");
    CHECK(names[89] == "lbp_54");
    CHECK(feature_group("fo_mean") == "firstorder");
    CHECK(feature_group("har_contrast") == "haralick");
    CHECK(feature_group("lbp_07") == "lbp");
    CHECK(feature_group("clinical_age") == "clinical");

    cfg.include_fourier = true;
    auto with_fd = radiomic_feature_names(cfg);
    CHECK(with_fd.size() == 100);
    CHECK(with_fd[90] == "fd_01");
    CHECK(feature_group("fd_01") == "shape");
}
