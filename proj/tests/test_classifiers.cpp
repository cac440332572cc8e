#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "radsurv/classifiers.hpp"
#include "synth.hpp"

using namespace radsurv;

namespace {

double train_accuracy(const TrainedModel& m, const Dataset& d) {
    std::size_t correct = 0;
    for (const auto& r : d.rows) correct += m.predict(r.features) == r.label;
    return static_cast<double>(correct) / static_cast<double>(d.rows.size());
}

ModelSpec spec_of(ModelSpec::Kind k) {
    ModelSpec s;
    s.kind = k;
    s.seed = 42;
    return s;
}

} // namespace

TEST_CASE("every model kind separates easy blobs") {
    auto d = synth::blob_dataset(120, 91, 4.0, 0.1, 7);
    for (auto k : {ModelSpec::Kind::KNN, ModelSpec::Kind::DA,
                   ModelSpec::Kind::DT, ModelSpec::Kind::SVM,
                   ModelSpec::Kind::RF}) {
        auto m = fit(spec_of(k), d);
        INFO("kind " << model_kind_name(k));
        // knn pays for the 86 standardized noise dimensions; the rest
        // should nail the training set
        CHECK(train_accuracy(m, d) >= (k == ModelSpec::Kind::KNN ? 0.9 : 0.99));
    }
}

TEST_CASE("fit rejects bad training data") {
    auto d = synth::blob_dataset(30, 10, 3.0, 0.5, 1);
    SECTION("single class") {
        for (auto& r : d.rows) r.label = SurvivalClass::Mid;
        CHECK_THROWS_AS(fit(spec_of(ModelSpec::Kind::RF), d), SingleClass);
    }
    SECTION("non-finite feature") {
        d.rows[4].features[2] = std::numeric_limits<double>::quiet_NaN();
        CHECK_THROWS_AS(fit(spec_of(ModelSpec::Kind::KNN), d),
                        NonFiniteFeature);
    }
    SECTION("empty") {
        Dataset e;
        e.feature_names = d.feature_names;
        CHECK_THROWS_AS(fit(spec_of(ModelSpec::Kind::DT), e), SingleClass);
    }
    SECTION("predict checks dimensionality") {
        auto m = fit(spec_of(ModelSpec::Kind::KNN), d);
        CHECK_THROWS_AS(m.predict(std::vector<double>(3, 0.0)),
                        DimensionMismatch);
    }
}

TEST_CASE("knn with k=1 memorizes distinct training points") {
    auto d = synth::blob_dataset(60, 12, 3.0, 0.8, 3);
    auto s = spec_of(ModelSpec::Kind::KNN);
    s.knn_k = 1;
    auto m = fit(s, d);
    CHECK(train_accuracy(m, d) == 1.0);
}

TEST_CASE("equidistant knn vote ties go to the lowest class") {
    // two training points, symmetric around the query
    LabeledMatrix lm;
    lm.n_features = 1;
    lm.x = {-1.0, 1.0, -2.0, 2.0};
    lm.y = {2, 1, 2, 1};
    auto s = spec_of(ModelSpec::Kind::KNN);
    s.knn_k = 2;
    auto m = fit(s, lm);
    CHECK(m.predict({0.0}) == SurvivalClass::Mid);   // class 1 beats class 2
}

TEST_CASE("decision tree respects the split budget") {
    auto d = synth::blob_dataset(150, 20, 2.0, 1.5, 11);
    auto s = spec_of(ModelSpec::Kind::DT);
    s.dt_max_splits = 5;
    auto m = fit(s, d);
    CHECK(m.tree->internal_count() <= 5);
    CHECK(m.tree->nodes.size() <= 2 * 5 + 1);
}

TEST_CASE("random forest is deterministic in its seed") {
    auto d = synth::blob_dataset(90, 30, 2.0, 1.0, 13);
    auto probe = synth::blob_dataset(30, 30, 2.0, 1.0, 99);
    auto a = fit(spec_of(ModelSpec::Kind::RF), d);
    auto b = fit(spec_of(ModelSpec::Kind::RF), d);
    for (const auto& r : probe.rows)
        CHECK(a.predict(r.features) == b.predict(r.features));

    auto s2 = spec_of(ModelSpec::Kind::RF);
    s2.seed = 777;
    auto c = fit(s2, d);
    CHECK(c.forest->trees.size() == 30);
}

TEST_CASE("scaling a feature by a positive constant changes nothing") {
    auto d = synth::blob_dataset(90, 15, 3.0, 0.5, 17);
    auto scaled = d;
    for (auto& r : scaled.rows)
        for (auto& f : r.features) f *= 250.0;
    auto probe = synth::blob_dataset(30, 15, 3.0, 0.5, 55);
    auto probe_scaled = probe;
    for (auto& r : probe_scaled.rows)
        for (auto& f : r.features) f *= 250.0;
    for (auto k : {ModelSpec::Kind::KNN, ModelSpec::Kind::DT,
                   ModelSpec::Kind::RF}) {
        auto a = fit(spec_of(k), d);
        auto b = fit(spec_of(k), scaled);
        INFO("kind " << model_kind_name(k));
        for (std::size_t i = 0; i < probe.rows.size(); ++i)
            CHECK(a.predict(probe.rows[i].features) ==
                  b.predict(probe_scaled.rows[i].features));
    }
}

TEST_CASE("oob importance") {
    auto d = synth::blob_dataset(240, 91, 3.0, 0.5, 21);
    // plant a constant feature
    const std::size_t kConst = 9;
    for (auto& r : d.rows) r.features[kConst] = 1.0;
    auto m = fit(spec_of(ModelSpec::Kind::RF), d);
    auto imp = rf_oob_importance(m, d);
    REQUIRE(imp.size() == 91);

    SECTION("constant feature scores exactly zero") {
        CHECK(imp[kConst] == 0.0);
    }
    SECTION("informative features outrank the noise") {
        double min_informative = std::numeric_limits<double>::infinity();
        for (std::size_t f : synth::kInformative)
            min_informative = std::min(min_informative, imp[f]);
        double max_noise = -std::numeric_limits<double>::infinity();
        for (std::size_t f = 0; f < imp.size(); ++f) {
            bool inf = false;
            for (std::size_t g : synth::kInformative) inf = inf || f == g;
            if (!inf && f != kConst) max_noise = std::max(max_noise, imp[f]);
        }
        CHECK(min_informative > max_noise);
    }
    SECTION("non-forest models are rejected") {
        auto knn = fit(spec_of(ModelSpec::Kind::KNN), d);
        CHECK_THROWS_AS(rf_oob_importance(knn, d), NotAForest);
    }
}

TEST_CASE("svm one-vs-rest stays symmetric under class relabeling") {
    // 2-class problem embedded in the 3-class API: swapping the labels of
    // classes 0 and 1 swaps the predictions.
    std::mt19937_64 rng(23);
    std::normal_distribution<double> noise(0, 0.3);
    LabeledMatrix lm;
    lm.n_features = 2;
    for (int i = 0; i < 60; ++i) {
        const int c = i % 2;
        lm.x.push_back((c ? 2.0 : -2.0) + noise(rng));
        lm.x.push_back((c ? -1.0 : 1.0) + noise(rng));
        lm.y.push_back(c);
    }
    auto a = fit(spec_of(ModelSpec::Kind::SVM), lm);
    LabeledMatrix swapped = lm;
    for (auto& y : swapped.y) y = 1 - y;
    auto b = fit(spec_of(ModelSpec::Kind::SVM), swapped);
    for (std::size_t i = 0; i < lm.n_rows(); ++i) {
        std::vector<double> q(lm.row(i), lm.row(i) + 2);
        const auto pa = a.predict(q), pb = b.predict(q);
        CHECK(static_cast<int>(pa) == 1 - static_cast<int>(pb));
    }
}

TEST_CASE("model JSON round trip preserves predictions") {
    auto d = synth::blob_dataset(90, 12, 2.5, 0.8, 29);
    auto probe = synth::blob_dataset(45, 12, 2.5, 0.8, 31);
    for (auto k : {ModelSpec::Kind::KNN, ModelSpec::Kind::DA,
                   ModelSpec::Kind::DT, ModelSpec::Kind::SVM,
                   ModelSpec::Kind::RF}) {
        auto m = fit(spec_of(k), d);
        auto j = model_to_json(m);
        auto r = model_from_json(j);
        INFO("kind " << model_kind_name(k));
        for (const auto& row : probe.rows)
            CHECK(m.predict(row.features) == r.predict(row.features));
    }
    SECTION("format guard") {
        nlohmann::json j;
        j["format"] = "something-else";
        CHECK_THROWS_AS(model_from_json(j), Error);
    }
}

TEST_CASE("lda handles collinear features via shrinkage") {
    auto d = synth::blob_dataset(90, 45, 3.0, 0.4, 37);
    for (auto& r : d.rows) r.features[9] = r.features[3];   // exact duplicate
    auto m = fit(spec_of(ModelSpec::Kind::DA), d);
    CHECK(train_accuracy(m, d) >= 0.95);
}
