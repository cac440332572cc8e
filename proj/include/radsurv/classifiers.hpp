#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "radsurv/classifiers/cart.hpp"
#include "radsurv/dataset.hpp"
#include "radsurv/errors.hpp"

namespace radsurv {

struct ModelSpec {
    enum class Kind { KNN, DA, DT, SVM, RF };
    Kind kind = Kind::RF;

    int knn_k = 3;
    double da_shrinkage = 1e-3;
    int dt_max_splits = 10;
    double svm_c = 1.0;
    double svm_gamma = 0;        // 0 -> 1/F
    double svm_tol = 1e-3;
    int svm_max_passes = 10;
    int rf_trees = 30;
    int rf_features_per_node = 0;   // 0 -> ceil(sqrt(F))
    std::uint64_t seed = 42;
};

inline const char* model_kind_name(ModelSpec::Kind k) {
    switch (k) {
        case ModelSpec::Kind::KNN: return "knn";
        case ModelSpec::Kind::DA: return "da";
        case ModelSpec::Kind::DT: return "dt";
        case ModelSpec::Kind::SVM: return "svm";
        case ModelSpec::Kind::RF: return "rf";
    }
    return "?";
}

inline ModelSpec::Kind model_kind_from_name(const std::string& s) {
    if (s == "knn") return ModelSpec::Kind::KNN;
    if (s == "da" || s == "lda") return ModelSpec::Kind::DA;
    if (s == "dt") return ModelSpec::Kind::DT;
    if (s == "svm") return ModelSpec::Kind::SVM;
    if (s == "rf") return ModelSpec::Kind::RF;
    throw Error("unknown model kind '" + s + "'");
}

namespace detail {

/// Per-feature standardization captured at training time. Constant
/// features get unit scale so they pass through unchanged.
struct Standardizer {
    std::vector<double> mean, scale;

    void fit(const LabeledMatrix& m) {
        const std::size_t F = m.n_features, n = m.n_rows();
        mean.assign(F, 0.0);
        scale.assign(F, 1.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t f = 0; f < F; ++f) mean[f] += m.row(i)[f];
        for (auto& v : mean) v /= static_cast<double>(n);
        std::vector<double> var(F, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t f = 0; f < F; ++f) {
                const double d = m.row(i)[f] - mean[f];
                var[f] += d * d;
            }
        for (std::size_t f = 0; f < F; ++f) {
            const double s = std::sqrt(var[f] / static_cast<double>(n));
            scale[f] = s < 1e-12 ? 1.0 : s;
        }
    }

    void apply(const double* in, double* out) const {
        for (std::size_t f = 0; f < mean.size(); ++f)
            out[f] = (in[f] - mean[f]) / scale[f];
    }

    LabeledMatrix transform(const LabeledMatrix& m) const {
        LabeledMatrix out;
        out.n_features = m.n_features;
        out.y = m.y;
        out.x.resize(m.x.size());
        for (std::size_t i = 0; i < m.n_rows(); ++i)
            apply(m.row(i), out.x.data() + i * m.n_features);
        return out;
    }
};

/// Cholesky solve of a symmetric positive-definite system; jitters the
/// diagonal when the decomposition stalls.
inline std::vector<double> spd_solve(std::vector<double> a, std::size_t n,
                                     std::vector<double> b) {
    double tr = 0;
    for (std::size_t i = 0; i < n; ++i) tr += a[i * n + i];
    double jitter = 0;
    for (int attempt = 0; attempt < 6; ++attempt) {
        std::vector<double> l(a);
        if (jitter > 0)
            for (std::size_t i = 0; i < n; ++i) l[i * n + i] += jitter;
        bool ok = true;
        for (std::size_t i = 0; i < n && ok; ++i) {
            for (std::size_t j = 0; j <= i; ++j) {
                double s = l[i * n + j];
                for (std::size_t k = 0; k < j; ++k)
                    s -= l[i * n + k] * l[j * n + k];
                if (i == j) {
                    if (s <= 0) {
                        ok = false;
                        break;
                    }
                    l[i * n + i] = std::sqrt(s);
                } else {
                    l[i * n + j] = s / l[j * n + j];
                }
            }
        }
        if (!ok) {
            jitter = jitter == 0 ? 1e-10 * std::max(tr / n, 1.0) : jitter * 100;
            continue;
        }
        // forward then back substitution
        std::vector<double> z(n);
        for (std::size_t i = 0; i < n; ++i) {
            double s = b[i];
            for (std::size_t k = 0; k < i; ++k) s -= l[i * n + k] * z[k];
            z[i] = s / l[i * n + i];
        }
        std::vector<double> xv(n);
        for (std::size_t ii = n; ii-- > 0;) {
            double s = z[ii];
            for (std::size_t k = ii + 1; k < n; ++k) s -= l[k * n + ii] * xv[k];
            xv[ii] = s / l[ii * n + ii];
        }
        return xv;
    }
    throw Error("covariance matrix is not positive definite");
}

struct KnnModel {
    int k = 3;
    LabeledMatrix train;   // standardized

    int predict(const double* x) const {
        const std::size_t n = train.n_rows();
        std::vector<std::pair<double, std::size_t>> d(n);
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0;
            const double* r = train.row(i);
            for (std::size_t f = 0; f < train.n_features; ++f)
                s += (x[f] - r[f]) * (x[f] - r[f]);
            d[i] = {s, i};
        }
        const auto kk = std::min<std::size_t>(static_cast<std::size_t>(k), n);
        std::partial_sort(d.begin(), d.begin() + kk, d.end());
        std::array<int, kNumClasses> votes{};
        for (std::size_t i = 0; i < kk; ++i)
            ++votes[static_cast<std::size_t>(train.y[d[i].second])];
        int lab = 0;
        for (int c = 1; c < kNumClasses; ++c)
            if (votes[c] > votes[lab]) lab = c;
        return lab;
    }
};

/// Linear discriminant analysis with pooled covariance shrunk toward the
/// scaled identity.
struct LdaModel {
    std::vector<std::vector<double>> w;   // per class
    std::vector<double> b;

    static LdaModel fit(const LabeledMatrix& m, double shrinkage) {
        const std::size_t F = m.n_features, n = m.n_rows();
        LdaModel lda;
        std::array<std::size_t, kNumClasses> counts{};
        std::vector<std::vector<double>> mu(kNumClasses,
                                            std::vector<double>(F, 0.0));
        for (std::size_t i = 0; i < n; ++i) {
            const auto c = static_cast<std::size_t>(m.y[i]);
            ++counts[c];
            for (std::size_t f = 0; f < F; ++f) mu[c][f] += m.row(i)[f];
        }
        for (int c = 0; c < kNumClasses; ++c)
            if (counts[c])
                for (auto& v : mu[c]) v /= static_cast<double>(counts[c]);

        std::vector<double> cov(F * F, 0.0);
        std::vector<double> d(F);
        for (std::size_t i = 0; i < n; ++i) {
            const auto c = static_cast<std::size_t>(m.y[i]);
            for (std::size_t f = 0; f < F; ++f) d[f] = m.row(i)[f] - mu[c][f];
            for (std::size_t a = 0; a < F; ++a)
                for (std::size_t bb = a; bb < F; ++bb)
                    cov[a * F + bb] += d[a] * d[bb];
        }
        int present = 0;
        for (auto c : counts) present += c > 0;
        const double denom = std::max<std::size_t>(
            1, n - static_cast<std::size_t>(present));
        for (std::size_t a = 0; a < F; ++a)
            for (std::size_t bb = a; bb < F; ++bb) {
                cov[a * F + bb] /= static_cast<double>(denom);
                cov[bb * F + a] = cov[a * F + bb];
            }
        double tr = 0;
        for (std::size_t f = 0; f < F; ++f) tr += cov[f * F + f];
        const double iso = tr / static_cast<double>(F);
        for (std::size_t a = 0; a < F; ++a)
            for (std::size_t bb = 0; bb < F; ++bb) {
                cov[a * F + bb] *= (1.0 - shrinkage);
                if (a == bb) cov[a * F + bb] += shrinkage * std::max(iso, 1e-12);
            }

        lda.w.resize(kNumClasses);
        lda.b.resize(kNumClasses);
        for (int c = 0; c < kNumClasses; ++c) {
            if (!counts[c]) {
                lda.w[c].assign(F, 0.0);
                lda.b[c] = -std::numeric_limits<double>::infinity();
                continue;
            }
            lda.w[c] = spd_solve(cov, F, mu[c]);
            double quad = 0;
            for (std::size_t f = 0; f < F; ++f) quad += mu[c][f] * lda.w[c][f];
            lda.b[c] = -0.5 * quad +
                       std::log(static_cast<double>(counts[c]) /
                                static_cast<double>(n));
        }
        return lda;
    }

    int predict(const double* x) const {
        int lab = 0;
        double best = -std::numeric_limits<double>::infinity();
        for (int c = 0; c < kNumClasses; ++c) {
            double s = b[static_cast<std::size_t>(c)];
            const auto& wc = w[static_cast<std::size_t>(c)];
            for (std::size_t f = 0; f < wc.size(); ++f) s += wc[f] * x[f];
            if (s > best) {
                best = s;
                lab = c;
            }
        }
        return lab;
    }
};

/// One RBF binary machine trained with simplified sequential minimal
/// optimization.
struct SvmBinary {
    std::vector<std::vector<double>> sv;   // support vectors (standardized)
    std::vector<double> coef;              // alpha_i * y_i
    double b = 0;
    double gamma = 0;

    double decision(const double* x) const {
        double s = b;
        for (std::size_t i = 0; i < sv.size(); ++i) {
            double d2 = 0;
            for (std::size_t f = 0; f < sv[i].size(); ++f)
                d2 += (x[f] - sv[i][f]) * (x[f] - sv[i][f]);
            s += coef[i] * std::exp(-gamma * d2);
        }
        return s;
    }
};

inline SvmBinary smo_train(const LabeledMatrix& m, const std::vector<int>& y,
                           double C, double gamma, double tol, int max_passes,
                           std::uint64_t seed) {
    const std::size_t n = m.n_rows();
    std::vector<double> kmat(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) {
            double d2 = 0;
            const double *a = m.row(i), *bb = m.row(j);
            for (std::size_t f = 0; f < m.n_features; ++f)
                d2 += (a[f] - bb[f]) * (a[f] - bb[f]);
            kmat[i * n + j] = kmat[j * n + i] = std::exp(-gamma * d2);
        }

    std::vector<double> alpha(n, 0.0);
    double b = 0;
    auto fx = [&](std::size_t i) {
        double s = b;
        for (std::size_t t = 0; t < n; ++t)
            if (alpha[t] > 0) s += alpha[t] * y[t] * kmat[t * n + i];
        return s;
    };

    std::mt19937_64 rng(seed);
    int passes = 0, guard = 0;
    const int max_iters = 10000;
    while (passes < max_passes && guard++ < max_iters) {
        int changed = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double ei = fx(i) - y[i];
            if (!((y[i] * ei < -tol && alpha[i] < C) ||
                  (y[i] * ei > tol && alpha[i] > 0)))
                continue;
            std::uniform_int_distribution<std::size_t> pick(0, n - 2);
            std::size_t j = pick(rng);
            if (j >= i) ++j;
            const double ej = fx(j) - y[j];
            const double ai_old = alpha[i], aj_old = alpha[j];
            double lo, hi;
            if (y[i] != y[j]) {
                lo = std::max(0.0, aj_old - ai_old);
                hi = std::min(C, C + aj_old - ai_old);
            } else {
                lo = std::max(0.0, ai_old + aj_old - C);
                hi = std::min(C, ai_old + aj_old);
            }
            if (lo >= hi) continue;
            const double eta =
                2 * kmat[i * n + j] - kmat[i * n + i] - kmat[j * n + j];
            if (eta >= 0) continue;
            double aj = aj_old - y[j] * (ei - ej) / eta;
            aj = std::clamp(aj, lo, hi);
            if (std::abs(aj - aj_old) < 1e-5) continue;
            const double ai = ai_old + y[i] * y[j] * (aj_old - aj);
            alpha[i] = ai;
            alpha[j] = aj;
            const double b1 = b - ei - y[i] * (ai - ai_old) * kmat[i * n + i] -
                              y[j] * (aj - aj_old) * kmat[i * n + j];
            const double b2 = b - ej - y[i] * (ai - ai_old) * kmat[i * n + j] -
                              y[j] * (aj - aj_old) * kmat[j * n + j];
            if (ai > 0 && ai < C)
                b = b1;
            else if (aj > 0 && aj < C)
                b = b2;
            else
                b = (b1 + b2) / 2;
            ++changed;
        }
        passes = changed == 0 ? passes + 1 : 0;
    }

    SvmBinary out;
    out.b = b;
    out.gamma = gamma;
    for (std::size_t i = 0; i < n; ++i)
        if (alpha[i] > 1e-12) {
            out.sv.emplace_back(m.row(i), m.row(i) + m.n_features);
            out.coef.push_back(alpha[i] * y[i]);
        }
    return out;
}

struct SvmModel {
    std::vector<SvmBinary> machines;   // one per class (one-vs-rest)

    int predict(const double* x) const {
        int lab = 0;
        double best = -std::numeric_limits<double>::infinity();
        for (int c = 0; c < static_cast<int>(machines.size()); ++c) {
            const double s = machines[static_cast<std::size_t>(c)].decision(x);
            if (s > best) {
                best = s;
                lab = c;
            }
        }
        return lab;
    }
};

} // namespace detail

/// A fitted classifier. Holds the training-time standardization and the
/// kind-specific parameters; predict takes raw (unstandardized) features.
class TrainedModel {
  public:
    ModelSpec spec;
    std::size_t n_features = 0;
    detail::Standardizer scaler;

    // exactly one of these is populated, per spec.kind
    std::unique_ptr<detail::KnnModel> knn;
    std::unique_ptr<detail::LdaModel> lda;
    std::unique_ptr<DecisionTree> tree;
    std::unique_ptr<detail::SvmModel> svm;
    std::unique_ptr<RandomForest> forest;

    SurvivalClass predict(const std::vector<double>& x) const {
        if (x.size() != n_features)
            throw DimensionMismatch(
                "expected " + std::to_string(n_features) + " features, got " +
                std::to_string(x.size()));
        std::vector<double> z(n_features);
        scaler.apply(x.data(), z.data());
        int lab = 0;
        switch (spec.kind) {
            case ModelSpec::Kind::KNN: lab = knn->predict(z.data()); break;
            case ModelSpec::Kind::DA: lab = lda->predict(z.data()); break;
            case ModelSpec::Kind::DT: lab = tree->predict(z.data()); break;
            case ModelSpec::Kind::SVM: lab = svm->predict(z.data()); break;
            case ModelSpec::Kind::RF: lab = forest->predict(z.data()); break;
        }
        return static_cast<SurvivalClass>(lab);
    }
};

inline LabeledMatrix to_matrix(const Dataset& d) {
    LabeledMatrix m;
    m.n_features = d.n_features();
    m.x.reserve(d.rows.size() * m.n_features);
    m.y.reserve(d.rows.size());
    for (const auto& r : d.rows) {
        m.x.insert(m.x.end(), r.features.begin(), r.features.end());
        m.y.push_back(static_cast<int>(r.label));
    }
    return m;
}

inline TrainedModel fit(const ModelSpec& spec, const LabeledMatrix& raw) {
    if (raw.n_rows() == 0) throw SingleClass("empty training set");
    for (std::size_t i = 0; i < raw.n_rows(); ++i)
        for (std::size_t f = 0; f < raw.n_features; ++f)
            if (!std::isfinite(raw.row(i)[f])) throw NonFiniteFeature(i, f);
    bool multi = false;
    for (std::size_t i = 1; i < raw.n_rows(); ++i)
        if (raw.y[i] != raw.y[0]) {
            multi = true;
            break;
        }
    if (!multi) throw SingleClass("training data holds a single class");

    TrainedModel m;
    m.spec = spec;
    m.n_features = raw.n_features;
    m.scaler.fit(raw);
    LabeledMatrix z = m.scaler.transform(raw);

    switch (spec.kind) {
        case ModelSpec::Kind::KNN: {
            m.knn = std::make_unique<detail::KnnModel>();
            m.knn->k = spec.knn_k;
            m.knn->train = std::move(z);
            break;
        }
        case ModelSpec::Kind::DA:
            m.lda = std::make_unique<detail::LdaModel>(
                detail::LdaModel::fit(z, spec.da_shrinkage));
            break;
        case ModelSpec::Kind::DT: {
            std::vector<std::size_t> idx(z.n_rows());
            std::iota(idx.begin(), idx.end(), 0);
            m.tree = std::make_unique<DecisionTree>(grow_tree(
                z, idx, static_cast<std::size_t>(spec.dt_max_splits)));
            break;
        }
        case ModelSpec::Kind::SVM: {
            const double gamma =
                spec.svm_gamma > 0
                    ? spec.svm_gamma
                    : 1.0 / static_cast<double>(raw.n_features);
            m.svm = std::make_unique<detail::SvmModel>();
            for (int c = 0; c < kNumClasses; ++c) {
                std::vector<int> y(z.n_rows());
                for (std::size_t i = 0; i < z.n_rows(); ++i)
                    y[i] = z.y[i] == c ? 1 : -1;
                m.svm->machines.push_back(detail::smo_train(
                    z, y, spec.svm_c, gamma, spec.svm_tol, spec.svm_max_passes,
                    detail::mix_seed(spec.seed,
                                     static_cast<std::uint64_t>(c) + 7919)));
            }
            break;
        }
        case ModelSpec::Kind::RF:
            m.forest = std::make_unique<RandomForest>(fit_forest(
                z, spec.rf_trees, spec.rf_features_per_node, spec.seed));
            break;
    }
    return m;
}

inline TrainedModel fit(const ModelSpec& spec, const Dataset& d) {
    return fit(spec, to_matrix(d));
}

/// OOB permutation importance for an RF model, on the data it was fit on.
inline std::vector<double> rf_oob_importance(const TrainedModel& m,
                                             const LabeledMatrix& raw) {
    if (m.spec.kind != ModelSpec::Kind::RF || !m.forest)
        throw NotAForest("importance requires a random-forest model");
    return oob_permutation_importance(*m.forest, m.scaler.transform(raw));
}

inline std::vector<double> rf_oob_importance(const TrainedModel& m,
                                             const Dataset& d) {
    return rf_oob_importance(m, to_matrix(d));
}

// --- serialization ------------------------------------------------------

namespace detail {

inline nlohmann::json tree_to_json(const DecisionTree& t) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& n : t.nodes)
        nodes.push_back({n.feature, n.threshold, n.left, n.right, n.label});
    return nodes;
}

inline DecisionTree tree_from_json(const nlohmann::json& j) {
    DecisionTree t;
    for (const auto& n : j) {
        TreeNode nd;
        nd.feature = n[0];
        nd.threshold = n[1];
        nd.left = n[2];
        nd.right = n[3];
        nd.label = n[4];
        t.nodes.push_back(nd);
    }
    return t;
}

} // namespace detail

constexpr int kModelFormatVersion = 1;

inline nlohmann::json model_to_json(const TrainedModel& m) {
    nlohmann::json j;
    j["format"] = "radsurv-model";
    j["version"] = kModelFormatVersion;
    j["kind"] = model_kind_name(m.spec.kind);
    j["n_features"] = m.n_features;
    j["seed"] = m.spec.seed;
    j["scaler"] = {{"mean", m.scaler.mean}, {"scale", m.scaler.scale}};
    switch (m.spec.kind) {
        case ModelSpec::Kind::KNN:
            j["knn"] = {{"k", m.knn->k},
                        {"x", m.knn->train.x},
                        {"y", m.knn->train.y}};
            break;
        case ModelSpec::Kind::DA:
            j["lda"] = {{"w", m.lda->w}, {"b", m.lda->b}};
            break;
        case ModelSpec::Kind::DT:
            j["tree"] = detail::tree_to_json(*m.tree);
            break;
        case ModelSpec::Kind::SVM: {
            nlohmann::json machines = nlohmann::json::array();
            for (const auto& sv : m.svm->machines)
                machines.push_back({{"sv", sv.sv},
                                    {"coef", sv.coef},
                                    {"b", sv.b},
                                    {"gamma", sv.gamma}});
            j["svm"] = machines;
            break;
        }
        case ModelSpec::Kind::RF: {
            nlohmann::json trees = nlohmann::json::array();
            for (const auto& t : m.forest->trees)
                trees.push_back(detail::tree_to_json(t));
            j["forest"] = {{"trees", trees},
                           {"mtry", m.forest->mtry},
                           {"oob", m.forest->oob}};
            break;
        }
    }
    return j;
}

inline TrainedModel model_from_json(const nlohmann::json& j) {
    if (j.value("format", "") != "radsurv-model" ||
        j.value("version", 0) != kModelFormatVersion)
        throw Error("unrecognized model file format/version");
    TrainedModel m;
    m.spec.kind = model_kind_from_name(j.at("kind"));
    m.spec.seed = j.value("seed", 0ULL);
    m.n_features = j.at("n_features");
    m.scaler.mean = j.at("scaler").at("mean").get<std::vector<double>>();
    m.scaler.scale = j.at("scaler").at("scale").get<std::vector<double>>();
    switch (m.spec.kind) {
        case ModelSpec::Kind::KNN: {
            m.knn = std::make_unique<detail::KnnModel>();
            m.knn->k = j.at("knn").at("k");
            m.spec.knn_k = m.knn->k;
            m.knn->train.n_features = m.n_features;
            m.knn->train.x = j.at("knn").at("x").get<std::vector<double>>();
            m.knn->train.y = j.at("knn").at("y").get<std::vector<int>>();
            break;
        }
        case ModelSpec::Kind::DA: {
            m.lda = std::make_unique<detail::LdaModel>();
            m.lda->w = j.at("lda").at("w")
                           .get<std::vector<std::vector<double>>>();
            m.lda->b = j.at("lda").at("b").get<std::vector<double>>();
            break;
        }
        case ModelSpec::Kind::DT:
            m.tree = std::make_unique<DecisionTree>(
                detail::tree_from_json(j.at("tree")));
            break;
        case ModelSpec::Kind::SVM: {
            m.svm = std::make_unique<detail::SvmModel>();
            for (const auto& mj : j.at("svm")) {
                detail::SvmBinary sv;
                sv.sv = mj.at("sv").get<std::vector<std::vector<double>>>();
                sv.coef = mj.at("coef").get<std::vector<double>>();
                sv.b = mj.at("b");
                sv.gamma = mj.at("gamma");
                m.svm->machines.push_back(std::move(sv));
            }
            break;
        }
        case ModelSpec::Kind::RF: {
            m.forest = std::make_unique<RandomForest>();
            for (const auto& tj : j.at("forest").at("trees"))
                m.forest->trees.push_back(detail::tree_from_json(tj));
            m.forest->mtry = j.at("forest").at("mtry");
            m.forest->oob = j.at("forest").at("oob")
                                .get<std::vector<std::vector<std::size_t>>>();
            break;
        }
    }
    return m;
}

} // namespace radsurv
