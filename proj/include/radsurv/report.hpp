#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "radsurv/evaluation.hpp"
#include "radsurv/pipeline.hpp"

namespace radsurv {

constexpr const char* kLibraryVersion = "0.1.0";

namespace detail {

inline std::string fmt(double v, int prec = 4) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", prec, v);
    return buf;
}

inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

} // namespace detail

/// Human-readable report: metrics, confusion matrix in both counts and
/// percentages (rows = predicted, columns = actual), per-fold accuracy,
/// per-subject votes. Precision/recall are macro-averaged.
inline void write_report_text(const std::string& path, const EvalReport& r,
                              const ModelSpec& spec) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write report: " + path);
    out << "radsurv evaluation report\n";
    out << "model: " << model_kind_name(spec.kind) << "   cv: "
        << cv_mode_name(r.mode) << " (" << r.per_fold.size() << " folds)"
        << "   seed: " << spec.seed << "\n";
    out << "rows evaluated: " << r.n_rows << "\n\n";
    out << "accuracy:  " << detail::fmt(r.accuracy) << "\n";
    out << "precision: " << detail::fmt(r.precision) << " (macro)\n";
    out << "recall:    " << detail::fmt(r.recall) << " (macro)\n";
    out << "subject-wise accuracy (majority vote): "
        << detail::fmt(r.subject_accuracy) << "\n\n";

    const char* names[kNumClasses] = {"short", "mid", "long"};
    out << "confusion (counts, rows = predicted, cols = actual)\n";
    out << "            short      mid     long\n";
    for (int p = 0; p < kNumClasses; ++p) {
        out << "  " << names[p];
        for (std::size_t pad = std::string(names[p]).size(); pad < 8; ++pad)
            out << ' ';
        for (int a = 0; a < kNumClasses; ++a) {
            char buf[16];
            std::snprintf(buf, sizeof(buf), "%9zu", r.confusion[p][a]);
            out << buf;
        }
        out << '\n';
    }
    out << "\nconfusion (percent of predicted row)\n";
    for (int p = 0; p < kNumClasses; ++p) {
        out << "  " << names[p];
        for (std::size_t pad = std::string(names[p]).size(); pad < 8; ++pad)
            out << ' ';
        for (int a = 0; a < kNumClasses; ++a) {
            char buf[16];
            std::snprintf(buf, sizeof(buf), "%9.2f", r.confusion_pct[p][a]);
            out << buf;
        }
        out << '\n';
    }
    out << "\nper-fold accuracy\n";
    for (const auto& f : r.per_fold)
        out << "  fold " << f.fold << ": " << detail::fmt(f.accuracy) << " ("
            << f.n_test << " rows)\n";
    out << "\nper-subject majority votes\n";
    for (const auto& [id, c] : r.subject_votes)
        out << "  " << id << ": " << survival_name(c) << '\n';
}

inline nlohmann::json report_to_json(const EvalReport& r,
                                     const ModelSpec& spec) {
    nlohmann::json j;
    j["model"] = model_kind_name(spec.kind);
    j["cv_mode"] = cv_mode_name(r.mode);
    j["n_folds"] = r.per_fold.size();
    j["seed"] = spec.seed;
    j["n_rows"] = r.n_rows;
    j["accuracy"] = r.accuracy;
    j["precision_macro"] = r.precision;
    j["recall_macro"] = r.recall;
    j["subject_accuracy"] = r.subject_accuracy;
    j["confusion_counts"] = r.confusion;
    j["confusion_pct"] = r.confusion_pct;
    nlohmann::json folds = nlohmann::json::array();
    for (const auto& f : r.per_fold)
        folds.push_back({{"fold", f.fold},
                         {"n_test", f.n_test},
                         {"accuracy", f.accuracy}});
    j["per_fold"] = folds;
    nlohmann::json votes;
    for (const auto& [id, c] : r.subject_votes) votes[id] = survival_name(c);
    j["subject_votes"] = votes;
    return j;
}

/// Importance CSV: feature_name,group,score — one row per feature.
inline void write_importance_csv(const std::string& path,
                                 const std::vector<std::string>& names,
                                 const std::vector<double>& scores) {
    if (names.size() != scores.size())
        throw DimensionMismatch("importance score count != feature count");
    std::ofstream out(path);
    if (!out) throw Error("cannot write importance CSV: " + path);
    out << "feature_name,group,score\n";
    out.precision(17);
    for (std::size_t i = 0; i < names.size(); ++i)
        out << names[i] << ',' << feature_group(names[i]) << ',' << scores[i]
            << '\n';
}

/// Run manifest: enough to reproduce the outputs byte-identically.
inline void write_manifest(const std::string& path,
                           const nlohmann::json& config,
                           std::uint64_t seed) {
    nlohmann::json j;
    j["library_version"] = kLibraryVersion;
    j["seed"] = seed;
    j["config"] = config;
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(
                      detail::fnv1a(config.dump())));
    j["config_hash"] = buf;
    std::ofstream out(path);
    if (!out) throw Error("cannot write manifest: " + path);
    out << j.dump(2) << '\n';
}

} // namespace radsurv
