#pragma once

#include <algorithm>
#include <array>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "radsurv/classifiers.hpp"
#include "radsurv/dataset.hpp"
#include "radsurv/errors.hpp"

namespace radsurv {

enum class CvMode { SliceLevel, SubjectGrouped };

inline const char* cv_mode_name(CvMode m) {
    return m == CvMode::SliceLevel ? "slice-level" : "subject-grouped";
}

struct FoldPlan {
    std::size_t n_folds = 0;
    std::vector<std::size_t> assignment;   // row index -> fold id
    CvMode mode = CvMode::SliceLevel;
};

using Confusion = std::array<std::array<std::size_t, kNumClasses>, kNumClasses>;
// confusion[predicted][actual]

struct FoldMetrics {
    std::size_t fold = 0;
    std::size_t n_test = 0;
    double accuracy = 0;
};

struct EvalReport {
    Confusion confusion{};
    std::array<std::array<double, kNumClasses>, kNumClasses> confusion_pct{};
    double accuracy = 0;
    double precision = 0;   // macro-averaged
    double recall = 0;      // macro-averaged
    std::vector<FoldMetrics> per_fold;
    std::map<std::string, SurvivalClass> subject_votes;
    double subject_accuracy = 0;
    CvMode mode = CvMode::SliceLevel;
    std::size_t n_rows = 0;
};

/// Stratified-by-class assignment after a seeded shuffle; a rotating
/// cursor spreads each stratum's remainder so fold sizes differ by at
/// most one overall. SubjectGrouped keeps whole subjects together.
inline FoldPlan make_folds(const Dataset& data, std::size_t n, CvMode mode,
                           std::uint64_t seed) {
    if (n < 2) throw Error("need at least 2 folds");
    FoldPlan plan;
    plan.n_folds = n;
    plan.mode = mode;
    plan.assignment.assign(data.rows.size(), 0);
    std::mt19937_64 rng(seed);

    if (mode == CvMode::SliceLevel) {
        std::array<std::vector<std::size_t>, kNumClasses> strata;
        for (std::size_t i = 0; i < data.rows.size(); ++i)
            strata[static_cast<std::size_t>(data.rows[i].label)].push_back(i);
        std::size_t cursor = 0;
        for (int c = 0; c < kNumClasses; ++c) {
            auto& s = strata[static_cast<std::size_t>(c)];
            if (s.empty()) continue;
            if (s.size() < n)
                throw TooFewPerClass("class '" +
                                     std::string(survival_name(
                                         static_cast<SurvivalClass>(c))) +
                                     "' has only " + std::to_string(s.size()) +
                                     " rows for " + std::to_string(n) + " folds");
            std::shuffle(s.begin(), s.end(), rng);
            for (std::size_t t = 0; t < s.size(); ++t)
                plan.assignment[s[t]] = (cursor + t) % n;
            cursor = (cursor + s.size()) % n;
        }
    } else {
        // subject -> (class, row indices); std::map keeps subject order stable
        std::map<std::string, std::vector<std::size_t>> rows_of;
        for (std::size_t i = 0; i < data.rows.size(); ++i)
            rows_of[data.rows[i].subject_id].push_back(i);
        std::array<std::vector<const std::pair<const std::string,
                                               std::vector<std::size_t>>*>,
                   kNumClasses>
            strata;
        for (const auto& kv : rows_of) {
            const auto c = static_cast<std::size_t>(
                data.rows[kv.second.front()].label);
            strata[c].push_back(&kv);
        }
        std::size_t cursor = 0;
        for (int c = 0; c < kNumClasses; ++c) {
            auto& s = strata[static_cast<std::size_t>(c)];
            if (s.empty()) continue;
            if (s.size() < n)
                throw TooFewPerClass("class '" +
                                     std::string(survival_name(
                                         static_cast<SurvivalClass>(c))) +
                                     "' has only " + std::to_string(s.size()) +
                                     " subjects for " + std::to_string(n) +
                                     " folds");
            std::shuffle(s.begin(), s.end(), rng);
            for (std::size_t t = 0; t < s.size(); ++t)
                for (auto row : s[t]->second)
                    plan.assignment[row] = (cursor + t) % n;
            cursor = (cursor + s.size()) % n;
        }
    }
    return plan;
}

/// Plurality class per subject; ties resolve to the worst prognosis.
inline std::map<std::string, SurvivalClass> majority_vote(
    const std::map<std::string, std::vector<SurvivalClass>>& slice_preds) {
    std::map<std::string, SurvivalClass> out;
    for (const auto& [subject, preds] : slice_preds) {
        if (preds.empty()) throw EmptySubject("no predictions for " + subject);
        std::array<std::size_t, kNumClasses> votes{};
        for (auto p : preds) ++votes[static_cast<std::size_t>(p)];
        int lab = 0;
        for (int c = 1; c < kNumClasses; ++c)
            if (votes[static_cast<std::size_t>(c)] >
                votes[static_cast<std::size_t>(lab)])
                lab = c;
        out[subject] = static_cast<SurvivalClass>(lab);
    }
    return out;
}

inline std::array<std::array<double, kNumClasses>, kNumClasses> confusion_pct(
    const Confusion& counts) {
    std::array<std::array<double, kNumClasses>, kNumClasses> pct{};
    for (int p = 0; p < kNumClasses; ++p) {
        std::size_t row_total = 0;
        for (int a = 0; a < kNumClasses; ++a) row_total += counts[p][a];
        if (row_total == 0)
            throw EmptyRow("no predictions of class '" +
                           std::string(survival_name(
                               static_cast<SurvivalClass>(p))) + "'");
        for (int a = 0; a < kNumClasses; ++a)
            pct[p][a] = 100.0 * static_cast<double>(counts[p][a]) /
                        static_cast<double>(row_total);
    }
    return pct;
}

namespace detail {

inline void compute_metrics(EvalReport& r) {
    std::size_t total = 0, correct = 0;
    for (int p = 0; p < kNumClasses; ++p)
        for (int a = 0; a < kNumClasses; ++a) {
            total += r.confusion[p][a];
            if (p == a) correct += r.confusion[p][a];
        }
    r.n_rows = total;
    r.accuracy = total ? static_cast<double>(correct) /
                             static_cast<double>(total)
                       : 0.0;
    double prec = 0, rec = 0;
    for (int c = 0; c < kNumClasses; ++c) {
        std::size_t pred_total = 0, actual_total = 0;
        for (int a = 0; a < kNumClasses; ++a) pred_total += r.confusion[c][a];
        for (int p = 0; p < kNumClasses; ++p) actual_total += r.confusion[p][c];
        prec += pred_total ? static_cast<double>(r.confusion[c][c]) /
                                 static_cast<double>(pred_total)
                           : 0.0;   // 0/0 counts as 0
        rec += actual_total ? static_cast<double>(r.confusion[c][c]) /
                                  static_cast<double>(actual_total)
                            : 0.0;
    }
    r.precision = prec / kNumClasses;
    r.recall = rec / kNumClasses;
}

} // namespace detail

/// Fit on out-of-fold rows, predict in-fold rows, pool the confusion over
/// all folds. SubjectGrouped plans additionally assert zero subject
/// overlap between a fold's training and test rows.
inline EvalReport cross_validate(const ModelSpec& spec, const Dataset& data,
                                 const FoldPlan& plan) {
    if (plan.assignment.size() != data.rows.size())
        throw DimensionMismatch("fold plan does not cover the dataset");
    EvalReport report;
    report.mode = plan.mode;
    std::map<std::string, std::vector<SurvivalClass>> slice_preds;

    for (std::size_t fold = 0; fold < plan.n_folds; ++fold) {
        Dataset train, test;
        train.feature_names = data.feature_names;
        test.feature_names = data.feature_names;
        for (std::size_t i = 0; i < data.rows.size(); ++i)
            (plan.assignment[i] == fold ? test : train)
                .rows.push_back(data.rows[i]);
        if (plan.mode == CvMode::SubjectGrouped) {
            std::map<std::string, int> side;
            for (const auto& r : train.rows) side[r.subject_id] = 0;
            for (const auto& r : test.rows) {
                auto it = side.find(r.subject_id);
                if (it != side.end())
                    throw Error("subject leakage in fold " +
                                std::to_string(fold) + ": " + r.subject_id);
            }
        }
        TrainedModel model;
        try {
            model = fit(spec, train);
        } catch (const Error& e) {
            throw Error("fold " + std::to_string(fold) + ": " + e.what());
        }
        FoldMetrics fm;
        fm.fold = fold;
        fm.n_test = test.rows.size();
        std::size_t correct = 0;
        for (const auto& r : test.rows) {
            const SurvivalClass pred = model.predict(r.features);
            ++report.confusion[static_cast<std::size_t>(pred)]
                              [static_cast<std::size_t>(r.label)];
            correct += pred == r.label;
            slice_preds[r.subject_id].push_back(pred);
        }
        fm.accuracy = fm.n_test ? static_cast<double>(correct) /
                                      static_cast<double>(fm.n_test)
                                : 0.0;
        report.per_fold.push_back(fm);
    }

    detail::compute_metrics(report);
    report.subject_votes = majority_vote(slice_preds);
    // subject-wise accuracy against the subjects' true labels
    std::map<std::string, SurvivalClass> truth;
    for (const auto& r : data.rows) truth[r.subject_id] = r.label;
    std::size_t subj_correct = 0;
    for (const auto& [id, pred] : report.subject_votes)
        subj_correct += pred == truth.at(id);
    report.subject_accuracy =
        report.subject_votes.empty()
            ? 0.0
            : static_cast<double>(subj_correct) /
                  static_cast<double>(report.subject_votes.size());
    try {
        report.confusion_pct = confusion_pct(report.confusion);
    } catch (const EmptyRow&) {
        // leave zeroed when a class was never predicted
    }
    return report;
}

} // namespace radsurv
