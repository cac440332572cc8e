#pragma once

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "radsurv/errors.hpp"

namespace radsurv {

struct ClinicalRecord {
    std::string subject_id;
    double age = 0;
    std::optional<long> survival_days;
};

enum class SurvivalClass : int { Short = 0, Mid = 1, Long = 2 };
constexpr int kNumClasses = 3;

inline const char* survival_name(SurvivalClass c) {
    switch (c) {
        case SurvivalClass::Short: return "short";
        case SurvivalClass::Mid: return "mid";
        case SurvivalClass::Long: return "long";
    }
    return "?";
}

inline SurvivalClass survival_from_name(const std::string& s) {
    if (s == "short") return SurvivalClass::Short;
    if (s == "mid") return SurvivalClass::Mid;
    if (s == "long") return SurvivalClass::Long;
    throw Error("unknown survival class '" + s + "'");
}

struct SurvivalThresholds {
    long mid = 600, lng = 1300;   // half-open: [0,mid) [mid,lng) [lng,inf)
};

/// Missing survival is treated as short survival.
inline SurvivalClass bin_survival(const ClinicalRecord& r,
                                  SurvivalThresholds t = {}) {
    if (!r.survival_days) return SurvivalClass::Short;
    const long d = *r.survival_days;
    if (d < t.mid) return SurvivalClass::Short;
    if (d < t.lng) return SurvivalClass::Mid;
    return SurvivalClass::Long;
}

struct DatasetRow {
    std::string subject_id;
    std::size_t z_index = 0;
    std::vector<double> features;
    SurvivalClass label = SurvivalClass::Short;
};

struct Dataset {
    std::vector<DatasetRow> rows;
    std::vector<std::string> feature_names;

    std::size_t n_features() const { return feature_names.size(); }
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

inline std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t");
    auto e = s.find_last_not_of(" \t");
    return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

inline std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return s;
}

} // namespace detail

/// Columns: an ID column (BraTS19ID / BraTS20ID / ID, case-insensitive),
/// Age, Survival. Extra columns ignored. Empty or non-numeric Survival
/// yields a record with survival absent.
inline std::vector<ClinicalRecord> read_clinical_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open clinical CSV: " + path);
    std::string line;
    if (!std::getline(in, line)) throw MissingColumn("empty clinical CSV");
    auto header = detail::split_csv_line(line);
    int id_col = -1, age_col = -1, surv_col = -1;
    for (std::size_t i = 0; i < header.size(); ++i) {
        const std::string h = detail::lower(detail::trim(header[i]));
        if (id_col < 0 &&
            (h == "id" || (h.size() > 2 && h.compare(h.size() - 2, 2, "id") == 0)))
            id_col = static_cast<int>(i);
        if (h == "age") age_col = static_cast<int>(i);
        if (h == "survival" || h == "survival_days") surv_col = static_cast<int>(i);
    }
    if (id_col < 0) throw MissingColumn("clinical CSV lacks an ID column");
    if (age_col < 0) throw MissingColumn("clinical CSV lacks an Age column");
    if (surv_col < 0) throw MissingColumn("clinical CSV lacks a Survival column");

    std::vector<ClinicalRecord> out;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        auto cells = detail::split_csv_line(line);
        const auto need = static_cast<std::size_t>(std::max(id_col, age_col));
        if (cells.size() <= need) throw MalformedRow(line_no);
        ClinicalRecord r;
        r.subject_id = detail::trim(cells[static_cast<std::size_t>(id_col)]);
        if (r.subject_id.empty()) throw MalformedRow(line_no);
        try {
            std::size_t pos = 0;
            const std::string a = detail::trim(cells[static_cast<std::size_t>(age_col)]);
            r.age = std::stod(a, &pos);
            if (pos != a.size()) throw MalformedRow(line_no);
        } catch (const MalformedRow&) {
            throw;
        } catch (...) {
            throw MalformedRow(line_no);
        }
        if (static_cast<std::size_t>(surv_col) < cells.size()) {
            const std::string s = detail::trim(cells[static_cast<std::size_t>(surv_col)]);
            try {
                std::size_t pos = 0;
                const long d = std::stol(s, &pos);
                if (pos == s.size() && d >= 0) r.survival_days = d;
            } catch (...) {
                // non-numeric survival: leave absent
            }
        }
        out.push_back(std::move(r));
    }
    return out;
}

/// One feature vector freshly extracted from a slice, before labeling.
struct SliceFeatures {
    std::string subject_id;
    std::size_t z_index = 0;
    std::vector<double> radiomics;
};

/// Joins slice features with clinical records: each row becomes
/// [radiomics..., age], labeled via bin_survival, rows sorted by
/// (subject_id, z_index).
inline Dataset assemble(std::vector<SliceFeatures> slices,
                        const std::vector<ClinicalRecord>& clinical,
                        std::vector<std::string> radiomic_names,
                        SurvivalThresholds thresholds = {}) {
    std::map<std::string, const ClinicalRecord*> by_id;
    for (const auto& r : clinical) by_id[r.subject_id] = &r;

    std::sort(slices.begin(), slices.end(),
              [](const SliceFeatures& a, const SliceFeatures& b) {
                  return a.subject_id < b.subject_id ||
                         (a.subject_id == b.subject_id && a.z_index < b.z_index);
              });

    Dataset d;
    d.feature_names = std::move(radiomic_names);
    d.feature_names.push_back("clinical_age");
    for (auto& s : slices) {
        auto it = by_id.find(s.subject_id);
        if (it == by_id.end()) throw UnknownSubject(s.subject_id);
        DatasetRow row;
        row.subject_id = std::move(s.subject_id);
        row.z_index = s.z_index;
        row.features = std::move(s.radiomics);
        row.features.push_back(it->second->age);
        if (row.features.size() != d.feature_names.size())
            throw DimensionMismatch("slice feature length mismatch for " +
                                    row.subject_id);
        row.label = bin_survival(*it->second, thresholds);
        d.rows.push_back(std::move(row));
    }
    return d;
}

inline void write_dataset_csv(const std::string& path, const Dataset& d) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write dataset CSV: " + path);
    out << "subject_id,z_index,label";
    for (const auto& n : d.feature_names) out << ',' << n;
    out << '\n';
    out.precision(17);
    for (const auto& r : d.rows) {
        out << r.subject_id << ',' << r.z_index << ',' << survival_name(r.label);
        for (double f : r.features) out << ',' << f;
        out << '\n';
    }
}

inline Dataset read_dataset_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open dataset CSV: " + path);
    std::string line;
    if (!std::getline(in, line)) throw MissingColumn("empty dataset CSV");
    auto header = detail::split_csv_line(line);
    if (header.size() < 4 || header[0] != "subject_id" ||
        header[1] != "z_index" || header[2] != "label")
        throw MissingColumn("dataset CSV header must start with "
                            "subject_id,z_index,label");
    Dataset d;
    d.feature_names.assign(header.begin() + 3, header.end());
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        auto cells = detail::split_csv_line(line);
        if (cells.size() != header.size()) throw MalformedRow(line_no);
        DatasetRow r;
        r.subject_id = cells[0];
        try {
            r.z_index = std::stoul(cells[1]);
            r.label = survival_from_name(cells[2]);
            for (std::size_t i = 3; i < cells.size(); ++i)
                r.features.push_back(std::stod(cells[i]));
        } catch (const Error&) {
            throw MalformedRow(line_no);
        } catch (...) {
            throw MalformedRow(line_no);
        }
        d.rows.push_back(std::move(r));
    }
    return d;
}

} // namespace radsurv
