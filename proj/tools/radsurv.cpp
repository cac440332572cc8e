// Batch front end for the survival-prognosis pipeline:
//   phantom-gen  emit synthetic subjects for self-contained runs
//   extract      volumes + masks + clinical CSV -> per-slice feature CSV
//   evaluate     feature CSV -> cross-validated report (+ importance for RF)
//   importance   feature CSV -> out-of-bag permutation importance CSV

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "radsurv/classifiers.hpp"
#include "radsurv/dataset.hpp"
#include "radsurv/evaluation.hpp"
#include "radsurv/phantom.hpp"
#include "radsurv/pipeline.hpp"
#include "radsurv/report.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitEmpty = 4;
constexpr int kExitTooFew = 5;

struct ExtractArgs {
    std::string data_root, clinical, out_csv, config_path;
    std::string modality = "t1ce";
    radsurv::ExtractConfig cfg;
    long thr_mid = 600, thr_long = 1300;
    unsigned threads = 1;
};

struct EvaluateArgs {
    std::string features, out_dir, config_path;
    std::string model = "rf";
    std::string mode = "slice";
    std::size_t folds = 10;
    radsurv::ModelSpec spec;
};

json extract_config_json(const ExtractArgs& a) {
    return {{"data_root", a.data_root},
            {"clinical", a.clinical},
            {"modality", a.modality},
            {"quant_levels", a.cfg.quant_levels},
            {"lbp_bins", a.cfg.lbp_bins},
            {"min_roi_pixels", a.cfg.min_roi_pixels},
            {"per_volume_normalization", a.cfg.per_volume_normalization},
            {"include_fourier", a.cfg.include_fourier},
            {"survival_thresholds", {a.thr_mid, a.thr_long}}};
}

json load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw radsurv::Error("cannot open config file: " + path);
    json j;
    in >> j;
    return j;
}

// values from the config file apply only where the flag was not given
template <typename T>
void maybe_set(const CLI::App* app, const char* flag, const json& cfg,
               const char* key, T& target) {
    if (!cfg.contains(key)) return;
    if (app->count(flag) > 0) return;
    target = cfg.at(key).get<T>();
}

int run_extract(CLI::App* app, ExtractArgs& a) {
    if (!a.config_path.empty()) {
        json cfg = load_config(a.config_path);
        maybe_set(app, "--data-root", cfg, "data_root", a.data_root);
        maybe_set(app, "--clinical", cfg, "clinical", a.clinical);
        maybe_set(app, "--out", cfg, "out", a.out_csv);
        maybe_set(app, "--modality", cfg, "modality", a.modality);
        maybe_set(app, "--levels", cfg, "quant_levels", a.cfg.quant_levels);
        maybe_set(app, "--lbp-bins", cfg, "lbp_bins", a.cfg.lbp_bins);
        maybe_set(app, "--min-roi-pixels", cfg, "min_roi_pixels",
                  a.cfg.min_roi_pixels);
        maybe_set(app, "--threads", cfg, "threads", a.threads);
        if (cfg.contains("per_volume_normalization") &&
            app->count("--per-volume-norm") == 0)
            a.cfg.per_volume_normalization = cfg["per_volume_normalization"];
        if (cfg.contains("include_fourier") &&
            app->count("--include-fourier") == 0)
            a.cfg.include_fourier = cfg["include_fourier"];
        if (cfg.contains("survival_thresholds")) {
            a.thr_mid = cfg["survival_thresholds"][0];
            a.thr_long = cfg["survival_thresholds"][1];
        }
    }
    if (a.data_root.empty() || a.clinical.empty() || a.out_csv.empty()) {
        std::cerr << "extract: --data-root, --clinical and --out are required\n";
        return kExitConfig;
    }
    if (a.thr_mid >= a.thr_long) {
        std::cerr << "extract: survival thresholds must be strictly increasing\n";
        return kExitConfig;
    }
    radsurv::Modality mod;
    try {
        mod = radsurv::modality_from_name(a.modality);
    } catch (const radsurv::Error& e) {
        std::cerr << "extract: " << e.what() << '\n';
        return kExitConfig;
    }
    if (!fs::is_directory(a.data_root)) {
        std::cerr << "extract: data root is not a directory: " << a.data_root
                  << '\n';
        return kExitConfig;
    }

    std::vector<radsurv::ClinicalRecord> clinical;
    try {
        clinical = radsurv::read_clinical_csv(a.clinical);
    } catch (const radsurv::Error& e) {
        std::cerr << "extract: clinical CSV: " << e.what() << '\n';
        return kExitIo;
    }

    std::vector<fs::path> subject_dirs;
    for (const auto& entry : fs::directory_iterator(a.data_root))
        if (entry.is_directory()) subject_dirs.push_back(entry.path());
    std::sort(subject_dirs.begin(), subject_dirs.end());
    if (subject_dirs.empty()) {
        std::cerr << "extract: no subject directories under " << a.data_root
                  << '\n';
        return kExitIo;
    }

    std::vector<std::vector<radsurv::SliceFeatures>> per_subject(
        subject_dirs.size());
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::string fail_msg;
    std::mutex fail_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= subject_dirs.size() || failed.load()) return;
            const std::string id = subject_dirs[i].filename().string();
            try {
                per_subject[i] =
                    radsurv::extract_subject(subject_dirs[i], id, mod, a.cfg);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lk(fail_mutex);
                failed = true;
                fail_msg = "subject " + id + ": " + e.what();
                return;
            }
        }
    };
    const unsigned n_threads = std::max(1u, a.threads);
    std::vector<std::thread> pool;
    for (unsigned t = 0; t + 1 < n_threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (failed) {
        std::cerr << "extract: " << fail_msg << '\n';
        return kExitIo;
    }

    std::vector<radsurv::SliceFeatures> all;
    for (std::size_t i = 0; i < subject_dirs.size(); ++i) {
        std::cout << subject_dirs[i].filename().string() << ": "
                  << per_subject[i].size() << " slices\n";
        for (auto& s : per_subject[i]) all.push_back(std::move(s));
    }
    if (all.empty()) {
        std::cerr << "extract: no usable slices (all below min_roi_pixels?)\n";
        return kExitEmpty;
    }

    try {
        radsurv::Dataset d = radsurv::assemble(
            std::move(all), clinical, radsurv::radiomic_feature_names(a.cfg),
            {a.thr_mid, a.thr_long});
        radsurv::write_dataset_csv(a.out_csv, d);
        const fs::path manifest =
            fs::path(a.out_csv).parent_path() / "extract_manifest.json";
        radsurv::write_manifest(manifest.string(), extract_config_json(a), 0);
        std::cout << "wrote " << d.rows.size() << " rows x "
                  << d.n_features() << " features to " << a.out_csv << '\n';
    } catch (const radsurv::UnknownSubject& e) {
        std::cerr << "extract: " << e.what() << '\n';
        return kExitIo;
    } catch (const radsurv::Error& e) {
        std::cerr << "extract: " << e.what() << '\n';
        return kExitIo;
    }
    return 0;
}

json evaluate_config_json(const EvaluateArgs& a) {
    return {{"features", a.features},
            {"model", a.model},
            {"mode", a.mode},
            {"folds", a.folds},
            {"seed", a.spec.seed},
            {"knn_k", a.spec.knn_k},
            {"dt_max_splits", a.spec.dt_max_splits},
            {"rf_trees", a.spec.rf_trees},
            {"svm_c", a.spec.svm_c},
            {"da_shrinkage", a.spec.da_shrinkage}};
}

int run_evaluate(CLI::App* app, EvaluateArgs& a, bool importance_only) {
    if (!a.config_path.empty()) {
        json cfg = load_config(a.config_path);
        maybe_set(app, "--features", cfg, "features", a.features);
        maybe_set(app, "--model", cfg, "model", a.model);
        maybe_set(app, "--mode", cfg, "mode", a.mode);
        maybe_set(app, "--folds", cfg, "folds", a.folds);
        maybe_set(app, "--seed", cfg, "seed", a.spec.seed);
        maybe_set(app, "--trees", cfg, "rf_trees", a.spec.rf_trees);
        maybe_set(app, "--knn-k", cfg, "knn_k", a.spec.knn_k);
        maybe_set(app, "--max-splits", cfg, "dt_max_splits",
                  a.spec.dt_max_splits);
    }
    try {
        a.spec.kind = radsurv::model_kind_from_name(a.model);
    } catch (const radsurv::Error& e) {
        std::cerr << "evaluate: " << e.what() << '\n';
        return kExitConfig;
    }
    if (a.mode != "slice" && a.mode != "subject") {
        std::cerr << "evaluate: --mode must be 'slice' or 'subject'\n";
        return kExitConfig;
    }
    if (importance_only) a.spec.kind = radsurv::ModelSpec::Kind::RF;
    if (a.features.empty()) {
        std::cerr << "evaluate: --features is required\n";
        return kExitConfig;
    }

    radsurv::Dataset data;
    try {
        data = radsurv::read_dataset_csv(a.features);
    } catch (const radsurv::Error& e) {
        std::cerr << "evaluate: feature CSV: " << e.what() << '\n';
        return kExitIo;
    }
    if (data.rows.empty()) {
        std::cerr << "evaluate: feature CSV holds no rows\n";
        return kExitEmpty;
    }

    try {
        fs::create_directories(a.out_dir);
        if (importance_only) {
            radsurv::TrainedModel model = radsurv::fit(a.spec, data);
            auto scores = radsurv::rf_oob_importance(model, data);
            radsurv::write_importance_csv(
                (fs::path(a.out_dir) / "importance.csv").string(),
                data.feature_names, scores);
            radsurv::write_manifest(
                (fs::path(a.out_dir) / "manifest.json").string(),
                evaluate_config_json(a), a.spec.seed);
            std::cout << "wrote importance for " << scores.size()
                      << " features to " << a.out_dir << "/importance.csv\n";
            return 0;
        }
        const radsurv::CvMode mode = a.mode == "slice"
                                         ? radsurv::CvMode::SliceLevel
                                         : radsurv::CvMode::SubjectGrouped;
        radsurv::FoldPlan plan =
            radsurv::make_folds(data, a.folds, mode, a.spec.seed);
        radsurv::EvalReport report =
            radsurv::cross_validate(a.spec, data, plan);
        radsurv::write_report_text(
            (fs::path(a.out_dir) / "report.txt").string(), report, a.spec);
        {
            std::ofstream out(fs::path(a.out_dir) / "report.json");
            out << radsurv::report_to_json(report, a.spec).dump(2) << '\n';
        }
        if (a.spec.kind == radsurv::ModelSpec::Kind::RF) {
            radsurv::TrainedModel model = radsurv::fit(a.spec, data);
            auto scores = radsurv::rf_oob_importance(model, data);
            radsurv::write_importance_csv(
                (fs::path(a.out_dir) / "importance.csv").string(),
                data.feature_names, scores);
        }
        radsurv::write_manifest(
            (fs::path(a.out_dir) / "manifest.json").string(),
            evaluate_config_json(a), a.spec.seed);
        std::cout << "accuracy " << report.accuracy << "  precision "
                  << report.precision << "  recall " << report.recall
                  << "  (subject-wise " << report.subject_accuracy << ")\n";
        std::cout << "report written to " << a.out_dir << '\n';
    } catch (const radsurv::TooFewPerClass& e) {
        std::cerr << "evaluate: " << e.what() << '\n';
        return kExitTooFew;
    } catch (const radsurv::Error& e) {
        std::cerr << "evaluate: " << e.what() << '\n';
        return kExitIo;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"radsurv: slice-level radiomics survival prognosis"};
    app.require_subcommand(1);

    // phantom-gen
    auto* gen = app.add_subcommand(
        "phantom-gen", "emit synthetic subjects + clinical.csv for demo runs");
    std::string gen_out;
    std::size_t gen_subjects = 4;
    std::uint64_t gen_seed = 42;
    gen->add_option("--out", gen_out, "output directory")->required();
    gen->add_option("--subjects", gen_subjects, "number of subjects");
    gen->add_option("--seed", gen_seed, "generator seed");

    // extract
    ExtractArgs ex;
    auto* extract = app.add_subcommand(
        "extract", "compute the per-slice feature CSV from volumes + masks");
    extract->add_option("--data-root", ex.data_root,
                        "directory of per-subject directories");
    extract->add_option("--clinical", ex.clinical, "clinical CSV path");
    extract->add_option("--out", ex.out_csv, "output feature CSV");
    extract->add_option("--modality", ex.modality,
                        "intensity modality (t1, t1ce, t2, flair)");
    extract->add_option("--levels", ex.cfg.quant_levels, "gray levels for GLCM");
    extract->add_option("--lbp-bins", ex.cfg.lbp_bins, "LBP histogram bins");
    extract->add_option("--min-roi-pixels", ex.cfg.min_roi_pixels,
                        "minimum tumor pixels per usable slice");
    extract->add_flag("--per-volume-norm", ex.cfg.per_volume_normalization,
                      "z-score with per-volume statistics instead of per-slice");
    extract->add_flag("--include-fourier", ex.cfg.include_fourier,
                      "append 10 Fourier contour descriptors");
    extract->add_option("--threshold-mid", ex.thr_mid,
                        "survival days at the short/mid boundary");
    extract->add_option("--threshold-long", ex.thr_long,
                        "survival days at the mid/long boundary");
    extract->add_option("--threads", ex.threads, "worker threads");
    extract->add_option("--config", ex.config_path, "JSON config file");

    // evaluate
    EvaluateArgs ev;
    auto* evaluate = app.add_subcommand(
        "evaluate", "cross-validate a classifier on a feature CSV");
    evaluate->add_option("--features", ev.features, "feature CSV from extract");
    evaluate->add_option("--out-dir", ev.out_dir, "report directory")
        ->required();
    evaluate->add_option("--model", ev.model,
                         "classifier: knn, da, dt, svm, rf");
    evaluate->add_option("--mode", ev.mode, "cv mode: slice or subject");
    evaluate->add_option("--folds", ev.folds, "number of folds");
    evaluate->add_option("--seed", ev.spec.seed, "fold/model seed");
    evaluate->add_option("--knn-k", ev.spec.knn_k, "k for knn");
    evaluate->add_option("--max-splits", ev.spec.dt_max_splits,
                         "internal node cap for dt");
    evaluate->add_option("--trees", ev.spec.rf_trees, "trees for rf");
    evaluate->add_option("--svm-c", ev.spec.svm_c, "SVM C");
    evaluate->add_option("--svm-gamma", ev.spec.svm_gamma,
                         "SVM RBF gamma (0 = 1/F)");
    evaluate->add_option("--shrinkage", ev.spec.da_shrinkage,
                         "DA covariance shrinkage");
    evaluate->add_option("--config", ev.config_path, "JSON config file");

    // importance
    EvaluateArgs im;
    auto* importance = app.add_subcommand(
        "importance", "RF out-of-bag permutation importance from a feature CSV");
    importance->add_option("--features", im.features, "feature CSV")
        ->required();
    importance->add_option("--out-dir", im.out_dir, "output directory")
        ->required();
    importance->add_option("--trees", im.spec.rf_trees, "trees for rf");
    importance->add_option("--seed", im.spec.seed, "model seed");
    importance->add_option("--config", im.config_path, "JSON config file");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            radsurv::write_phantom_cohort(gen_out, gen_subjects, gen_seed);
            std::cout << "wrote " << gen_subjects << " phantom subjects to "
                      << gen_out << '\n';
            return 0;
        }
        if (extract->parsed()) return run_extract(extract, ex);
        if (evaluate->parsed()) return run_evaluate(evaluate, ev, false);
        if (importance->parsed()) return run_evaluate(importance, im, true);
    } catch (const radsurv::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIo;
    }
    return 0;
}
