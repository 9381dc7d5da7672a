#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "impedscope/common.hpp"
#include "impedscope/models/common.hpp"

namespace impedscope {

enum class Metric { Auc, Accuracy, F1 };

inline const char* to_string(Metric m) {
    switch (m) {
        case Metric::Auc: return "auc";
        case Metric::Accuracy: return "accuracy";
        case Metric::F1: return "f1";
    }
    return "?";
}

inline Metric metric_from_string(const std::string& s) {
    if (s == "auc") return Metric::Auc;
    if (s == "accuracy" || s == "acc") return Metric::Accuracy;
    if (s == "f1") return Metric::F1;
    throw ValidationError("unknown metric: " + s);
}

/// Hyperparameter search space. Shipped defaults contain every tuned value
/// reported for the reference study; all lists are config-overridable.
struct ModelGrids {
    std::vector<Kernel> svm_kernels{Kernel::Linear, Kernel::Poly, Kernel::Rbf, Kernel::Sigmoid};
    std::vector<double> svm_c{1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2};
    std::vector<int> rf_trees{100, 200, 300, 800};
    std::vector<int> rf_depth{4, 8, 16};
    std::vector<double> rf_max_features{0.3, 0.7, 1.0};
    std::vector<double> lr_c{1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2};
    std::vector<int> lr_iterations{200, 500, 2000};

    std::vector<HyperParams> expand(ModelKind kind, const HyperParams& base) const {
        std::vector<HyperParams> out;
        HyperParams hp = base;
        hp.model = kind;
        switch (kind) {
            case ModelKind::SVM:
                for (const Kernel k : svm_kernels)
                    for (const double c : svm_c) {
                        hp.kernel = k;
                        hp.svm_c = c;
                        out.push_back(hp);
                    }
                break;
            case ModelKind::RF:
                for (const int t : rf_trees)
                    for (const int d : rf_depth)
                        for (const double f : rf_max_features) {
                            hp.n_trees = t;
                            hp.max_depth = d;
                            hp.max_features_fraction = f;
                            out.push_back(hp);
                        }
                break;
            case ModelKind::LR:
                for (const double c : lr_c)
                    for (const int it : lr_iterations) {
                        hp.lr_c = c;
                        hp.max_iterations = it;
                        out.push_back(hp);
                    }
                break;
        }
        validate(!out.empty(), "empty hyperparameter grid");
        return out;
    }
};

struct ZThresholdConfig {
    bool enabled = true;
    int candidates = 9;   // quantile thresholds swept per side
    bool per_fold = true; // compute pattern means from training samples of each fold
};

struct ExperimentConfig {
    std::string dataset_manifest;
    std::string geometry_path;
    std::string masks_path;
    std::string filter_path;
    std::string pathology_path;

    int task = 1;
    size_t n_folds = 5;
    int threads = 1;
    uint64_t seed = 0;  // filled from the CLI

    int trials_baseline = 10;
    int trials_frequency_sweep = 10;
    int trials_iivv_sweep = 5;
    int trials_tuning = 10;

    std::vector<ModelKind> models{ModelKind::SVM, ModelKind::RF, ModelKind::LR};
    HyperParams default_svm;
    HyperParams default_rf;
    HyperParams default_lr;
    ModelGrids grids;

    Metric tuning_metric = Metric::Auc;
    std::vector<std::string> candidate_masks;  // empty -> every mask in the registry
    size_t f_t_min = 1;
    size_t f_t_max = 0;  // 0 -> all frequencies
    size_t best_k = 4;
    ZThresholdConfig z_threshold;
    int pca_components = 10;
    bool pca_sample_rows = false;   // observations = flattened samples instead of (sample, pattern)
    bool zscore_per_column = false;

    // Direct stage inputs for `tune`/`evaluate` runs without preceding sweeps.
    std::vector<size_t> explicit_best_f_t;
    std::vector<std::string> explicit_best_masks;
    nlohmann::json winner;  // for `evaluate --stage final`: model + mask + f_T

    static ExperimentConfig load(const std::string& path) {
        std::ifstream in(path);
        validate(in.good(), "experiment config not readable: " + path);
        nlohmann::json j;
        in >> j;
        return from_json(j, path);
    }

    static ExperimentConfig from_json(const nlohmann::json& j, const std::string& config_path = "") {
        ExperimentConfig c;
        c.default_svm.model = ModelKind::SVM;
        c.default_rf.model = ModelKind::RF;
        c.default_lr.model = ModelKind::LR;

        c.dataset_manifest = resolve(j.at("dataset").get<std::string>(), config_path);
        c.geometry_path = resolve(j.at("geometry").get<std::string>(), config_path);
        c.masks_path = resolve(j.value("masks", std::string()), config_path);
        c.filter_path = resolve(j.value("filter", std::string()), config_path);
        c.pathology_path = resolve(j.value("pathology", std::string()), config_path);

        c.task = j.value("task", c.task);
        c.n_folds = j.value("n_folds", c.n_folds);
        c.threads = j.value("threads", c.threads);
        if (j.contains("trials")) {
            const auto& t = j.at("trials");
            c.trials_baseline = t.value("baseline", c.trials_baseline);
            c.trials_frequency_sweep = t.value("frequency_sweep", c.trials_frequency_sweep);
            c.trials_iivv_sweep = t.value("iivv_sweep", c.trials_iivv_sweep);
            c.trials_tuning = t.value("tuning", c.trials_tuning);
        }
        if (j.contains("models")) {
            c.models.clear();
            for (const auto& m : j.at("models"))
                c.models.push_back(model_kind_from_string(m.get<std::string>()));
            validate(!c.models.empty(), "models list is empty");
        }
        if (j.contains("defaults")) {
            const auto& d = j.at("defaults");
            auto merge = [](HyperParams& hp, const nlohmann::json& src) {
                nlohmann::json full = src;
                full["model"] = to_string(hp.model);
                hp = HyperParams::from_json(full);
            };
            if (d.contains("svm")) merge(c.default_svm, d.at("svm"));
            if (d.contains("rf")) merge(c.default_rf, d.at("rf"));
            if (d.contains("lr")) merge(c.default_lr, d.at("lr"));
        }
        if (j.contains("grids")) {
            const auto& g = j.at("grids");
            if (g.contains("svm_kernels")) {
                c.grids.svm_kernels.clear();
                for (const auto& k : g.at("svm_kernels"))
                    c.grids.svm_kernels.push_back(kernel_from_string(k.get<std::string>()));
            }
            if (g.contains("svm_c")) c.grids.svm_c = g.at("svm_c").get<std::vector<double>>();
            if (g.contains("rf_trees")) c.grids.rf_trees = g.at("rf_trees").get<std::vector<int>>();
            if (g.contains("rf_depth")) c.grids.rf_depth = g.at("rf_depth").get<std::vector<int>>();
            if (g.contains("rf_max_features"))
                c.grids.rf_max_features = g.at("rf_max_features").get<std::vector<double>>();
            if (g.contains("lr_c")) c.grids.lr_c = g.at("lr_c").get<std::vector<double>>();
            if (g.contains("lr_iterations"))
                c.grids.lr_iterations = g.at("lr_iterations").get<std::vector<int>>();
        }
        if (j.contains("tuning_metric"))
            c.tuning_metric = metric_from_string(j.at("tuning_metric").get<std::string>());
        if (j.contains("candidate_masks"))
            c.candidate_masks = j.at("candidate_masks").get<std::vector<std::string>>();
        c.f_t_min = j.value("f_t_min", c.f_t_min);
        c.f_t_max = j.value("f_t_max", c.f_t_max);
        c.best_k = j.value("best_k", c.best_k);
        if (j.contains("z_threshold")) {
            const auto& z = j.at("z_threshold");
            c.z_threshold.enabled = z.value("enabled", c.z_threshold.enabled);
            c.z_threshold.candidates = z.value("candidates", c.z_threshold.candidates);
            c.z_threshold.per_fold = z.value("per_fold", c.z_threshold.per_fold);
        }
        c.pca_components = j.value("pca_components", c.pca_components);
        c.pca_sample_rows = j.value("pca_sample_rows", c.pca_sample_rows);
        c.zscore_per_column = j.value("zscore_per_column", c.zscore_per_column);
        if (j.contains("best_f_t"))
            c.explicit_best_f_t = j.at("best_f_t").get<std::vector<size_t>>();
        if (j.contains("best_masks"))
            c.explicit_best_masks = j.at("best_masks").get<std::vector<std::string>>();
        if (j.contains("winner")) c.winner = j.at("winner");

        validate(c.task >= 1 && c.task <= 3, "task must be 1, 2, or 3");
        validate(c.n_folds >= 2, "need at least two folds");
        validate(c.trials_baseline >= 1 && c.trials_frequency_sweep >= 1 &&
                     c.trials_iivv_sweep >= 1 && c.trials_tuning >= 1,
                 "trial counts must be >= 1");
        validate(c.best_k >= 1, "best_k must be >= 1");
        return c;
    }

private:
    static std::string resolve(const std::string& p, const std::string& config_path) {
        if (p.empty() || config_path.empty()) return p;
        namespace fs = std::filesystem;
        const fs::path cand(p);
        if (cand.is_absolute() || fs::exists(cand)) return p;
        return (fs::path(config_path).parent_path() / cand).string();
    }
};

} // namespace impedscope
