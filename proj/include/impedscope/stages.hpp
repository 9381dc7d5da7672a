#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "impedscope/pipeline.hpp"
#include "impedscope/report.hpp"

namespace impedscope {

inline const HyperParams& default_params(const ExperimentConfig& cfg, ModelKind kind) {
    switch (kind) {
        case ModelKind::SVM: return cfg.default_svm;
        case ModelKind::RF: return cfg.default_rf;
        case ModelKind::LR: return cfg.default_lr;
    }
    throw std::runtime_error("unreachable");
}

inline std::vector<std::string> candidate_mask_names(const Workbench& wb,
                                                     const ExperimentConfig& cfg) {
    if (!cfg.candidate_masks.empty()) return cfg.candidate_masks;
    return wb.registry.names();
}

/// Builds every candidate mask up front so a bad registry aborts before any
/// training happens.
inline void validate_candidate_masks(const Workbench& wb, const ExperimentConfig& cfg) {
    const auto names = candidate_mask_names(wb, cfg);
    validate(!names.empty(), "mask configuration lists no masks");
    for (const auto& name : names) wb.registry.build(name, *wb.universe, wb.array);
}

inline nlohmann::ordered_json eval_to_json(const EvalResult& r) {
    nlohmann::ordered_json j;
    j["auc"] = r.mean_auc;
    j["auc_ci_low"] = r.auc_ci.ci_low;
    j["auc_ci_high"] = r.auc_ci.ci_high;
    j["accuracy"] = r.mean_accuracy;
    j["f1"] = r.mean_f1;
    j["recall"] = r.mean_recall;
    j["precision"] = r.mean_precision;
    j["trial_mean_auc"] = r.trial_mean_auc;
    j["fold_aucs"] = r.fold_aucs;
    return j;
}

inline nlohmann::ordered_json ttest_to_json(const TTestResult& t) {
    nlohmann::ordered_json j;
    j["t"] = t.t;
    j["p"] = t.p;
    j["dof"] = t.dof;
    j["significant_at_0.05"] = t.significant_at_05;
    j["degenerate"] = t.degenerate;
    return j;
}

inline nlohmann::ordered_json mask_choice_to_json(const MaskChoice& m) {
    nlohmann::ordered_json j;
    j["name"] = m.display();
    j["is_zthreshold"] = m.is_zthreshold;
    if (m.is_zthreshold) {
        j["threshold_ohm"] = m.threshold_ohm;
        j["side"] = m.side == ThresholdSide::Below ? "below" : "above";
        j["per_fold"] = m.per_fold;
    }
    return j;
}

inline MaskChoice mask_choice_from_json(const nlohmann::json& j) {
    MaskChoice m;
    m.name = j.at("name").get<std::string>();
    m.is_zthreshold = j.value("is_zthreshold", false);
    if (m.is_zthreshold) {
        m.threshold_ohm = j.at("threshold_ohm").get<double>();
        m.side = j.at("side").get<std::string>() == "below" ? ThresholdSide::Below
                                                            : ThresholdSide::Above;
        m.per_fold = j.value("per_fold", true);
    }
    return m;
}

// ---------------------------------------------------------------------------
// Baseline: default-hyperparameter SVM/RF/LR on all frequencies and patterns,
// micro-averaged metrics.
// ---------------------------------------------------------------------------

inline nlohmann::ordered_json run_baseline(const Workbench& wb, const ExperimentConfig& cfg,
                                           const std::string& out_dir) {
    validate_candidate_masks(wb, cfg);
    StageContext ctx(wb, cfg, cfg.trials_baseline);
    nlohmann::ordered_json j;
    j["stage"] = "baseline";
    j["task"] = cfg.task;
    j["trials"] = cfg.trials_baseline;
    j["n_folds"] = cfg.n_folds;
    j["n_samples"] = wb.task_samples.size();
    j["n_patients"] = wb.task_patients.size();
    j["n_input"] = wb.all_mask.indices.size() * wb.n_freq();
    j["models"] = nlohmann::ordered_json::array();
    for (const ModelKind kind : cfg.models) {
        const EvalResult r = evaluate_config(wb, cfg, ctx, cfg.trials_baseline, MaskChoice{},
                                             FreqChoice{}, default_params(cfg, kind),
                                             Averaging::Micro);
        nlohmann::ordered_json m;
        m["model"] = to_string(kind);
        m["params"] = default_params(cfg, kind).describe();
        m["metrics"] = eval_to_json(r);
        j["models"].push_back(std::move(m));
    }
    if (!out_dir.empty()) write_json_file(out_dir + "/baseline.json", j);
    return j;
}

// ---------------------------------------------------------------------------
// Frequency sweep: per-fold PCA rankings, AUC-vs-f_T curve with the full set
// as the paired baseline, composite Borda ranking, best-k selection.
// ---------------------------------------------------------------------------

struct FrequencySweepResult {
    nlohmann::ordered_json report;
    std::vector<size_t> best_f_t;
    std::vector<size_t> composite_1based;
};

inline FrequencySweepResult run_frequency_sweep(const Workbench& wb, const ExperimentConfig& cfg,
                                                const std::string& out_dir) {
    StageContext ctx(wb, cfg, cfg.trials_frequency_sweep);
    ctx.precompute_rankings();

    const size_t nf = wb.n_freq();
    const size_t f_hi = cfg.f_t_max ? std::min(cfg.f_t_max, nf) : nf;
    std::vector<size_t> f_values;
    for (size_t f = cfg.f_t_min; f <= f_hi; ++f) f_values.push_back(f);
    if (f_values.empty() || f_values.back() != nf) f_values.push_back(nf);  // paired reference

    std::vector<EvalResult> results(f_values.size());
    for (size_t i = 0; i < f_values.size(); ++i) {
        FreqChoice fc;
        fc.use_ranking = true;
        fc.f_t = f_values[i];
        results[i] = evaluate_config(wb, cfg, ctx, cfg.trials_frequency_sweep, MaskChoice{}, fc,
                                     cfg.default_svm, Averaging::Macro);
    }
    const size_t ref = f_values.size() - 1;  // f_T = all frequencies

    // rankings report (1-based indices user-facing)
    nlohmann::ordered_json rankings;
    rankings["n_freq"] = nf;
    rankings["pca_components"] = cfg.pca_components;
    rankings["folds"] = nlohmann::ordered_json::array();
    for (int t = 0; t < cfg.trials_frequency_sweep; ++t)
        for (size_t f = 0; f < cfg.n_folds; ++f) {
            nlohmann::ordered_json e;
            e["trial"] = t;
            e["fold"] = f;
            std::vector<size_t> rk;
            for (const size_t idx : ctx.ranking(t, f)) rk.push_back(idx + 1);
            e["ranking"] = rk;
            e["scores"] = ctx.ranking_scores(t, f);
            e["retained_components"] = ctx.ranking_retained(t, f);
            e["captured_variance"] = ctx.ranking_captured(t, f);
            rankings["folds"].push_back(std::move(e));
        }
    std::vector<double> points;
    const auto composite = ctx.composite_ranking(&points);
    std::vector<size_t> composite_1based;
    for (const size_t idx : composite) composite_1based.push_back(idx + 1);
    rankings["composite"] = composite_1based;
    rankings["points"] = points;

    nlohmann::ordered_json sweep;
    sweep["stage"] = "frequency-sweep";
    sweep["task"] = cfg.task;
    sweep["trials"] = cfg.trials_frequency_sweep;
    sweep["model"] = cfg.default_svm.describe();
    sweep["tuning_metric"] = to_string(cfg.tuning_metric);
    sweep["entries"] = nlohmann::ordered_json::array();
    std::ostringstream csv;
    csv << "f_T,mean_auc,auc_ci_low,auc_ci_high,accuracy,f1,p_vs_baseline,significant\n";
    for (size_t i = 0; i < f_values.size(); ++i) {
        const TTestResult tt = i == ref ? TTestResult{} : paired_auc_test(results[i], results[ref]);
        nlohmann::ordered_json e;
        e["f_T"] = f_values[i];
        e["metrics"] = eval_to_json(results[i]);
        e["vs_baseline"] = ttest_to_json(tt);
        sweep["entries"].push_back(std::move(e));
        csv << f_values[i] << "," << num_str(results[i].mean_auc) << ","
            << num_str(results[i].auc_ci.ci_low) << "," << num_str(results[i].auc_ci.ci_high)
            << "," << num_str(results[i].mean_accuracy) << "," << num_str(results[i].mean_f1)
            << "," << num_str(tt.p) << "," << (tt.significant_at_05 ? 1 : 0) << "\n";
    }

    // best-k by the tuning metric; ties toward smaller f_T
    std::vector<size_t> order(f_values.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        const double va = results[a].metric_value(cfg.tuning_metric);
        const double vb = results[b].metric_value(cfg.tuning_metric);
        if (va != vb) return va > vb;
        return f_values[a] < f_values[b];
    });
    FrequencySweepResult out;
    for (size_t i = 0; i < std::min(cfg.best_k, order.size()); ++i)
        out.best_f_t.push_back(f_values[order[i]]);
    sweep["best_f_t"] = out.best_f_t;
    out.composite_1based = composite_1based;

    if (!out_dir.empty()) {
        write_json_file(out_dir + "/rankings.json", rankings);
        write_json_file(out_dir + "/freq_sweep.json", sweep);
        write_text_file(out_dir + "/freq_sweep.csv", csv.str());
    }
    sweep["rankings"] = rankings;
    out.report = std::move(sweep);
    return out;
}

// ---------------------------------------------------------------------------
// IIVV sweep: every named mask plus the best z-threshold split, full
// frequency set, default SVM.
// ---------------------------------------------------------------------------

struct IivvSweepResult {
    nlohmann::ordered_json report;
    std::vector<MaskChoice> best_masks;
};

inline IivvSweepResult run_iivv_sweep(const Workbench& wb, const ExperimentConfig& cfg,
                                      const std::string& out_dir) {
    validate_candidate_masks(wb, cfg);
    StageContext ctx(wb, cfg, cfg.trials_iivv_sweep);

    std::vector<MaskChoice> choices;
    for (const auto& name : candidate_mask_names(wb, cfg)) {
        MaskChoice m;
        m.name = name;
        choices.push_back(m);
    }
    size_t all_index = choices.size();
    for (size_t i = 0; i < choices.size(); ++i)
        if (choices[i].name == "All") all_index = i;
    validate(all_index < choices.size(), "candidate masks must include 'All' as the baseline");

    struct Entry {
        MaskChoice choice;
        EvalResult result;
        double mean_mask_size = 0.0;
    };
    auto run_choice = [&](const MaskChoice& m) {
        Entry e;
        e.choice = m;
        e.result = evaluate_config(wb, cfg, ctx, cfg.trials_iivv_sweep, m, FreqChoice{},
                                   cfg.default_svm, Averaging::Macro);
        double sz = 0;
        for (const auto& f : e.result.folds) sz += double(f.mask_size);
        e.mean_mask_size = sz / double(e.result.folds.size());
        return e;
    };

    std::vector<Entry> entries;
    for (const auto& m : choices) entries.push_back(run_choice(m));
    const EvalResult& all_result = entries[all_index].result;

    // z-threshold sweep: quantile thresholds over the dataset-wide pattern
    // means, both sides; winner joins the ranking table.
    nlohmann::ordered_json zsweep = nlohmann::ordered_json::array();
    if (cfg.z_threshold.enabled) {
        auto means = pattern_mean_lowfreq_magnitude(wb.cleaned, wb.task_samples);
        std::vector<double> finite;
        for (const double v : means)
            if (!std::isnan(v)) finite.push_back(v);
        validate(!finite.empty(), "no valid 100 Hz measurements for z-threshold");
        std::sort(finite.begin(), finite.end());
        std::vector<double> thresholds;
        for (int q = 1; q <= cfg.z_threshold.candidates; ++q) {
            const double pos = double(q) / double(cfg.z_threshold.candidates + 1) *
                               double(finite.size() - 1);
            thresholds.push_back(finite[size_t(pos)]);
        }
        thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

        bool have_best = false;
        Entry best;
        for (const ThresholdSide side : {ThresholdSide::Below, ThresholdSide::Above}) {
            for (const double thr : thresholds) {
                MaskChoice m;
                m.is_zthreshold = true;
                m.threshold_ohm = thr;
                m.side = side;
                m.per_fold = cfg.z_threshold.per_fold;
                m.name = "z-threshold";
                // skip degenerate splits
                const auto probe = build_zthreshold_mask(means, thr, side);
                if (probe.indices.empty()) continue;
                Entry e = run_choice(m);
                nlohmann::ordered_json ze;
                ze["threshold_ohm"] = thr;
                ze["side"] = side == ThresholdSide::Below ? "below" : "above";
                ze["metric"] = e.result.metric_value(cfg.tuning_metric);
                ze["mean_auc"] = e.result.mean_auc;
                ze["mean_patterns"] = e.mean_mask_size;
                zsweep.push_back(std::move(ze));
                if (!have_best ||
                    e.result.metric_value(cfg.tuning_metric) >
                        best.result.metric_value(cfg.tuning_metric)) {
                    best = std::move(e);
                    have_best = true;
                }
            }
        }
        if (have_best) entries.push_back(std::move(best));
    }

    // rank by the tuning metric, ties toward smaller masks
    std::vector<size_t> order(entries.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        const double va = entries[a].result.metric_value(cfg.tuning_metric);
        const double vb = entries[b].result.metric_value(cfg.tuning_metric);
        if (va != vb) return va > vb;
        return entries[a].mean_mask_size < entries[b].mean_mask_size;
    });

    nlohmann::ordered_json j;
    j["stage"] = "iivv-sweep";
    j["task"] = cfg.task;
    j["trials"] = cfg.trials_iivv_sweep;
    j["model"] = cfg.default_svm.describe();
    j["tuning_metric"] = to_string(cfg.tuning_metric);
    j["z_threshold_sweep"] = zsweep;
    j["entries"] = nlohmann::ordered_json::array();
    std::ostringstream csv;
    csv << "rank,mask,n_patterns,mean_auc,auc_ci_low,auc_ci_high,p_vs_all,significant\n";
    IivvSweepResult out;
    for (size_t r = 0; r < order.size(); ++r) {
        const Entry& e = entries[order[r]];
        const bool is_all = !e.choice.is_zthreshold && e.choice.name == "All";
        const TTestResult tt = is_all ? TTestResult{} : paired_auc_test(e.result, all_result);
        nlohmann::ordered_json je;
        je["rank"] = r + 1;
        je["mask"] = mask_choice_to_json(e.choice);
        je["mean_patterns"] = e.mean_mask_size;
        je["metrics"] = eval_to_json(e.result);
        je["vs_all"] = ttest_to_json(tt);
        j["entries"].push_back(std::move(je));
        csv << (r + 1) << "," << e.choice.display() << "," << num_str(e.mean_mask_size) << ","
            << num_str(e.result.mean_auc) << "," << num_str(e.result.auc_ci.ci_low) << ","
            << num_str(e.result.auc_ci.ci_high) << "," << num_str(tt.p) << ","
            << (tt.significant_at_05 ? 1 : 0) << "\n";
        if (out.best_masks.size() < cfg.best_k) out.best_masks.push_back(e.choice);
    }
    nlohmann::ordered_json bm = nlohmann::ordered_json::array();
    for (const auto& m : out.best_masks) bm.push_back(mask_choice_to_json(m));
    j["best_masks"] = bm;

    if (!out_dir.empty()) {
        write_json_file(out_dir + "/iivv_sweep.json", j);
        write_text_file(out_dir + "/iivv_sweep.csv", csv.str());
    }
    out.report = std::move(j);
    return out;
}

// ---------------------------------------------------------------------------
// Combination tuning: best-k frequency sets x best-k masks x per-family
// grids, scored by the tuning metric with macro averaging.
// ---------------------------------------------------------------------------

struct Winner {
    ModelKind model = ModelKind::SVM;
    HyperParams params;
    MaskChoice mask;
    size_t f_t = 0;
    double score = 0.0;
    double n_input = 0.0;
};

inline nlohmann::ordered_json winner_to_json(const Winner& w) {
    nlohmann::ordered_json j;
    j["model"] = to_string(w.model);
    j["params"] = w.params.describe();
    nlohmann::ordered_json hp;
    hp["model"] = to_string(w.model);
    switch (w.model) {
        case ModelKind::SVM:
            hp["kernel"] = to_string(w.params.kernel);
            hp["C"] = w.params.svm_c;
            break;
        case ModelKind::RF:
            hp["n_trees"] = w.params.n_trees;
            hp["max_depth"] = w.params.max_depth;
            hp["max_features_fraction"] = w.params.max_features_fraction;
            break;
        case ModelKind::LR:
            hp["C"] = w.params.lr_c;
            hp["max_iterations"] = w.params.max_iterations;
            break;
    }
    j["hyperparams"] = hp;
    j["mask"] = mask_choice_to_json(w.mask);
    j["f_T"] = w.f_t;
    j["score"] = w.score;
    j["n_input"] = w.n_input;
    return j;
}

struct TuningResult {
    nlohmann::ordered_json report;
    std::vector<Winner> family_winners;
    Winner overall;
};

inline TuningResult run_combination_tuning(const Workbench& wb, const ExperimentConfig& cfg,
                                           const std::string& out_dir,
                                           const std::vector<size_t>& best_f_t,
                                           const std::vector<MaskChoice>& best_masks) {
    validate(!best_f_t.empty(), "tuning needs candidate f_T values");
    validate(!best_masks.empty(), "tuning needs candidate masks");
    StageContext ctx(wb, cfg, cfg.trials_tuning);
    ctx.precompute_rankings();

    TuningResult out;
    nlohmann::ordered_json trace = nlohmann::ordered_json::array();
    bool have_overall = false;

    for (const ModelKind kind : cfg.models) {
        const auto grid = cfg.grids.expand(kind, default_params(cfg, kind));
        Winner family;
        bool have_family = false;
        for (const MaskChoice& mask : best_masks) {
            for (const size_t f_t : best_f_t) {
                FreqChoice fc;
                fc.use_ranking = true;
                fc.f_t = f_t;
                for (const HyperParams& hp : grid) {
                    const EvalResult r = evaluate_config(wb, cfg, ctx, cfg.trials_tuning, mask,
                                                         fc, hp, Averaging::Macro);
                    double sz = 0;
                    for (const auto& f : r.folds) sz += double(f.mask_size);
                    sz /= double(r.folds.size());
                    const double score = r.metric_value(cfg.tuning_metric);
                    nlohmann::ordered_json te;
                    te["model"] = to_string(kind);
                    te["params"] = hp.describe();
                    te["mask"] = mask.display();
                    te["f_T"] = f_t;
                    te["score"] = score;
                    te["auc"] = r.mean_auc;
                    te["accuracy"] = r.mean_accuracy;
                    te["f1"] = r.mean_f1;
                    trace.push_back(std::move(te));
                    if (!have_family || score > family.score) {
                        family = Winner{kind, hp, mask, f_t, score, sz * double(f_t)};
                        have_family = true;
                    }
                }
            }
        }
        require(have_family, "tuning produced no result for a model family");
        out.family_winners.push_back(family);
        if (!have_overall || family.score > out.overall.score) {
            out.overall = family;
            have_overall = true;
        }
    }

    nlohmann::ordered_json j;
    j["stage"] = "tuning";
    j["task"] = cfg.task;
    j["trials"] = cfg.trials_tuning;
    j["tuning_metric"] = to_string(cfg.tuning_metric);
    j["candidate_f_t"] = best_f_t;
    nlohmann::ordered_json cm = nlohmann::ordered_json::array();
    for (const auto& m : best_masks) cm.push_back(mask_choice_to_json(m));
    j["candidate_masks"] = cm;
    j["n_evaluations"] = trace.size();
    j["trace"] = trace;
    nlohmann::ordered_json fw = nlohmann::ordered_json::array();
    for (const auto& w : out.family_winners) fw.push_back(winner_to_json(w));
    j["family_winners"] = fw;
    j["winner"] = winner_to_json(out.overall);
    if (!out_dir.empty()) write_json_file(out_dir + "/tuning.json", j);
    out.report = std::move(j);
    return out;
}

// ---------------------------------------------------------------------------
// Final evaluation: fresh 5-fold LOPGO on the winner, pooled out-of-fold
// probabilities, Table-style summary plus per-class ROC CSVs.
// ---------------------------------------------------------------------------

inline nlohmann::ordered_json run_final_evaluation(const Workbench& wb,
                                                   const ExperimentConfig& cfg,
                                                   const std::string& out_dir,
                                                   const Winner& winner) {
    StageContext ctx(wb, cfg, 1, "folds-final");
    FreqChoice fc;
    if (winner.f_t > 0 && winner.f_t < wb.n_freq()) {
        ctx.precompute_rankings();
        fc.use_ranking = true;
        fc.f_t = winner.f_t;
    }
    const EvalResult r = evaluate_config(wb, cfg, ctx, 1, winner.mask, fc, winner.params,
                                         Averaging::Micro, /*keep_proba=*/true);

    // pool out-of-fold predictions in fold order
    const size_t k = wb.task.classes.size();
    std::vector<int> y_true;
    Matrix proba;
    {
        size_t rows = 0;
        for (const auto& f : r.folds) rows += f.y_true.size();
        proba = Matrix(rows, k);
        size_t at = 0;
        for (const auto& f : r.folds) {
            for (size_t i = 0; i < f.y_true.size(); ++i) {
                y_true.push_back(f.y_true[i]);
                for (size_t c = 0; c < k; ++c) proba(at, c) = f.proba(i, c);
                ++at;
            }
        }
    }
    std::vector<int> y_pred(y_true.size());
    for (size_t i = 0; i < y_true.size(); ++i) {
        size_t best = 0;
        for (size_t c = 1; c < k; ++c)
            if (proba(i, c) > proba(i, best)) best = c;
        y_pred[i] = int(best);
    }

    const ConfusionMatrix cm = confusion_matrix(y_true, y_pred, k);
    Prf prf;
    double auc_pooled;
    if (k == 2) {
        prf = precision_recall_f1_accuracy(y_true, y_pred, 1);
        std::vector<double> s(proba.rows());
        for (size_t i = 0; i < proba.rows(); ++i) s[i] = proba(i, 1);
        auc_pooled = roc_auc(s, y_true, 1).auc;
    } else {
        prf = micro_prf(cm);
        auc_pooled = multiclass_auc(proba, y_true, Averaging::Micro);
    }

    nlohmann::ordered_json j;
    j["stage"] = "final";
    j["task"] = cfg.task;
    j["winner"] = winner_to_json(winner);
    j["n_samples"] = y_true.size();
    j["pooled"] = {{"accuracy", prf.accuracy},
                   {"f1", prf.f1},
                   {"auc", auc_pooled},
                   {"recall", prf.recall},
                   {"precision", prf.precision}};
    j["per_fold"] = eval_to_json(r);
    nlohmann::ordered_json cj = nlohmann::ordered_json::array();
    for (size_t t = 0; t < k; ++t) {
        nlohmann::ordered_json row = nlohmann::ordered_json::array();
        for (size_t p = 0; p < k; ++p) row.push_back(cm.at(t, p));
        cj.push_back(std::move(row));
    }
    j["confusion"] = cj;
    nlohmann::ordered_json classes = nlohmann::ordered_json::array();
    for (const Category c : wb.task.classes) classes.push_back(to_string(c));
    j["classes"] = classes;

    if (!out_dir.empty()) {
        write_json_file(out_dir + "/report.json", j);
        // confusion CSV
        std::ostringstream ccsv;
        ccsv << "true\\pred";
        for (const Category c : wb.task.classes) ccsv << "," << to_string(c);
        ccsv << "\n";
        for (size_t t = 0; t < k; ++t) {
            ccsv << to_string(wb.task.classes[t]);
            for (size_t p = 0; p < k; ++p) ccsv << "," << cm.at(t, p);
            ccsv << "\n";
        }
        write_text_file(out_dir + "/confusion.csv", ccsv.str());
        // per-class (and micro) ROC curves from pooled probabilities
        auto write_roc = [&](const std::string& name, const std::vector<double>& s,
                             const std::vector<int>& yb) {
            const RocResult roc = roc_auc(s, yb, 1);
            std::ostringstream rc;
            rc << "fpr,tpr,threshold\n";
            for (const RocPoint& pt : roc.points)
                rc << num_str(pt.fpr) << "," << num_str(pt.tpr) << "," << num_str(pt.threshold)
                   << "\n";
            write_text_file(out_dir + "/roc_" + name + ".csv", rc.str());
        };
        for (size_t c = 0; c < k; ++c) {
            std::vector<double> s(proba.rows());
            std::vector<int> yb(proba.rows());
            bool pos = false, neg = false;
            for (size_t i = 0; i < proba.rows(); ++i) {
                s[i] = proba(i, c);
                yb[i] = y_true[i] == int(c) ? 1 : 0;
                (yb[i] ? pos : neg) = true;
            }
            if (pos && neg) write_roc(to_string(wb.task.classes[c]), s, yb);
        }
        if (k > 2) {
            std::vector<double> s;
            std::vector<int> yb;
            for (size_t c = 0; c < k; ++c)
                for (size_t i = 0; i < proba.rows(); ++i) {
                    s.push_back(proba(i, c));
                    yb.push_back(y_true[i] == int(c) ? 1 : 0);
                }
            write_roc("micro", s, yb);
        }
    }
    return j;
}

// ---------------------------------------------------------------------------
// Full schedule: baseline -> frequency sweep -> IIVV sweep -> 16-combination
// tuning -> final evaluation, all under one output directory.
// ---------------------------------------------------------------------------

inline nlohmann::ordered_json run_full_schedule(const Workbench& wb, const ExperimentConfig& cfg,
                                                const std::string& out_dir) {
    nlohmann::ordered_json summary;
    summary["task"] = cfg.task;
    summary["seed"] = cfg.seed;
    summary["baseline"] = run_baseline(wb, cfg, out_dir);
    FrequencySweepResult fsweep = run_frequency_sweep(wb, cfg, out_dir);
    summary["frequency_sweep"] = {{"best_f_t", fsweep.best_f_t},
                                  {"composite", fsweep.composite_1based}};
    IivvSweepResult isweep = run_iivv_sweep(wb, cfg, out_dir);
    nlohmann::ordered_json bm = nlohmann::ordered_json::array();
    for (const auto& m : isweep.best_masks) bm.push_back(mask_choice_to_json(m));
    summary["iivv_sweep"] = {{"best_masks", bm}};
    const TuningResult tuning = run_combination_tuning(wb, cfg, out_dir, fsweep.best_f_t,
                                                       isweep.best_masks);
    summary["winner"] = winner_to_json(tuning.overall);
    summary["final"] = run_final_evaluation(wb, cfg, out_dir, tuning.overall);
    if (!out_dir.empty()) write_json_file(out_dir + "/summary.json", summary);
    return summary;
}

} // namespace impedscope
