#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "impedscope/dataset.hpp"
#include "impedscope/experiment.hpp"
#include "impedscope/folds.hpp"
#include "impedscope/masks.hpp"
#include "impedscope/metrics.hpp"
#include "impedscope/models/fit.hpp"
#include "impedscope/parallel.hpp"
#include "impedscope/pca.hpp"
#include "impedscope/preprocess.hpp"
#include "impedscope/ranking.hpp"
#include "impedscope/stats.hpp"

namespace impedscope {

/// Everything the stage runners share, loaded once: geometry, pattern
/// universe, mask registry, and the cleaned task dataset. Immutable after
/// construction; safe to share read-only across workers.
struct Workbench {
    ElectrodeArray array;
    std::unique_ptr<PatternUniverse> universe;
    MaskRegistry registry;
    PathologyVocabulary vocab;
    FilterConfig filter;
    Dataset cleaned;

    TaskSpec task;
    std::vector<size_t> task_samples;  // indices into cleaned.samples
    std::vector<int> labels;           // task class index per task sample
    std::vector<std::string> task_patients;
    MaskSet all_mask;

    static Workbench open(const ExperimentConfig& cfg) {
        Workbench wb;
        wb.array = ElectrodeArray::load(cfg.geometry_path);
        wb.universe = std::make_unique<PatternUniverse>(wb.array);
        if (!cfg.masks_path.empty()) wb.registry = MaskRegistry::load(cfg.masks_path);
        wb.vocab = cfg.pathology_path.empty() ? PathologyVocabulary::defaults()
                                              : PathologyVocabulary::load(cfg.pathology_path);
        wb.filter = cfg.filter_path.empty() ? FilterConfig{} : FilterConfig::load(cfg.filter_path);
        wb.filter.zscore_per_column = cfg.zscore_per_column || wb.filter.zscore_per_column;

        Dataset raw = load_dataset(cfg.dataset_manifest, wb.vocab);
        validate(raw.n_patterns == wb.universe->size(),
                 "dataset pattern universe (" + std::to_string(raw.n_patterns) +
                     ") does not match geometry (" + std::to_string(wb.universe->size()) + ")");
        if (raw.tests_per_sample * raw.bursts_per_test > 1)
            wb.cleaned = preprocess_dataset(raw, wb.filter);
        else
            wb.cleaned = std::move(raw);

        wb.task = TaskSpec::make(cfg.task);
        wb.task_samples = wb.cleaned.task_sample_indices(wb.task);
        validate(!wb.task_samples.empty(), "no samples for task " + std::to_string(cfg.task));
        for (const size_t i : wb.task_samples)
            wb.labels.push_back(wb.task.class_index(wb.cleaned.samples[i].label.category));
        for (const Category c : wb.task.classes) {
            const bool present = std::any_of(wb.task_samples.begin(), wb.task_samples.end(),
                                             [&](size_t i) {
                                                 return wb.cleaned.samples[i].label.category == c;
                                             });
            validate(present, std::string("task class absent from dataset: ") + to_string(c));
        }
        for (const size_t i : wb.task_samples) {
            const std::string& p = wb.cleaned.samples[i].patient_id;
            if (std::find(wb.task_patients.begin(), wb.task_patients.end(), p) ==
                wb.task_patients.end())
                wb.task_patients.push_back(p);
        }
        std::sort(wb.task_patients.begin(), wb.task_patients.end());
        wb.all_mask = wb.registry.has("All")
                          ? wb.registry.build("All", *wb.universe, wb.array)
                          : full_mask(*wb.universe);
        return wb;
    }

    static MaskSet full_mask(const PatternUniverse& u) {
        MaskSet m;
        m.name = "All";
        m.expected_count = u.size();
        m.indices.resize(u.size());
        for (size_t i = 0; i < u.size(); ++i) m.indices[i] = i;
        return m;
    }

    size_t n_freq() const { return cleaned.n_freq(); }
};

/// Mask choice for one evaluation: a named registry mask or a z-threshold
/// split (re-derived from each fold's training samples when per_fold).
struct MaskChoice {
    std::string name = "All";
    bool is_zthreshold = false;
    double threshold_ohm = 0.0;
    ThresholdSide side = ThresholdSide::Below;
    bool per_fold = true;

    std::string display() const {
        if (!is_zthreshold) return name;
        char buf[64];
        std::snprintf(buf, sizeof(buf), "z-threshold %s %.6g",
                      side == ThresholdSide::Below ? "below" : "above", threshold_ohm);
        return buf;
    }
};

/// Per-pattern mean |Z| at the lowest frequency over the given samples,
/// using valid patterns only; patterns valid nowhere get NaN.
inline std::vector<double> pattern_mean_lowfreq_magnitude(const Dataset& cleaned,
                                                          const std::vector<size_t>& samples) {
    std::vector<double> sum(cleaned.n_patterns, 0.0);
    std::vector<size_t> count(cleaned.n_patterns, 0);
    for (const size_t si : samples) {
        const SpectralFrame& fr = cleaned.samples[si].frames.at(0);
        for (size_t p = 0; p < cleaned.n_patterns; ++p) {
            if (!fr.valid[p]) continue;
            const auto z = fr.at(p, 0);
            sum[p] += std::hypot(z.real(), z.imag());
            count[p]++;
        }
    }
    std::vector<double> mean(cleaned.n_patterns);
    for (size_t p = 0; p < cleaned.n_patterns; ++p)
        mean[p] = count[p] ? sum[p] / double(count[p])
                           : std::numeric_limits<double>::quiet_NaN();
    return mean;
}

/// Frequency selection for one evaluation: a fixed subset, or the top f_T of
/// a per-fold training ranking.
struct FreqChoice {
    bool use_ranking = false;
    size_t f_t = 0;                  // when use_ranking
    std::vector<size_t> fixed;       // 0-based, when !use_ranking (empty -> all)
};

struct FoldScore {
    double auc = std::numeric_limits<double>::quiet_NaN();
    double accuracy = 0.0, f1 = 0.0, precision = 0.0, recall = 0.0;
    bool auc_defined = false;
    size_t mask_size = 0;
    std::vector<int> test_rows;          // indices into the task-sample list
    std::vector<int> y_true;
    Matrix proba;                        // test rows x classes
};

struct EvalResult {
    std::vector<FoldScore> folds;        // trial-major: trial * n_folds + fold
    std::vector<double> fold_aucs;       // NaN when undefined
    std::vector<double> trial_mean_auc;
    CiSummary auc_ci;
    double mean_accuracy = 0.0, mean_f1 = 0.0, mean_precision = 0.0, mean_recall = 0.0;
    double mean_auc = 0.0;

    double metric_value(Metric m) const {
        switch (m) {
            case Metric::Auc: return mean_auc;
            case Metric::Accuracy: return mean_accuracy;
            case Metric::F1: return mean_f1;
        }
        return mean_auc;
    }
};

/// Shared per-stage context: fold plans per trial and the training-only
/// frequency rankings per (trial, fold), both precomputed so grid points can
/// reuse them.
class StageContext {
public:
    /// fold_label keys the fold-plan substream: the baseline and both sweeps
    /// share "folds" so their common configurations reproduce each other
    /// bit-exactly; the final evaluation uses a fresh label.
    StageContext(const Workbench& wb, const ExperimentConfig& cfg, int n_trials,
                 std::string_view fold_label = "folds")
        : wb_(wb), cfg_(cfg), n_trials_(n_trials) {
        plans_.reserve(size_t(n_trials));
        for (int t = 0; t < n_trials; ++t)
            plans_.push_back(make_lopgo_folds(wb.task_patients, cfg.n_folds,
                                              substream(cfg.seed, fold_label, uint64_t(t))));
        fold_of_sample_.resize(size_t(n_trials));
        for (int t = 0; t < n_trials; ++t) {
            auto& fos = fold_of_sample_[size_t(t)];
            fos.resize(wb.task_samples.size());
            std::map<std::string, size_t> patient_fold;
            for (size_t f = 0; f < plans_[size_t(t)].fold_patients.size(); ++f)
                for (const auto& p : plans_[size_t(t)].fold_patients[f]) patient_fold[p] = f;
            for (size_t i = 0; i < wb.task_samples.size(); ++i)
                fos[i] = patient_fold.at(wb.cleaned.samples[wb.task_samples[i]].patient_id);
        }
    }

    int n_trials() const { return n_trials_; }
    const FoldPlan& plan(int trial) const { return plans_[size_t(trial)]; }
    size_t fold_of(int trial, size_t task_row) const {
        return fold_of_sample_[size_t(trial)][task_row];
    }

    std::vector<size_t> train_rows(int trial, size_t fold) const {
        std::vector<size_t> rows;
        for (size_t i = 0; i < wb_.task_samples.size(); ++i)
            if (fold_of(trial, i) != fold) rows.push_back(i);
        return rows;
    }
    std::vector<size_t> test_rows(int trial, size_t fold) const {
        std::vector<size_t> rows;
        for (size_t i = 0; i < wb_.task_samples.size(); ++i)
            if (fold_of(trial, i) == fold) rows.push_back(i);
        return rows;
    }

    /// Training-only PCA frequency ranking for (trial, fold), computed over
    /// the full pattern universe and cached. Also records per-fold scores for
    /// the rankings report.
    void precompute_rankings() {
        const size_t total = size_t(n_trials_) * cfg_.n_folds;
        rankings_.resize(total);
        scores_.resize(total);
        retained_.resize(total);
        captured_.resize(total);
        parallel_for(total, cfg_.threads, [&](size_t item) {
            const int trial = int(item / cfg_.n_folds);
            const size_t fold = item % cfg_.n_folds;
            compute_ranking(trial, fold);
        });
        have_rankings_ = true;
    }

    bool have_rankings() const { return have_rankings_; }
    const std::vector<size_t>& ranking(int trial, size_t fold) const {
        return rankings_[size_t(trial) * cfg_.n_folds + fold];
    }
    const std::vector<double>& ranking_scores(int trial, size_t fold) const {
        return scores_[size_t(trial) * cfg_.n_folds + fold];
    }
    int ranking_retained(int trial, size_t fold) const {
        return retained_[size_t(trial) * cfg_.n_folds + fold];
    }
    double ranking_captured(int trial, size_t fold) const {
        return captured_[size_t(trial) * cfg_.n_folds + fold];
    }

    std::vector<size_t> composite_ranking(std::vector<double>* points = nullptr) const {
        require(have_rankings_, "rankings not computed");
        return aggregate_rankings(rankings_, points);
    }

private:
    void compute_ranking(int trial, size_t fold) {
        const auto rows = train_rows(trial, fold);
        std::vector<size_t> all_freqs(wb_.n_freq());
        for (size_t f = 0; f < all_freqs.size(); ++f) all_freqs[f] = f;

        // z-scored spectra of the training rows over the full universe
        std::vector<size_t> sample_ids;
        sample_ids.reserve(rows.size());
        for (const size_t r : rows) sample_ids.push_back(wb_.task_samples[r]);
        FeatureMatrix fm = assemble_features(wb_.cleaned, sample_ids, wb_.all_mask, all_freqs);
        zscore_per_frequency(fm, nullptr, wb_.filter.zscore_per_column);

        const size_t nf = wb_.n_freq();
        const size_t npat = wb_.all_mask.indices.size();
        Matrix obs;
        if (cfg_.pca_sample_rows) {
            obs = Matrix(rows.size(), nf);
            for (size_t r = 0; r < rows.size(); ++r)
                for (size_t f = 0; f < nf; ++f) {
                    double acc = 0.0;
                    for (size_t p = 0; p < npat; ++p) acc += fm.x(r, p * nf + f);
                    obs(r, f) = acc / double(npat);
                }
        } else {
            // one observation per (sample, valid pattern)
            size_t n_obs = 0;
            for (size_t r = 0; r < rows.size(); ++r) {
                const SpectralFrame& fr = wb_.cleaned.samples[sample_ids[r]].frames[0];
                for (size_t p = 0; p < npat; ++p)
                    if (fr.valid[wb_.all_mask.indices[p]]) ++n_obs;
            }
            obs = Matrix(n_obs, nf);
            size_t row = 0;
            for (size_t r = 0; r < rows.size(); ++r) {
                const SpectralFrame& fr = wb_.cleaned.samples[sample_ids[r]].frames[0];
                for (size_t p = 0; p < npat; ++p) {
                    if (!fr.valid[wb_.all_mask.indices[p]]) continue;
                    for (size_t f = 0; f < nf; ++f) obs(row, f) = fm.x(r, p * nf + f);
                    ++row;
                }
            }
        }
        const PcaScores ps = pca_variable_importance(obs, cfg_.pca_components);
        const size_t idx = size_t(trial) * cfg_.n_folds + fold;
        scores_[idx] = ps.scores;
        rankings_[idx] = rank_descending(ps.scores);
        retained_[idx] = ps.retained_components;
        captured_[idx] = ps.captured_variance;
    }

    const Workbench& wb_;
    const ExperimentConfig& cfg_;
    int n_trials_;
    std::vector<FoldPlan> plans_;
    std::vector<std::vector<size_t>> fold_of_sample_;
    std::vector<std::vector<size_t>> rankings_;
    std::vector<std::vector<double>> scores_;
    std::vector<int> retained_;
    std::vector<double> captured_;
    bool have_rankings_ = false;
};

/// Fits and scores one (trial, fold) cell. Pure given its inputs; the stage
/// runners call it from the worker pool with one output slot per cell.
inline FoldScore evaluate_fold(const Workbench& wb, const ExperimentConfig& cfg,
                               const StageContext& ctx, int trial, size_t fold,
                               const MaskChoice& mask_choice, const FreqChoice& freq_choice,
                               const HyperParams& hp, Averaging averaging, bool keep_proba) {
    const auto tr = ctx.train_rows(trial, fold);
    const auto te = ctx.test_rows(trial, fold);
    require(!tr.empty() && !te.empty(), "empty fold split");

    // resolve mask
    MaskSet mask;
    if (!mask_choice.is_zthreshold) {
        mask = mask_choice.name == "All" && !wb.registry.has("All")
                   ? Workbench::full_mask(*wb.universe)
                   : wb.registry.build(mask_choice.name, *wb.universe, wb.array);
    } else {
        std::vector<size_t> basis;
        if (mask_choice.per_fold) {
            basis.reserve(tr.size());
            for (const size_t r : tr) basis.push_back(wb.task_samples[r]);
        } else {
            basis = wb.task_samples;
        }
        const auto means = pattern_mean_lowfreq_magnitude(wb.cleaned, basis);
        mask = build_zthreshold_mask(means, mask_choice.threshold_ohm, mask_choice.side);
        mask.name = mask_choice.display();
        require(!mask.indices.empty(), "z-threshold mask is empty");
    }

    // resolve frequencies
    std::vector<size_t> freqs;
    if (freq_choice.use_ranking) {
        freqs = select_top_frequencies(ctx.ranking(trial, fold), freq_choice.f_t);
    } else if (freq_choice.fixed.empty()) {
        freqs.resize(wb.n_freq());
        for (size_t f = 0; f < freqs.size(); ++f) freqs[f] = f;
    } else {
        freqs = freq_choice.fixed;
    }

    std::vector<size_t> train_ids, test_ids;
    for (const size_t r : tr) train_ids.push_back(wb.task_samples[r]);
    for (const size_t r : te) test_ids.push_back(wb.task_samples[r]);

    FeatureMatrix x_train = assemble_features(wb.cleaned, train_ids, mask, freqs);
    FeatureMatrix x_test = assemble_features(wb.cleaned, test_ids, mask, freqs);
    zscore_per_frequency(x_train, &x_test, wb.filter.zscore_per_column);

    std::vector<int> y_train, y_test;
    for (const size_t r : tr) y_train.push_back(wb.labels[r]);
    for (const size_t r : te) y_test.push_back(wb.labels[r]);

    const uint64_t model_seed = substream(cfg.seed, "model", uint64_t(trial), fold);
    const auto model = fit(x_train.x, y_train, hp, model_seed);
    const Matrix proba = model->predict_proba(x_test.x);
    const std::vector<int> y_pred = model->predict(x_test.x);

    FoldScore score;
    score.mask_size = mask.indices.size();
    const size_t k = wb.task.classes.size();
    const ConfusionMatrix cm = confusion_matrix(y_test, y_pred, k);
    if (k == 2) {
        const Prf prf = precision_recall_f1_accuracy(y_test, y_pred, 1);
        score.accuracy = prf.accuracy;
        score.f1 = prf.f1;
        score.precision = prf.precision;
        score.recall = prf.recall;
        const bool both = std::any_of(y_test.begin(), y_test.end(), [](int y) { return y == 1; }) &&
                          std::any_of(y_test.begin(), y_test.end(), [](int y) { return y == 0; });
        if (both) {
            std::vector<double> s(proba.rows());
            for (size_t i = 0; i < proba.rows(); ++i) s[i] = proba(i, 1);
            score.auc = roc_auc(s, y_test, 1).auc;
            score.auc_defined = true;
        }
    } else {
        const Prf prf = averaging == Averaging::Micro ? micro_prf(cm) : macro_prf(y_test, y_pred, k);
        score.accuracy = prf.accuracy;
        score.f1 = prf.f1;
        score.precision = prf.precision;
        score.recall = prf.recall;
        size_t present = 0;
        for (size_t c = 0; c < k; ++c)
            present += std::any_of(y_test.begin(), y_test.end(),
                                   [&](int y) { return y == int(c); });
        if (present >= 2) {
            score.auc = multiclass_auc(proba, y_test, averaging);
            score.auc_defined = true;
        }
    }
    if (keep_proba) {
        score.proba = proba;
        score.y_true = y_test;
        for (const size_t r : te) score.test_rows.push_back(int(r));
    }
    return score;
}

/// Runs one configuration over trials x folds (parallel across cells) and
/// aggregates: per-trial AUC means, a 95% CI over trial means, and
/// fold-averaged secondary metrics.
inline EvalResult evaluate_config(const Workbench& wb, const ExperimentConfig& cfg,
                                  const StageContext& ctx, int n_trials,
                                  const MaskChoice& mask_choice, const FreqChoice& freq_choice,
                                  const HyperParams& hp, Averaging averaging,
                                  bool keep_proba = false) {
    EvalResult res;
    const size_t cells = size_t(n_trials) * cfg.n_folds;
    res.folds.resize(cells);
    parallel_for(cells, cfg.threads, [&](size_t item) {
        const int trial = int(item / cfg.n_folds);
        const size_t fold = item % cfg.n_folds;
        res.folds[item] = evaluate_fold(wb, cfg, ctx, trial, fold, mask_choice, freq_choice, hp,
                                        averaging, keep_proba);
    });

    res.fold_aucs.resize(cells);
    double acc = 0, f1 = 0, prec = 0, rec = 0;
    for (size_t i = 0; i < cells; ++i) {
        res.fold_aucs[i] = res.folds[i].auc_defined ? res.folds[i].auc
                                                    : std::numeric_limits<double>::quiet_NaN();
        acc += res.folds[i].accuracy;
        f1 += res.folds[i].f1;
        prec += res.folds[i].precision;
        rec += res.folds[i].recall;
    }
    res.mean_accuracy = acc / double(cells);
    res.mean_f1 = f1 / double(cells);
    res.mean_precision = prec / double(cells);
    res.mean_recall = rec / double(cells);

    for (int t = 0; t < n_trials; ++t) {
        double sum = 0;
        size_t n = 0;
        for (size_t f = 0; f < cfg.n_folds; ++f) {
            const double a = res.fold_aucs[size_t(t) * cfg.n_folds + f];
            if (!std::isnan(a)) {
                sum += a;
                ++n;
            }
        }
        res.trial_mean_auc.push_back(n ? sum / double(n)
                                       : std::numeric_limits<double>::quiet_NaN());
    }
    std::vector<double> defined;
    for (const double v : res.trial_mean_auc)
        if (!std::isnan(v)) defined.push_back(v);
    require(!defined.empty(), "AUC undefined in every trial");
    res.auc_ci = mean_ci95(defined);
    res.mean_auc = res.auc_ci.mean;
    return res;
}

/// Paired t-test between two configurations' per-(trial, fold) AUCs; cells
/// where either side is undefined are dropped pairwise.
inline TTestResult paired_auc_test(const EvalResult& a, const EvalResult& b) {
    std::vector<double> va, vb;
    const size_t n = std::min(a.fold_aucs.size(), b.fold_aucs.size());
    for (size_t i = 0; i < n; ++i) {
        if (std::isnan(a.fold_aucs[i]) || std::isnan(b.fold_aucs[i])) continue;
        va.push_back(a.fold_aucs[i]);
        vb.push_back(b.fold_aucs[i]);
    }
    if (va.size() < 2) {
        TTestResult r;
        r.degenerate = true;
        return r;
    }
    return paired_t_test(va, vb);
}

} // namespace impedscope
