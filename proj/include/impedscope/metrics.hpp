#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "impedscope/common.hpp"
#include "impedscope/matrix.hpp"

namespace impedscope {

struct BinaryCounts {
    size_t tp = 0, fp = 0, fn = 0, tn = 0;
};

inline BinaryCounts count_binary(const std::vector<int>& y_true, const std::vector<int>& y_pred,
                                 int positive_class) {
    require(y_true.size() == y_pred.size() && !y_true.empty(), "label vectors disagree");
    BinaryCounts c;
    for (size_t i = 0; i < y_true.size(); ++i) {
        const bool t = y_true[i] == positive_class;
        const bool p = y_pred[i] == positive_class;
        if (t && p) ++c.tp;
        else if (!t && p) ++c.fp;
        else if (t && !p) ++c.fn;
        else ++c.tn;
    }
    return c;
}

struct Prf {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double accuracy = 0.0;
    bool degenerate = false;  // some denominator was zero and the metric was pinned to 0
};

/// P = TP/(TP+FP), R = TP/(TP+FN), F1 = 2TP/(2TP+FP+FN). Zero denominators
/// define the metric as 0 and set the degenerate flag.
inline Prf precision_recall_f1_accuracy(const std::vector<int>& y_true,
                                        const std::vector<int>& y_pred, int positive_class) {
    const BinaryCounts c = count_binary(y_true, y_pred, positive_class);
    Prf m;
    if (c.tp + c.fp) m.precision = double(c.tp) / double(c.tp + c.fp);
    else m.degenerate = true;
    if (c.tp + c.fn) m.recall = double(c.tp) / double(c.tp + c.fn);
    else m.degenerate = true;
    if (2 * c.tp + c.fp + c.fn) m.f1 = double(2 * c.tp) / double(2 * c.tp + c.fp + c.fn);
    else m.degenerate = true;
    m.accuracy = double(c.tp + c.tn) / double(y_true.size());
    return m;
}

struct RocPoint {
    double fpr = 0.0, tpr = 0.0, threshold = 0.0;
};

struct RocResult {
    std::vector<RocPoint> points;
    double auc = 0.0;
};

/// Threshold-swept ROC with simultaneous steps at tied scores; trapezoidal
/// AUC, equivalent to the rank statistic with half credit for ties.
inline RocResult roc_auc(const std::vector<double>& scores, const std::vector<int>& y_true,
                         int positive_class = 1) {
    require(scores.size() == y_true.size() && !scores.empty(), "scores/labels disagree");
    size_t n_pos = 0, n_neg = 0;
    for (const int y : y_true) (y == positive_class ? n_pos : n_neg)++;
    require(n_pos > 0 && n_neg > 0, "roc_auc needs both classes present");

    std::vector<size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t a, size_t b) { return scores[a] > scores[b]; });

    RocResult res;
    res.points.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
    size_t tp = 0, fp = 0;
    double prev_fpr = 0.0, prev_tpr = 0.0;
    size_t i = 0;
    while (i < order.size()) {
        const double s = scores[order[i]];
        while (i < order.size() && scores[order[i]] == s) {
            (y_true[order[i]] == positive_class ? tp : fp)++;
            ++i;
        }
        const double fpr = double(fp) / double(n_neg);
        const double tpr = double(tp) / double(n_pos);
        res.auc += (fpr - prev_fpr) * (tpr + prev_tpr) * 0.5;
        res.points.push_back({fpr, tpr, s});
        prev_fpr = fpr;
        prev_tpr = tpr;
    }
    return res;
}

enum class Averaging { Micro, Macro };

/// One-vs-rest AUC over class-probability outputs. Micro concatenates the
/// binarized (score, label) pairs of every class; the two-class case reduces
/// to the plain binary AUC of the positive-class probability. Macro averages
/// per-class AUCs, skipping (and flagging) classes absent from y_true.
inline double multiclass_auc(const Matrix& prob, const std::vector<int>& y_true, Averaging mode,
                             std::vector<int>* skipped_classes = nullptr) {
    require(prob.rows() == y_true.size() && prob.rows() > 0, "probability matrix shape mismatch");
    const size_t k = prob.cols();
    require(k >= 2, "need at least two classes");

    if (k == 2) {
        std::vector<double> s(prob.rows());
        for (size_t i = 0; i < prob.rows(); ++i) s[i] = prob(i, 1);
        return roc_auc(s, y_true, 1).auc;
    }

    if (mode == Averaging::Micro) {
        std::vector<double> s;
        std::vector<int> y;
        s.reserve(prob.rows() * k);
        y.reserve(prob.rows() * k);
        for (size_t c = 0; c < k; ++c)
            for (size_t i = 0; i < prob.rows(); ++i) {
                s.push_back(prob(i, c));
                y.push_back(y_true[i] == int(c) ? 1 : 0);
            }
        return roc_auc(s, y, 1).auc;
    }

    double sum = 0.0;
    size_t used = 0;
    for (size_t c = 0; c < k; ++c) {
        const bool present = std::any_of(y_true.begin(), y_true.end(),
                                         [&](int y) { return y == int(c); });
        const bool absent_rest = std::all_of(y_true.begin(), y_true.end(),
                                             [&](int y) { return y == int(c); });
        if (!present || absent_rest) {
            if (skipped_classes) skipped_classes->push_back(int(c));
            continue;
        }
        std::vector<double> s(prob.rows());
        std::vector<int> y(prob.rows());
        for (size_t i = 0; i < prob.rows(); ++i) {
            s[i] = prob(i, c);
            y[i] = y_true[i] == int(c) ? 1 : 0;
        }
        sum += roc_auc(s, y, 1).auc;
        ++used;
    }
    require(used > 0, "macro AUC: no scorable class");
    return sum / double(used);
}

struct ConfusionMatrix {
    size_t k = 0;
    std::vector<size_t> counts;  // row = true class, col = predicted

    explicit ConfusionMatrix(size_t classes = 0) : k(classes), counts(classes * classes, 0) {}
    size_t& at(size_t t, size_t p) { return counts[t * k + p]; }
    size_t at(size_t t, size_t p) const { return counts[t * k + p]; }
    size_t total() const { return std::accumulate(counts.begin(), counts.end(), size_t(0)); }
};

inline ConfusionMatrix confusion_matrix(const std::vector<int>& y_true,
                                        const std::vector<int>& y_pred, size_t k) {
    ConfusionMatrix m(k);
    for (size_t i = 0; i < y_true.size(); ++i) m.at(size_t(y_true[i]), size_t(y_pred[i]))++;
    return m;
}

/// Micro-averaged P/R/F1 pool the per-class TP/FP/FN counts first; for
/// single-label problems they all equal plain accuracy, which is why the
/// multiclass rows of a summary table repeat one value.
inline Prf micro_prf(const ConfusionMatrix& m) {
    size_t tp = 0, fp = 0, fn = 0;
    for (size_t c = 0; c < m.k; ++c) {
        tp += m.at(c, c);
        for (size_t o = 0; o < m.k; ++o)
            if (o != c) {
                fp += m.at(o, c);
                fn += m.at(c, o);
            }
    }
    Prf r;
    r.precision = tp + fp ? double(tp) / double(tp + fp) : 0.0;
    r.recall = tp + fn ? double(tp) / double(tp + fn) : 0.0;
    r.f1 = 2 * tp + fp + fn ? double(2 * tp) / double(2 * tp + fp + fn) : 0.0;
    r.accuracy = m.total() ? double(tp) / double(m.total()) : 0.0;
    return r;
}

inline Prf macro_prf(const std::vector<int>& y_true, const std::vector<int>& y_pred, size_t k) {
    Prf acc;
    size_t used = 0;
    size_t correct = 0;
    for (size_t i = 0; i < y_true.size(); ++i)
        if (y_true[i] == y_pred[i]) ++correct;
    for (size_t c = 0; c < k; ++c) {
        if (std::none_of(y_true.begin(), y_true.end(), [&](int y) { return y == int(c); }))
            continue;
        const Prf p = precision_recall_f1_accuracy(y_true, y_pred, int(c));
        acc.precision += p.precision;
        acc.recall += p.recall;
        acc.f1 += p.f1;
        ++used;
    }
    require(used > 0, "macro metrics: no class present");
    acc.precision /= double(used);
    acc.recall /= double(used);
    acc.f1 /= double(used);
    acc.accuracy = y_true.empty() ? 0.0 : double(correct) / double(y_true.size());
    return acc;
}

} // namespace impedscope
