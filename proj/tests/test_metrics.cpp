#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "impedscope/metrics.hpp"
#include "impedscope/rng.hpp"

using namespace impedscope;

namespace {

// probability that a positive outranks a negative, ties at half credit
double pair_count_auc(const std::vector<double>& s, const std::vector<int>& y) {
    double wins = 0, pairs = 0;
    for (size_t i = 0; i < s.size(); ++i)
        for (size_t j = 0; j < s.size(); ++j) {
            if (y[i] != 1 || y[j] != 0) continue;
            pairs += 1;
            if (s[i] > s[j]) wins += 1;
            else if (s[i] == s[j]) wins += 0.5;
        }
    return wins / pairs;
}

} // namespace

TEST_CASE("precision, recall, F1 from direct counts") {
    // TP=2, FP=1, FN=1
    const std::vector<int> y_true = {1, 1, 1, 0, 0};
    const std::vector<int> y_pred = {1, 1, 0, 1, 0};
    const Prf m = precision_recall_f1_accuracy(y_true, y_pred, 1);
    CHECK(m.precision == Catch::Approx(2.0 / 3.0));
    CHECK(m.recall == Catch::Approx(2.0 / 3.0));
    CHECK(m.f1 == Catch::Approx(2.0 / 3.0));
    CHECK(m.accuracy == Catch::Approx(3.0 / 5.0));
}

TEST_CASE("perfect prediction scores 1 everywhere") {
    const std::vector<int> y = {0, 1, 1, 0, 1};
    const Prf m = precision_recall_f1_accuracy(y, y, 1);
    CHECK(m.precision == 1.0);
    CHECK(m.recall == 1.0);
    CHECK(m.f1 == 1.0);
    CHECK(m.accuracy == 1.0);
}

TEST_CASE("zero denominators pin metrics to zero and flag them") {
    const std::vector<int> y_true = {0, 0, 0};
    const std::vector<int> y_pred = {0, 0, 0};
    const Prf m = precision_recall_f1_accuracy(y_true, y_pred, 1);
    CHECK(m.precision == 0.0);
    CHECK(m.recall == 0.0);
    CHECK(m.degenerate);
    CHECK(m.accuracy == 1.0);
}

TEST_CASE("random label vectors match a confusion-first oracle exactly") {
    Rng rng(21);
    for (int trial = 0; trial < 500; ++trial) {
        const size_t n = 2 + rng.below(40);
        std::vector<int> t(n), p(n);
        for (size_t i = 0; i < n; ++i) {
            t[i] = int(rng.below(2));
            p[i] = int(rng.below(2));
        }
        size_t tp = 0, fp = 0, fn = 0, tn = 0;
        for (size_t i = 0; i < n; ++i) {
            if (t[i] == 1 && p[i] == 1) ++tp;
            if (t[i] == 0 && p[i] == 1) ++fp;
            if (t[i] == 1 && p[i] == 0) ++fn;
            if (t[i] == 0 && p[i] == 0) ++tn;
        }
        const Prf m = precision_recall_f1_accuracy(t, p, 1);
        CHECK(m.precision == (tp + fp ? double(tp) / double(tp + fp) : 0.0));
        CHECK(m.recall == (tp + fn ? double(tp) / double(tp + fn) : 0.0));
        CHECK(m.f1 == (2 * tp + fp + fn ? double(2 * tp) / double(2 * tp + fp + fn) : 0.0));
        CHECK(m.accuracy == double(tp + tn) / double(n));
    }
}

TEST_CASE("ROC basics") {
    CHECK(roc_auc({0.9, 0.8, 0.3, 0.2}, {1, 1, 0, 0}).auc == 1.0);
    CHECK(roc_auc({0.5, 0.5, 0.5, 0.5}, {1, 1, 0, 0}).auc == 0.5);
    CHECK_THROWS(roc_auc({0.1, 0.2}, {1, 1}));
}

TEST_CASE("trapezoid AUC equals the pair-counting oracle with ties") {
    Rng rng(22);
    for (int trial = 0; trial < 200; ++trial) {
        const size_t n = 4 + rng.below(47);
        std::vector<double> s(n);
        std::vector<int> y(n);
        bool pos = false, neg = false;
        for (size_t i = 0; i < n; ++i) {
            s[i] = double(rng.below(8)) / 7.0;  // coarse grid forces ties
            y[i] = int(rng.below(2));
            (y[i] ? pos : neg) = true;
        }
        if (!pos) y[0] = 1;
        if (!neg) y[1] = 0;
        CHECK(std::abs(roc_auc(s, y).auc - pair_count_auc(s, y)) <= 1e-12);
    }
}

TEST_CASE("AUC is invariant under strictly monotone score transforms") {
    Rng rng(23);
    for (int trial = 0; trial < 50; ++trial) {
        const size_t n = 6 + rng.below(30);
        std::vector<double> s(n);
        std::vector<int> y(n);
        for (size_t i = 0; i < n; ++i) {
            s[i] = rng.uniform(-2, 2);
            y[i] = int(rng.below(2));
        }
        y[0] = 1;
        y[1] = 0;
        const double base = roc_auc(s, y).auc;
        std::vector<double> exp_s(n), aff_s(n);
        for (size_t i = 0; i < n; ++i) {
            exp_s[i] = std::exp(s[i]);
            aff_s[i] = 3.5 * s[i] + 11.0;
        }
        CHECK(roc_auc(exp_s, y).auc == Catch::Approx(base).margin(1e-12));
        CHECK(roc_auc(aff_s, y).auc == Catch::Approx(base).margin(1e-12));
    }
}

TEST_CASE("two-class micro AUC reduces to the binary AUC of the positive class") {
    Rng rng(24);
    for (int trial = 0; trial < 20; ++trial) {
        const size_t n = 8 + rng.below(20);
        Matrix p(n, 2);
        std::vector<int> y(n);
        for (size_t i = 0; i < n; ++i) {
            const double q = rng.uniform(0, 1);
            p(i, 1) = q;
            p(i, 0) = 1 - q;
            y[i] = int(rng.below(2));
        }
        y[0] = 1;
        y[1] = 0;
        std::vector<double> s(n);
        for (size_t i = 0; i < n; ++i) s[i] = p(i, 1);
        CHECK(multiclass_auc(p, y, Averaging::Micro) ==
              Catch::Approx(roc_auc(s, y).auc).margin(1e-12));
        CHECK(multiclass_auc(p, y, Averaging::Macro) ==
              Catch::Approx(roc_auc(s, y).auc).margin(1e-12));
    }
}

TEST_CASE("perfect one-hot probabilities give micro = macro = 1") {
    Matrix p(6, 3, 0.0);
    std::vector<int> y = {0, 1, 2, 0, 1, 2};
    for (size_t i = 0; i < 6; ++i) p(i, size_t(y[i])) = 1.0;
    CHECK(multiclass_auc(p, y, Averaging::Micro) == 1.0);
    CHECK(multiclass_auc(p, y, Averaging::Macro) == 1.0);
}

TEST_CASE("three-class micro AUC matches the explicit binarized pair oracle") {
    Rng rng(25);
    for (int trial = 0; trial < 40; ++trial) {
        const size_t n = 6 + rng.below(20);
        Matrix p(n, 3);
        std::vector<int> y(n);
        for (size_t i = 0; i < n; ++i) {
            double a = rng.uniform(0.01, 1), b = rng.uniform(0.01, 1), c = rng.uniform(0.01, 1);
            const double s = a + b + c;
            p(i, 0) = a / s;
            p(i, 1) = b / s;
            p(i, 2) = c / s;
            y[i] = int(rng.below(3));
        }
        y[0] = 0;
        y[1] = 1;
        y[2] = 2;
        std::vector<double> s;
        std::vector<int> yb;
        for (size_t c = 0; c < 3; ++c)
            for (size_t i = 0; i < n; ++i) {
                s.push_back(p(i, c));
                yb.push_back(y[i] == int(c) ? 1 : 0);
            }
        CHECK(multiclass_auc(p, y, Averaging::Micro) ==
              Catch::Approx(pair_count_auc(s, yb)).margin(1e-12));
    }
}

TEST_CASE("macro AUC skips and flags classes absent from the truth") {
    Matrix p(4, 3);
    std::vector<int> y = {0, 1, 0, 1};  // class 2 never appears
    Rng rng(26);
    for (auto& v : p.data()) v = rng.uniform(0, 1);
    std::vector<int> skipped;
    const double macro = multiclass_auc(p, y, Averaging::Macro, &skipped);
    CHECK(skipped == std::vector<int>{2});
    CHECK(macro >= 0.0);
    CHECK(macro <= 1.0);
}

TEST_CASE("micro PRF from the confusion matrix equals accuracy for single-label data") {
    Rng rng(27);
    const size_t n = 60, k = 4;
    std::vector<int> t(n), p(n);
    for (size_t i = 0; i < n; ++i) {
        t[i] = int(rng.below(k));
        p[i] = int(rng.below(k));
    }
    const ConfusionMatrix cm = confusion_matrix(t, p, k);
    CHECK(cm.total() == n);
    const Prf m = micro_prf(cm);
    CHECK(m.precision == Catch::Approx(m.accuracy));
    CHECK(m.recall == Catch::Approx(m.accuracy));
    CHECK(m.f1 == Catch::Approx(m.accuracy));
}
