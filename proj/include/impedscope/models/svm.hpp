#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <vector>

#include "impedscope/matrix.hpp"
#include "impedscope/models/common.hpp"
#include "impedscope/rng.hpp"

namespace impedscope {

struct KernelParams {
    Kernel kernel = Kernel::Rbf;
    double gamma = 1.0;
    double coef0 = 0.0;
    int degree = 3;
};

inline double kernel_eval(const KernelParams& kp, const double* a, const double* b, size_t d) {
    switch (kp.kernel) {
        case Kernel::Linear: {
            double dot = 0.0;
            for (size_t j = 0; j < d; ++j) dot += a[j] * b[j];
            return dot;
        }
        case Kernel::Poly: {
            double dot = 0.0;
            for (size_t j = 0; j < d; ++j) dot += a[j] * b[j];
            return std::pow(kp.gamma * dot + kp.coef0, kp.degree);
        }
        case Kernel::Rbf: {
            double ss = 0.0;
            for (size_t j = 0; j < d; ++j) {
                const double diff = a[j] - b[j];
                ss += diff * diff;
            }
            return std::exp(-kp.gamma * ss);
        }
        case Kernel::Sigmoid: {
            double dot = 0.0;
            for (size_t j = 0; j < d; ++j) dot += a[j] * b[j];
            return std::tanh(kp.gamma * dot + kp.coef0);
        }
    }
    return 0.0;
}

/// "scale" gamma: 1 / (n_features * var(X)) with the population variance of
/// all matrix entries; degenerates to 1/n_features for constant data.
inline double gamma_scale(const Matrix& x) {
    double mean = 0.0;
    for (const double v : x.data()) mean += v;
    mean /= double(x.data().size());
    double var = 0.0;
    for (const double v : x.data()) var += (v - mean) * (v - mean);
    var /= double(x.data().size());
    return var > 1e-30 ? 1.0 / (double(x.cols()) * var) : 1.0 / double(x.cols());
}

namespace detail {

/// One binary soft-margin problem solved by SMO with maximal-violating-pair
/// working-set selection on the full kernel matrix (training sets here are
/// hundreds of rows, so caching everything is the simple fast path).
struct BinarySvm {
    std::vector<double> alpha_y;  // alpha_i * y_i for support vectors
    std::vector<size_t> sv_rows;  // rows of the training matrix kept as SVs
    double bias = 0.0;
    bool converged = true;

    static BinarySvm solve(const Matrix& x, const std::vector<int8_t>& y, double c,
                           const KernelParams& kp) {
        const size_t n = x.rows();
        Matrix k(n, n);
        for (size_t i = 0; i < n; ++i)
            for (size_t j = i; j < n; ++j) {
                const double v = kernel_eval(kp, x.row_ptr(i), x.row_ptr(j), x.cols());
                k(i, j) = v;
                k(j, i) = v;
            }

        std::vector<double> alpha(n, 0.0);
        std::vector<double> grad(n, -1.0);  // G = Q*alpha - 1, Q_ij = y_i y_j K_ij
        const double eps = 1e-3;
        const size_t max_iter = 10000 + 2000 * n;

        BinarySvm model;
        size_t iter = 0;
        for (; iter < max_iter; ++iter) {
            // i maximizes -y G over I_up, j minimizes -y G over I_low
            double m_up = -std::numeric_limits<double>::infinity();
            double m_low = std::numeric_limits<double>::infinity();
            size_t i_up = n, i_low = n;
            for (size_t t = 0; t < n; ++t) {
                const double v = -double(y[t]) * grad[t];
                const bool in_up = (y[t] > 0 && alpha[t] < c) || (y[t] < 0 && alpha[t] > 0);
                const bool in_low = (y[t] < 0 && alpha[t] < c) || (y[t] > 0 && alpha[t] > 0);
                if (in_up && v > m_up) {
                    m_up = v;
                    i_up = t;
                }
                if (in_low && v < m_low) {
                    m_low = v;
                    i_low = t;
                }
            }
            if (i_up == n || i_low == n || m_up - m_low < eps) break;

            const size_t i = i_up, j = i_low;
            double quad = k(i, i) + k(j, j) - 2.0 * k(i, j);
            if (quad <= 0) quad = 1e-12;
            double step = (m_up - m_low) / quad;
            // box limits along the feasible direction
            step = std::min(step, y[i] > 0 ? c - alpha[i] : alpha[i]);
            step = std::min(step, y[j] > 0 ? alpha[j] : c - alpha[j]);
            if (step <= 0) break;
            const double d_alpha_i = double(y[i]) * step;
            const double d_alpha_j = -double(y[j]) * step;
            alpha[i] = std::clamp(alpha[i] + d_alpha_i, 0.0, c);
            alpha[j] = std::clamp(alpha[j] + d_alpha_j, 0.0, c);
            // dG_t = Q_ti dalpha_i + Q_tj dalpha_j with Q_ts = y_t y_s K_ts
            for (size_t t = 0; t < n; ++t)
                grad[t] += double(y[t]) * (double(y[i]) * k(t, i) * d_alpha_i +
                                           double(y[j]) * k(t, j) * d_alpha_j);
        }
        model.converged = iter < max_iter;

        // bias from free vectors, midpoint fallback
        double sum = 0.0;
        size_t free_count = 0;
        double m_up = -std::numeric_limits<double>::infinity();
        double m_low = std::numeric_limits<double>::infinity();
        for (size_t t = 0; t < n; ++t) {
            const double v = -double(y[t]) * grad[t];
            if (alpha[t] > 0 && alpha[t] < c) {
                sum += v;
                ++free_count;
            }
            const bool in_up = (y[t] > 0 && alpha[t] < c) || (y[t] < 0 && alpha[t] > 0);
            const bool in_low = (y[t] < 0 && alpha[t] < c) || (y[t] > 0 && alpha[t] > 0);
            if (in_up) m_up = std::max(m_up, v);
            if (in_low) m_low = std::min(m_low, v);
        }
        model.bias = free_count ? sum / double(free_count) : 0.5 * (m_up + m_low);

        for (size_t t = 0; t < n; ++t)
            if (alpha[t] > 0) {
                model.sv_rows.push_back(t);
                model.alpha_y.push_back(alpha[t] * double(y[t]));
            }
        return model;
    }

    double decision(const Matrix& train, const KernelParams& kp, const double* row,
                    size_t d) const {
        double f = bias;
        for (size_t s = 0; s < sv_rows.size(); ++s)
            f += alpha_y[s] * kernel_eval(kp, train.row_ptr(sv_rows[s]), row, d);
        return f;
    }
};

/// Platt sigmoid P(y=1|f) = 1/(1+exp(A f + B)) fitted by the standard
/// regularized Newton iteration on held-out decision values.
struct PlattSigmoid {
    double a = 0.0, b = 0.0;

    double operator()(double f) const {
        const double z = a * f + b;
        return z >= 0 ? std::exp(-z) / (1.0 + std::exp(-z)) : 1.0 / (1.0 + std::exp(z));
    }

    static PlattSigmoid fit(const std::vector<double>& decision, const std::vector<int8_t>& y) {
        const size_t n = decision.size();
        double prior1 = 0, prior0 = 0;
        for (const int8_t v : y) (v > 0 ? prior1 : prior0) += 1.0;
        const double hi = (prior1 + 1.0) / (prior1 + 2.0);
        const double lo = 1.0 / (prior0 + 2.0);
        std::vector<double> t(n);
        for (size_t i = 0; i < n; ++i) t[i] = y[i] > 0 ? hi : lo;

        PlattSigmoid s;
        s.a = 0.0;
        s.b = std::log((prior0 + 1.0) / (prior1 + 1.0));
        double fval = 0.0;
        auto objective = [&](double a, double b) {
            double obj = 0.0;
            for (size_t i = 0; i < n; ++i) {
                const double z = decision[i] * a + b;
                if (z >= 0) obj += t[i] * z + std::log(1.0 + std::exp(-z));
                else obj += (t[i] - 1.0) * z + std::log(1.0 + std::exp(z));
            }
            return obj;
        };
        fval = objective(s.a, s.b);
        const double sigma = 1e-12;
        for (int it = 0; it < 100; ++it) {
            double h11 = sigma, h22 = sigma, h21 = 0, g1 = 0, g2 = 0;
            for (size_t i = 0; i < n; ++i) {
                const double z = decision[i] * s.a + s.b;
                double p, q;
                if (z >= 0) {
                    p = std::exp(-z) / (1.0 + std::exp(-z));
                    q = 1.0 / (1.0 + std::exp(-z));
                } else {
                    p = 1.0 / (1.0 + std::exp(z));
                    q = std::exp(z) / (1.0 + std::exp(z));
                }
                const double d2 = p * q;
                h11 += decision[i] * decision[i] * d2;
                h22 += d2;
                h21 += decision[i] * d2;
                const double d1 = t[i] - p;
                g1 += decision[i] * d1;
                g2 += d1;
            }
            if (std::abs(g1) < 1e-5 && std::abs(g2) < 1e-5) break;
            const double det = h11 * h22 - h21 * h21;
            const double da = -(h22 * g1 - h21 * g2) / det;
            const double db = -(-h21 * g1 + h11 * g2) / det;
            const double gd = g1 * da + g2 * db;
            double step = 1.0;
            while (step >= 1e-10) {
                const double na = s.a + step * da;
                const double nb = s.b + step * db;
                const double nf = objective(na, nb);
                if (nf < fval + 1e-4 * step * gd) {
                    s.a = na;
                    s.b = nb;
                    fval = nf;
                    break;
                }
                step /= 2.0;
            }
            if (step < 1e-10) break;
        }
        return s;
    }
};

} // namespace detail

/// Kernel SVM with one-vs-rest multiclass handling and Platt-calibrated
/// probabilities (fitted on 3-fold internal predictions of decision values;
/// folds are subsample splits seeded from the training seed).
class SvmModel final : public TrainedModel {
public:
    ModelKind kind() const override { return ModelKind::SVM; }
    size_t n_classes() const override { return k_; }
    size_t n_features() const override { return d_; }
    bool converged() const override { return converged_; }

    Matrix predict_proba(const Matrix& x) const override {
        require(x.cols() == d_, "feature count differs from training");
        Matrix p(x.rows(), k_);
        for (size_t i = 0; i < x.rows(); ++i) {
            double sum = 0.0;
            for (size_t c = 0; c < problems_.size(); ++c) {
                const double f = problems_[c].decision(support_, kp_, x.row_ptr(i), d_);
                const double prob = calibrators_[c](f);
                if (k_ == 2) {
                    p(i, 1) = prob;
                    p(i, 0) = 1.0 - prob;
                } else {
                    p(i, c) = prob;
                    sum += prob;
                }
            }
            if (k_ > 2) {
                if (sum <= 1e-300) {
                    for (size_t c = 0; c < k_; ++c) p(i, c) = 1.0 / double(k_);
                } else {
                    for (size_t c = 0; c < k_; ++c) p(i, c) /= sum;
                }
            }
        }
        return p;
    }

    double decision_value(const Matrix& x, size_t row, size_t problem = 0) const {
        return problems_[problem].decision(support_, kp_, x.row_ptr(row), d_);
    }

    void save(std::ostream& out) const override {
        detail::write_model_header(out, ModelKind::SVM);
        detail::write_u64(out, k_);
        detail::write_u64(out, d_);
        const uint8_t conv = converged_ ? 1 : 0;
        detail::write_bytes(out, &conv, 1);
        const uint8_t kern = uint8_t(kp_.kernel);
        detail::write_bytes(out, &kern, 1);
        detail::write_f64(out, kp_.gamma);
        detail::write_f64(out, kp_.coef0);
        detail::write_u32(out, uint32_t(kp_.degree));
        detail::write_u64(out, support_.rows());
        detail::write_f64v(out, support_.data());
        detail::write_u64(out, problems_.size());
        for (size_t c = 0; c < problems_.size(); ++c) {
            detail::write_f64v(out, problems_[c].alpha_y);
            detail::write_u64(out, problems_[c].sv_rows.size());
            for (const size_t s : problems_[c].sv_rows) detail::write_u64(out, s);
            detail::write_f64(out, problems_[c].bias);
            detail::write_f64(out, calibrators_[c].a);
            detail::write_f64(out, calibrators_[c].b);
        }
    }

    static std::unique_ptr<SvmModel> load_body(std::istream& in) {
        auto m = std::make_unique<SvmModel>();
        m->k_ = detail::read_u64(in);
        m->d_ = detail::read_u64(in);
        uint8_t conv, kern;
        detail::read_bytes(in, &conv, 1);
        m->converged_ = conv != 0;
        detail::read_bytes(in, &kern, 1);
        m->kp_.kernel = Kernel(kern);
        m->kp_.gamma = detail::read_f64(in);
        m->kp_.coef0 = detail::read_f64(in);
        m->kp_.degree = int(detail::read_u32(in));
        const size_t rows = detail::read_u64(in);
        auto data = detail::read_f64v(in);
        require(rows == 0 || data.size() % rows == 0, "corrupt svm model");
        m->support_ = Matrix(rows, rows ? data.size() / rows : 0);
        m->support_.data() = std::move(data);
        const size_t np = detail::read_u64(in);
        for (size_t c = 0; c < np; ++c) {
            detail::BinarySvm b;
            b.alpha_y = detail::read_f64v(in);
            const size_t ns = detail::read_u64(in);
            for (size_t s = 0; s < ns; ++s) b.sv_rows.push_back(detail::read_u64(in));
            b.bias = detail::read_f64(in);
            detail::PlattSigmoid ps;
            ps.a = detail::read_f64(in);
            ps.b = detail::read_f64(in);
            m->problems_.push_back(std::move(b));
            m->calibrators_.push_back(ps);
        }
        return m;
    }

    friend std::unique_ptr<SvmModel> fit_svm(const Matrix&, const std::vector<int>&,
                                             const HyperParams&, uint64_t);

private:
    size_t k_ = 0, d_ = 0;
    bool converged_ = true;
    KernelParams kp_;
    Matrix support_;  // training rows (kept whole; SV indices point into it)
    std::vector<detail::BinarySvm> problems_;
    std::vector<detail::PlattSigmoid> calibrators_;
};

inline std::unique_ptr<SvmModel> fit_svm(const Matrix& x, const std::vector<int>& y,
                                         const HyperParams& hp, uint64_t seed) {
    detail::check_training_inputs(x, y);
    const size_t k = size_t(detail::class_count(y));
    const size_t n = x.rows();

    auto model = std::make_unique<SvmModel>();
    model->k_ = k;
    model->d_ = x.cols();
    model->kp_.kernel = hp.kernel;
    model->kp_.coef0 = hp.coef0;
    model->kp_.degree = hp.poly_degree;
    model->kp_.gamma = hp.gamma > 0 ? hp.gamma : gamma_scale(x);
    model->support_ = x;

    const size_t n_problems = k == 2 ? 1 : k;
    // 3-fold internal split for calibration decision values
    std::vector<size_t> perm(n);
    for (size_t i = 0; i < n; ++i) perm[i] = i;
    Rng rng(substream(seed, "platt-folds"));
    rng.shuffle(perm);

    for (size_t c = 0; c < n_problems; ++c) {
        const int positive = k == 2 ? 1 : int(c);
        std::vector<int8_t> yb(n);
        for (size_t i = 0; i < n; ++i) yb[i] = y[i] == positive ? 1 : -1;

        std::vector<double> cal_decision;
        std::vector<int8_t> cal_labels;
        bool internal_ok = true;
        for (int fold = 0; fold < 3 && internal_ok; ++fold) {
            std::vector<size_t> tr, te;
            for (size_t i = 0; i < n; ++i)
                (int(i % 3) == fold ? te : tr).push_back(perm[i]);
            int pos = 0, neg = 0;
            for (const size_t i : tr) (yb[i] > 0 ? pos : neg)++;
            if (pos == 0 || neg == 0 || te.empty()) {
                internal_ok = false;
                break;
            }
            Matrix xt(tr.size(), x.cols());
            std::vector<int8_t> yt(tr.size());
            for (size_t i = 0; i < tr.size(); ++i) {
                std::copy(x.row_ptr(tr[i]), x.row_ptr(tr[i]) + x.cols(), xt.row_ptr(i));
                yt[i] = yb[tr[i]];
            }
            const auto sub = detail::BinarySvm::solve(xt, yt, hp.svm_c, model->kp_);
            for (const size_t i : te) {
                cal_decision.push_back(sub.decision(xt, model->kp_, x.row_ptr(i), x.cols()));
                cal_labels.push_back(yb[i]);
            }
        }

        detail::BinarySvm full = detail::BinarySvm::solve(x, yb, hp.svm_c, model->kp_);
        if (!full.converged) model->converged_ = false;
        if (!internal_ok) {
            // tiny or degenerate folds: calibrate on in-sample decisions
            cal_decision.clear();
            cal_labels.clear();
            for (size_t i = 0; i < n; ++i) {
                cal_decision.push_back(full.decision(x, model->kp_, x.row_ptr(i), x.cols()));
                cal_labels.push_back(yb[i]);
            }
        }
        model->calibrators_.push_back(detail::PlattSigmoid::fit(cal_decision, cal_labels));
        model->problems_.push_back(std::move(full));
    }
    return model;
}

} // namespace impedscope
