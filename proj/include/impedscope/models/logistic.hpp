#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <memory>
#include <vector>

#include "impedscope/matrix.hpp"
#include "impedscope/models/common.hpp"

namespace impedscope {

// Softmax logistic regression minimizing
//   J(W, b) = sum_i -log p(y_i | x_i) + ||W||^2 / (2C)
// by full-batch L-BFGS. C follows the inverse-regularization convention
// (penalty weight 1/C); the bias is unpenalized. Parameters are packed as
// [W row-major (k x d), b (k)].

inline void lr_softmax_row(const double* logits, size_t k, double* out) {
    double mx = logits[0];
    for (size_t c = 1; c < k; ++c) mx = std::max(mx, logits[c]);
    double sum = 0.0;
    for (size_t c = 0; c < k; ++c) {
        out[c] = std::exp(logits[c] - mx);
        sum += out[c];
    }
    for (size_t c = 0; c < k; ++c) out[c] /= sum;
}

inline double lr_loss(const std::vector<double>& params, const Matrix& x,
                      const std::vector<int>& y, size_t k, double c_inv_reg) {
    const size_t n = x.rows(), d = x.cols();
    std::vector<double> logits(k), probs(k);
    double loss = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double* row = x.row_ptr(i);
        for (size_t c = 0; c < k; ++c) {
            double z = params[k * d + c];  // bias
            const double* w = params.data() + c * d;
            for (size_t j = 0; j < d; ++j) z += w[j] * row[j];
            logits[c] = z;
        }
        lr_softmax_row(logits.data(), k, probs.data());
        loss -= std::log(std::max(probs[size_t(y[i])], 1e-300));
    }
    double reg = 0.0;
    for (size_t c = 0; c < k; ++c)
        for (size_t j = 0; j < d; ++j) reg += params[c * d + j] * params[c * d + j];
    return loss + reg / (2.0 * c_inv_reg);
}

/// Gradient of the regularized negative log-likelihood; the weight block
/// carries the extra w/C term, biases do not.
inline std::vector<double> lr_gradient(const std::vector<double>& params, const Matrix& x,
                                       const std::vector<int>& y, size_t k, double c_inv_reg) {
    const size_t n = x.rows(), d = x.cols();
    std::vector<double> grad(params.size(), 0.0);
    std::vector<double> logits(k), probs(k);
    for (size_t i = 0; i < n; ++i) {
        const double* row = x.row_ptr(i);
        for (size_t c = 0; c < k; ++c) {
            double z = params[k * d + c];
            const double* w = params.data() + c * d;
            for (size_t j = 0; j < d; ++j) z += w[j] * row[j];
            logits[c] = z;
        }
        lr_softmax_row(logits.data(), k, probs.data());
        for (size_t c = 0; c < k; ++c) {
            const double err = probs[c] - (y[i] == int(c) ? 1.0 : 0.0);
            double* g = grad.data() + c * d;
            for (size_t j = 0; j < d; ++j) g[j] += err * row[j];
            grad[k * d + c] += err;
        }
    }
    for (size_t c = 0; c < k; ++c)
        for (size_t j = 0; j < d; ++j) grad[c * d + j] += params[c * d + j] / c_inv_reg;
    return grad;
}

class LogisticModel final : public TrainedModel {
public:
    LogisticModel(std::vector<double> params, size_t k, size_t d, bool converged)
        : params_(std::move(params)), k_(k), d_(d), converged_(converged) {}

    ModelKind kind() const override { return ModelKind::LR; }
    size_t n_classes() const override { return k_; }
    size_t n_features() const override { return d_; }
    bool converged() const override { return converged_; }

    Matrix predict_proba(const Matrix& x) const override {
        require(x.cols() == d_, "feature count differs from training");
        Matrix p(x.rows(), k_);
        std::vector<double> logits(k_);
        for (size_t i = 0; i < x.rows(); ++i) {
            const double* row = x.row_ptr(i);
            for (size_t c = 0; c < k_; ++c) {
                double z = params_[k_ * d_ + c];
                const double* w = params_.data() + c * d_;
                for (size_t j = 0; j < d_; ++j) z += w[j] * row[j];
                logits[c] = z;
            }
            lr_softmax_row(logits.data(), k_, p.row_ptr(i));
        }
        return p;
    }

    void save(std::ostream& out) const override {
        detail::write_model_header(out, ModelKind::LR);
        detail::write_u64(out, k_);
        detail::write_u64(out, d_);
        const uint8_t conv = converged_ ? 1 : 0;
        detail::write_bytes(out, &conv, 1);
        detail::write_f64v(out, params_);
    }

    static std::unique_ptr<LogisticModel> load_body(std::istream& in) {
        const size_t k = detail::read_u64(in);
        const size_t d = detail::read_u64(in);
        uint8_t conv;
        detail::read_bytes(in, &conv, 1);
        auto params = detail::read_f64v(in);
        require(params.size() == k * d + k, "corrupt logistic model");
        return std::make_unique<LogisticModel>(std::move(params), k, d, conv != 0);
    }

    const std::vector<double>& params() const { return params_; }

private:
    std::vector<double> params_;
    size_t k_ = 0, d_ = 0;
    bool converged_ = true;
};

/// L-BFGS (m = 10, Armijo backtracking) on the packed parameter vector.
/// Deterministic: no randomness anywhere in the solve.
inline std::unique_ptr<LogisticModel> fit_logistic(const Matrix& x, const std::vector<int>& y,
                                                   const HyperParams& hp) {
    detail::check_training_inputs(x, y);
    const size_t k = size_t(detail::class_count(y));
    const size_t d = x.cols();
    std::vector<double> w(k * d + k, 0.0);

    const size_t mem = 10;
    std::deque<std::vector<double>> s_hist, y_hist;
    std::deque<double> rho_hist;

    double loss = lr_loss(w, x, y, k, hp.lr_c);
    std::vector<double> grad = lr_gradient(w, x, y, k, hp.lr_c);
    auto norm2 = [](const std::vector<double>& v) {
        double s = 0.0;
        for (const double a : v) s += a * a;
        return std::sqrt(s);
    };
    const double g0 = norm2(grad);
    bool converged = g0 <= hp.lr_tolerance;

    for (int iter = 0; iter < hp.max_iterations && !converged; ++iter) {
        // two-loop recursion
        std::vector<double> q = grad;
        std::vector<double> alpha(s_hist.size());
        for (size_t h = s_hist.size(); h-- > 0;) {
            double dot = 0.0;
            for (size_t j = 0; j < q.size(); ++j) dot += s_hist[h][j] * q[j];
            alpha[h] = rho_hist[h] * dot;
            for (size_t j = 0; j < q.size(); ++j) q[j] -= alpha[h] * y_hist[h][j];
        }
        double scale = 1.0;
        if (!s_hist.empty()) {
            double sy = 0.0, yy = 0.0;
            for (size_t j = 0; j < q.size(); ++j) {
                sy += s_hist.back()[j] * y_hist.back()[j];
                yy += y_hist.back()[j] * y_hist.back()[j];
            }
            if (yy > 0) scale = sy / yy;
        }
        for (double& v : q) v *= scale;
        for (size_t h = 0; h < s_hist.size(); ++h) {
            double dot = 0.0;
            for (size_t j = 0; j < q.size(); ++j) dot += y_hist[h][j] * q[j];
            const double beta = rho_hist[h] * dot;
            for (size_t j = 0; j < q.size(); ++j) q[j] += (alpha[h] - beta) * s_hist[h][j];
        }
        // q is now the ascent direction estimate; step along -q
        double dir_dot_grad = 0.0;
        for (size_t j = 0; j < q.size(); ++j) dir_dot_grad += q[j] * grad[j];
        if (dir_dot_grad <= 0) {  // not a descent direction; fall back to steepest
            q = grad;
            dir_dot_grad = norm2(grad);
            dir_dot_grad *= dir_dot_grad;
        }

        double step = 1.0;
        std::vector<double> w_new(w.size());
        double loss_new = loss;
        bool accepted = false;
        for (int ls = 0; ls < 40; ++ls) {
            for (size_t j = 0; j < w.size(); ++j) w_new[j] = w[j] - step * q[j];
            loss_new = lr_loss(w_new, x, y, k, hp.lr_c);
            if (loss_new <= loss - 1e-4 * step * dir_dot_grad) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;

        std::vector<double> grad_new = lr_gradient(w_new, x, y, k, hp.lr_c);
        std::vector<double> s_vec(w.size()), y_vec(w.size());
        double sy = 0.0;
        for (size_t j = 0; j < w.size(); ++j) {
            s_vec[j] = w_new[j] - w[j];
            y_vec[j] = grad_new[j] - grad[j];
            sy += s_vec[j] * y_vec[j];
        }
        if (sy > 1e-12) {
            s_hist.push_back(std::move(s_vec));
            y_hist.push_back(std::move(y_vec));
            rho_hist.push_back(1.0 / sy);
            if (s_hist.size() > mem) {
                s_hist.pop_front();
                y_hist.pop_front();
                rho_hist.pop_front();
            }
        }
        w = std::move(w_new);
        loss = loss_new;
        grad = std::move(grad_new);
        if (norm2(grad) <= hp.lr_tolerance * std::max(1.0, g0)) converged = true;
    }
    return std::make_unique<LogisticModel>(std::move(w), k, d, converged);
}

} // namespace impedscope
