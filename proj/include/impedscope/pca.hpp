#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "impedscope/common.hpp"
#include "impedscope/matrix.hpp"

namespace impedscope {

/// Eigendecomposition of a small symmetric matrix by cyclic Jacobi rotations.
/// Returns eigenvalues descending with matching unit-norm eigenvectors
/// (columns of `vectors`). Plenty for the 31x31 covariances this pipeline
/// builds; observation matrices are never decomposed directly.
struct EigenResult {
    std::vector<double> values;
    Matrix vectors;  // column c = eigenvector of values[c]
};

inline EigenResult jacobi_eigen(Matrix a) {
    require(a.rows() == a.cols(), "jacobi_eigen needs a square matrix");
    const size_t n = a.rows();
    Matrix v(n, n, 0.0);
    for (size_t i = 0; i < n; ++i) v(i, i) = 1.0;

    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (size_t p = 0; p < n; ++p)
            for (size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        if (off < 1e-30) break;
        for (size_t p = 0; p < n; ++p) {
            for (size_t q = p + 1; q < n; ++q) {
                if (std::abs(a(p, q)) < 1e-300) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> diag(n);
    for (size_t i = 0; i < n; ++i) diag[i] = a(i, i);
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t x, size_t y) { return diag[x] > diag[y]; });

    EigenResult res;
    res.values.resize(n);
    res.vectors = Matrix(n, n);
    for (size_t c = 0; c < n; ++c) {
        res.values[c] = diag[order[c]];
        for (size_t r = 0; r < n; ++r) res.vectors(r, c) = v(r, order[c]);
    }
    return res;
}

struct PcaScores {
    std::vector<double> scores;       // per variable: sum of squared loadings
    int retained_components = 0;
    double captured_variance = 0.0;   // fraction of total variance in retained PCs
    bool rank_deficient = false;      // fewer usable components than requested
};

/// Importance of each variable as the squared-loading mass it carries in the
/// leading principal components of the column-centered observation matrix.
/// The covariance (population 1/N) is eigendecomposed directly; components
/// with relatively negligible eigenvalues do not count toward the retained
/// set.
inline PcaScores pca_variable_importance(const Matrix& observations, int n_components) {
    const size_t n = observations.rows();
    const size_t d = observations.cols();
    require(n >= 2 && d >= 1, "pca needs at least two observations");

    std::vector<double> mean(d, 0.0);
    for (size_t r = 0; r < n; ++r)
        for (size_t c = 0; c < d; ++c) mean[c] += observations(r, c);
    for (double& m : mean) m /= double(n);

    Matrix cov(d, d, 0.0);
    for (size_t r = 0; r < n; ++r) {
        const double* row = observations.row_ptr(r);
        for (size_t i = 0; i < d; ++i) {
            const double di = row[i] - mean[i];
            for (size_t j = i; j < d; ++j) cov(i, j) += di * (row[j] - mean[j]);
        }
    }
    for (size_t i = 0; i < d; ++i)
        for (size_t j = i; j < d; ++j) {
            cov(i, j) /= double(n);
            cov(j, i) = cov(i, j);
        }

    const EigenResult eig = jacobi_eigen(cov);
    const double total = std::accumulate(eig.values.begin(), eig.values.end(), 0.0);
    const double tol = std::max(total, 0.0) * 1e-12;

    PcaScores out;
    out.scores.assign(d, 0.0);
    const int max_usable = int(std::min<size_t>(d, n - 1));
    int retained = 0;
    double kept = 0.0;
    for (int c = 0; c < max_usable && retained < n_components; ++c) {
        if (eig.values[size_t(c)] <= tol) break;
        for (size_t f = 0; f < d; ++f) {
            const double l = eig.vectors(f, size_t(c));
            out.scores[f] += l * l;
        }
        kept += eig.values[size_t(c)];
        ++retained;
    }
    out.retained_components = retained;
    out.rank_deficient = retained < n_components;
    out.captured_variance = total > 0.0 ? kept / total : 0.0;
    return out;
}

} // namespace impedscope
