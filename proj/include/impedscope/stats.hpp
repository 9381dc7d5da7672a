#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "impedscope/common.hpp"

namespace impedscope {

/// Regularized incomplete beta I_x(a,b) by Lentz continued fraction,
/// converged to ~1e-12. Backs the t-distribution; no external statistics
/// dependency.
inline double incomplete_beta(double a, double b, double x) {
    require(a > 0 && b > 0, "incomplete_beta parameters must be positive");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;

    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log(1.0 - x);
    auto cont_frac = [](double aa, double bb, double xx) {
        const double tiny = 1e-300;
        double c = 1.0;
        double d = 1.0 - (aa + bb) * xx / (aa + 1.0);
        if (std::abs(d) < tiny) d = tiny;
        d = 1.0 / d;
        double h = d;
        for (int m = 1; m <= 500; ++m) {
            const double m2 = 2.0 * m;
            double num = m * (bb - m) * xx / ((aa + m2 - 1.0) * (aa + m2));
            d = 1.0 + num * d;
            if (std::abs(d) < tiny) d = tiny;
            c = 1.0 + num / c;
            if (std::abs(c) < tiny) c = tiny;
            d = 1.0 / d;
            h *= d * c;
            num = -(aa + m) * (aa + bb + m) * xx / ((aa + m2) * (aa + m2 + 1.0));
            d = 1.0 + num * d;
            if (std::abs(d) < tiny) d = tiny;
            c = 1.0 + num / c;
            if (std::abs(c) < tiny) c = tiny;
            d = 1.0 / d;
            const double delta = d * c;
            h *= delta;
            if (std::abs(delta - 1.0) < 1e-12) break;
        }
        return h;
    };

    if (x < (a + 1.0) / (a + b + 2.0))
        return std::exp(ln_front) * cont_frac(a, b, x) / a;
    return 1.0 - std::exp(std::lgamma(a + b) - std::lgamma(b) - std::lgamma(a) +
                          b * std::log(1.0 - x) + a * std::log(x)) *
                     cont_frac(b, a, 1.0 - x) / b;
}

/// Two-sided tail probability P(|T| > t) for Student's t with nu dof.
inline double t_two_sided_p(double t, double nu) {
    require(nu > 0, "t distribution needs positive dof");
    const double x = nu / (nu + t * t);
    return incomplete_beta(nu / 2.0, 0.5, x);
}

/// Upper quantile t such that P(|T| <= t) = 2*prob - 1, e.g. prob = 0.975 for
/// a 95% interval. Bisection on the tail probability.
inline double t_quantile(double prob, double nu) {
    require(prob > 0.5 && prob < 1.0, "t_quantile expects prob in (0.5, 1)");
    const double target = 2.0 * (1.0 - prob);  // two-sided tail mass
    double lo = 0.0, hi = 1.0;
    while (t_two_sided_p(hi, nu) > target) hi *= 2.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (t_two_sided_p(mid, nu) > target) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

struct TTestResult {
    double t = 0.0;
    double p = 1.0;
    double dof = 0.0;
    bool significant_at_05 = false;
    bool degenerate = false;  // zero-variance differences
};

/// Paired t-test: t = mean(d) / (sd(d)/sqrt(n)) with sample (n-1) sd.
/// Zero-variance differences pin p to 0 (nonzero mean) or 1 (zero mean).
inline TTestResult paired_t_test(const std::vector<double>& a, const std::vector<double>& b) {
    require(a.size() == b.size() && a.size() >= 2, "paired t-test needs n >= 2 pairs");
    const size_t n = a.size();
    double mean = 0.0;
    for (size_t i = 0; i < n; ++i) mean += a[i] - b[i];
    mean /= double(n);
    double ss = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double d = (a[i] - b[i]) - mean;
        ss += d * d;
    }
    const double sd = std::sqrt(ss / double(n - 1));

    TTestResult r;
    r.dof = double(n - 1);
    if (sd == 0.0) {
        r.degenerate = true;
        r.t = mean == 0.0 ? 0.0 : (mean > 0 ? std::numeric_limits<double>::infinity()
                                            : -std::numeric_limits<double>::infinity());
        r.p = mean == 0.0 ? 1.0 : 0.0;
    } else {
        r.t = mean / (sd / std::sqrt(double(n)));
        r.p = t_two_sided_p(r.t, r.dof);
    }
    r.significant_at_05 = r.p < 0.05;
    return r;
}

struct CiSummary {
    double mean = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    size_t n = 0;
    bool degenerate = false;  // single value: interval collapses to the mean
};

/// Mean with t-based 95% confidence interval over the given values
/// (typically per-trial means).
inline CiSummary mean_ci95(const std::vector<double>& values) {
    require(!values.empty(), "mean_ci95 on empty input");
    CiSummary s;
    s.n = values.size();
    for (const double v : values) s.mean += v;
    s.mean /= double(s.n);
    if (s.n == 1) {
        s.ci_low = s.ci_high = s.mean;
        s.degenerate = true;
        return s;
    }
    double ss = 0.0;
    for (const double v : values) ss += (v - s.mean) * (v - s.mean);
    const double sd = std::sqrt(ss / double(s.n - 1));
    const double half = t_quantile(0.975, double(s.n - 1)) * sd / std::sqrt(double(s.n));
    s.ci_low = s.mean - half;
    s.ci_high = s.mean + half;
    return s;
}

} // namespace impedscope
