#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "impedscope/stats.hpp"
#include "impedscope/rng.hpp"

using namespace impedscope;

TEST_CASE("incomplete beta is a proper CDF complement pair") {
    Rng rng(31);
    for (int i = 0; i < 50; ++i) {
        const double a = rng.uniform(0.5, 8);
        const double b = rng.uniform(0.5, 8);
        const double x = rng.uniform(0.001, 0.999);
        CHECK(incomplete_beta(a, b, x) + incomplete_beta(b, a, 1 - x) ==
              Catch::Approx(1.0).margin(1e-10));
    }
    CHECK(incomplete_beta(2, 3, 0.0) == 0.0);
    CHECK(incomplete_beta(2, 3, 1.0) == 1.0);
}

TEST_CASE("no difference means p = 1") {
    const std::vector<double> a = {0.5, 0.7, 0.9};
    const TTestResult r = paired_t_test(a, a);
    CHECK(r.p == 1.0);
    CHECK(r.degenerate);
    CHECK_FALSE(r.significant_at_05);
}

TEST_CASE("d = [1..5] gives t = 4.2426 and p near 0.0132") {
    const std::vector<double> a = {1, 2, 3, 4, 5};
    const std::vector<double> b = {0, 0, 0, 0, 0};
    const TTestResult r = paired_t_test(a, b);
    CHECK(r.t == Catch::Approx(4.242640687).margin(1e-6));
    CHECK(r.dof == 4.0);
    CHECK(r.p == Catch::Approx(0.0132).margin(1e-3));
    CHECK(r.significant_at_05);
}

TEST_CASE("sign flip negates t and keeps p") {
    Rng rng(32);
    std::vector<double> a(8), b(8);
    for (size_t i = 0; i < 8; ++i) {
        a[i] = rng.uniform(0, 1);
        b[i] = rng.uniform(0, 1);
    }
    const TTestResult fwd = paired_t_test(a, b);
    const TTestResult rev = paired_t_test(b, a);
    CHECK(fwd.t == Catch::Approx(-rev.t).margin(1e-12));
    CHECK(fwd.p == Catch::Approx(rev.p).margin(1e-12));
}

TEST_CASE("zero-variance nonzero-mean differences give p = 0") {
    const std::vector<double> a = {2, 3, 4};
    const std::vector<double> b = {1, 2, 3};
    const TTestResult r = paired_t_test(a, b);
    CHECK(r.p == 0.0);
    CHECK(r.degenerate);
    CHECK(r.significant_at_05);
}

TEST_CASE("t quantile matches the tabulated 2.262 at 9 dof") {
    CHECK(t_quantile(0.975, 9) == Catch::Approx(2.262).margin(2e-4));
    CHECK(t_quantile(0.975, 4) == Catch::Approx(2.776).margin(2e-3));
}

TEST_CASE("confidence interval aggregation") {
    SECTION("single trial collapses to the mean and is flagged") {
        const CiSummary s = mean_ci95({0.87});
        CHECK(s.degenerate);
        CHECK(s.ci_low == 0.87);
        CHECK(s.ci_high == 0.87);
    }
    SECTION("identical trials give a zero-width interval") {
        const CiSummary s = mean_ci95(std::vector<double>(10, 0.9));
        CHECK(s.mean == Catch::Approx(0.9));
        CHECK(s.ci_high - s.ci_low == Catch::Approx(0.0).margin(1e-15));
    }
    SECTION("matches the tabulated-t oracle within 1e-6") {
        // sd chosen small enough that the 2.262 truncation stays inside 1e-6
        std::vector<double> trials;
        for (int i = 0; i < 10; ++i) trials.push_back(0.9 + 0.01 * ((i % 2) ? 1.0 : -1.0));
        const CiSummary s = mean_ci95(trials);
        double mean = 0;
        for (const double v : trials) mean += v;
        mean /= 10.0;
        double ss = 0;
        for (const double v : trials) ss += (v - mean) * (v - mean);
        const double sd = std::sqrt(ss / 9.0);
        const double oracle_half = 2.262 * sd / std::sqrt(10.0);
        CHECK(s.ci_high - s.mean == Catch::Approx(oracle_half).margin(1e-6));
        CHECK(s.mean - s.ci_low == Catch::Approx(oracle_half).margin(1e-6));
    }
}
