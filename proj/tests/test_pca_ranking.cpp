#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>

#include "impedscope/pca.hpp"
#include "impedscope/ranking.hpp"
#include "impedscope/rng.hpp"

using namespace impedscope;

namespace {

// independent of the library's Jacobi path: Eigen's solver on the same
// centered covariance, squared loadings summed over the leading components
std::vector<double> eigen_oracle_scores(const Matrix& obs, int n_components) {
    const Eigen::Index n = Eigen::Index(obs.rows());
    const Eigen::Index d = Eigen::Index(obs.cols());
    Eigen::MatrixXd m(n, d);
    for (Eigen::Index r = 0; r < n; ++r)
        for (Eigen::Index c = 0; c < d; ++c) m(r, c) = obs(size_t(r), size_t(c));
    const Eigen::RowVectorXd mean = m.colwise().mean();
    m.rowwise() -= mean;
    const Eigen::MatrixXd cov = (m.transpose() * m) / double(n);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    std::vector<double> scores(size_t(d), 0.0);
    for (int c = 0; c < n_components && c < d; ++c) {
        const auto v = es.eigenvectors().col(d - 1 - c);  // descending eigenvalues
        for (Eigen::Index f = 0; f < d; ++f) scores[size_t(f)] += v(f) * v(f);
    }
    return scores;
}

} // namespace

TEST_CASE("variance concentrated in one variable wins the ranking") {
    Rng rng(5);
    Matrix obs(40, 6);
    for (size_t r = 0; r < 40; ++r) {
        for (size_t c = 0; c < 6; ++c) obs(r, c) = 7.0;  // constants elsewhere
        obs(r, 3) = rng.normal(0.0, 2.0);
    }
    const PcaScores s = pca_variable_importance(obs, 10);
    CHECK(s.retained_components == 1);
    CHECK(s.rank_deficient);
    CHECK(s.scores[3] == Catch::Approx(1.0).margin(1e-9));
    for (size_t c = 0; c < 6; ++c)
        if (c != 3) CHECK(s.scores[c] == Catch::Approx(0.0).margin(1e-9));
    CHECK(rank_descending(s.scores).front() == 3);
}

TEST_CASE("importance scores sum to the retained component count") {
    Rng rng(6);
    for (int trial = 0; trial < 5; ++trial) {
        Matrix obs(50, 31);
        for (auto& v : obs.data()) v = rng.normal(0.0, 1.0);
        const PcaScores s = pca_variable_importance(obs, 10);
        CHECK(s.retained_components == 10);
        double total = 0;
        for (const double v : s.scores) total += v;
        CHECK(total == Catch::Approx(double(s.retained_components)).margin(1e-9));
    }
}

TEST_CASE("scores match the dense eigendecomposition oracle") {
    Rng rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        Matrix obs(50, 31);
        for (auto& v : obs.data()) v = rng.normal(0.0, 1.0) + rng.uniform(0, 3);
        const PcaScores s = pca_variable_importance(obs, 10);
        const auto oracle = eigen_oracle_scores(obs, 10);
        for (size_t f = 0; f < 31; ++f)
            CHECK(s.scores[f] == Catch::Approx(oracle[f]).margin(1e-8));
    }
}

TEST_CASE("captured variance is reported") {
    Rng rng(8);
    Matrix obs(60, 12);
    for (auto& v : obs.data()) v = rng.normal(0.0, 1.0);
    const PcaScores s = pca_variable_importance(obs, 3);
    CHECK(s.captured_variance > 0.0);
    CHECK(s.captured_variance < 1.0);
    const PcaScores all = pca_variable_importance(obs, 12);
    CHECK(all.captured_variance == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("identical fold rankings aggregate to themselves") {
    const std::vector<size_t> r = {4, 1, 3, 0, 2};
    CHECK(aggregate_rankings({r, r, r}) == r);
}

TEST_CASE("reversed rankings tie and break toward the lower index") {
    const std::vector<size_t> a = {0, 1, 2};
    const std::vector<size_t> b = {2, 1, 0};
    CHECK(aggregate_rankings({a, b}) == std::vector<size_t>{0, 1, 2});
}

TEST_CASE("aggregation matches a brute-force point count") {
    Rng rng(10);
    const size_t n = 9;
    std::vector<std::vector<size_t>> folds;
    for (int f = 0; f < 5; ++f) {
        std::vector<size_t> r(n);
        for (size_t i = 0; i < n; ++i) r[i] = i;
        rng.shuffle(r);
        folds.push_back(r);
    }
    std::vector<double> points;
    const auto composite = aggregate_rankings(folds, &points);
    // oracle: explicit Borda sum, stable sort by (points desc, index asc)
    std::vector<double> oracle(n, 0.0);
    for (const auto& r : folds)
        for (size_t pos = 0; pos < n; ++pos) oracle[r[pos]] += double(n - pos);
    CHECK(points == oracle);
    for (size_t i = 1; i < composite.size(); ++i) {
        const bool ordered = oracle[composite[i - 1]] > oracle[composite[i]] ||
                             (oracle[composite[i - 1]] == oracle[composite[i]] &&
                              composite[i - 1] < composite[i]);
        CHECK(ordered);
    }
}

TEST_CASE("length-mismatched fold rankings are rejected") {
    CHECK_THROWS(aggregate_rankings({{0, 1, 2}, {0, 1}}));
}

TEST_CASE("top-frequency selection") {
    const std::vector<size_t> ranking = {5, 2, 7, 0, 1, 3, 4, 6};
    CHECK(select_top_frequencies(ranking, 8) ==
          std::vector<size_t>{0, 1, 2, 3, 4, 5, 6, 7});
    CHECK(select_top_frequencies(ranking, 1) == std::vector<size_t>{5});
    CHECK(select_top_frequencies(ranking, 3) == std::vector<size_t>{2, 5, 7});
    CHECK_THROWS_AS(select_top_frequencies(ranking, 0), ValidationError);
    CHECK_THROWS_AS(select_top_frequencies(ranking, 9), ValidationError);
}
