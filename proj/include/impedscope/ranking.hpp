#pragma once

#include <algorithm>
#include <numeric>
#include <vector>

#include "impedscope/common.hpp"
#include "impedscope/pca.hpp"

namespace impedscope {

/// Per-fold importance scores and orderings plus the cross-fold composite.
/// Frequency indices are 0-based here; reporting layers add 1.
struct FrequencyRanking {
    std::vector<std::vector<double>> fold_scores;     // [fold][freq]
    std::vector<std::vector<size_t>> fold_rankings;   // [fold] = freq indices, best first
    std::vector<double> points;                       // Borda totals per freq
    std::vector<size_t> composite;                    // freq indices, best first
    std::vector<int> fold_retained_components;
    std::vector<double> fold_captured_variance;
};

/// Descending order by score; equal scores break toward the lower frequency
/// index so rankings are total orders.
inline std::vector<size_t> rank_descending(const std::vector<double>& scores) {
    std::vector<size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b;
    });
    return order;
}

/// Borda aggregation: rank r (1-based) in a fold earns n - r + 1 points.
/// The composite sorts total points descending, ties toward lower index.
inline std::vector<size_t> aggregate_rankings(const std::vector<std::vector<size_t>>& fold_rankings,
                                              std::vector<double>* points_out = nullptr) {
    require(!fold_rankings.empty(), "no fold rankings to aggregate");
    const size_t n = fold_rankings.front().size();
    for (const auto& r : fold_rankings)
        require(r.size() == n, "fold rankings differ in length");
    std::vector<double> points(n, 0.0);
    for (const auto& ranking : fold_rankings)
        for (size_t r = 0; r < n; ++r) points[ranking[r]] += double(n - r);
    if (points_out) *points_out = points;
    return rank_descending(points);
}

/// First f_T entries of a ranking, returned ascending for feature assembly.
inline std::vector<size_t> select_top_frequencies(const std::vector<size_t>& ranking, size_t f_t) {
    validate(f_t >= 1 && f_t <= ranking.size(), "f_T out of range");
    std::vector<size_t> subset(ranking.begin(), ranking.begin() + long(f_t));
    std::sort(subset.begin(), subset.end());
    return subset;
}

} // namespace impedscope
