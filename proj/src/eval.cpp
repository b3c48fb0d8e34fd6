#include "idtw/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>

#include "idtw/error.hpp"

namespace idtw {
namespace {

void check_binary(std::span<const double> scores, std::span<const bool> positive) {
    if (scores.size() != positive.size()) throw DataError("scores and labels differ in length");
    const auto pos = std::count(positive.begin(), positive.end(), true);
    if (pos == 0 || pos == static_cast<std::ptrdiff_t>(positive.size()))
        throw DataError("ROC metrics need at least one positive and one negative");
}

}  // namespace

NeighborSet nearest_neighbors(std::vector<Neighbor> candidates, int k) {
    if (k < 1 || k % 2 == 0) throw ConfigError("k must be a positive odd integer, got " + std::to_string(k));
    if (static_cast<std::size_t>(k) > candidates.size())
        throw ConfigError("k=" + std::to_string(k) + " exceeds the " + std::to_string(candidates.size()) +
                          " labeled entities");
    auto by_distance_then_id = [](const Neighbor& a, const Neighbor& b) {
        return a.distance != b.distance ? a.distance < b.distance : a.entity < b.entity;
    };
    std::partial_sort(candidates.begin(), candidates.begin() + k, candidates.end(), by_distance_then_id);
    candidates.resize(static_cast<std::size_t>(k));
    return candidates;
}

std::map<std::string, double> knn_posterior(std::vector<Neighbor> candidates, int k,
                                            std::span<const std::string> classes) {
    std::map<std::string, double> posterior;
    for (const auto& c : classes) posterior[c] = 0.0;
    std::map<std::string, int> counts;
    for (const auto& n : nearest_neighbors(std::move(candidates), k)) ++counts[n.label];
    for (const auto& [label, count] : counts) posterior[label] = static_cast<double>(count) / k;
    return posterior;
}

std::vector<int> k_values(std::int64_t n_total) {
    std::vector<int> ks;
    if (n_total < 1) return ks;
    auto upper = static_cast<std::int64_t>(std::floor(std::sqrt(static_cast<double>(n_total)) + 0.5));
    for (std::int64_t k = 1; k <= upper; k += 2) ks.push_back(static_cast<int>(k));
    return ks;
}

double roc_auc(std::span<const double> scores, std::span<const bool> positive) {
    check_binary(scores, positive);
    // Mann-Whitney U from mid-ranks.
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    double rank_sum = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
        const double mid_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t t = i; t < j; ++t)
            if (positive[order[t]]) rank_sum += mid_rank;
        i = j;
    }
    const auto n_pos = static_cast<double>(std::count(positive.begin(), positive.end(), true));
    const double n_neg = static_cast<double>(positive.size()) - n_pos;
    return (rank_sum - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg);
}

std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const bool> positive) {
    check_binary(scores, positive);
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    const auto n_pos = static_cast<double>(std::count(positive.begin(), positive.end(), true));
    const double n_neg = static_cast<double>(positive.size()) - n_pos;

    std::vector<RocPoint> curve;
    double tp = 0.0, fp = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        const double threshold = scores[order[i]];
        while (i < order.size() && scores[order[i]] == threshold) {
            (positive[order[i]] ? tp : fp) += 1.0;
            ++i;
        }
        curve.push_back({threshold, tp / n_pos, (n_neg - fp) / n_neg});
    }
    return curve;
}

RocPoint youden_optimal(std::span<const double> scores, std::span<const bool> positive) {
    const auto curve = roc_curve(scores, positive);
    const RocPoint* best = &curve.front();
    for (const auto& p : curve) {
        const double j = p.youden_j(), bj = best->youden_j();
        // Thresholds descend along the curve, so a later equal point has a lower threshold.
        if (j > bj || (j == bj && p.sensitivity >= best->sensitivity)) best = &p;
    }
    return *best;
}

TTestResult paired_t_test(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw DataError("paired t-test needs equal-length samples");
    if (a.size() < 2) throw DataError("paired t-test needs at least two pairs");
    const std::size_t n = a.size();
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = a[i] - b[i];
    const double mean = std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(n);
    double ss = 0.0;
    for (double x : d) ss += (x - mean) * (x - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));

    TTestResult r;
    r.dof = n - 1;
    if (sd == 0.0) {
        r.degenerate = true;
        if (mean == 0.0) return r;
        r.t = mean > 0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
        r.p = 0.0;
        return r;
    }
    r.t = mean / (sd / std::sqrt(static_cast<double>(n)));
    boost::math::students_t dist(static_cast<double>(r.dof));
    r.p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t)));
    return r;
}

}  // namespace idtw
