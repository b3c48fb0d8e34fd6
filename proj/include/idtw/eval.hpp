#pragma once

// KNN classification over a distance measure, ROC/AUC, Youden's optimal
// operating point and the paired t-test.

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace idtw {

struct Neighbor {
    std::string entity;
    double distance = 0.0;
    std::string label;
};

// Ascending by (distance, entity id); length k.
using NeighborSet = std::vector<Neighbor>;

// Throws ConfigError for even k, k < 1 or k larger than the candidate count.
NeighborSet nearest_neighbors(std::vector<Neighbor> candidates, int k);

// P(class) = fraction of the k nearest neighbours with that class. Every class in
// `classes` (plus any neighbour class) appears in the result, possibly with 0.
std::map<std::string, double> knn_posterior(std::vector<Neighbor> candidates, int k,
                                            std::span<const std::string> classes = {});

// Odd k in [1, round(sqrt(n))], rounding half up.
std::vector<int> k_values(std::int64_t n_total);

// Probability that a random positive outscores a random negative (ties count 1/2).
// Throws DataError unless both classes are present.
double roc_auc(std::span<const double> scores, std::span<const bool> positive);

struct RocPoint {
    double threshold = 0.0;  // predict positive when score >= threshold
    double sensitivity = 0.0;
    double specificity = 0.0;

    double youden_j() const { return sensitivity + specificity - 1.0; }
};

// One point per distinct score, thresholds descending.
std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const bool> positive);

// Maximizes J over distinct score thresholds; ties prefer higher sensitivity, then lower threshold.
RocPoint youden_optimal(std::span<const double> scores, std::span<const bool> positive);

struct TTestResult {
    double t = 0.0;
    double p = 1.0;           // two-sided
    std::size_t dof = 0;
    bool degenerate = false;  // differences had zero variance
};

// Classic paired t-test on a - b. All-zero differences give t=0, p=1; constant
// non-zero differences give t=+-inf, p=0 with `degenerate` set.
// Throws DataError for unequal lengths or fewer than two pairs.
TTestResult paired_t_test(std::span<const double> a, std::span<const double> b);

}  // namespace idtw
