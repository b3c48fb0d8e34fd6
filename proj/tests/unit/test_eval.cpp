#include "doctest.h"

#include <cmath>
#include <memory>
#include <random>

#include "idtw/error.hpp"
#include "idtw/eval.hpp"
#include "oracles.hpp"

using namespace idtw;

namespace {

std::vector<Neighbor> cands(std::vector<std::pair<double, std::string>> dl) {
    std::vector<Neighbor> out;
    int id = 0;
    for (auto& [d, l] : dl) out.push_back({"e" + std::to_string(id++), d, l});
    return out;
}

double auc(std::vector<double> s, std::vector<bool> p) {
    auto flags = std::make_unique<bool[]>(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) flags[i] = p[i];
    return roc_auc(s, std::span<const bool>(flags.get(), p.size()));
}

RocPoint youden(std::vector<double> s, std::vector<bool> p) {
    auto flags = std::make_unique<bool[]>(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) flags[i] = p[i];
    return youden_optimal(s, std::span<const bool>(flags.get(), p.size()));
}

}  // namespace

TEST_CASE("knn posterior") {
    const auto c = cands({{0.1, "A"}, {0.2, "A"}, {0.3, "B"}, {0.4, "A"}, {0.5, "B"}, {0.9, "B"}});
    auto p = knn_posterior(c, 5);
    CHECK(p["A"] == doctest::Approx(0.6));
    CHECK(p["B"] == doctest::Approx(0.4));
    p = knn_posterior(c, 1);
    CHECK(p["A"] == 1.0);
    CHECK(p["B"] == 0.0);
    const std::vector<std::string> classes{"A", "B"};
    p = knn_posterior(cands({{1, "A"}, {2, "A"}, {3, "A"}}), 3, classes);
    CHECK(p["A"] == 1.0);
    CHECK(p.at("B") == 0.0);
    CHECK_THROWS_AS(knn_posterior(c, 2), ConfigError);
    CHECK_THROWS_AS(knn_posterior(c, 0), ConfigError);
    CHECK_THROWS_AS(knn_posterior(c, 7), ConfigError);
}

TEST_CASE("neighbour ties resolve by entity id") {
    std::vector<Neighbor> c{{"z", 1.0, "A"}, {"b", 1.0, "B"}, {"a", 2.0, "A"}, {"c", 1.0, "A"}};
    const auto ns = nearest_neighbors(c, 3);
    REQUIRE(ns.size() == 3);
    CHECK(ns[0].entity == "b");
    CHECK(ns[1].entity == "c");
    CHECK(ns[2].entity == "z");
}

TEST_CASE("posterior probabilities are multiples of 1/k and sum to 1") {
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<Neighbor> c;
        for (int i = 0; i < 15; ++i)
            c.push_back({"e" + std::to_string(i), static_cast<double>(rng() % 5), rng() % 2 ? "A" : "B"});
        const int k = 1 + 2 * static_cast<int>(rng() % 7);
        const auto p = knn_posterior(c, k);
        double sum = 0;
        for (const auto& [cls, v] : p) {
            sum += v;
            CHECK(std::abs(v * k - std::round(v * k)) < 1e-12);
        }
        CHECK(sum == doctest::Approx(1.0));
    }
}

TEST_CASE("k values") {
    CHECK(k_values(161) == std::vector<int>{1, 3, 5, 7, 9, 11, 13});
    CHECK(k_values(125) == std::vector<int>{1, 3, 5, 7, 9, 11});
    CHECK(k_values(151).size() == 6);
    CHECK(k_values(1) == std::vector<int>{1});
    CHECK(k_values(12) == std::vector<int>{1, 3});  // sqrt 3.46 -> 3
    CHECK(k_values(20) == std::vector<int>{1, 3});  // sqrt 4.47 -> 4
    CHECK(k_values(25) == std::vector<int>{1, 3, 5});
}

TEST_CASE("AUC examples") {
    CHECK(auc({0.9, 0.8, 0.1, 0.2}, {true, true, false, false}) == 1.0);
    CHECK(auc({0.8, 0.3, 0.5, 0.1}, {true, true, false, false}) == 0.75);
    CHECK(auc({0.4, 0.4, 0.4, 0.4}, {true, false, true, false}) == 0.5);
    CHECK_THROWS_AS(auc({0.1, 0.2}, {true, true}), DataError);
    CHECK_THROWS_AS(auc({}, {}), DataError);
}

TEST_CASE("AUC matches pair counting and its invariants") {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 2 + rng() % 40;
        std::vector<double> s(n);
        std::vector<bool> p(n);
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = static_cast<double>(rng() % 6) / 5.0;
            p[i] = rng() % 2;
        }
        p[0] = true;
        p[1] = false;
        const double a = auc(s, p);
        CHECK(std::abs(a - oracle::auc_pair_count(s, p)) < 1e-12);
        std::vector<double> cubed = s;
        for (auto& x : cubed) x = x * x * x + 3;
        CHECK(std::abs(auc(cubed, p) - a) < 1e-12);
        std::vector<bool> flipped(n);
        for (std::size_t i = 0; i < n; ++i) flipped[i] = !p[i];
        CHECK(std::abs(auc(s, flipped) + a - 1.0) < 1e-12);
    }
}

TEST_CASE("ROC curve is monotone") {
    const std::vector<double> s{0.1, 0.4, 0.4, 0.8, 0.9, 0.2};
    auto flags = std::make_unique<bool[]>(6);
    const bool p[] = {false, true, false, true, true, false};
    for (int i = 0; i < 6; ++i) flags[i] = p[i];
    const auto curve = roc_curve(s, std::span<const bool>(flags.get(), 6));
    REQUIRE(curve.size() == 5);
    for (std::size_t i = 1; i < curve.size(); ++i) {
        CHECK(curve[i].threshold < curve[i - 1].threshold);
        CHECK(curve[i].sensitivity >= curve[i - 1].sensitivity);
        CHECK(curve[i].specificity <= curve[i - 1].specificity);
    }
    CHECK(curve.back().sensitivity == 1.0);
    CHECK(curve.back().specificity == 0.0);
}

TEST_CASE("Youden optimum") {
    const auto perfect = youden({0.9, 0.8, 0.1, 0.2}, {true, true, false, false});
    CHECK(perfect.sensitivity == 1.0);
    CHECK(perfect.specificity == 1.0);
    CHECK(perfect.youden_j() == 1.0);
    CHECK(perfect.threshold == 0.8);
    const auto flat = youden({0.3, 0.3, 0.3}, {true, false, false});
    CHECK(flat.youden_j() == 0.0);

    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<double> s(20);
        std::vector<bool> p(20);
        for (std::size_t i = 0; i < 20; ++i) {
            s[i] = static_cast<double>(rng() % 8) / 7.0;
            p[i] = rng() % 2;
        }
        p[0] = true;
        p[1] = false;
        const auto got = youden(s, p);
        const auto want = oracle::youden_sweep(s, p);
        CHECK(got.threshold == want.threshold);
        CHECK(got.sensitivity == want.sensitivity);
        CHECK(got.specificity == want.specificity);
    }
}

TEST_CASE("paired t-test") {
    const std::vector<double> a{2, 4, 6, 8}, b{1, 2, 3, 4};
    const auto r = paired_t_test(a, b);
    // differences {1,2,3,4}: mean 2.5, sample sd sqrt(5/3), t = 2.5 / (sd / 2)
    const double t = 2.5 / (std::sqrt(5.0 / 3.0) / 2.0);
    CHECK(r.t == doctest::Approx(t).epsilon(1e-12));
    CHECK(r.dof == 3);
    // scipy.stats.ttest_rel([2,4,6,8], [1,2,3,4]).pvalue
    CHECK(std::abs(r.p - 0.030466291662170977) < 1e-9);
    CHECK_FALSE(r.degenerate);

    const auto same = paired_t_test(a, a);
    CHECK(same.t == 0.0);
    CHECK(same.p == 1.0);

    const std::vector<double> shifted{3, 5, 7, 9};
    const auto constant = paired_t_test(shifted, a);
    CHECK(constant.degenerate);
    CHECK(constant.p == 0.0);
    CHECK(std::isinf(constant.t));
    CHECK(constant.t > 0);

    const std::vector<double> one{1};
    CHECK_THROWS_AS(paired_t_test(one, one), DataError);
    CHECK_THROWS_AS(paired_t_test(a, one), DataError);
}

TEST_CASE("t-test is antisymmetric in its arguments") {
    const std::vector<double> a{0.71, 0.80, 0.64, 0.90, 0.77}, b{0.69, 0.72, 0.66, 0.81, 0.70};
    const auto ab = paired_t_test(a, b), ba = paired_t_test(b, a);
    CHECK(ab.t == doctest::Approx(-ba.t));
    CHECK(ab.p == doctest::Approx(ba.p));
    CHECK(ab.p > 0.0);
    CHECK(ab.p < 1.0);
}
