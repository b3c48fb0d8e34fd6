#include "doctest.h"

#include <cmath>
#include <random>

#include "idtw/error.hpp"
#include "idtw/imatch.hpp"
#include "oracles.hpp"

using namespace idtw;

namespace {

Series uni(std::vector<double> v) { return Series::from_rows({std::move(v)}); }

oracle::Series point_major(const Series& s) {
    oracle::Series out(s.length);
    for (std::size_t t = 0; t < s.length; ++t) out[t].assign(s.at(t).begin(), s.at(t).end());
    return out;
}

Series random_series(std::mt19937_64& rng, std::size_t features, std::size_t length) {
    std::uniform_real_distribution<double> u(0, 1);
    std::vector<std::vector<double>> rows(features, std::vector<double>(length));
    for (auto& r : rows)
        for (auto& x : r) x = u(rng);
    return Series::from_rows(rows);
}

}  // namespace

TEST_CASE("local distance") {
    const std::vector<double> a{0.2, 0.4}, b{0.5, 0.8};
    CHECK(local_distance(a, b) == doctest::Approx(0.25));
    CHECK(local_distance(a, a) == 0.0);
    const std::vector<double> c{0.1};
    CHECK_THROWS_AS(local_distance(a, c), ConfigError);
}

TEST_CASE("series layout") {
    const Series s = Series::from_rows({{1, 2, 3}, {4, 5, 6}});
    CHECK(s.features == 2);
    CHECK(s.length == 3);
    CHECK(s.at(1)[0] == 2);
    CHECK(s.at(1)[1] == 5);
}

TEST_CASE("warping absorbs a repeated value") {
    CHECK(dtw_distance(uni({0, 0, 1}), uni({0, 1}), Unconstrained{}) == 0.0);
}

TEST_CASE("identity and symmetry") {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 100; ++trial) {
        const auto a = random_series(rng, 2, 1 + rng() % 10);
        const auto b = random_series(rng, 2, a.length);
        for (const BandPolicy& band : {BandPolicy{Unconstrained{}}, BandPolicy{SakoeChibaPercent{10}}, BandPolicy{KBBand{0}}})
            CHECK(dtw_distance(a, a, band) == 0.0);
        CHECK(dtw_distance(a, b, Unconstrained{}) == dtw_distance(b, a, Unconstrained{}));
    }
}

TEST_CASE("radius 0 on equal lengths is the lock-step sum") {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 1 + rng() % 12;
        const auto a = random_series(rng, 3, n), b = random_series(rng, 3, n);
        double lock = 0;
        for (std::size_t t = 0; t < n; ++t) lock += oracle::squared_distance(point_major(a)[t], point_major(b)[t]);
        CHECK(dtw_distance(a, b, KBBand{0}) == doctest::Approx(lock).epsilon(1e-12));
    }
}

TEST_CASE("unconstrained DTW matches the path oracle") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t f = 1 + trial % 2;
        const auto a = random_series(rng, f, 1 + rng() % 6), b = random_series(rng, f, 1 + rng() % 6);
        CHECK(std::abs(dtw_distance(a, b, Unconstrained{}) - oracle::dtw_all_paths(point_major(a), point_major(b))) <
              1e-12);
    }
}

TEST_CASE("feature permutation leaves the distance unchanged") {
    std::mt19937_64 rng(17);
    const auto a = random_series(rng, 3, 8), b = random_series(rng, 3, 6);
    auto permute = [](const Series& s) {
        std::vector<std::vector<double>> rows(3, std::vector<double>(s.length));
        for (std::size_t t = 0; t < s.length; ++t)
            for (std::size_t f = 0; f < 3; ++f) rows[(f + 1) % 3][t] = s.at(t)[f];
        return Series::from_rows(rows);
    };
    CHECK(dtw_distance(a, b, Unconstrained{}) == doctest::Approx(dtw_distance(permute(a), permute(b), Unconstrained{})));
}

TEST_CASE("band geometry") {
    CHECK(band_radius(SakoeChibaPercent{10}, 30, 20) == 3u);
    CHECK(band_radius(SakoeChibaPercent{10}, 31, 20) == 4u);
    CHECK(band_radius(SakoeChibaPercent{10}, 5, 5) == 1u);
    CHECK_FALSE(band_radius(Unconstrained{}, 5, 5).has_value());
    CHECK(band_radius(KBBand{6}, 5, 5) == 6u);

    for (std::size_t m = 1; m <= 12; ++m) {
        for (std::size_t n = 1; n <= 12; ++n) {
            const auto r = band_ranges(m, n, 0);
            REQUIRE(r.size() == n);
            CHECK(r.front().lo == 0);
            CHECK(r.back().hi == m - 1);
            for (std::size_t j = 0; j < n; ++j) {
                CHECK(r[j].lo <= r[j].hi);
                // A monotone path can step from column j-1 into column j.
                if (j) {
                    CHECK(r[j].lo <= r[j - 1].hi + 1);
                    CHECK(r[j].lo >= r[j - 1].lo);
                    CHECK(r[j].hi >= r[j - 1].hi);
                }
            }
            // Every radius gives a finite distance.
            const Series a = Series::from_rows({std::vector<double>(m, 0.5)});
            const Series b = Series::from_rows({std::vector<double>(n, 0.25)});
            CHECK(std::isfinite(dtw_distance(a, b, KBBand{0})));
        }
    }
}

TEST_CASE("band monotonicity") {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 100; ++trial) {
        const auto a = random_series(rng, 2, 2 + rng() % 15), b = random_series(rng, 2, 2 + rng() % 15);
        double prev = dtw_distance(a, b, KBBand{0});
        for (std::int64_t r = 1; r <= 16; ++r) {
            const double d = dtw_distance(a, b, KBBand{r});
            CHECK(d <= prev);
            prev = d;
        }
        CHECK(dtw_distance(a, b, Unconstrained{}) <= prev);
        CHECK(dtw_distance(a, b, Unconstrained{}) == prev);  // radius 16 covers every cell
    }
}

TEST_CASE("cost matrix agrees with the two-column computation") {
    std::mt19937_64 rng(5);
    const auto a = random_series(rng, 2, 9), b = random_series(rng, 2, 5);
    const auto cm = dtw_cost_matrix(a, b, KBBand{1});
    CHECK(cm.at(8, 4) == dtw_distance(a, b, KBBand{1}));
    CHECK(std::isinf(cm.at(8, 0)));
    CHECK(cm.at(0, 0) == doctest::Approx(local_distance(a.at(0), b.at(0))));
}

TEST_CASE("band names") {
    CHECK(to_string(parse_band("sc10")) == "sc10");
    CHECK(to_string(parse_band("none")) == "none");
    CHECK(to_string(parse_band("unconstrained")) == "none");
    CHECK(to_string(parse_band("kb3")) == "kb3");
    CHECK(to_string(parse_band("sc12.5")) == "sc12.5");
    CHECK_THROWS_AS(parse_band("sc"), ConfigError);
    CHECK_THROWS_AS(parse_band("sc-1"), ConfigError);
    CHECK_THROWS_AS(parse_band("kbx"), ConfigError);
    CHECK_THROWS_AS(parse_band("wide"), ConfigError);
}

TEST_CASE("KB band radius") {
    const auto onc = load_knowledge_base(std::string(IDTW_KB_DIR) + "/oncology.kb");
    const auto dia = load_knowledge_base(std::string(IDTW_KB_DIR) + "/diabetes.kb");
    const auto names = onc.concept_names();
    CHECK(kb_band_radius(onc, names, Granularity::day()) == 1);
    const std::vector<std::string> d{"ALBUMINURIA", "CREATININE", "HBA1C"};
    CHECK(kb_band_radius(dia, d, Granularity::month()) == 6);
    const std::vector<std::string> single{"CREATININE"};
    CHECK(kb_band_radius(dia, single, Granularity::month()) == 2);
    CHECK(kb_band_radius(dia, single, Granularity::day()) == 60);
    const std::vector<std::string> unknown{"GLUCOSE"};
    CHECK_THROWS_AS(kb_band_radius(dia, unknown, Granularity::month()), KbError);
}

TEST_CASE("event tables must be complete and compatible") {
    EventTable a;
    a.features = {"X:state"};
    a.column_count = 2;
    a.rows = {{0.5, 0.5}};
    EventTable b = a;
    CHECK(dtw_distance(a, b, Unconstrained{}) == 0.0);
    b.features = {"Y:state"};
    CHECK_THROWS_AS(dtw_distance(a, b, Unconstrained{}), ConfigError);
    b = a;
    b.granularity = Granularity::month();
    CHECK_THROWS_AS(dtw_distance(a, b, Unconstrained{}), ConfigError);
    b = a;
    b.rows[0][1].reset();
    CHECK_THROWS_AS(to_series(b), DataError);
}
