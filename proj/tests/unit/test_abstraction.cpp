#include "doctest.h"

#include <algorithm>
#include <random>

#include "idtw/abstraction.hpp"
#include "idtw/error.hpp"
#include "idtw/kb.hpp"

using namespace idtw;

namespace {

constexpr Minutes D = kMinutesPerDay;

const KnowledgeBase& oncology() {
    static const KnowledgeBase kb = load_knowledge_base(std::string(IDTW_KB_DIR) + "/oncology.kb");
    return kb;
}
const KnowledgeBase& hepatitis() {
    static const KnowledgeBase kb = load_knowledge_base(std::string(IDTW_KB_DIR) + "/hepatitis.kb");
    return kb;
}

ConceptDef three_state() {
    ConceptDef c;
    c.name = "T";
    c.states = {{"LOW", -1e300 * 10, 0, 1}, {"MID", 0, 10, 2}, {"HIGH", 10, 1e300 * 10, 3}};
    c.significant_variation = {VariationSpec::Kind::absolute, 1};
    c.good_before = c.good_after = 2 * D;
    return c;
}

}  // namespace

TEST_CASE("touching HGB extensions merge into one interval") {
    const ConceptDef& hgb = oncology().concept_for("HGB");
    const std::vector<Sample> s{{1 * D, 10.0}, {2 * D, 10.5}};
    const auto seq = abstract_state(s, hgb);
    REQUIRE(seq.intervals.size() == 1);
    CHECK(seq.intervals[0].start == 0);
    CHECK(seq.intervals[0].end == 3 * D);
    CHECK(seq.intervals[0].label == "MODERATELY LOW");
    CHECK(seq.intervals[0].value == doctest::Approx(0.5));  // ordinal 3 of 5
}

TEST_CASE("single sample spans GB before and GA after") {
    const ConceptDef& hgb = oncology().concept_for("HGB");
    const std::vector<Sample> s{{5 * D, 12.0}};
    const auto seq = abstract_state(s, hgb);
    REQUIRE(seq.intervals.size() == 1);
    CHECK(seq.intervals[0].start == 4 * D);
    CHECK(seq.intervals[0].end == 6 * D);
    CHECK(seq.intervals[0].label == "NORMAL");
}

TEST_CASE("distant samples are not bridged") {
    const ConceptDef& hgb = oncology().concept_for("HGB");
    const std::vector<Sample> s{{1 * D, 10.0}, {10 * D, 10.0}};
    const auto seq = abstract_state(s, hgb);
    REQUIRE(seq.intervals.size() == 2);
    CHECK(seq.intervals[0].end == 2 * D);
    CHECK(seq.intervals[1].start == 9 * D);
    CHECK(seq.intervals[0].label == seq.intervals[1].label);
}

TEST_CASE("differing overlapping states split at the overlap midpoint") {
    const ConceptDef c = three_state();
    // [0D,4D] MID and [1D,5D] HIGH overlap on [1D,4D]; midpoint 2.5D.
    const std::vector<Sample> s{{2 * D, 5}, {3 * D, 15}};
    const auto seq = abstract_state(s, c);
    REQUIRE(seq.intervals.size() == 2);
    CHECK(seq.intervals[0] .label == "MID");
    CHECK(seq.intervals[0].start == 0);
    CHECK(seq.intervals[0].end == 2 * D + D / 2);
    CHECK(seq.intervals[1].start == 2 * D + D / 2);
    CHECK(seq.intervals[1].end == 5 * D);
    CHECK(seq.intervals[1].value == 1.0);
}

TEST_CASE("unordered samples are rejected") {
    const std::vector<Sample> s{{2 * D, 5}, {1 * D, 6}};
    CHECK_THROWS_AS(abstract_state(s, three_state()), DataError);
}

TEST_CASE("state abstraction properties on random samples") {
    std::mt19937_64 rng(3);
    const ConceptDef c = three_state();
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<Sample> s;
        Timestamp t = 0;
        const int n = 1 + static_cast<int>(rng() % 12);
        for (int i = 0; i < n; ++i) {
            t += 1 + static_cast<Timestamp>(rng() % (6 * D));
            s.push_back({t, std::uniform_real_distribution<double>(-5, 15)(rng)});
        }
        const auto seq = abstract_state(s, c);
        REQUIRE_FALSE(seq.intervals.empty());
        for (std::size_t i = 0; i < seq.intervals.size(); ++i) {
            const auto& iv = seq.intervals[i];
            CHECK(iv.start < iv.end);
            CHECK(iv.value >= 0.0);
            CHECK(iv.value <= 1.0);
            if (i) {
                CHECK(seq.intervals[i - 1].end <= iv.start);
                // Touching neighbours always differ in state.
                if (seq.intervals[i - 1].end == iv.start) CHECK(seq.intervals[i - 1].label != iv.label);
            }
        }
        // Merging is idempotent.
        CHECK(resolve_persistence(seq.intervals) == seq.intervals);

        // Any strictly monotone relabeling that keeps each value in its state changes nothing.
        std::vector<Sample> moved = s;
        for (auto& x : moved) {
            if (x.value < 0) x.value = x.value * 2 - 1;
            else if (x.value < 10) x.value = x.value * 0.5 + 2;
            else x.value = x.value * 3;
        }
        const auto relabeled = abstract_state(moved, c).intervals;
        REQUIRE(relabeled.size() == seq.intervals.size());
        for (std::size_t i = 0; i < relabeled.size(); ++i) {
            CHECK(relabeled[i].start == seq.intervals[i].start);
            CHECK(relabeled[i].end == seq.intervals[i].end);
            CHECK(relabeled[i].label == seq.intervals[i].label);
            CHECK(relabeled[i].value == seq.intervals[i].value);
        }
    }
}

TEST_CASE("gradient labels") {
    const ConceptDef& hgb = oncology().concept_for("HGB");
    const ConceptDef& alp = hepatitis().concept_for("ALP");
    auto label = [](std::vector<Sample> s, const ConceptDef& c) {
        const auto seq = abstract_gradient(s, c);
        REQUIRE(seq.intervals.size() == 1);
        return seq.intervals[0].label;
    };
    CHECK(label({{0, 10.0}, {D, 11.0}}, hgb) == kIncreasing);
    CHECK(label({{0, 100}, {D, 130}}, alp) == kIncreasing);
    CHECK(label({{0, 10.0}, {D, 10.5}}, hgb) == kSame);
    CHECK(label({{0, 11.0}, {D, 10.0}}, hgb) == kDecreasing);
    CHECK(label({{0, 10.0}, {D, 10.0}}, hgb) == kSame);
    CHECK(label({{0, 100}, {D, 115}}, alp) == kSame);  // 15% < 20%
}

TEST_CASE("gradient spans consecutive samples and merges equal neighbours") {
    const ConceptDef& hgb = oncology().concept_for("HGB");
    const std::vector<Sample> s{{0, 10}, {D, 11}, {3 * D, 12}, {4 * D, 11}};
    const auto seq = abstract_gradient(s, hgb);
    REQUIRE(seq.intervals.size() == 2);
    CHECK(seq.intervals[0].start == 0);
    CHECK(seq.intervals[0].end == 3 * D);
    CHECK(seq.intervals[0].value == 1.0);
    CHECK(seq.intervals[1].start == 3 * D);
    CHECK(seq.intervals[1].label == kDecreasing);
    CHECK(seq.intervals[1].value == 0.0);
}

TEST_CASE("gradient with fewer than two samples is empty") {
    const ConceptDef& hgb = oncology().concept_for("HGB");
    const std::vector<Sample> one{{0, 10}};
    CHECK(abstract_gradient(one, hgb).intervals.empty());
    CHECK(abstract_gradient(std::span<const Sample>{}, hgb).intervals.empty());
}

TEST_CASE("gradient antisymmetry under time reversal") {
    std::mt19937_64 rng(8);
    ConceptDef c = three_state();
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<Sample> s;
        for (int i = 0; i < 2; ++i) s.push_back({i * D, std::uniform_real_distribution<double>(0, 5)(rng)});
        const std::vector<Sample> rev{{-s[1].time, s[1].value}, {-s[0].time, s[0].value}};
        const auto fwd = abstract_gradient(s, c).intervals.at(0).label;
        const auto bwd = abstract_gradient(rev, c).intervals.at(0).label;
        if (fwd == kSame) CHECK(bwd == kSame);
        if (fwd == kIncreasing) CHECK(bwd == kDecreasing);
        if (fwd == kDecreasing) CHECK(bwd == kIncreasing);
    }
}

TEST_CASE("symbolic normalization") {
    const ConceptDef c = three_state();
    CHECK(normalize_symbolic(c.states[1], c) == 0.5);
    const ConceptDef& wbc = oncology().concept_for("WBC");
    CHECK(normalize_symbolic(wbc.states[3], wbc) == doctest::Approx(0.6));

    ConceptDef b;
    b.name = "B";
    b.value_type = ValueType::boolean;
    b.states = {{"False", 0, 0.5, 1}, {"True", 0.5, 1, 2}};
    CHECK(normalize_symbolic(b.states[1], b) == 1.0);
    CHECK(normalize_symbolic(b.states[0], b) == 0.0);

    ConceptDef single;
    single.name = "S";
    single.states = {{"ONLY", 0, 1, 1}};
    CHECK_THROWS_AS(normalize_symbolic(single.states[0], single), Error);

    CHECK(normalize_gradient(kDecreasing) == 0.0);
    CHECK(normalize_gradient(kSame) == 0.5);
    CHECK(normalize_gradient(kIncreasing) == 1.0);
}

TEST_CASE("raw normalization") {
    const std::vector<double> cohort{10, 12};
    const ConceptStats st = fit_concept_stats(cohort);
    CHECK(st.mean == 11);
    CHECK(st.sd == 1);  // population formula
    CHECK(st.normalize(10) == 0.0);
    CHECK(st.normalize(12) == 1.0);
    CHECK(st.normalize(11) == 0.5);
    CHECK(st.normalize(5) == 0.0);   // clipped below
    CHECK(st.normalize(50) == 1.0);  // clipped above

    // z-values {-1, 0, 1} map onto {0, 0.5, 1}.
    const std::vector<double> three{-1, 0, 1};
    const ConceptStats z = fit_concept_stats(three);
    CHECK(z.normalize(-1) == doctest::Approx(0.0));
    CHECK(z.normalize(0) == doctest::Approx(0.5));
    CHECK(z.normalize(1) == doctest::Approx(1.0));

    const std::vector<double> flat{4, 4, 4};
    CHECK(fit_concept_stats(flat).normalize(4) == 0.5);
    CHECK(fit_concept_stats(flat).normalize(100) == 0.5);
    CHECK_THROWS_AS(fit_concept_stats(std::span<const double>{}), DataError);
}

TEST_CASE("normalize_raw fits over the whole cohort") {
    const std::vector<std::vector<Sample>> cohort{{{0, 10}, {D, 14}}, {{0, 12}}};
    const auto r = normalize_raw(cohort, "X");
    REQUIRE(r.sequences.size() == 2);
    CHECK(r.stats.mean == 12);
    CHECK(r.sequences[0].intervals[0].value == 0.0);
    CHECK(r.sequences[0].intervals[1].value == 1.0);
    CHECK(r.sequences[1].intervals[0].value == 0.5);
    CHECK(r.sequences[0].intervals[1].raw == 14);
    CHECK(r.sequences[0].intervals[1].start == r.sequences[0].intervals[1].end);
}

TEST_CASE("representation codes and features") {
    CHECK(code(Representation::state_and_gradient) == "SG");
    CHECK(parse_representation("G") == Representation::gradient);
    CHECK_THROWS_AS(parse_representation("X"), Error);
    const auto f = expand_features("WBC", Representation::state_and_gradient);
    REQUIRE(f.size() == 2);
    CHECK(f[0].name() == "WBC:state");
    CHECK(f[1].name() == "WBC:gradient");
    CHECK(expand_features("WBC", Representation::raw).at(0).name() == "WBC:raw");
}
