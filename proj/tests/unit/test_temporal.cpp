#include "doctest.h"

#include <random>

#include "idtw/error.hpp"
#include "idtw/temporal.hpp"

using namespace idtw;

TEST_CASE("duration_in_granules counts partial granules") {
    const auto day = Granularity::day();
    CHECK(duration_in_granules(0, 10 * kMinutesPerDay, day) == 10);
    CHECK(duration_in_granules(0, 1441, day) == 2);
    CHECK(duration_in_granules(500, 500, day) == 0);
    CHECK(duration_in_granules(0, 1, Granularity::month()) == 1);
}

TEST_CASE("duration_in_granules is monotone and subadditive") {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<Timestamp> t(0, 20 * kMinutesPerDay);
    const auto day = Granularity::day();
    for (int trial = 0; trial < 2000; ++trial) {
        Timestamp a = t(rng), b = t(rng), c = t(rng);
        if (a > b) std::swap(a, b);
        if (b > c) std::swap(b, c);
        if (a > b) std::swap(a, b);
        CHECK(duration_in_granules(a, c, day) >= duration_in_granules(b, c, day));
        CHECK(duration_in_granules(a, c, day) >= duration_in_granules(a, b, day));
        CHECK(duration_in_granules(a, b, day) + duration_in_granules(b, c, day) >= duration_in_granules(a, c, day));
        // Equality when the split point sits on a granule boundary of [a, c].
        const Timestamp aligned = a + ((b - a) / kMinutesPerDay) * kMinutesPerDay;
        CHECK(duration_in_granules(a, aligned, day) + duration_in_granules(aligned, c, day) ==
              duration_in_granules(a, c, day));
    }
}

TEST_CASE("granularity and duration parsing") {
    CHECK(parse_granularity("day") == Granularity::day());
    CHECK(parse_granularity("Months") == Granularity::month());
    CHECK(parse_granularity("YEAR").length == 365 * kMinutesPerDay);
    CHECK(parse_duration("3 Months") == 90 * kMinutesPerDay);
    CHECK(parse_duration("1 Day") == 1440);
    CHECK(parse_duration("2 Years") == 730 * kMinutesPerDay);
    CHECK(parse_duration("90 minutes") == 90);
    CHECK_THROWS_AS(parse_duration("3"), Error);
    CHECK_THROWS_AS(parse_duration("3 fortnights"), Error);
    CHECK_THROWS_AS(parse_duration("x Days"), Error);
}

TEST_CASE("format_duration picks the largest exact unit") {
    CHECK(format_duration(90 * kMinutesPerDay) == "3 Months");
    CHECK(format_duration(36 * 60) == "36 Hours");
    CHECK(format_duration(0) == "0 Days");
    CHECK(format_duration(7) == "7 Minutes");
    for (Minutes m : {Minutes{1}, Minutes{61}, kMinutesPerDay, 5 * kMinutesPerYear, 45 * kMinutesPerDay})
        CHECK(parse_duration(format_duration(m)) == m);
}

TEST_CASE("timestamps accept minutes and ISO dates") {
    CHECK(parse_timestamp("12345") == 12345);
    CHECK(parse_timestamp("-60") == -60);
    CHECK(parse_timestamp("1970-01-02") == kMinutesPerDay);
    CHECK(parse_timestamp("1970-01-01T01:30") == 90);
    CHECK(parse_timestamp("1970-01-01 00:05:00") == 5);
    CHECK(parse_timestamp("2000-03-01") - parse_timestamp("2000-02-28") == 2 * kMinutesPerDay);  // leap year
    CHECK_THROWS_AS(parse_timestamp("2001-02-30"), Error);
    CHECK_THROWS_AS(parse_timestamp("yesterday"), Error);
}

TEST_CASE("event table completeness") {
    EventTable t;
    t.column_count = 2;
    t.features = {"a"};
    t.rows = {{0.5, std::nullopt}};
    CHECK_FALSE(t.complete());
    t.rows[0][1] = 0.1;
    CHECK(t.complete());
}
