#pragma once

// Time model and interval-sequence types shared by every pipeline stage.
// All timestamps and durations are integer minutes.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace idtw {

using Timestamp = std::int64_t;
using Minutes = std::int64_t;

inline constexpr Minutes kMinutesPerHour = 60;
inline constexpr Minutes kMinutesPerDay = 1440;
inline constexpr Minutes kMinutesPerWeek = 7 * kMinutesPerDay;
inline constexpr Minutes kMinutesPerMonth = 30 * kMinutesPerDay;
inline constexpr Minutes kMinutesPerYear = 365 * kMinutesPerDay;

// A fixed-size time granule, e.g. Day = 1440 minutes.
struct Granularity {
    std::string name = "Day";
    Minutes length = kMinutesPerDay;

    static Granularity minute() { return {"Minute", 1}; }
    static Granularity hour() { return {"Hour", kMinutesPerHour}; }
    static Granularity day() { return {"Day", kMinutesPerDay}; }
    static Granularity week() { return {"Week", kMinutesPerWeek}; }
    static Granularity month() { return {"Month", kMinutesPerMonth}; }
    static Granularity year() { return {"Year", kMinutesPerYear}; }

    bool operator==(const Granularity&) const = default;
};

// Accepts singular/plural, case-insensitive: "day", "Days", "Month", ...
Granularity parse_granularity(std::string_view unit);

// Parses "<n> <unit>" (e.g. "3 Months", "1 Day", "90 minutes") into minutes.
Minutes parse_duration(std::string_view text);

// Largest unit that divides exactly: "3 Months", "36 Hours", "0 Days".
std::string format_duration(Minutes m);

// Integer minutes, or an ISO-8601 date / date-time ("2004-03-15", "2004-03-15T08:30").
Timestamp parse_timestamp(std::string_view text);

// Number of granules covering [start, end]; a partial trailing granule counts.
// Precondition: start <= end.
std::int64_t duration_in_granules(Timestamp start, Timestamp end, const Granularity& granularity);

struct Sample {
    Timestamp time = 0;
    double value = 0.0;
};

// One labeled interval of an e-sequence. `value` is normalized to [0,1];
// `label` keeps the symbol (state/gradient) and `raw` the original number for raw points.
struct Interval {
    Timestamp start = 0;
    Timestamp end = 0;
    double value = 0.0;
    std::string label;
    double raw = 0.0;

    Minutes duration() const { return end - start; }
    bool operator==(const Interval&) const = default;
};

struct UnivariateESequence {
    std::string concept_name;
    std::vector<Interval> intervals;
};

struct MultivariateESequence {
    std::string entity;
    std::map<std::string, UnivariateESequence> sequences;
};

// Dense features x granules matrix. Cells are empty until aggregation/interpolation fill them.
struct EventTable {
    std::string entity;
    Granularity granularity;
    std::vector<std::string> features;
    std::vector<std::vector<std::optional<double>>> rows;
    std::size_t column_count = 0;

    bool complete() const;
};

}  // namespace idtw
