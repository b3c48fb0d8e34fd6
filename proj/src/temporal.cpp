#include "idtw/temporal.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>

#include "idtw/error.hpp"

namespace idtw {
namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size();
}

}  // namespace

Granularity parse_granularity(std::string_view unit) {
    std::string u = lower(trim(unit));
    if (u.size() > 1 && u.back() == 's') u.pop_back();
    if (u == "minute" || u == "min") return Granularity::minute();
    if (u == "hour") return Granularity::hour();
    if (u == "day") return Granularity::day();
    if (u == "week") return Granularity::week();
    if (u == "month") return Granularity::month();
    if (u == "year") return Granularity::year();
    throw Error("unknown time unit '" + std::string(unit) + "'");
}

Minutes parse_duration(std::string_view text) {
    std::string_view t = trim(text);
    auto space = t.find_first_of(" \t");
    if (space == std::string_view::npos) throw Error("duration '" + std::string(text) + "' needs a unit");
    std::int64_t count = 0;
    if (!parse_number(t.substr(0, space), count))
        throw Error("duration '" + std::string(text) + "' has a non-integer count");
    return count * parse_granularity(t.substr(space + 1)).length;
}

Timestamp parse_timestamp(std::string_view text) {
    std::string_view t = trim(text);
    std::int64_t minutes = 0;
    if (parse_number(t, minutes)) return minutes;

    // YYYY-MM-DD[(T| )HH:MM[:SS]]
    int y = 0;
    unsigned mo = 0, d = 0, hh = 0, mm = 0;
    auto field = [&](std::size_t pos, std::size_t len, auto& out) {
        return pos + len <= t.size() && parse_number(t.substr(pos, len), out);
    };
    bool ok = t.size() >= 10 && t[4] == '-' && t[7] == '-' && field(0, 4, y) && field(5, 2, mo) &&
              field(8, 2, d);
    if (ok && t.size() > 10) {
        ok = (t[10] == 'T' || t[10] == ' ') && t.size() >= 16 && t[13] == ':' && field(11, 2, hh) &&
             field(14, 2, mm) && hh < 24 && mm < 60;
    }
    using namespace std::chrono;
    year_month_day ymd{year{y}, month{mo}, day{d}};
    if (!ok || !ymd.ok()) throw Error("invalid timestamp '" + std::string(text) + "'");
    auto days = sys_days{ymd}.time_since_epoch().count();
    return static_cast<Timestamp>(days) * kMinutesPerDay + hh * 60 + mm;
}

std::int64_t duration_in_granules(Timestamp start, Timestamp end, const Granularity& granularity) {
    const Minutes span = end - start;
    return (span + granularity.length - 1) / granularity.length;
}

bool EventTable::complete() const {
    for (const auto& row : rows) {
        if (row.size() != column_count) return false;
        for (const auto& cell : row)
            if (!cell) return false;
    }
    return true;
}

std::string format_duration(Minutes m) {
    struct Unit {
        const char* name;
        Minutes length;
    };
    static constexpr Unit units[] = {{"Years", kMinutesPerYear}, {"Months", kMinutesPerMonth},
                                     {"Days", kMinutesPerDay},   {"Hours", kMinutesPerHour},
                                     {"Minutes", 1}};
    if (m == 0) return "0 Days";
    for (const auto& u : units)
        if (m % u.length == 0) return std::to_string(m / u.length) + " " + u.name;
    return std::to_string(m) + " Minutes";
}

}  // namespace idtw
