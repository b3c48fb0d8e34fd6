#include "idtw/imatch.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

#include "idtw/error.hpp"

namespace idtw {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_inputs(const Series& a, const Series& b) {
    if (a.length == 0 || b.length == 0) throw DataError("cannot match an empty series");
    if (a.features != b.features)
        throw ConfigError("feature arity mismatch: " + std::to_string(a.features) + " vs " +
                          std::to_string(b.features));
}

// Shared DP: calls `emit(i, j, value)` for every in-band cell, column by column.
template <typename Emit>
double accumulate(const Series& a, const Series& b, const BandPolicy& band, Emit&& emit) {
    check_inputs(a, b);
    const std::size_t m = a.length;
    const std::size_t n = b.length;
    const auto ranges = band_ranges(m, n, band_radius(band, m, n));

    std::vector<double> prev(m, kInf), cur(m, kInf);
    for (std::size_t j = 0; j < n; ++j) {
        if (j >= 2) std::fill(cur.begin() + ranges[j - 2].lo, cur.begin() + ranges[j - 2].hi + 1, kInf);
        const auto bj = b.at(j);
        for (std::size_t i = ranges[j].lo; i <= ranges[j].hi; ++i) {
            const double d = local_distance(a.at(i), bj);
            double best;
            if (i == 0 && j == 0) {
                best = 0.0;
            } else {
                best = prev[i];
                if (i > 0) best = std::min({best, cur[i - 1], prev[i - 1]});
            }
            cur[i] = d + best;
            emit(i, j, cur[i]);
        }
        std::swap(prev, cur);
    }
    const double result = prev[m - 1];
    if (!std::isfinite(result)) throw ConfigError("infeasible band: no warping path reaches the end corner");
    return result;
}

}  // namespace

Series Series::from_rows(const std::vector<std::vector<double>>& rows) {
    Series s;
    s.features = rows.size();
    s.length = rows.empty() ? 0 : rows.front().size();
    s.values.resize(s.features * s.length);
    for (std::size_t f = 0; f < s.features; ++f) {
        if (rows[f].size() != s.length) throw DataError("feature rows differ in length");
        for (std::size_t t = 0; t < s.length; ++t) s.values[t * s.features + f] = rows[f][t];
    }
    return s;
}

Series to_series(const EventTable& table) {
    Series s;
    s.features = table.rows.size();
    s.length = table.column_count;
    s.values.resize(s.features * s.length);
    for (std::size_t f = 0; f < s.features; ++f) {
        const auto& row = table.rows[f];
        if (row.size() != s.length) throw DataError("event table row has the wrong column count");
        for (std::size_t t = 0; t < s.length; ++t) {
            if (!row[t]) throw DataError("event table of '" + table.entity + "' is not interpolated");
            s.values[t * s.features + f] = *row[t];
        }
    }
    return s;
}

std::string to_string(const BandPolicy& band) {
    if (std::holds_alternative<Unconstrained>(band)) return "none";
    if (const auto* sc = std::get_if<SakoeChibaPercent>(&band)) {
        char buf[32];
        auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, sc->percent);
        return "sc" + std::string(buf, ptr);
    }
    return "kb" + std::to_string(std::get<KBBand>(band).radius_granules);
}

BandPolicy parse_band(std::string_view s) {
    if (s == "none" || s == "unconstrained" || s == "inf") return Unconstrained{};
    auto number = [&](std::string_view digits, auto& out) {
        auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), out);
        if (ec != std::errc{} || ptr != digits.data() + digits.size())
            throw ConfigError("invalid band '" + std::string(s) + "'");
    };
    if (s.substr(0, 2) == "sc") {
        SakoeChibaPercent sc;
        number(s.substr(2), sc.percent);
        if (!(sc.percent > 0.0)) throw ConfigError("Sakoe-Chiba percent must be positive");
        return sc;
    }
    if (s.substr(0, 2) == "kb") {
        KBBand kb;
        number(s.substr(2), kb.radius_granules);
        if (kb.radius_granules < 0) throw ConfigError("KB-band radius must be >= 0");
        return kb;
    }
    throw ConfigError("unknown band '" + std::string(s) + "' (expected none, sc<percent> or kb<radius>)");
}

std::optional<std::size_t> band_radius(const BandPolicy& band, std::size_t m, std::size_t n) {
    if (std::holds_alternative<Unconstrained>(band)) return std::nullopt;
    if (const auto* sc = std::get_if<SakoeChibaPercent>(&band)) {
        const double longest = static_cast<double>(std::max(m, n));
        // The small slack keeps exact products (10% of 30 = 3) from rounding up.
        return static_cast<std::size_t>(std::ceil(sc->percent * longest / 100.0 - 1e-9));
    }
    const auto r = std::get<KBBand>(band).radius_granules;
    if (r < 0) throw ConfigError("KB-band radius must be >= 0");
    return static_cast<std::size_t>(r);
}

std::vector<BandRange> band_ranges(std::size_t m, std::size_t n, std::optional<std::size_t> radius) {
    std::vector<BandRange> ranges(n);
    if (!radius) {
        for (auto& r : ranges) r = {0, m - 1};
        return ranges;
    }
    const std::size_t r = *radius;
    for (std::size_t j = 0; j < n; ++j) {
        std::size_t lo, hi;
        if (n == 1) {
            lo = 0;
            hi = m - 1;
        } else if (m >= n) {
            // Each column owns the rows the diagonal crosses since the previous column.
            hi = j * (m - 1) / (n - 1);
            lo = j == 0 ? 0 : (j - 1) * (m - 1) / (n - 1) + 1;
        } else {
            lo = hi = (2 * j * (m - 1) + (n - 1)) / (2 * (n - 1));
        }
        ranges[j].lo = lo > r ? lo - r : 0;
        ranges[j].hi = std::min(m - 1, hi + r);
    }
    return ranges;
}

double local_distance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size())
        throw ConfigError("local distance arity mismatch: " + std::to_string(a.size()) + " vs " +
                          std::to_string(b.size()));
    double sum = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double d = a[k] - b[k];
        sum += d * d;
    }
    return sum;
}

double dtw_distance(const Series& a, const Series& b, const BandPolicy& band) {
    return accumulate(a, b, band, [](std::size_t, std::size_t, double) {});
}

double dtw_distance(const EventTable& a, const EventTable& b, const BandPolicy& band) {
    if (a.features != b.features) throw ConfigError("event tables have different feature sets");
    if (!(a.granularity == b.granularity)) throw ConfigError("event tables have different granularities");
    return dtw_distance(to_series(a), to_series(b), band);
}

CostMatrix dtw_cost_matrix(const Series& a, const Series& b, const BandPolicy& band) {
    CostMatrix cm;
    cm.rows = a.length;
    cm.cols = b.length;
    cm.cells.assign(cm.rows * cm.cols, kInf);
    accumulate(a, b, band, [&](std::size_t i, std::size_t j, double v) { cm.cells[i * cm.cols + j] = v; });
    return cm;
}

std::int64_t kb_band_radius(std::span<const ConceptDef* const> concepts, const Granularity& granularity) {
    Minutes longest = 0;
    for (const ConceptDef* c : concepts) longest = std::max(longest, c->half_life());
    return (longest + granularity.length - 1) / granularity.length;
}

std::int64_t kb_band_radius(const KnowledgeBase& kb, std::span<const std::string> concepts,
                            const Granularity& granularity) {
    std::vector<const ConceptDef*> defs;
    for (const auto& name : concepts) {
        if (!kb.contains(name)) throw KbError("unknown concept '" + name + "'");
        // Population variants of one concept all count toward its half-life.
        for (const auto& c : kb.concepts())
            if (c.name == name) defs.push_back(&c);
    }
    return kb_band_radius(defs, granularity);
}

}  // namespace idtw
