#include "idtw/gbr.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>

#include "idtw/error.hpp"

namespace idtw {
namespace {

double median_of(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    const auto n = values.size();
    return n % 2 == 1 ? values[n / 2] : (values[n / 2 - 1] + values[n / 2]) / 2.0;
}

double mode_of(std::span<const Segment> segments) {
    // Ties resolve to the value seen first.
    std::vector<std::pair<double, int>> counts;
    for (const auto& s : segments) {
        auto it = std::find_if(counts.begin(), counts.end(), [&](const auto& c) { return c.first == s.value; });
        if (it == counts.end())
            counts.emplace_back(s.value, 1);
        else
            ++it->second;
    }
    auto best = counts.begin();
    for (auto it = counts.begin(); it != counts.end(); ++it)
        if (it->second > best->second) best = it;
    return best->first;
}

// Clipped interval's duration for IBAP weighting; pure points count as one minute.
Minutes weight(const Interval& s) { return std::max<Minutes>(s.duration(), 1); }

bool overlaps_column(const Interval& s, Timestamp col_start, Timestamp col_end) {
    if (s.start == s.end) return s.start >= col_start && s.start < col_end;
    return std::min(s.end, col_end) > std::max(s.start, col_start);
}

std::string format_value(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

}  // namespace

std::string_view to_string(InterpolationMethod m) {
    switch (m) {
        case InterpolationMethod::nearest: return "nearest";
        case InterpolationMethod::linear: return "linear";
        case InterpolationMethod::average: return "average";
        case InterpolationMethod::ibap: return "ibap";
    }
    return "?";
}

InterpolationMethod parse_interpolation(std::string_view s) {
    if (s == "nearest" || s == "nn" || s == "NearestNeighbor") return InterpolationMethod::nearest;
    if (s == "linear" || s == "Linear") return InterpolationMethod::linear;
    if (s == "average" || s == "Average") return InterpolationMethod::average;
    if (s == "ibap" || s == "IBAP") return InterpolationMethod::ibap;
    throw ConfigError("unknown interpolation method '" + std::string(s) + "'");
}

std::vector<GranuleBucket> segment_row(const UnivariateESequence& eseq, const TMS& tms,
                                       const Granularity& granularity) {
    const auto columns = static_cast<std::size_t>(duration_in_granules(tms.start, tms.end, granularity));
    const Minutes g = granularity.length;
    std::vector<GranuleBucket> buckets(columns);
    if (columns == 0) return buckets;

    for (const Interval& s : eseq.intervals) {
        const Timestamp start = std::max(s.start, tms.start);
        const Timestamp end = std::min(s.end, tms.end);
        if (end < start) continue;
        if (start == end) {
            auto col = static_cast<std::size_t>((start - tms.start) / g);
            col = std::min(col, columns - 1);
            buckets[col].segments.push_back({s.value, 1});
            continue;
        }
        const auto first = static_cast<std::size_t>((start - tms.start) / g);
        for (std::size_t col = first; col < columns; ++col) {
            const Timestamp col_start = tms.start + static_cast<Timestamp>(col) * g;
            if (col_start >= end) break;
            const Timestamp col_end = col_start + g;
            const Minutes covered = std::min(end, col_end) - std::max(start, col_start);
            if (covered > 0) buckets[col].segments.push_back({s.value, covered});
        }
    }
    return buckets;
}

SegmentedTable segment(const MultivariateESequence& eseq, const TMS& tms, const Granularity& granularity) {
    SegmentedTable table;
    table.entity = eseq.entity;
    table.tms = tms;
    table.granularity = granularity;
    table.column_count = static_cast<std::size_t>(duration_in_granules(tms.start, tms.end, granularity));
    for (const auto& [feature, seq] : eseq.sequences)
        table.rows.push_back({feature, segment_row(seq, tms, granularity), seq.intervals});
    return table;
}

double aggregate(const GranuleBucket& bucket, const AggregationConfig& cfg) {
    const auto& segs = bucket.segments;
    if (segs.empty()) throw DataError("cannot aggregate an empty granule");

    const bool single_value =
        std::all_of(segs.begin(), segs.end(), [&](const Segment& s) { return s.value == segs.front().value; });
    if (single_value) return segs.front().value;

    const bool equal_durations =
        std::all_of(segs.begin(), segs.end(), [&](const Segment& s) { return s.covered == segs.front().covered; });
    if (equal_durations) {
        switch (cfg.value_delegate) {
            case ValueDelegate::mean: {
                double sum = 0.0;
                for (const auto& s : segs) sum += s.value;
                return sum / static_cast<double>(segs.size());
            }
            case ValueDelegate::median: {
                std::vector<double> values;
                for (const auto& s : segs) values.push_back(s.value);
                return median_of(std::move(values));
            }
            case ValueDelegate::mode: return mode_of(segs);
        }
    }

    if (cfg.duration_delegate == DurationDelegate::li) {
        // Strict comparison keeps the earliest of equally long segments.
        const Segment* best = &segs.front();
        for (const auto& s : segs)
            if (s.covered > best->covered) best = &s;
        return best->value;
    }

    std::map<double, Minutes> totals;
    for (const auto& s : segs) totals[s.value] += s.covered;
    // Ascending key order with >= picks the higher value on ties.
    auto best = totals.begin();
    for (auto it = totals.begin(); it != totals.end(); ++it)
        if (it->second >= best->second) best = it;
    return best->first;
}

std::int64_t ibap_left_share(std::int64_t gap, Minutes left_duration, Minutes right_duration) {
    const std::int64_t total = left_duration + right_duration;
    // round-half-up of gap * left / total in integer arithmetic
    const std::int64_t share = (2 * gap * left_duration + total) / (2 * total);
    return std::clamp<std::int64_t>(share, 0, gap);
}

std::vector<double> interpolate_row(std::span<const std::optional<double>> row, InterpolationMethod method,
                                    const IbapSource* source) {
    const std::size_t n = row.size();
    std::vector<std::size_t> filled;
    for (std::size_t i = 0; i < n; ++i)
        if (row[i]) filled.push_back(i);
    if (filled.empty()) throw DataError("feature row has no values in scope; feature is unusable for this entity");
    if (method == InterpolationMethod::ibap && source == nullptr)
        throw ConfigError("IBAP interpolation needs the source intervals of the row");

    std::vector<double> out(n);
    for (std::size_t i : filled) out[i] = *row[i];
    for (std::size_t i = 0; i < filled.front(); ++i) out[i] = *row[filled.front()];
    for (std::size_t i = filled.back() + 1; i < n; ++i) out[i] = *row[filled.back()];

    for (std::size_t f = 0; f + 1 < filled.size(); ++f) {
        const std::size_t left = filled[f];
        const std::size_t right = filled[f + 1];
        if (right == left + 1) continue;
        const double lv = *row[left];
        const double rv = *row[right];
        const auto span = static_cast<double>(right - left);

        if (method == InterpolationMethod::ibap) {
            const Minutes g = source->granularity.length;
            const Timestamp left_start = source->origin + static_cast<Timestamp>(left) * g;
            const Timestamp right_start = source->origin + static_cast<Timestamp>(right) * g;
            Minutes dl = 1, dr = 1;
            const Interval* l = nullptr;
            const Interval* r = nullptr;
            for (const Interval& s : source->intervals) {
                if (overlaps_column(s, left_start, left_start + g) && (!l || s.end > l->end)) l = &s;
                if (overlaps_column(s, right_start, right_start + g) && (!r || s.start < r->start)) r = &s;
            }
            if (l) dl = weight(*l);
            if (r) dr = weight(*r);
            const auto gap = static_cast<std::int64_t>(right - left - 1);
            const auto share = static_cast<std::size_t>(ibap_left_share(gap, dl, dr));
            for (std::size_t k = 0; k < static_cast<std::size_t>(gap); ++k)
                out[left + 1 + k] = k < share ? lv : rv;
            continue;
        }

        for (std::size_t i = left + 1; i < right; ++i) {
            switch (method) {
                case InterpolationMethod::nearest:
                    out[i] = (i - left) <= (right - i) ? lv : rv;
                    break;
                case InterpolationMethod::linear:
                    out[i] = lv + (rv - lv) * static_cast<double>(i - left) / span;
                    break;
                case InterpolationMethod::average:
                    out[i] = (lv + rv) / 2.0;
                    break;
                case InterpolationMethod::ibap: break;
            }
        }
    }
    return out;
}

EventTable build_event_table(const SegmentedTable& table, std::span<const AggregationConfig> aggregation,
                             InterpolationMethod method) {
    if (aggregation.size() != 1 && aggregation.size() != table.rows.size())
        throw ConfigError("need one aggregation config per row or a single shared one");
    EventTable out;
    out.entity = table.entity;
    out.granularity = table.granularity;
    out.column_count = table.column_count;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const SegmentedRow& row = table.rows[r];
        const AggregationConfig& cfg = aggregation.size() == 1 ? aggregation[0] : aggregation[r];
        std::vector<std::optional<double>> cells(table.column_count);
        for (std::size_t c = 0; c < table.column_count; ++c)
            if (!row.buckets[c].empty()) cells[c] = aggregate(row.buckets[c], cfg);
        IbapSource source{row.sources, table.tms.start, table.granularity};
        std::vector<double> full;
        try {
            full = interpolate_row(cells, method, &source);
        } catch (const DataError& e) {
            throw DataError("entity '" + table.entity + "', feature '" + row.feature + "': " + e.what());
        }
        out.features.push_back(row.feature);
        out.rows.emplace_back(full.begin(), full.end());
    }
    return out;
}

std::string format_event_table(const EventTable& table) {
    std::string out = table.entity + "," + table.granularity.name + "," + std::to_string(table.column_count) + "\n";
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        out += table.features[r];
        for (const auto& cell : table.rows[r]) {
            out += ',';
            if (cell) out += format_value(*cell);
        }
        out += '\n';
    }
    return out;
}

}  // namespace idtw
