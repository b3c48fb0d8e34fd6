#pragma once

// Granularity-based representation: segment restricted e-sequences into time
// granules, aggregate each granule with a delegate function and fill the gaps.

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "idtw/kb.hpp"
#include "idtw/scoping.hpp"
#include "idtw/temporal.hpp"

namespace idtw {

struct Segment {
    double value = 0.0;
    Minutes covered = 0;  // overlap with the granule; point samples count as 1 minute
};

struct GranuleBucket {
    std::vector<Segment> segments;  // in source-interval order

    bool empty() const { return segments.empty(); }
};

struct AggregationConfig {
    ValueDelegate value_delegate = ValueDelegate::mean;
    DurationDelegate duration_delegate = DurationDelegate::mtt;
};

enum class InterpolationMethod { nearest, linear, average, ibap };

std::string_view to_string(InterpolationMethod m);
InterpolationMethod parse_interpolation(std::string_view s);

// Buckets of one feature row plus the intervals they came from (needed by IBAP).
struct SegmentedRow {
    std::string feature;
    std::vector<GranuleBucket> buckets;
    std::vector<Interval> sources;
};

struct SegmentedTable {
    std::string entity;
    TMS tms;
    Granularity granularity;
    std::size_t column_count = 0;
    std::vector<SegmentedRow> rows;
};

// Column count is duration_in_granules(tms.start, tms.end, granularity).
std::vector<GranuleBucket> segment_row(const UnivariateESequence& eseq, const TMS& tms, const Granularity& granularity);

// One row per sequence, in the mapping's key order. The input must already be restricted to `tms`.
SegmentedTable segment(const MultivariateESequence& eseq, const TMS& tms, const Granularity& granularity);

// Value delegate when every segment has the same duration, duration delegate otherwise.
// Precondition: bucket is non-empty.
double aggregate(const GranuleBucket& bucket, const AggregationConfig& cfg);

// Left/right neighbour context for IBAP gaps.
struct IbapSource {
    std::span<const Interval> intervals;
    Timestamp origin = 0;
    Granularity granularity;
};

// Fills every empty cell. Leading/trailing gaps copy their single neighbour.
// Throws DataError when the row has no filled cell; IBAP requires `source`.
std::vector<double> interpolate_row(std::span<const std::optional<double>> row, InterpolationMethod method,
                                    const IbapSource* source = nullptr);

// Number of gap granules that take the left neighbour's value under IBAP.
std::int64_t ibap_left_share(std::int64_t gap, Minutes left_duration, Minutes right_duration);

// Aggregates and interpolates a segmented table into a complete event table.
// `aggregation` holds one config per row, or a single config applied to all rows.
EventTable build_event_table(const SegmentedTable& table, std::span<const AggregationConfig> aggregation,
                             InterpolationMethod method);

// Text block: header "entity,granularity,columns" then "<feature>,v1,...,vn" per row.
std::string format_event_table(const EventTable& table);

}  // namespace idtw
