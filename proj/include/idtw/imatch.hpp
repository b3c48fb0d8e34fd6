#pragma once

// Multivariate DTW between complete event tables under a warping-band policy.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "idtw/kb.hpp"
#include "idtw/temporal.hpp"

namespace idtw {

// Dense time-major copy of a complete event table: values[t * features + f].
struct Series {
    std::size_t features = 0;
    std::size_t length = 0;
    std::vector<double> values;

    std::span<const double> at(std::size_t t) const { return {values.data() + t * features, features}; }

    static Series from_rows(const std::vector<std::vector<double>>& rows);
};

// Throws DataError if the table has empty cells.
Series to_series(const EventTable& table);

struct Unconstrained {};
struct SakoeChibaPercent {
    double percent = 10.0;
};
struct KBBand {
    std::int64_t radius_granules = 0;
};

using BandPolicy = std::variant<Unconstrained, SakoeChibaPercent, KBBand>;

std::string to_string(const BandPolicy& band);  // "none", "sc10", "kb3"
BandPolicy parse_band(std::string_view s);     // accepts the same spellings, plus "unconstrained"/"inf"

// Radius in granules for series of lengths m and n; nullopt means unconstrained.
std::optional<std::size_t> band_radius(const BandPolicy& band, std::size_t m, std::size_t n);

// Inclusive row range [lo, hi] of series A (length m) allowed in column j of series B (length n).
struct BandRange {
    std::size_t lo = 0;
    std::size_t hi = 0;
};

// Band around the rasterized diagonal from (0,0) to (m-1,n-1), widened by `radius`
// rows on each side. Every radius >= 0 leaves a monotone path between the corners.
std::vector<BandRange> band_ranges(std::size_t m, std::size_t n, std::optional<std::size_t> radius);

// Squared Euclidean distance over all features. Throws ConfigError on arity mismatch.
double local_distance(std::span<const double> a, std::span<const double> b);

// Accumulated cost R(m, n) of the optimal warping path (two-column memory).
double dtw_distance(const Series& a, const Series& b, const BandPolicy& band);

// Checks that both tables share features and granularity before matching.
double dtw_distance(const EventTable& a, const EventTable& b, const BandPolicy& band);

// Full accumulated-cost matrix for debugging; cells outside the band are +inf.
struct CostMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> cells;  // row-major

    double at(std::size_t i, std::size_t j) const { return cells[i * cols + j]; }
};

CostMatrix dtw_cost_matrix(const Series& a, const Series& b, const BandPolicy& band);

// ceil(max over concepts of Max(GB, GA) / granule length). Throws KbError for unknown concepts.
std::int64_t kb_band_radius(const KnowledgeBase& kb, std::span<const std::string> concepts,
                            const Granularity& granularity);
std::int64_t kb_band_radius(std::span<const ConceptDef* const> concepts, const Granularity& granularity);

}  // namespace idtw
