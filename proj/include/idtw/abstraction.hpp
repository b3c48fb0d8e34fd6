#pragma once

// Raw samples -> normalized State, Gradient and Raw interval sequences.

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "idtw/kb.hpp"
#include "idtw/temporal.hpp"

namespace idtw {

enum class Representation { raw, state, gradient, state_and_gradient };

// "R", "S", "G", "SG"
std::string_view code(Representation r);
Representation parse_representation(std::string_view s);

// One feature row of an event table.
enum class AbstractionKind { raw, state, gradient };

struct Feature {
    std::string concept_name;
    AbstractionKind kind = AbstractionKind::raw;

    std::string name() const;  // "WBC:state"
    bool operator==(const Feature&) const = default;
};

// StateAndGradient expands to two rows, every other representation to one.
std::vector<Feature> expand_features(const std::string& concept_name, Representation r);

inline constexpr std::string_view kIncreasing = "INCREASING";
inline constexpr std::string_view kSame = "SAME";
inline constexpr std::string_view kDecreasing = "DECREASING";

// Min-max position of a state in its concept's ordinal order (booleans: False=0, True=1).
double normalize_symbolic(const StateDef& state, const ConceptDef& concept_def);

// DECREASING=0, SAME=0.5, INCREASING=1.
double normalize_gradient(std::string_view label);

// Classifies each sample, extends it by Good-Before/Good-After, merges equal
// states whose spans touch or overlap and splits differing overlaps at the
// midpoint of the overlap. Samples must be strictly time-ordered.
UnivariateESequence abstract_state(std::span<const Sample> samples, const ConceptDef& concept_def);

// The merge pass of abstract_state over already-extended intervals (in sample order).
std::vector<Interval> resolve_persistence(std::vector<Interval> extended);

// One interval per consecutive sample pair spanning [t_i, t_{i+1}], labeled
// by the significant-variation rule; equal neighbours are merged.
// Fewer than two samples give an empty sequence and a logged warning.
UnivariateESequence abstract_gradient(std::span<const Sample> samples, const ConceptDef& concept_def);

// Z-score parameters of one concept plus the cohort range of z used for min-max scaling.
struct ConceptStats {
    double mean = 0.0;
    double sd = 0.0;
    double z_min = 0.0;
    double z_max = 0.0;

    // z-score, then min-max over the cohort range, clipped to [0,1].
    // A degenerate (zero-variance) cohort maps everything to 0.5.
    double normalize(double value) const;
};

// Population (divide-by-N) statistics over a cohort of values. Throws DataError if empty.
ConceptStats fit_concept_stats(std::span<const double> values);

class PopulationStats {
public:
    void set(const std::string& concept_name, ConceptStats stats) { stats_[concept_name] = stats; }
    const ConceptStats& at(const std::string& concept_name) const;
    bool contains(const std::string& concept_name) const { return stats_.count(concept_name) != 0; }
    const std::map<std::string, ConceptStats>& all() const { return stats_; }

private:
    std::map<std::string, ConceptStats> stats_;
};

// Point intervals [t, t] carrying the normalized raw value.
UnivariateESequence raw_sequence(std::span<const Sample> samples, const std::string& concept_name,
                                 const ConceptStats& stats);

struct RawNormalization {
    ConceptStats stats;
    std::vector<UnivariateESequence> sequences;
};

// Fits stats over every sample of the cohort and normalizes each member.
RawNormalization normalize_raw(const std::vector<std::vector<Sample>>& cohort, const std::string& concept_name);

}  // namespace idtw
