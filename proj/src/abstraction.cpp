#include "idtw/abstraction.hpp"

#include <algorithm>
#include <cmath>

#include "idtw/error.hpp"
#include "idtw/log.hpp"

namespace idtw {
namespace {

Timestamp floor_midpoint(Timestamp a, Timestamp b) {
    Timestamp sum = a + b;
    return sum >= 0 ? sum / 2 : -((-sum + 1) / 2);
}

void check_ordered(std::span<const Sample> samples, const std::string& concept_name) {
    for (std::size_t i = 1; i < samples.size(); ++i)
        if (samples[i].time <= samples[i - 1].time)
            throw DataError("concept '" + concept_name + "': samples are not strictly time-ordered at index " +
                            std::to_string(i));
}

}  // namespace

std::string_view code(Representation r) {
    switch (r) {
        case Representation::raw: return "R";
        case Representation::state: return "S";
        case Representation::gradient: return "G";
        case Representation::state_and_gradient: return "SG";
    }
    return "?";
}

Representation parse_representation(std::string_view s) {
    if (s == "R" || s == "raw") return Representation::raw;
    if (s == "S" || s == "state") return Representation::state;
    if (s == "G" || s == "gradient") return Representation::gradient;
    if (s == "SG" || s == "state_and_gradient") return Representation::state_and_gradient;
    throw ConfigError("unknown representation '" + std::string(s) + "'");
}

std::string Feature::name() const {
    switch (kind) {
        case AbstractionKind::raw: return concept_name + ":raw";
        case AbstractionKind::state: return concept_name + ":state";
        case AbstractionKind::gradient: return concept_name + ":gradient";
    }
    return concept_name;
}

std::vector<Feature> expand_features(const std::string& concept_name, Representation r) {
    switch (r) {
        case Representation::raw: return {{concept_name, AbstractionKind::raw}};
        case Representation::state: return {{concept_name, AbstractionKind::state}};
        case Representation::gradient: return {{concept_name, AbstractionKind::gradient}};
        case Representation::state_and_gradient:
            return {{concept_name, AbstractionKind::state}, {concept_name, AbstractionKind::gradient}};
    }
    return {};
}

double normalize_symbolic(const StateDef& state, const ConceptDef& concept_def) {
    const auto n = concept_def.states.size();
    if (n < 2) throw KbError("concept '" + concept_def.name + "' has a single state; scale is undefined");
    if (state.ordinal_index < 1 || static_cast<std::size_t>(state.ordinal_index) > n)
        throw KbError("state '" + state.label + "' does not belong to concept '" + concept_def.name + "'");
    return static_cast<double>(state.ordinal_index - 1) / static_cast<double>(n - 1);
}

double normalize_gradient(std::string_view label) {
    if (label == kDecreasing) return 0.0;
    if (label == kSame) return 0.5;
    if (label == kIncreasing) return 1.0;
    throw Error("unknown gradient label '" + std::string(label) + "'");
}

std::vector<Interval> resolve_persistence(std::vector<Interval> extended) {
    std::vector<Interval> out;
    for (auto& next : extended) {
        if (out.empty()) {
            out.push_back(std::move(next));
            continue;
        }
        Interval& cur = out.back();
        if (next.label == cur.label) {
            if (next.start <= cur.end) {
                cur.end = std::max(cur.end, next.end);
                continue;
            }
        } else if (next.start < cur.end) {
            const Timestamp overlap_start = std::max(cur.start, next.start);
            const Timestamp cut = floor_midpoint(overlap_start, cur.end);
            cur.end = cut;
            next.start = cut;
        }
        out.push_back(std::move(next));
    }
    return out;
}

UnivariateESequence abstract_state(std::span<const Sample> samples, const ConceptDef& concept_def) {
    check_ordered(samples, concept_def.name);
    std::vector<Interval> extended;
    extended.reserve(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const Sample& s = samples[i];
        const StateDef* state = nullptr;
        try {
            state = &state_for_value(concept_def, s.value);
        } catch (const KbError& e) {
            throw KbError(std::string(e.what()) + " (sample " + std::to_string(i) + " at t=" +
                          std::to_string(s.time) + ")");
        }
        extended.push_back({s.time - concept_def.good_before, s.time + concept_def.good_after,
                            normalize_symbolic(*state, concept_def), state->label, s.value});
    }
    return {concept_def.name, resolve_persistence(std::move(extended))};
}

UnivariateESequence abstract_gradient(std::span<const Sample> samples, const ConceptDef& concept_def) {
    check_ordered(samples, concept_def.name);
    UnivariateESequence seq{concept_def.name, {}};
    if (samples.size() < 2) {
        log::warn("concept '" + concept_def.name + "': fewer than 2 samples, gradient sequence is empty");
        return seq;
    }
    for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
        const double delta = samples[i + 1].value - samples[i].value;
        const double threshold = concept_def.significant_variation.threshold_from(samples[i].value);
        std::string_view label = kSame;
        // A zero change is never a trend, even when a percent threshold collapses to 0.
        if (delta != 0.0 && delta >= threshold)
            label = kIncreasing;
        else if (delta != 0.0 && delta <= -threshold)
            label = kDecreasing;

        if (!seq.intervals.empty() && seq.intervals.back().label == label) {
            seq.intervals.back().end = samples[i + 1].time;
            continue;
        }
        seq.intervals.push_back(
            {samples[i].time, samples[i + 1].time, normalize_gradient(label), std::string(label), delta});
    }
    return seq;
}

double ConceptStats::normalize(double value) const {
    if (!(sd > 0.0) || !(z_max > z_min)) return 0.5;
    const double z = (value - mean) / sd;
    return std::clamp((z - z_min) / (z_max - z_min), 0.0, 1.0);
}

ConceptStats fit_concept_stats(std::span<const double> values) {
    if (values.empty()) throw DataError("cannot fit population statistics on an empty cohort");
    ConceptStats st;
    double sum = 0.0;
    for (double v : values) sum += v;
    st.mean = sum / static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - st.mean) * (v - st.mean);
    st.sd = std::sqrt(ss / static_cast<double>(values.size()));
    if (st.sd > 0.0) {
        auto [lo, hi] = std::minmax_element(values.begin(), values.end());
        st.z_min = (*lo - st.mean) / st.sd;
        st.z_max = (*hi - st.mean) / st.sd;
    }
    return st;
}

const ConceptStats& PopulationStats::at(const std::string& concept_name) const {
    auto it = stats_.find(concept_name);
    if (it == stats_.end()) throw DataError("no population statistics for concept '" + concept_name + "'");
    return it->second;
}

UnivariateESequence raw_sequence(std::span<const Sample> samples, const std::string& concept_name,
                                 const ConceptStats& stats) {
    check_ordered(samples, concept_name);
    UnivariateESequence seq{concept_name, {}};
    seq.intervals.reserve(samples.size());
    for (const Sample& s : samples) seq.intervals.push_back({s.time, s.time, stats.normalize(s.value), {}, s.value});
    return seq;
}

RawNormalization normalize_raw(const std::vector<std::vector<Sample>>& cohort, const std::string& concept_name) {
    std::vector<double> values;
    for (const auto& member : cohort)
        for (const Sample& s : member) values.push_back(s.value);
    RawNormalization out;
    out.stats = fit_concept_stats(values);
    out.sequences.reserve(cohort.size());
    for (const auto& member : cohort) out.sequences.push_back(raw_sequence(member, concept_name, out.stats));
    return out;
}

}  // namespace idtw
