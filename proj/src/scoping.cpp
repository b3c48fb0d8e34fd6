#include "idtw/scoping.hpp"

#include <algorithm>

#include "idtw/error.hpp"

namespace idtw {

void validate(const TimelineSpec& spec) {
    if (const auto* abs = std::get_if<AbsoluteTimeline>(&spec)) {
        if (!(abs->start < abs->end)) throw ConfigError("absolute timeline needs start < end");
        return;
    }
    const auto& rel = std::get<RelativeTimeline>(spec);
    if (rel.reference_concept.empty()) throw ConfigError("relative timeline needs a reference concept");
    if (rel.before_period < 0 || rel.after_period < 0)
        throw ConfigError("before/after periods are magnitudes and must be non-negative");
    if (rel.selection.kind == Selection::Kind::nth && rel.selection.n < 1)
        throw ConfigError("nth selection needs n >= 1");
}

std::optional<Timestamp> resolve_reference_point(std::span<const Event> events, const RelativeTimeline& spec) {
    std::vector<const Event*> matches;
    for (const Event& e : events)
        if (e.name == spec.reference_concept) matches.push_back(&e);
    std::stable_sort(matches.begin(), matches.end(),
                     [](const Event* a, const Event* b) { return a->start < b->start; });
    if (matches.empty()) return std::nullopt;

    const Event* chosen = nullptr;
    switch (spec.selection.kind) {
        case Selection::Kind::first: chosen = matches.front(); break;
        case Selection::Kind::last: chosen = matches.back(); break;
        case Selection::Kind::nth:
            if (spec.selection.n < 1 || static_cast<std::size_t>(spec.selection.n) > matches.size())
                return std::nullopt;
            chosen = matches[static_cast<std::size_t>(spec.selection.n) - 1];
            break;
    }
    return spec.aspect == Aspect::start_time ? chosen->start : chosen->end;
}

TMS compute_tms(const TimelineSpec& spec, std::optional<Timestamp> reference) {
    TMS tms;
    if (const auto* abs = std::get_if<AbsoluteTimeline>(&spec)) {
        tms = {abs->start, abs->end};
    } else {
        const auto& rel = std::get<RelativeTimeline>(spec);
        if (!reference) throw ConfigError("relative timeline needs a resolved reference point");
        tms = {*reference - rel.before_period, *reference + rel.after_period};
    }
    if (tms.start >= tms.end) throw ConfigError("temporal matching scope is empty (start >= end)");
    return tms;
}

bool intersects_scope(const Interval& s, const TMS& tms) {
    return (s.start >= tms.start && s.start <= tms.end) || (s.end >= tms.start && s.end <= tms.end) ||
           (s.start < tms.start && s.end > tms.end);
}

UnivariateESequence restrict(const UnivariateESequence& eseq, const TMS& tms) {
    UnivariateESequence out{eseq.concept_name, {}};
    for (const Interval& s : eseq.intervals) {
        if (!intersects_scope(s, tms)) continue;
        Interval clipped = s;
        clipped.start = std::max(s.start, tms.start);
        clipped.end = std::min(s.end, tms.end);
        out.intervals.push_back(std::move(clipped));
    }
    return out;
}

MultivariateESequence restrict(const MultivariateESequence& eseq, const TMS& tms) {
    MultivariateESequence out{eseq.entity, {}};
    for (const auto& [name, seq] : eseq.sequences) out.sequences.emplace(name, restrict(seq, tms));
    return out;
}

}  // namespace idtw
