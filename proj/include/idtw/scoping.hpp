#pragma once

// Temporal Matching Scope (TMS): the per-entity window in which matching happens.

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "idtw/temporal.hpp"

namespace idtw {

// A time-stamped reference event (e.g. a transplantation). Instantaneous events have start == end.
struct Event {
    std::string name;
    Timestamp start = 0;
    Timestamp end = 0;
};

enum class Aspect { start_time, end_time };

// Which instance of the reference concept anchors the timeline.
struct Selection {
    enum class Kind { first, last, nth };
    Kind kind = Kind::first;
    int n = 1;  // 1-based, used by nth

    static Selection first() { return {Kind::first, 1}; }
    static Selection last() { return {Kind::last, 1}; }
    static Selection nth(int n) { return {Kind::nth, n}; }
};

struct AbsoluteTimeline {
    Timestamp start = 0;
    Timestamp end = 0;
};

struct RelativeTimeline {
    std::string reference_concept;
    Aspect aspect = Aspect::start_time;
    Selection selection;
    Minutes before_period = 0;  // magnitude subtracted from the reference point
    Minutes after_period = 0;
};

using TimelineSpec = std::variant<AbsoluteTimeline, RelativeTimeline>;

// Throws ConfigError when a timeline violates its invariants.
void validate(const TimelineSpec& spec);

struct TMS {
    Timestamp start = 0;
    Timestamp end = 0;

    bool contains(Timestamp t) const { return start <= t && t <= end; }
    bool operator==(const TMS&) const = default;
};

// Aspect timestamp of the selected instance of the reference concept, or
// nullopt when the entity has no such instance (the entity is then excluded).
std::optional<Timestamp> resolve_reference_point(std::span<const Event> events, const RelativeTimeline& spec);

// Throws ConfigError for a relative spec without a reference or an empty scope.
TMS compute_tms(const TimelineSpec& spec, std::optional<Timestamp> reference = std::nullopt);

// True when the interval starts in, ends in, or spans the scope.
bool intersects_scope(const Interval& interval, const TMS& tms);

// Keeps intersecting intervals and clips them to [tms.start, tms.end].
UnivariateESequence restrict(const UnivariateESequence& eseq, const TMS& tms);
MultivariateESequence restrict(const MultivariateESequence& eseq, const TMS& tms);

}  // namespace idtw
