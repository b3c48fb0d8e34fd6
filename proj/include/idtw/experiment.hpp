#pragma once

// Match configurations, the experiment grid and the experiment config file.
//
// Config file (sectioned key=value, '#' comments):
//   [experiment]  name=, granularity=Day, positive_label=, population_attribute=
//   [concepts]    names=WBC,PLATELET,HGB
//   [timeline]    kind=relative, reference=BMT, aspect=start|end, selection=first|last|nth:<n>,
//                 before=1 Month, after=2 Years
//                 kind=absolute, start=<timestamp>, end=<timestamp>
//   [grid]        max_concepts=min(3,C), interpolations=nearest,linear,average,
//                 aggregations=LI,MTT, bands=sc10,none (kb = KB-derived band), k=auto|1,3,5, folds=10

#include <cstdint>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "idtw/abstraction.hpp"
#include "idtw/gbr.hpp"
#include "idtw/imatch.hpp"
#include "idtw/kb.hpp"
#include "idtw/scoping.hpp"

namespace idtw {

struct ConceptRepresentation {
    std::string concept_name;
    Representation representation = Representation::state;

    bool operator==(const ConceptRepresentation&) const = default;
};

// One point of the experiment grid.
struct MatchConfig {
    std::vector<ConceptRepresentation> concepts;
    InterpolationMethod interpolation = InterpolationMethod::linear;
    DurationDelegate aggregation = DurationDelegate::mtt;
    BandPolicy band = SakoeChibaPercent{10.0};
    int k = 1;
    TimelineSpec timeline = AbsoluteTimeline{0, kMinutesPerDay};
    Granularity granularity;

    bool all_raw() const;
    std::vector<Feature> features() const;

    // "WBC:S;HGB:G"
    std::string concepts_key() const;
    // Unordered multiset of representation codes, e.g. "S+S+G"; concept order does not matter.
    std::string representation_key() const;
    // Everything except k: configs sharing it share all distances.
    std::string distance_key() const;
    // distance_key plus "|k<k>"; unique within a grid.
    std::string id() const;
};

// Throws ConfigError: 1-3 concepts, no duplicates, never mixing Raw with abstractions, odd k >= 1.
void validate(const MatchConfig& config);

std::vector<ConceptRepresentation> parse_concepts_key(std::string_view key);

// Sentinel in GridAxes::bands for the KB-derived band, resolved per concept subset.
struct GridBand {
    BandPolicy band = Unconstrained{};
    bool from_kb = false;
};

std::string to_string(const GridBand& band);
GridBand parse_grid_band(std::string_view s);

struct GridAxes {
    std::vector<std::string> concepts;
    int max_concepts = 3;
    std::vector<InterpolationMethod> interpolations{InterpolationMethod::nearest, InterpolationMethod::linear,
                                                    InterpolationMethod::average};
    std::vector<DurationDelegate> aggregations{DurationDelegate::li, DurationDelegate::mtt};
    std::vector<GridBand> bands{{SakoeChibaPercent{10.0}, false}, {Unconstrained{}, false}};
    std::vector<int> ks{1};
    TimelineSpec timeline = AbsoluteTimeline{0, kMinutesPerDay};
    Granularity granularity;
};

struct GridEntry {
    std::size_t index = 0;
    MatchConfig config;
    // All-Raw configs never reach the duration delegate, so every aggregation
    // after the first one repeats an earlier config.
    bool raw_duplicate = false;
};

// (sum_{k=1..max} C(C,k) * (3^k + 1)) * i * a * w * n
std::uint64_t experiment_count(int concepts, int max_concepts, int interpolations, int aggregations, int windows,
                               int neighbor_counts);

// Materializes every configuration. `kb` is needed only when a KB-derived band is requested.
std::vector<GridEntry> enumerate_experiments(const GridAxes& axes, const KnowledgeBase* kb = nullptr);

struct ExperimentConfig {
    std::string name = "experiment";
    std::vector<std::string> concepts;
    TimelineSpec timeline = AbsoluteTimeline{0, kMinutesPerDay};
    Granularity granularity;
    std::string positive_label;
    std::string population_attribute;
    int max_concepts = 3;
    std::vector<InterpolationMethod> interpolations{InterpolationMethod::nearest, InterpolationMethod::linear,
                                                    InterpolationMethod::average};
    std::vector<DurationDelegate> aggregations{DurationDelegate::li, DurationDelegate::mtt};
    std::vector<GridBand> bands{{SakoeChibaPercent{10.0}, false}, {Unconstrained{}, false}};
    std::optional<std::vector<int>> ks;  // nullopt = odd k up to round(sqrt(N))
    int folds = 10;

    // Grid axes with k resolved against the number of usable entities.
    GridAxes axes(std::int64_t n_entities) const;
};

ExperimentConfig parse_experiment_config(std::istream& in);
ExperimentConfig parse_experiment_config(std::string_view text);
ExperimentConfig load_experiment_config(const std::string& path);
std::string serialize_experiment_config(const ExperimentConfig& config);

}  // namespace idtw
