#pragma once

// Dataset + KB + timeline -> scoped, abstracted entities -> event tables.

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "idtw/abstraction.hpp"
#include "idtw/dataset.hpp"
#include "idtw/experiment.hpp"
#include "idtw/gbr.hpp"
#include "idtw/kb.hpp"
#include "idtw/scoping.hpp"

namespace idtw {

struct CohortMember {
    std::string id;
    std::string label;
    std::string population;  // value of the population attribute, may be empty
    TMS tms;
};

struct CohortOptions {
    TimelineSpec timeline = AbsoluteTimeline{0, kMinutesPerDay};
    Granularity granularity;
    std::vector<std::string> concepts;  // concepts to pre-abstract
    std::string population_attribute;
};

// Labeled entities with a resolvable TMS. State and gradient sequences of every
// listed concept are abstracted over the full record, restricted to the TMS and
// cached at construction, so a Cohort is read-only and thread-safe afterwards.
class Cohort {
public:
    Cohort(const Dataset& dataset, const KnowledgeBase& kb, CohortOptions options);

    const std::vector<CohortMember>& members() const { return members_; }
    // Labeled entities dropped for lack of a reference event.
    const std::vector<std::string>& excluded() const { return excluded_; }
    const KnowledgeBase& kb() const { return kb_; }
    const CohortOptions& options() const { return options_; }
    std::vector<std::string> classes() const;

    const ConceptDef& concept_for(std::size_t member, const std::string& concept_name) const;

    // Restricted abstraction; kind must be state or gradient.
    const UnivariateESequence& abstraction(std::size_t member, const std::string& concept_name,
                                           AbstractionKind kind) const;

    // Samples of the concept inside the member's TMS.
    std::span<const Sample> scoped_samples(std::size_t member, const std::string& concept_name) const;

    // True when every feature of the config has at least one interval in scope.
    bool usable(std::size_t member, const MatchConfig& config) const;

    // Raw normalization parameters fit on the scoped samples of `members`.
    PopulationStats fit_raw_stats(std::span<const std::size_t> members, const MatchConfig& config) const;

    // Multivariate e-sequence keyed by feature name. Raw features need `stats`.
    MultivariateESequence eseq(std::size_t member, const MatchConfig& config,
                               const PopulationStats* stats = nullptr) const;

    EventTable event_table(std::size_t member, const MatchConfig& config,
                           const PopulationStats* stats = nullptr) const;

private:
    struct Cached {
        UnivariateESequence state;
        UnivariateESequence gradient;
        std::vector<Sample> scoped;
    };

    const Cached& cached(std::size_t member, const std::string& concept_name) const;

    const Dataset& dataset_;
    const KnowledgeBase& kb_;
    CohortOptions options_;
    std::vector<CohortMember> members_;
    std::vector<std::string> excluded_;
    std::vector<std::map<std::string, Cached>> cache_;
};

CohortOptions cohort_options(const ExperimentConfig& config);

}  // namespace idtw
