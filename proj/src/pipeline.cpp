#include "idtw/pipeline.hpp"

#include <algorithm>
#include <set>

#include "idtw/error.hpp"
#include "idtw/log.hpp"

namespace idtw {

CohortOptions cohort_options(const ExperimentConfig& config) {
    return {config.timeline, config.granularity, config.concepts, config.population_attribute};
}

Cohort::Cohort(const Dataset& dataset, const KnowledgeBase& kb, CohortOptions options)
    : dataset_(dataset), kb_(kb), options_(std::move(options)) {
    validate(options_.timeline);
    for (const auto& name : options_.concepts)
        if (!kb_.contains(name)) throw KbError("concept '" + name + "' is not in the knowledge base");

    static const EntityRecord empty_record;
    for (const auto& [id, label] : dataset_.labels) {
        auto it = dataset_.entities.find(id);
        const EntityRecord& record = it == dataset_.entities.end() ? empty_record : it->second;

        std::optional<Timestamp> reference;
        if (const auto* rel = std::get_if<RelativeTimeline>(&options_.timeline)) {
            reference = resolve_reference_point(record.events, *rel);
            if (!reference) {
                log::info("entity '" + id + "' has no '" + rel->reference_concept + "' event and is excluded");
                excluded_.push_back(id);
                continue;
            }
        }
        CohortMember m{id, label, {}, compute_tms(options_.timeline, reference)};
        if (!options_.population_attribute.empty()) {
            if (auto a = record.attributes.find(options_.population_attribute); a != record.attributes.end())
                m.population = a->second;
        }

        std::map<std::string, Cached> concepts;
        for (const auto& name : options_.concepts) {
            const ConceptDef& def = kb_.concept_for(name, m.population);
            Cached c;
            c.state.concept_name = c.gradient.concept_name = name;
            if (auto s = record.samples.find(name); s != record.samples.end()) {
                const auto& samples = s->second;
                try {
                    c.state = restrict(abstract_state(samples, def), m.tms);
                    if (samples.size() >= 2) c.gradient = restrict(abstract_gradient(samples, def), m.tms);
                } catch (const KbError& e) {
                    throw DataError("entity '" + id + "': " + e.what());
                }
                std::copy_if(samples.begin(), samples.end(), std::back_inserter(c.scoped),
                             [&](const Sample& x) { return m.tms.contains(x.time); });
            }
            concepts.emplace(name, std::move(c));
        }
        members_.push_back(std::move(m));
        cache_.push_back(std::move(concepts));
    }
    if (!excluded_.empty())
        log::warn(std::to_string(excluded_.size()) + " labeled entities lack the reference event and were excluded");
}

std::vector<std::string> Cohort::classes() const {
    std::set<std::string> s;
    for (const auto& m : members_) s.insert(m.label);
    return {s.begin(), s.end()};
}

const Cohort::Cached& Cohort::cached(std::size_t member, const std::string& concept_name) const {
    const auto& concepts = cache_.at(member);
    auto it = concepts.find(concept_name);
    if (it == concepts.end()) throw ConfigError("concept '" + concept_name + "' is not part of this cohort");
    return it->second;
}

const ConceptDef& Cohort::concept_for(std::size_t member, const std::string& concept_name) const {
    return kb_.concept_for(concept_name, members_.at(member).population);
}

const UnivariateESequence& Cohort::abstraction(std::size_t member, const std::string& concept_name,
                                               AbstractionKind kind) const {
    const Cached& c = cached(member, concept_name);
    switch (kind) {
        case AbstractionKind::state: return c.state;
        case AbstractionKind::gradient: return c.gradient;
        case AbstractionKind::raw: break;
    }
    throw ConfigError("raw features are built per fold, not cached");
}

std::span<const Sample> Cohort::scoped_samples(std::size_t member, const std::string& concept_name) const {
    return cached(member, concept_name).scoped;
}

bool Cohort::usable(std::size_t member, const MatchConfig& config) const {
    for (const auto& f : config.features()) {
        const bool present = f.kind == AbstractionKind::raw
                                 ? !scoped_samples(member, f.concept_name).empty()
                                 : !abstraction(member, f.concept_name, f.kind).intervals.empty();
        if (!present) return false;
    }
    return true;
}

PopulationStats Cohort::fit_raw_stats(std::span<const std::size_t> members, const MatchConfig& config) const {
    PopulationStats stats;
    for (const auto& c : config.concepts) {
        if (c.representation != Representation::raw) continue;
        std::vector<double> values;
        for (std::size_t m : members)
            for (const Sample& s : scoped_samples(m, c.concept_name)) values.push_back(s.value);
        stats.set(c.concept_name, fit_concept_stats(values));
    }
    return stats;
}

MultivariateESequence Cohort::eseq(std::size_t member, const MatchConfig& config, const PopulationStats* stats) const {
    MultivariateESequence out{members_.at(member).id, {}};
    for (const auto& f : config.features()) {
        if (f.kind == AbstractionKind::raw) {
            if (!stats) throw ConfigError("raw features need population statistics");
            auto seq = raw_sequence(scoped_samples(member, f.concept_name), f.concept_name, stats->at(f.concept_name));
            out.sequences.emplace(f.name(), std::move(seq));
        } else {
            out.sequences.emplace(f.name(), abstraction(member, f.concept_name, f.kind));
        }
    }
    return out;
}

EventTable Cohort::event_table(std::size_t member, const MatchConfig& config, const PopulationStats* stats) const {
    const MultivariateESequence seqs = eseq(member, config, stats);
    const SegmentedTable table = segment(seqs, members_[member].tms, options_.granularity);

    std::map<std::string, AggregationConfig> by_feature;
    for (const auto& f : config.features()) {
        AggregationConfig agg{ValueDelegate::mean, config.aggregation};
        if (f.kind != AbstractionKind::raw) agg.value_delegate = concept_for(member, f.concept_name).default_value_delegate;
        by_feature[f.name()] = agg;
    }
    std::vector<AggregationConfig> aggregation;
    for (const auto& row : table.rows) aggregation.push_back(by_feature.at(row.feature));
    return build_event_table(table, aggregation, config.interpolation);
}

}  // namespace idtw
