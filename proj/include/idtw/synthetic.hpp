#pragma once

// Reproducible synthetic cohorts: per-class piecewise-linear trajectories,
// Gaussian noise and irregular sampling around a reference event.

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "idtw/dataset.hpp"
#include "idtw/experiment.hpp"
#include "idtw/kb.hpp"

namespace idtw {

// Knots (fraction of the horizon in [0,1], level); linear between knots, flat outside.
struct Trajectory {
    std::vector<std::pair<double, double>> knots;

    double at(double fraction) const;
};

struct SyntheticConcept {
    ConceptDef definition;
    std::map<std::string, Trajectory> trajectories;  // one per class
    double noise_sd = 0.0;
};

struct DomainSpec {
    std::vector<std::string> classes{"negative", "positive"};
    std::vector<SyntheticConcept> concepts;
    std::string reference_event = "ADMISSION";
    Granularity granularity;
    Minutes horizon = 30 * kMinutesPerDay;     // matched window after the reference event
    Minutes pre_window = 5 * kMinutesPerDay;   // samples also drawn before the event
    Minutes mean_gap = 2 * kMinutesPerDay;     // mean spacing between samples of one concept
    Minutes min_gap = kMinutesPerDay / 2;
    Minutes max_offset = 365 * kMinutesPerDay; // reference events fall uniformly in [0, max_offset)
};

// Two labs: LAB_A separates the classes by state band (NORMAL vs HIGH), LAB_B by
// trend direction (falling vs rising) inside overlapping states.
DomainSpec separable_domain();

// JSON form; durations are strings such as "30 Days".
DomainSpec parse_domain_spec(std::string_view json_text);
std::string domain_spec_to_json(const DomainSpec& spec);

struct SyntheticData {
    Dataset dataset;
    KnowledgeBase kb;
    ExperimentConfig experiment;
};

// Entities E0001.. alternate through the classes. Throws ConfigError for a spec
// without concepts or classes, or a class missing a trajectory.
SyntheticData generate_synthetic(const DomainSpec& spec, std::size_t n_entities, std::uint64_t seed);

// Writes data.csv, events.csv, labels.csv, domain.kb and experiment.cfg into `dir`.
void write_synthetic(const SyntheticData& data, const std::string& dir);

}  // namespace idtw
