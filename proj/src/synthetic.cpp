#include "idtw/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <limits>

#include "json.hpp"

#include "idtw/error.hpp"
#include "idtw/random.hpp"

namespace idtw {
namespace {

using json = nlohmann::json;

constexpr double kInf = std::numeric_limits<double>::infinity();

StateDef state(std::string label, double low, double high, int index) { return {std::move(label), low, high, index}; }

json bound_to_json(double v) {
    if (v == kInf) return "inf";
    if (v == -kInf) return "-inf";
    return v;
}

double bound_from_json(const json& j) {
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf") return kInf;
        if (s == "-inf") return -kInf;
        throw ConfigError("bad bound '" + s + "'");
    }
    return j.get<double>();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << text;
}

}  // namespace

double Trajectory::at(double fraction) const {
    if (knots.empty()) throw ConfigError("trajectory without knots");
    if (fraction <= knots.front().first) return knots.front().second;
    for (std::size_t i = 1; i < knots.size(); ++i) {
        const auto& [x1, y1] = knots[i];
        if (fraction <= x1) {
            const auto& [x0, y0] = knots[i - 1];
            return x1 == x0 ? y1 : y0 + (y1 - y0) * (fraction - x0) / (x1 - x0);
        }
    }
    return knots.back().second;
}

DomainSpec separable_domain() {
    DomainSpec spec;

    SyntheticConcept a;
    a.definition.name = "LAB_A";
    a.definition.states = {state("LOW", -kInf, 4, 1), state("NORMAL", 4, 8, 2), state("HIGH", 8, 12, 3),
                           state("VERY_HIGH", 12, kInf, 4)};
    a.definition.significant_variation = {VariationSpec::Kind::absolute, 1.0};
    a.definition.good_before = a.definition.good_after = kMinutesPerDay;
    a.trajectories["negative"] = {{{0.0, 6.0}, {1.0, 6.0}}};
    a.trajectories["positive"] = {{{0.0, 10.0}, {1.0, 10.0}}};
    a.noise_sd = 0.5;

    SyntheticConcept b;
    b.definition.name = "LAB_B";
    b.definition.states = {state("LOW", -kInf, 50, 1), state("NORMAL", 50, 100, 2), state("HIGH", 100, kInf, 3)};
    b.definition.significant_variation = {VariationSpec::Kind::absolute, 5.0};
    b.definition.good_before = b.definition.good_after = 2 * kMinutesPerDay;
    b.trajectories["negative"] = {{{0.0, 90.0}, {1.0, 60.0}}};
    b.trajectories["positive"] = {{{0.0, 60.0}, {1.0, 90.0}}};
    b.noise_sd = 2.0;

    spec.concepts = {a, b};
    return spec;
}

DomainSpec parse_domain_spec(std::string_view json_text) {
    DomainSpec spec;
    try {
        const json j = json::parse(json_text);
        if (j.contains("classes")) spec.classes = j["classes"].get<std::vector<std::string>>();
        spec.reference_event = j.value("reference_event", spec.reference_event);
        if (j.contains("granularity")) spec.granularity = parse_granularity(j["granularity"].get<std::string>());
        auto duration = [&](const char* key, Minutes& field) {
            if (j.contains(key)) field = parse_duration(j[key].get<std::string>());
        };
        duration("horizon", spec.horizon);
        duration("pre_window", spec.pre_window);
        duration("mean_gap", spec.mean_gap);
        duration("min_gap", spec.min_gap);
        duration("max_offset", spec.max_offset);
        for (const auto& jc : j.at("concepts")) {
            SyntheticConcept c;
            ConceptDef& d = c.definition;
            d.name = jc.at("name").get<std::string>();
            d.value_type = parse_value_type(jc.value("type", "numeric"));
            int index = 1;
            for (const auto& js : jc.at("states"))
                d.states.push_back(state(js.at(0).get<std::string>(), bound_from_json(js.at(1)), bound_from_json(js.at(2)), index++));
            const auto& jv = jc.at("variation");
            const auto kind = jv.at("kind").get<std::string>();
            if (kind != "absolute" && kind != "percent") throw ConfigError("variation kind must be absolute or percent");
            d.significant_variation = {kind == "absolute" ? VariationSpec::Kind::absolute : VariationSpec::Kind::percent,
                                       jv.at("threshold").get<double>()};
            d.good_before = parse_duration(jc.at("good_before").get<std::string>());
            d.good_after = parse_duration(jc.at("good_after").get<std::string>());
            c.noise_sd = jc.value("noise", 0.0);
            for (const auto& [label, knots] : jc.at("trajectories").items())
                c.trajectories[label].knots = knots.get<std::vector<std::pair<double, double>>>();
            spec.concepts.push_back(std::move(c));
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("domain spec: ") + e.what());
    }
    return spec;
}

std::string domain_spec_to_json(const DomainSpec& spec) {
    json j{{"classes", spec.classes},
           {"reference_event", spec.reference_event},
           {"granularity", spec.granularity.name},
           {"horizon", format_duration(spec.horizon)},
           {"pre_window", format_duration(spec.pre_window)},
           {"mean_gap", format_duration(spec.mean_gap)},
           {"min_gap", format_duration(spec.min_gap)},
           {"max_offset", format_duration(spec.max_offset)}};
    json concepts = json::array();
    for (const auto& c : spec.concepts) {
        const ConceptDef& d = c.definition;
        json states = json::array();
        for (const auto& s : d.states) states.push_back({s.label, bound_to_json(s.low), bound_to_json(s.high)});
        json trajectories = json::object();
        for (const auto& [label, t] : c.trajectories) trajectories[label] = t.knots;
        concepts.push_back({{"name", d.name},
                            {"type", to_string(d.value_type)},
                            {"states", states},
                            {"variation",
                             {{"kind", d.significant_variation.kind == VariationSpec::Kind::absolute ? "absolute" : "percent"},
                              {"threshold", d.significant_variation.threshold}}},
                            {"good_before", format_duration(d.good_before)},
                            {"good_after", format_duration(d.good_after)},
                            {"noise", c.noise_sd},
                            {"trajectories", trajectories}});
    }
    j["concepts"] = concepts;
    return j.dump(2) + "\n";
}

SyntheticData generate_synthetic(const DomainSpec& spec, std::size_t n_entities, std::uint64_t seed) {
    if (spec.concepts.empty()) throw ConfigError("domain spec has no concepts");
    if (spec.classes.empty()) throw ConfigError("domain spec has no classes");
    if (spec.horizon <= 0 || spec.mean_gap <= 0 || spec.min_gap <= 0 || spec.min_gap > spec.mean_gap)
        throw ConfigError("domain spec needs horizon > 0 and 0 < min_gap <= mean_gap");
    std::vector<ConceptDef> defs;
    for (const auto& c : spec.concepts) {
        for (const auto& cls : spec.classes)
            if (!c.trajectories.count(cls))
                throw ConfigError("concept '" + c.definition.name + "' has no trajectory for class '" + cls + "'");
        defs.push_back(c.definition);
    }

    SyntheticData out{{}, KnowledgeBase(std::move(defs)), {}};
    Rng rng(seed);
    const int width = std::max<int>(4, static_cast<int>(std::to_string(n_entities).size()));
    for (std::size_t e = 0; e < n_entities; ++e) {
        std::string id = std::to_string(e + 1);
        id = "E" + std::string(static_cast<std::size_t>(width) - std::min<std::size_t>(id.size(), width), '0') + id;
        const std::string& cls = spec.classes[e % spec.classes.size()];
        out.dataset.labels[id] = cls;
        EntityRecord& record = out.dataset.entities[id];

        const Timestamp reference = spec.max_offset > 0
                                        ? static_cast<Timestamp>(rng.below(static_cast<std::uint64_t>(spec.max_offset)))
                                        : 0;
        record.events.push_back({spec.reference_event, reference, reference});

        for (const auto& c : spec.concepts) {
            const Trajectory& trajectory = c.trajectories.at(cls);
            auto& samples = record.samples[c.definition.name];
            const double extra = static_cast<double>(spec.mean_gap - spec.min_gap);
            Timestamp t = reference - spec.pre_window + static_cast<Timestamp>(rng.uniform() * static_cast<double>(spec.min_gap));
            while (t <= reference + spec.horizon) {
                const double fraction = static_cast<double>(t - reference) / static_cast<double>(spec.horizon);
                double v = trajectory.at(fraction) + rng.normal(0.0, c.noise_sd);
                // Keep values on the KB's finite lower bound if it has one.
                v = std::max(v, c.definition.states.front().low);
                samples.push_back({t, v});
                t += spec.min_gap + static_cast<Timestamp>(std::llround(-std::log1p(-rng.uniform()) * extra));
            }
        }
    }

    ExperimentConfig& cfg = out.experiment;
    cfg.name = "synthetic";
    cfg.granularity = spec.granularity;
    cfg.positive_label = spec.classes.size() > 1 ? spec.classes[1] : spec.classes[0];
    for (const auto& c : spec.concepts) cfg.concepts.push_back(c.definition.name);
    cfg.max_concepts = std::min<int>(3, static_cast<int>(cfg.concepts.size()));
    RelativeTimeline rel;
    rel.reference_concept = spec.reference_event;
    rel.before_period = 0;
    rel.after_period = spec.horizon;
    cfg.timeline = rel;
    return out;
}

void write_synthetic(const SyntheticData& data, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    const fs::path root(dir);
    std::ostringstream samples, events, labels;
    write_samples(samples, data.dataset);
    write_events(events, data.dataset);
    write_labels(labels, data.dataset);
    write_file(root / "data.csv", samples.str());
    write_file(root / "events.csv", events.str());
    write_file(root / "labels.csv", labels.str());
    write_file(root / "domain.kb", serialize_knowledge_base(data.kb));
    write_file(root / "experiment.cfg", serialize_experiment_config(data.experiment));
}

}  // namespace idtw
