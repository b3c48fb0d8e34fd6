// idtw command-line tool.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "idtw/abstraction.hpp"
#include "idtw/dataset.hpp"
#include "idtw/error.hpp"
#include "idtw/experiment.hpp"
#include "idtw/harness.hpp"
#include "idtw/imatch.hpp"
#include "idtw/log.hpp"
#include "idtw/pipeline.hpp"
#include "idtw/synthetic.hpp"

namespace fs = std::filesystem;
using namespace idtw;

namespace {

struct Inputs {
    std::string kb;
    std::string data;
    std::string events;
    std::string labels;
    std::string attributes;
    std::string config;
};

void add_inputs(CLI::App* cmd, Inputs& in, bool need_labels) {
    cmd->add_option("--kb", in.kb, "knowledge base file")->required()->check(CLI::ExistingFile);
    cmd->add_option("--data", in.data, "samples CSV: entity_id,concept,timestamp,value")->required()->check(CLI::ExistingFile);
    cmd->add_option("--events", in.events, "events CSV: entity_id,event_name,timestamp[,end]")->check(CLI::ExistingFile);
    auto* labels = cmd->add_option("--labels", in.labels, "labels CSV: entity_id,label")->check(CLI::ExistingFile);
    cmd->add_option("--attributes", in.attributes, "attributes CSV: entity_id,attribute,value")->check(CLI::ExistingFile);
    auto* config = cmd->add_option("--config", in.config, "experiment config")->check(CLI::ExistingFile);
    if (need_labels) {
        labels->required();
        config->required();
    }
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::string fmt_time(Timestamp t) { return std::to_string(t); }

struct Loaded {
    KnowledgeBase kb;
    Dataset dataset;
    std::optional<ExperimentConfig> experiment;
};

Loaded load(const Inputs& in) {
    Loaded l{load_knowledge_base(in.kb), load_dataset({in.data, in.events, in.labels, in.attributes}), std::nullopt};
    if (!in.config.empty()) l.experiment = load_experiment_config(in.config);
    return l;
}

// Match settings shared by represent/match/classify.
struct MatchArgs {
    std::string concepts;
    std::string interpolation = "linear";
    std::string aggregation = "MTT";
    std::string band = "sc10";
    std::vector<int> ks;
};

void add_match_args(CLI::App* cmd, MatchArgs& m, bool with_band, bool with_k) {
    cmd->add_option("--concepts", m.concepts, "concepts with representations, e.g. 'WBC:S;HGB:G'")->required();
    cmd->add_option("--interpolation", m.interpolation, "nearest|linear|average|ibap")->capture_default_str();
    cmd->add_option("--aggregation", m.aggregation, "duration delegate: MTT|LI")->capture_default_str();
    if (with_band) cmd->add_option("--band", m.band, "none|sc<p>|kb|kb<r>")->capture_default_str();
    if (with_k) cmd->add_option("--k", m.ks, "odd neighbour counts (default: odd k up to round(sqrt(n)))");
}

MatchConfig make_config(const MatchArgs& m, const ExperimentConfig& exp, const KnowledgeBase& kb) {
    MatchConfig c;
    c.concepts = parse_concepts_key(m.concepts);
    c.interpolation = parse_interpolation(m.interpolation);
    c.aggregation = parse_duration_delegate(m.aggregation);
    GridBand band = parse_grid_band(m.band);
    if (band.from_kb) {
        std::vector<std::string> names;
        for (const auto& r : c.concepts) names.push_back(r.concept_name);
        band.band = KBBand{kb_band_radius(kb, names, exp.granularity)};
    }
    c.band = band.band;
    c.timeline = exp.timeline;
    c.granularity = exp.granularity;
    c.k = m.ks.empty() ? 1 : m.ks.front();
    validate(c);
    return c;
}

// The experiment's cohort, restricted to the concepts of `config`.
Cohort make_cohort(const Loaded& l, const MatchConfig& config) {
    CohortOptions opt = cohort_options(*l.experiment);
    opt.concepts.clear();
    for (const auto& c : config.concepts) opt.concepts.push_back(c.concept_name);
    return Cohort(l.dataset, l.kb, opt);
}

std::size_t member_index(const Cohort& cohort, const std::string& id) {
    const auto& m = cohort.members();
    for (std::size_t i = 0; i < m.size(); ++i)
        if (m[i].id == id) return i;
    throw DataError("entity '" + id + "' is not a labeled, in-scope entity");
}

// Raw features are normalized against the whole cohort when no fold is involved.
std::optional<PopulationStats> cohort_stats(const Cohort& cohort, const MatchConfig& config) {
    if (!config.all_raw()) return std::nullopt;
    std::vector<std::size_t> all(cohort.members().size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    return cohort.fit_raw_stats(all, config);
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << text;
}

void write_reports(const std::vector<ExperimentResult>& results, const fs::path& dir) {
    std::ostringstream folds, table, aggregate;
    write_folds_report(folds, results);
    write_results_report(table, results);
    write_aggregate_report(aggregate, aggregate_by_representation(results));
    write_text(dir / "folds.csv", folds.str());
    write_text(dir / "results.csv", table.str());
    write_text(dir / "aggregate.csv", aggregate.str());
}

int cmd_abstract(const Inputs& in, const std::string& population_attribute) {
    const Loaded l = load(in);
    std::optional<TimelineSpec> timeline;
    std::string population_key = population_attribute;
    if (l.experiment) {
        timeline = l.experiment->timeline;
        if (population_key.empty()) population_key = l.experiment->population_attribute;
    }
    std::cout << "entity,concept,abstraction,start,end,label,value\n";
    for (const auto& [id, record] : l.dataset.entities) {
        std::string population;
        if (auto a = record.attributes.find(population_key); !population_key.empty() && a != record.attributes.end())
            population = a->second;
        std::optional<TMS> tms;
        if (timeline) {
            std::optional<Timestamp> ref;
            if (const auto* rel = std::get_if<RelativeTimeline>(&*timeline)) {
                ref = resolve_reference_point(record.events, *rel);
                if (!ref) continue;
            }
            tms = compute_tms(*timeline, ref);
        }
        for (const auto& [name, samples] : record.samples) {
            if (!l.kb.contains(name)) continue;
            const ConceptDef& def = l.kb.concept_for(name, population);
            auto dump = [&](const UnivariateESequence& seq, const char* kind) {
                const auto out = tms ? restrict(seq, *tms) : seq;
                for (const auto& iv : out.intervals)
                    std::cout << id << ',' << name << ',' << kind << ',' << fmt_time(iv.start) << ',' << fmt_time(iv.end)
                              << ',' << iv.label << ',' << fmt(iv.value) << '\n';
            };
            dump(abstract_state(samples, def), "state");
            if (samples.size() >= 2) dump(abstract_gradient(samples, def), "gradient");
        }
    }
    return 0;
}

int cmd_represent(const Inputs& in, const MatchArgs& m, const std::vector<std::string>& entities) {
    const Loaded l = load(in);
    const MatchConfig config = make_config(m, *l.experiment, l.kb);
    const Cohort cohort = make_cohort(l, config);
    const auto stats = cohort_stats(cohort, config);
    std::vector<std::size_t> which;
    if (entities.empty()) {
        for (std::size_t i = 0; i < cohort.members().size(); ++i)
            if (cohort.usable(i, config)) which.push_back(i);
    } else {
        for (const auto& id : entities) which.push_back(member_index(cohort, id));
    }
    for (std::size_t i : which) std::cout << format_event_table(cohort.event_table(i, config, stats ? &*stats : nullptr));
    return 0;
}

int cmd_match(const Inputs& in, const MatchArgs& m, const std::string& a, const std::string& b, bool matrix) {
    const Loaded l = load(in);
    const MatchConfig config = make_config(m, *l.experiment, l.kb);
    const Cohort cohort = make_cohort(l, config);
    const auto stats = cohort_stats(cohort, config);
    const auto* s = stats ? &*stats : nullptr;
    const EventTable ta = cohort.event_table(member_index(cohort, a), config, s);
    const EventTable tb = cohort.event_table(member_index(cohort, b), config, s);
    std::cout << "distance," << fmt(dtw_distance(ta, tb, config.band)) << '\n';
    if (matrix) {
        const CostMatrix cm = dtw_cost_matrix(to_series(ta), to_series(tb), config.band);
        for (std::size_t i = 0; i < cm.rows; ++i) {
            for (std::size_t j = 0; j < cm.cols; ++j) std::cout << (j ? "," : "") << fmt(cm.at(i, j));
            std::cout << '\n';
        }
    }
    return 0;
}

int cmd_classify(const Inputs& in, MatchArgs m, std::uint64_t seed, unsigned workers) {
    const Loaded l = load(in);
    const MatchConfig config = make_config(m, *l.experiment, l.kb);
    const Cohort cohort = make_cohort(l, config);
    if (m.ks.empty()) m.ks = k_values(static_cast<std::int64_t>(cohort.members().size()));
    CvOptions cv{l.experiment->folds, seed, l.experiment->positive_label, workers};
    const auto results = run_cv(cohort, config, m.ks, cv);
    write_results_report(std::cout, results);
    std::cout << '\n';
    write_folds_report(std::cout, results);
    return 0;
}

int cmd_grid(const Inputs& in, const fs::path& out_dir, std::uint64_t seed, unsigned workers, bool resume) {
    const Loaded l = load(in);
    const ExperimentConfig& exp = *l.experiment;
    const Cohort cohort(l.dataset, l.kb, cohort_options(exp));
    const auto grid = enumerate_experiments(exp.axes(static_cast<std::int64_t>(cohort.members().size())), &l.kb);
    log::info("grid has " + std::to_string(grid.size()) + " configurations over " +
              std::to_string(cohort.members().size()) + " entities");
    fs::create_directories(out_dir);
    GridOptions opt;
    opt.cv = {exp.folds, seed, exp.positive_label, 1};
    opt.workers = workers;
    opt.progress_path = (out_dir / "progress.jsonl").string();
    opt.resume = resume;
    const auto results = run_grid(cohort, grid, opt);
    write_reports(results, out_dir);
    std::size_t failed = 0;
    for (const auto& r : results) failed += r.error.empty() ? 0 : 1;
    std::cerr << results.size() << " configurations, " << failed << " failed; reports in " << out_dir.string() << '\n';
    return 0;
}

int cmd_report(const std::string& results_path, const fs::path& out_dir) {
    const auto results = read_results(results_path);
    if (out_dir.empty()) {
        write_aggregate_report(std::cout, aggregate_by_representation(results));
        return 0;
    }
    fs::create_directories(out_dir);
    write_reports(results, out_dir);
    return 0;
}

int cmd_synth(const fs::path& out_dir, std::size_t entities, std::uint64_t seed, const std::string& spec_path,
              const std::string& dump_spec) {
    DomainSpec spec = separable_domain();
    if (!spec_path.empty()) {
        std::ifstream f(spec_path);
        if (!f) throw Error("cannot open '" + spec_path + "'");
        std::stringstream ss;
        ss << f.rdbuf();
        spec = parse_domain_spec(ss.str());
    }
    if (!dump_spec.empty()) write_text(dump_spec, domain_spec_to_json(spec));
    write_synthetic(generate_synthetic(spec, entities, seed), out_dir.string());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Interval-based DTW matching of longitudinal records"};
    app.require_subcommand(1);
    bool verbose = false;
    app.add_flag("-v,--verbose", verbose, "log progress to stderr");

    Inputs in;
    MatchArgs m;
    std::uint64_t seed = 1;
    unsigned workers = 1;

    std::string population_attribute;
    auto* abstract = app.add_subcommand("abstract", "dump state and gradient intervals");
    add_inputs(abstract, in, false);
    abstract->add_option("--population-attribute", population_attribute, "attribute selecting KB population variants");

    std::vector<std::string> entities;
    auto* represent = app.add_subcommand("represent", "dump the event tables of one configuration");
    add_inputs(represent, in, true);
    add_match_args(represent, m, false, false);
    represent->add_option("--entity", entities, "entity ids (default: all usable)");

    std::string entity_a, entity_b;
    bool matrix = false;
    auto* match = app.add_subcommand("match", "distance between two entities");
    add_inputs(match, in, true);
    add_match_args(match, m, true, false);
    match->add_option("entity_a", entity_a)->required();
    match->add_option("entity_b", entity_b)->required();
    match->add_flag("--matrix", matrix, "also print the accumulated cost matrix");

    auto* classify = app.add_subcommand("classify", "cross-validate one configuration");
    add_inputs(classify, in, true);
    add_match_args(classify, m, true, true);
    classify->add_option("--seed", seed)->capture_default_str();
    classify->add_option("--workers", workers)->capture_default_str();

    std::string out_dir = "results";
    bool resume = false;
    auto* grid = app.add_subcommand("grid", "run the full experiment grid");
    add_inputs(grid, in, true);
    grid->add_option("--seed", seed)->capture_default_str();
    grid->add_option("--workers", workers)->capture_default_str();
    grid->add_option("--out", out_dir, "report directory")->capture_default_str();
    grid->add_flag("--resume", resume, "skip configurations already in <out>/progress.jsonl");

    std::string results_path, report_out;
    auto* report = app.add_subcommand("report", "aggregate tables from a progress file");
    report->add_option("--results", results_path, "progress.jsonl of a grid run")->required()->check(CLI::ExistingFile);
    report->add_option("--out", report_out, "write folds/results/aggregate CSVs here instead of stdout");

    std::size_t n_entities = 100;
    std::string spec_path, dump_spec;
    std::string synth_out = "synthetic";
    auto* synth = app.add_subcommand("synth", "generate a synthetic cohort");
    synth->add_option("--out", synth_out)->capture_default_str();
    synth->add_option("--entities", n_entities)->capture_default_str();
    synth->add_option("--seed", seed)->capture_default_str();
    synth->add_option("--spec", spec_path, "JSON domain spec (default: built-in separable domain)")->check(CLI::ExistingFile);
    synth->add_option("--write-spec", dump_spec, "also write the domain spec used as JSON");

    CLI11_PARSE(app, argc, argv);
    if (verbose) log::set_min_level(log::Level::info);
    if (workers == 0) workers = 1;

    try {
        if (*abstract) return cmd_abstract(in, population_attribute);
        if (*represent) return cmd_represent(in, m, entities);
        if (*match) return cmd_match(in, m, entity_a, entity_b, matrix);
        if (*classify) return cmd_classify(in, m, seed, workers);
        if (*grid) return cmd_grid(in, out_dir, seed, workers, resume);
        if (*report) return cmd_report(results_path, report_out);
        if (*synth) return cmd_synth(synth_out, n_entities, seed, spec_path, dump_spec);
    } catch (const ParseError& e) {
        std::cerr << "idtw: parse error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "idtw: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
