#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "idtw/abstraction.hpp"
#include "idtw/dataset.hpp"
#include "idtw/error.hpp"
#include "idtw/eval.hpp"
#include "idtw/experiment.hpp"
#include "idtw/harness.hpp"
#include "idtw/imatch.hpp"
#include "idtw/kb.hpp"
#include "idtw/pipeline.hpp"
#include "idtw/synthetic.hpp"

namespace py = pybind11;
using namespace idtw;

namespace {

std::vector<Sample> to_samples(const std::vector<std::pair<Timestamp, double>>& points) {
    std::vector<Sample> out;
    out.reserve(points.size());
    for (const auto& [t, v] : points) out.push_back({t, v});
    return out;
}

py::list intervals(const UnivariateESequence& seq) {
    py::list out;
    for (const auto& iv : seq.intervals)
        out.append(py::dict(py::arg("start") = iv.start, py::arg("end") = iv.end, py::arg("label") = iv.label,
                            py::arg("value") = iv.value));
    return out;
}

py::dict result_dict(const ExperimentResult& r) {
    py::list folds;
    for (const auto& f : r.folds) {
        py::dict d(py::arg("fold") = f.fold, py::arg("test_size") = f.test_size);
        d["auc"] = f.auc ? py::cast(*f.auc) : py::none();
        d["sensitivity"] = f.youden ? py::cast(f.youden->sensitivity) : py::none();
        d["specificity"] = f.youden ? py::cast(f.youden->specificity) : py::none();
        d["threshold"] = f.youden ? py::cast(f.youden->threshold) : py::none();
        folds.append(d);
    }
    py::dict d;
    d["config_id"] = r.config_id;
    d["representation"] = r.config.representation_key();
    d["entities"] = r.entities;
    d["mean_auc"] = r.mean_auc;
    d["mean_sensitivity"] = r.mean_sensitivity;
    d["mean_specificity"] = r.mean_specificity;
    d["mean_youden_j"] = r.mean_youden_j;
    d["folds_scored"] = r.folds_scored;
    d["raw_duplicate"] = r.raw_duplicate;
    d["error"] = r.error;
    d["folds"] = folds;
    return d;
}

// Everything a CV or grid run needs, loaded from files.
struct Study {
    KnowledgeBase kb;
    Dataset dataset;
    ExperimentConfig experiment;
};

Study load_study(const std::string& kb, const std::string& data, const std::string& events, const std::string& labels,
                 const std::string& config, const std::string& attributes) {
    return {load_knowledge_base(kb), load_dataset({data, events, labels, attributes}), load_experiment_config(config)};
}

// Python exception types, created once at import and never freed.
PyObject* py_error = nullptr;
PyObject* py_parse_error = nullptr;
PyObject* py_kb_error = nullptr;
PyObject* py_config_error = nullptr;
PyObject* py_data_error = nullptr;

}  // namespace

PYBIND11_MODULE(_idtw, m) {
    m.doc() = "Interval-based DTW matching of longitudinal records";

    // Leaked on purpose: these must outlive any later interpreter teardown.
    py_error = (new py::exception<Error>(m, "Error"))->ptr();
    py_parse_error = (new py::exception<ParseError>(m, "ParseError", py_error))->ptr();
    py_kb_error = (new py::exception<KbError>(m, "KbError", py_error))->ptr();
    py_config_error = (new py::exception<ConfigError>(m, "ConfigError", py_error))->ptr();
    py_data_error = (new py::exception<DataError>(m, "DataError", py_error))->ptr();
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const ParseError& e) {
            PyErr_SetString(py_parse_error, e.what());
        } catch (const KbError& e) {
            PyErr_SetString(py_kb_error, e.what());
        } catch (const ConfigError& e) {
            PyErr_SetString(py_config_error, e.what());
        } catch (const DataError& e) {
            PyErr_SetString(py_data_error, e.what());
        } catch (const Error& e) {
            PyErr_SetString(py_error, e.what());
        }
    });

    py::class_<KnowledgeBase>(m, "KnowledgeBase")
        .def("concept_names", &KnowledgeBase::concept_names)
        .def("contains", [](const KnowledgeBase& kb, const std::string& name) { return kb.contains(name); })
        .def("half_life", [](const KnowledgeBase& kb, const std::string& name, const std::string& population) {
            return kb.concept_for(name, population).half_life();
        }, py::arg("name"), py::arg("population") = "")
        .def("states", [](const KnowledgeBase& kb, const std::string& name, const std::string& population) {
            py::list out;
            for (const auto& s : kb.concept_for(name, population).states) out.append(py::make_tuple(s.label, s.low, s.high));
            return out;
        }, py::arg("name"), py::arg("population") = "")
        .def("serialize", &serialize_knowledge_base);

    m.def("parse_knowledge_base", py::overload_cast<std::string_view>(&parse_knowledge_base), py::arg("text"));
    m.def("load_knowledge_base", &load_knowledge_base, py::arg("path"));

    m.def("abstract_state", [](const std::vector<std::pair<Timestamp, double>>& samples, const KnowledgeBase& kb,
                               const std::string& concept_name, const std::string& population) {
        return intervals(abstract_state(to_samples(samples), kb.concept_for(concept_name, population)));
    }, py::arg("samples"), py::arg("kb"), py::arg("concept"), py::arg("population") = "",
       "State intervals of (minute, value) samples.");
    m.def("abstract_gradient", [](const std::vector<std::pair<Timestamp, double>>& samples, const KnowledgeBase& kb,
                                  const std::string& concept_name, const std::string& population) {
        return intervals(abstract_gradient(to_samples(samples), kb.concept_for(concept_name, population)));
    }, py::arg("samples"), py::arg("kb"), py::arg("concept"), py::arg("population") = "");

    m.def("dtw_distance", [](const std::vector<std::vector<double>>& a, const std::vector<std::vector<double>>& b,
                             const std::string& band) {
        return dtw_distance(Series::from_rows(a), Series::from_rows(b), parse_band(band));
    }, py::arg("a"), py::arg("b"), py::arg("band") = "none",
       "DTW between two feature-major series (one list per feature).");
    m.def("kb_band_radius", [](const KnowledgeBase& kb, const std::vector<std::string>& concepts,
                               const std::string& granularity) {
        return kb_band_radius(kb, concepts, parse_granularity(granularity));
    }, py::arg("kb"), py::arg("concepts"), py::arg("granularity") = "Day");

    m.def("k_values", &k_values, py::arg("n"));
    m.def("roc_auc", [](const std::vector<double>& scores, const std::vector<bool>& labels) {
        auto flags = std::make_unique<bool[]>(labels.size());
        std::copy(labels.begin(), labels.end(), flags.get());
        return roc_auc(scores, std::span<const bool>(flags.get(), labels.size()));
    }, py::arg("scores"), py::arg("positive"));
    m.def("youden_optimal", [](const std::vector<double>& scores, const std::vector<bool>& labels) {
        auto flags = std::make_unique<bool[]>(labels.size());
        std::copy(labels.begin(), labels.end(), flags.get());
        const RocPoint p = youden_optimal(scores, std::span<const bool>(flags.get(), labels.size()));
        return py::dict(py::arg("threshold") = p.threshold, py::arg("sensitivity") = p.sensitivity,
                        py::arg("specificity") = p.specificity, py::arg("youden_j") = p.youden_j());
    }, py::arg("scores"), py::arg("positive"));
    m.def("paired_t_test", [](const std::vector<double>& a, const std::vector<double>& b) {
        const TTestResult r = paired_t_test(a, b);
        return py::dict(py::arg("t") = r.t, py::arg("p") = r.p, py::arg("dof") = r.dof,
                        py::arg("degenerate") = r.degenerate);
    }, py::arg("a"), py::arg("b"));

    m.def("experiment_count", &experiment_count, py::arg("concepts"), py::arg("max_concepts"),
          py::arg("interpolations"), py::arg("aggregations"), py::arg("windows"), py::arg("neighbor_counts"));

    m.def("generate_synthetic", [](const std::string& out_dir, std::size_t entities, std::uint64_t seed,
                                   const std::string& spec_json) {
        const DomainSpec spec = spec_json.empty() ? separable_domain() : parse_domain_spec(spec_json);
        write_synthetic(generate_synthetic(spec, entities, seed), out_dir);
    }, py::arg("out_dir"), py::arg("entities") = 100, py::arg("seed") = 1, py::arg("spec_json") = "",
       "Writes data.csv, events.csv, labels.csv, domain.kb and experiment.cfg.");
    m.def("separable_domain_json", [] { return domain_spec_to_json(separable_domain()); });

    m.def("run_cv", [](const std::string& kb, const std::string& data, const std::string& events,
                       const std::string& labels, const std::string& config, const std::string& concepts,
                       const std::string& interpolation, const std::string& aggregation, const std::string& band,
                       std::vector<int> ks, std::uint64_t seed, const std::string& attributes) {
        const Study s = load_study(kb, data, events, labels, config, attributes);
        MatchConfig c;
        c.concepts = parse_concepts_key(concepts);
        c.interpolation = parse_interpolation(interpolation);
        c.aggregation = parse_duration_delegate(aggregation);
        GridBand gb = parse_grid_band(band);
        if (gb.from_kb) {
            std::vector<std::string> names;
            for (const auto& r : c.concepts) names.push_back(r.concept_name);
            gb.band = KBBand{kb_band_radius(s.kb, names, s.experiment.granularity)};
        }
        c.band = gb.band;
        c.timeline = s.experiment.timeline;
        c.granularity = s.experiment.granularity;
        CohortOptions opt = cohort_options(s.experiment);
        opt.concepts.clear();
        for (const auto& r : c.concepts) opt.concepts.push_back(r.concept_name);
        const Cohort cohort(s.dataset, s.kb, opt);
        if (ks.empty()) ks = k_values(static_cast<std::int64_t>(cohort.members().size()));
        c.k = ks.front();
        std::vector<ExperimentResult> results;
        {
            py::gil_scoped_release release;
            results = run_cv(cohort, c, ks, {s.experiment.folds, seed, s.experiment.positive_label, 1});
        }
        py::list out;
        for (const auto& r : results) out.append(result_dict(r));
        return out;
    }, py::arg("kb"), py::arg("data"), py::arg("events"), py::arg("labels"), py::arg("config"), py::arg("concepts"),
       py::arg("interpolation") = "linear", py::arg("aggregation") = "MTT", py::arg("band") = "sc10",
       py::arg("ks") = std::vector<int>{}, py::arg("seed") = 1, py::arg("attributes") = "");

    m.def("run_grid", [](const std::string& kb, const std::string& data, const std::string& events,
                         const std::string& labels, const std::string& config, const std::string& out_dir,
                         std::uint64_t seed, unsigned workers, bool resume, const std::string& attributes) {
        const Study s = load_study(kb, data, events, labels, config, attributes);
        const Cohort cohort(s.dataset, s.kb, cohort_options(s.experiment));
        const auto grid = enumerate_experiments(s.experiment.axes(static_cast<std::int64_t>(cohort.members().size())), &s.kb);
        namespace fs = std::filesystem;
        fs::create_directories(out_dir);
        GridOptions opt;
        opt.cv = {s.experiment.folds, seed, s.experiment.positive_label, 1};
        opt.workers = std::max(1u, workers);
        opt.progress_path = (fs::path(out_dir) / "progress.jsonl").string();
        opt.resume = resume;
        std::vector<ExperimentResult> results;
        {
            py::gil_scoped_release release;
            results = run_grid(cohort, grid, opt);
            std::ofstream folds(fs::path(out_dir) / "folds.csv"), table(fs::path(out_dir) / "results.csv"),
                aggregate(fs::path(out_dir) / "aggregate.csv");
            write_folds_report(folds, results);
            write_results_report(table, results);
            write_aggregate_report(aggregate, aggregate_by_representation(results));
        }
        py::list out;
        for (const auto& r : results) out.append(result_dict(r));
        return out;
    }, py::arg("kb"), py::arg("data"), py::arg("events"), py::arg("labels"), py::arg("config"), py::arg("out_dir"),
       py::arg("seed") = 1, py::arg("workers") = 1, py::arg("resume") = false, py::arg("attributes") = "");
}
