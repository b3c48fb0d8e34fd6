#include "idtw/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <thread>

#include "json.hpp"

#include "idtw/error.hpp"
#include "idtw/imatch.hpp"
#include "idtw/log.hpp"
#include "idtw/random.hpp"

namespace idtw {
namespace {

using json = nlohmann::json;

// Runs fn(i) for i in [0, n) on up to `workers` threads. If calls throw, the
// exception of the lowest index is rethrown so failures are reproducible.
template <typename Fn>
void parallel_for(std::size_t n, unsigned workers, Fn&& fn) {
    if (workers <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::mutex mu;
    std::size_t failed_at = n;
    std::exception_ptr failure;
    auto work = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(mu);
                if (i < failed_at) failed_at = i, failure = std::current_exception();
            }
        }
    };
    std::vector<std::jthread> pool;
    const unsigned count = static_cast<unsigned>(std::min<std::size_t>(workers, n));
    for (unsigned t = 0; t < count; ++t) pool.emplace_back(work);
    pool.clear();
    if (failure) std::rethrow_exception(failure);
}

void finalize(ExperimentResult& r) {
    double auc = 0, sens = 0, spec = 0, j = 0;
    r.folds_scored = 0;
    for (const auto& f : r.folds) {
        if (!f.auc) continue;
        ++r.folds_scored;
        auc += *f.auc;
        sens += f.youden->sensitivity;
        spec += f.youden->specificity;
        j += f.youden->youden_j();
    }
    const double n = static_cast<double>(r.folds_scored);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    r.mean_auc = r.folds_scored ? auc / n : nan;
    r.mean_sensitivity = r.folds_scored ? sens / n : nan;
    r.mean_specificity = r.folds_scored ? spec / n : nan;
    r.mean_youden_j = r.folds_scored ? j / n : nan;
}

std::string fixed(double v) {
    if (std::isnan(v)) return "NA";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

std::string general(double v) {
    if (std::isnan(v)) return "NA";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c == '\n' ? ' ' : c;
    }
    return out + "\"";
}

std::string concept_names(const MatchConfig& c, bool sorted) {
    std::vector<std::string> names;
    for (const auto& r : c.concepts) names.push_back(r.concept_name);
    if (sorted) std::sort(names.begin(), names.end());
    std::string out;
    for (std::size_t i = 0; i < names.size(); ++i) out += (i ? ";" : "") + names[i];
    return out;
}

std::string raw_pair_key(const MatchConfig& c) {
    return concept_names(c, true) + "|" + std::string(to_string(c.interpolation)) + "|" +
           std::string(to_string(c.aggregation)) + "|" + to_string(c.band) + "|" + std::to_string(c.k);
}

}  // namespace

std::vector<int> stratified_folds(const std::vector<std::string>& labels, int folds, std::uint64_t seed) {
    if (folds < 2) throw ConfigError("need at least 2 folds");
    std::map<std::string, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
    Rng rng(seed);
    std::vector<int> fold_of(labels.size(), 0);
    std::size_t dealt = 0;
    for (auto& [label, members] : by_class) {
        rng.shuffle(members);
        for (std::size_t i : members) fold_of[i] = static_cast<int>(dealt++ % static_cast<std::size_t>(folds));
    }
    return fold_of;
}

std::vector<ExperimentResult> run_cv(const Cohort& cohort, const MatchConfig& config, const std::vector<int>& ks,
                                     const CvOptions& options) {
    const auto started = std::chrono::steady_clock::now();
    if (ks.empty()) throw ConfigError("no k values");
    for (int k : ks) {
        MatchConfig c = config;
        c.k = k;
        validate(c);
    }

    std::vector<std::size_t> members;
    for (std::size_t m = 0; m < cohort.members().size(); ++m)
        if (cohort.usable(m, config)) members.push_back(m);
    const std::size_t n = members.size();

    std::vector<std::string> labels;
    std::map<std::string, std::size_t> class_sizes;
    for (std::size_t m : members) {
        labels.push_back(cohort.members()[m].label);
        ++class_sizes[labels.back()];
    }
    if (class_sizes.size() != 2)
        throw DataError("cross-validation needs exactly two classes among usable entities, found " +
                        std::to_string(class_sizes.size()));
    std::vector<std::string> classes;
    for (const auto& [label, size] : class_sizes) {
        classes.push_back(label);
        if (size < static_cast<std::size_t>(options.folds))
            throw DataError("class '" + label + "' has " + std::to_string(size) + " usable entities, fewer than " +
                            std::to_string(options.folds) + " folds");
    }
    const std::string positive = options.positive_label.empty() ? classes[1] : options.positive_label;
    if (!class_sizes.count(positive)) throw ConfigError("positive label '" + positive + "' is not a class");

    const std::vector<int> fold_of = stratified_folds(labels, options.folds, options.seed);

    std::vector<EventTable> tables(n);
    auto build_tables = [&](const PopulationStats* stats) {
        parallel_for(n, options.workers, [&](std::size_t i) { tables[i] = cohort.event_table(members[i], config, stats); });
    };
    // Distances are always taken with the lower usable index as the first series.
    auto distance = [&](std::size_t a, std::size_t b) {
        return a < b ? dtw_distance(tables[a], tables[b], config.band) : dtw_distance(tables[b], tables[a], config.band);
    };

    std::vector<double> full;  // n x n, abstract configs only
    const bool raw = config.all_raw();
    if (!raw) {
        build_tables(nullptr);
        full.assign(n * n, 0.0);
        std::vector<std::pair<std::size_t, std::size_t>> pairs;
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = a + 1; b < n; ++b) pairs.emplace_back(a, b);
        parallel_for(pairs.size(), options.workers, [&](std::size_t p) {
            auto [a, b] = pairs[p];
            full[a * n + b] = full[b * n + a] = distance(a, b);
        });
    }

    std::vector<ExperimentResult> results(ks.size());
    for (std::size_t ki = 0; ki < ks.size(); ++ki) {
        results[ki].config = config;
        results[ki].config.k = ks[ki];
        results[ki].config_id = results[ki].config.id();
        results[ki].entities = n;
    }

    for (int fold = 0; fold < options.folds; ++fold) {
        std::vector<std::size_t> train, test;
        for (std::size_t i = 0; i < n; ++i) (fold_of[i] == fold ? test : train).push_back(i);

        std::vector<double> dist(test.size() * train.size());
        if (raw) {
            std::vector<std::size_t> train_members;
            for (std::size_t i : train) train_members.push_back(members[i]);
            const PopulationStats stats = cohort.fit_raw_stats(train_members, config);
            build_tables(&stats);
            parallel_for(dist.size(), options.workers, [&](std::size_t p) {
                dist[p] = distance(test[p / train.size()], train[p % train.size()]);
            });
        } else {
            for (std::size_t t = 0; t < test.size(); ++t)
                for (std::size_t r = 0; r < train.size(); ++r) dist[t * train.size() + r] = full[test[t] * n + train[r]];
        }

        // vector<bool> is not contiguous, so it cannot back a span.
        auto positive_flags = std::make_unique<bool[]>(test.size());
        for (std::size_t t = 0; t < test.size(); ++t) positive_flags[t] = labels[test[t]] == positive;
        const std::span<const bool> is_positive(positive_flags.get(), test.size());
        const bool scorable = std::count(is_positive.begin(), is_positive.end(), true) > 0 &&
                              std::count(is_positive.begin(), is_positive.end(), false) > 0;
        if (!scorable)
            log::warn("config " + config.distance_key() + ": fold " + std::to_string(fold) +
                      " has a single-class test set and is not scored");

        for (std::size_t ki = 0; ki < ks.size(); ++ki) {
            std::vector<double> scores;
            for (std::size_t t = 0; t < test.size(); ++t) {
                std::vector<Neighbor> candidates;
                candidates.reserve(train.size());
                for (std::size_t r = 0; r < train.size(); ++r)
                    candidates.push_back({cohort.members()[members[train[r]]].id, dist[t * train.size() + r],
                                          labels[train[r]]});
                scores.push_back(knn_posterior(std::move(candidates), ks[ki], classes).at(positive));
            }
            FoldResult fr{fold, test.size(), std::nullopt, std::nullopt};
            if (scorable) {
                fr.auc = roc_auc(scores, is_positive);
                fr.youden = youden_optimal(scores, is_positive);
            }
            results[ki].folds.push_back(fr);
        }
    }

    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    for (auto& r : results) {
        finalize(r);
        r.wall_seconds = seconds;
    }
    return results;
}

ExperimentResult run_cv(const Cohort& cohort, const MatchConfig& config, const CvOptions& options) {
    return run_cv(cohort, config, {config.k}, options).front();
}

std::vector<ExperimentResult> run_grid(const Cohort& cohort, const std::vector<GridEntry>& grid,
                                       const GridOptions& options) {
    std::map<std::string, ExperimentResult> done;
    if (options.resume && !options.progress_path.empty()) {
        if (std::ifstream probe(options.progress_path); probe) {
            for (auto& r : read_results(options.progress_path)) done.insert_or_assign(r.config_id, std::move(r));
            log::info("resuming with " + std::to_string(done.size()) + " finished configs");
        }
    }
    std::ofstream progress;
    if (!options.progress_path.empty()) {
        progress.open(options.progress_path, options.resume ? std::ios::app : std::ios::trunc);
        if (!progress) throw Error("cannot write progress file '" + options.progress_path + "'");
    }

    // Group entries that differ only in k.
    std::vector<std::vector<std::size_t>> groups;
    std::map<std::string, std::size_t> group_of;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        auto [it, inserted] = group_of.try_emplace(grid[i].config.distance_key(), groups.size());
        if (inserted) groups.emplace_back();
        groups[it->second].push_back(i);
    }

    std::vector<ExperimentResult> results(grid.size());
    std::mutex mu;
    CvOptions cv = options.cv;
    cv.workers = options.workers > 1 ? 1 : cv.workers;

    parallel_for(groups.size(), std::max(1u, options.workers), [&](std::size_t g) {
        const auto& members = groups[g];
        std::vector<std::size_t> pending;
        for (std::size_t i : members) {
            auto it = done.find(grid[i].config.id());
            if (it != done.end()) {
                results[i] = it->second;
                results[i].config = grid[i].config;
                results[i].raw_duplicate = grid[i].raw_duplicate;
            } else {
                pending.push_back(i);
            }
        }
        if (pending.empty()) return;

        std::vector<int> ks;
        for (std::size_t i : pending) ks.push_back(grid[i].config.k);
        std::vector<ExperimentResult> out;
        try {
            out = run_cv(cohort, grid[pending.front()].config, ks, cv);
        } catch (const Error& e) {
            log::warn("config " + grid[pending.front()].config.distance_key() + " failed: " + e.what());
            for (std::size_t i : pending) {
                ExperimentResult r;
                r.config = grid[i].config;
                r.config_id = r.config.id();
                r.error = e.what();
                finalize(r);
                out.push_back(std::move(r));
            }
        }
        std::lock_guard lock(mu);
        for (std::size_t p = 0; p < pending.size(); ++p) {
            out[p].raw_duplicate = grid[pending[p]].raw_duplicate;
            if (progress.is_open()) progress << result_to_json(out[p]) << '\n' << std::flush;
            results[pending[p]] = std::move(out[p]);
        }
    });
    return results;
}

std::vector<RepresentationSummary> aggregate_by_representation(const std::vector<ExperimentResult>& results) {
    std::map<std::string, double> raw_auc;
    for (const auto& r : results)
        if (r.folds_scored && r.config.all_raw()) raw_auc.try_emplace(raw_pair_key(r.config), r.mean_auc);

    std::map<std::string, RepresentationSummary> groups;
    for (const auto& r : results) {
        if (!r.folds_scored) continue;
        auto& g = groups[r.config.representation_key()];
        g.representation = r.config.representation_key();
        g.config_ids.push_back(r.config_id);
        g.aucs.push_back(r.mean_auc);
        if (!r.config.all_raw()) {
            if (auto it = raw_auc.find(raw_pair_key(r.config)); it != raw_auc.end()) {
                g.paired_aucs.push_back(r.mean_auc);
                g.paired_raw_aucs.push_back(it->second);
            }
        }
    }

    std::vector<RepresentationSummary> out;
    for (auto& [key, g] : groups) {
        double sum = 0;
        for (double a : g.aucs) sum += a;
        g.mean_auc = sum / static_cast<double>(g.aucs.size());
        if (g.aucs.size() >= 2) {
            double ss = 0;
            for (double a : g.aucs) ss += (a - g.mean_auc) * (a - g.mean_auc);
            g.variance = ss / static_cast<double>(g.aucs.size() - 1);
        }
        if (g.paired_aucs.size() >= 2) g.vs_raw = paired_t_test(g.paired_aucs, g.paired_raw_aucs);
        out.push_back(std::move(g));
    }
    return out;
}

void write_folds_report(std::ostream& out, const std::vector<ExperimentResult>& results) {
    out << "config_id,fold,auc,youden_j,sensitivity,specificity,threshold\n";
    for (const auto& r : results) {
        for (const auto& f : r.folds) {
            out << r.config_id << ',' << f.fold << ',';
            if (f.auc) {
                out << fixed(*f.auc) << ',' << fixed(f.youden->youden_j()) << ',' << fixed(f.youden->sensitivity) << ','
                    << fixed(f.youden->specificity) << ',' << fixed(f.youden->threshold) << '\n';
            } else {
                out << "NA,NA,NA,NA,NA\n";
            }
        }
    }
}

void write_results_report(std::ostream& out, const std::vector<ExperimentResult>& results) {
    out << "config_id,representation,concepts,interpolation,aggregation,band,k,entities,mean_auc,mean_sensitivity,"
           "mean_specificity,mean_youden_j,folds_scored,raw_duplicate,error\n";
    for (const auto& r : results) {
        const auto& c = r.config;
        out << r.config_id << ',' << c.representation_key() << ',' << concept_names(c, false) << ','
            << to_string(c.interpolation) << ',' << to_string(c.aggregation) << ',' << to_string(c.band) << ',' << c.k
            << ',' << r.entities << ',' << fixed(r.mean_auc) << ',' << fixed(r.mean_sensitivity) << ','
            << fixed(r.mean_specificity) << ',' << fixed(r.mean_youden_j) << ',' << r.folds_scored << ','
            << (r.raw_duplicate ? 1 : 0) << ',' << csv_field(r.error) << '\n';
    }
}

void write_aggregate_report(std::ostream& out, const std::vector<RepresentationSummary>& summary) {
    out << "representation,n_configs,mean_auc,variance,p_vs_raw\n";
    for (const auto& g : summary) {
        out << g.representation << ',' << g.aucs.size() << ',' << fixed(g.mean_auc) << ','
            << (g.variance ? fixed(*g.variance) : "NA") << ',' << (g.vs_raw ? general(g.vs_raw->p) : "NA") << '\n';
    }
}

std::string result_to_json(const ExperimentResult& r) {
    json folds = json::array();
    for (const auto& f : r.folds) {
        json jf{{"fold", f.fold}, {"test_size", f.test_size}};
        if (f.auc) {
            jf["auc"] = *f.auc;
            jf["threshold"] = f.youden->threshold;
            jf["sensitivity"] = f.youden->sensitivity;
            jf["specificity"] = f.youden->specificity;
        }
        folds.push_back(std::move(jf));
    }
    json j{{"config_id", r.config_id},
           {"concepts", r.config.concepts_key()},
           {"interpolation", to_string(r.config.interpolation)},
           {"aggregation", to_string(r.config.aggregation)},
           {"band", to_string(r.config.band)},
           {"k", r.config.k},
           {"raw_duplicate", r.raw_duplicate},
           {"entities", r.entities},
           {"folds", std::move(folds)}};
    if (!r.error.empty()) j["error"] = r.error;
    return j.dump();
}

ExperimentResult result_from_json(const std::string& line) {
    ExperimentResult r;
    try {
        const json j = json::parse(line);
        r.config_id = j.at("config_id").get<std::string>();
        r.config.concepts = parse_concepts_key(j.at("concepts").get<std::string>());
        r.config.interpolation = parse_interpolation(j.at("interpolation").get<std::string>());
        r.config.aggregation = parse_duration_delegate(j.at("aggregation").get<std::string>());
        r.config.band = parse_band(j.at("band").get<std::string>());
        r.config.k = j.at("k").get<int>();
        r.raw_duplicate = j.at("raw_duplicate").get<bool>();
        r.entities = j.at("entities").get<std::size_t>();
        r.error = j.value("error", "");
        for (const auto& jf : j.at("folds")) {
            FoldResult f{jf.at("fold").get<int>(), jf.at("test_size").get<std::size_t>(), std::nullopt, std::nullopt};
            if (jf.contains("auc")) {
                f.auc = jf["auc"].get<double>();
                f.youden = RocPoint{jf.at("threshold").get<double>(), jf.at("sensitivity").get<double>(),
                                    jf.at("specificity").get<double>()};
            }
            r.folds.push_back(f);
        }
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed result record: ") + e.what(), 1);
    }
    finalize(r);
    return r;
}

std::vector<ExperimentResult> read_results(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open results file '" + path + "'");
    std::vector<ExperimentResult> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out.push_back(result_from_json(line));
        } catch (const ParseError& e) {
            // A run killed mid-write leaves a truncated last line; drop it.
            log::warn(path + ": skipping unreadable line " + std::to_string(line_no));
        }
    }
    return out;
}

}  // namespace idtw
