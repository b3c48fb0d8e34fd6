#pragma once

// Cross-validation driver, grid runner with resumable progress, and reports.

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "idtw/eval.hpp"
#include "idtw/experiment.hpp"
#include "idtw/pipeline.hpp"

namespace idtw {

// Fold index per entity. Each class is shuffled with `seed`, classes are
// concatenated in sorted order and dealt round-robin, so fold sizes differ by
// at most one and each class is spread evenly.
std::vector<int> stratified_folds(const std::vector<std::string>& labels, int folds, std::uint64_t seed);

struct FoldResult {
    int fold = 0;
    std::size_t test_size = 0;
    std::optional<double> auc;       // nullopt for a single-class test fold
    std::optional<RocPoint> youden;  // same condition
};

struct ExperimentResult {
    std::string config_id;
    MatchConfig config;
    bool raw_duplicate = false;
    std::size_t entities = 0;  // usable entities
    std::vector<FoldResult> folds;
    // Means over scored folds; NaN when no fold was scored.
    double mean_auc = 0.0;
    double mean_sensitivity = 0.0;
    double mean_specificity = 0.0;
    double mean_youden_j = 0.0;
    std::size_t folds_scored = 0;
    std::string error;  // set when the config could not run
    double wall_seconds = 0.0;  // informational, never written to reports
};

struct CvOptions {
    int folds = 10;
    std::uint64_t seed = 1;
    std::string positive_label;  // empty = the second label in sorted order
    unsigned workers = 1;        // threads for pairwise distances
};

// Cross-validates one config per k in `ks`; every k shares the same distances.
// Throws DataError unless exactly two classes each have at least `folds` usable entities.
std::vector<ExperimentResult> run_cv(const Cohort& cohort, const MatchConfig& config, const std::vector<int>& ks,
                                     const CvOptions& options);
ExperimentResult run_cv(const Cohort& cohort, const MatchConfig& config, const CvOptions& options);

struct GridOptions {
    CvOptions cv;
    unsigned workers = 1;       // configs in flight
    std::string progress_path;  // JSON lines, one finished config per line; empty disables
    bool resume = false;        // reuse configs already in the progress file
};

// Runs every entry; configs that differ only in k are evaluated together.
// Results come back in grid order whatever the worker count.
std::vector<ExperimentResult> run_grid(const Cohort& cohort, const std::vector<GridEntry>& grid,
                                       const GridOptions& options);

struct RepresentationSummary {
    std::string representation;  // e.g. "G+S+S"
    std::vector<std::string> config_ids;
    std::vector<double> aucs;
    double mean_auc = 0.0;
    std::optional<double> variance;  // sample variance, needs >= 2 configs
    // Paired against the all-Raw config on the same concepts and settings.
    std::vector<double> paired_aucs;
    std::vector<double> paired_raw_aucs;
    std::optional<TTestResult> vs_raw;  // needs >= 2 pairs
};

// Groups scored configs by the unordered multiset of representations.
std::vector<RepresentationSummary> aggregate_by_representation(const std::vector<ExperimentResult>& results);

// config_id,fold,auc,youden_j,sensitivity,specificity,threshold
void write_folds_report(std::ostream& out, const std::vector<ExperimentResult>& results);
void write_results_report(std::ostream& out, const std::vector<ExperimentResult>& results);
// representation,n_configs,mean_auc,variance,p_vs_raw
void write_aggregate_report(std::ostream& out, const std::vector<RepresentationSummary>& summary);

// Progress/results JSON (one object per line).
std::string result_to_json(const ExperimentResult& result);
ExperimentResult result_from_json(const std::string& line);
std::vector<ExperimentResult> read_results(const std::string& path);

}  // namespace idtw
