#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "embstab/graph.hpp"
#include "embstab/linkquality.hpp"
#include "embstab/metrics.hpp"
#include "embstab/sgns.hpp"
#include "embstab/stats.hpp"
#include "embstab/walks.hpp"

namespace embstab {

// One hyperparameter combination of the sweep. Fields mirror the walk and
// training knobs that vary across the grid.
struct ParamSet {
    int walk_length = 5;       // L
    int walks_per_node = 10;   // N
    int dim = 32;              // d
    int window = 5;            // C
    double return_bias = 1.0;  // p
    double inout_bias = 1.0;   // q

    // Canonical label "L{L}-N{N}-d{d}-C{C}-p{p}-q{q}", shared by every
    // output file so rows join across CSVs.
    std::string label() const;

    friend bool operator==(const ParamSet&, const ParamSet&) = default;
};

// Hamming distance: how many of the six fields differ.
int param_distance(const ParamSet& a, const ParamSet& b);

struct GridSpec {
    std::vector<int> walk_lengths{5};
    std::vector<int> walks_per_node{10};
    std::vector<int> dims{32};
    std::vector<int> windows{5};
    std::vector<double> return_biases{1.0};
    std::vector<double> inout_biases{1.0};
};

// Cartesian product in canonical order: each value list sorted ascending
// and deduplicated, loops nested with q varying fastest. Throws on an
// empty value list.
std::vector<ParamSet> enumerate_grid(const GridSpec& grid);

// Where the experiment graph comes from: an edge-list file, or a generator.
struct GraphSource {
    std::string path;  // nonempty: load this file, ignore generator fields
    bool weighted = false;

    std::string model;  // "sbm" | "er"
    std::vector<NodeId> block_sizes;
    double p_intra = 0.0;
    double p_inter = 0.0;
    NodeId num_nodes = 0;
    double edge_prob = 0.0;
    std::uint64_t seed = 0;

    std::string describe() const;
};

Graph resolve_graph(const GraphSource& source);

struct ExperimentSpec {
    std::string name;
    GraphSource graph;
    GridSpec grid;
    int repeats = 10;
    std::uint64_t experiment_seed = 0;
    EmbedParams train;  // dim, window and seed are overridden per cell
    double alpha = 0.05;
    ComparisonMode comparison_mode = ComparisonMode::Unpaired;
    std::vector<std::string> distance_metrics = kDistanceMetrics;
    std::vector<std::string> quality_metrics = kQualityMetrics;
    std::string output_dir;

    void validate() const;
};

// Reads a JSON spec file; unknown fields are rejected so typos fail loudly.
ExperimentSpec load_experiment_spec(const std::string& path);

// Spec serialization used inside the store manifest. Omits output_dir so
// two stores built from the same spec in different places stay comparable.
nlohmann::json spec_to_json(const ExperimentSpec& spec);

struct RunRecord {
    std::string graph_id;
    ParamSet params;
    int repeat = 0;
    std::uint64_t seed = 0;
    std::string status = "ok";  // "ok" | "failed"
    std::string error;
    std::map<std::string, double> metrics;
    int epochs_run = 0;
    bool stopped_early = false;
    double final_loss = 0.0;
    std::string cloud_file;  // store-relative path, empty when failed
};

// File stem of one cell inside the store: "{label}__r{repeat}".
std::string cell_stem(const ParamSet& params, int repeat);

struct ExperimentResult {
    std::string store_dir;
    std::vector<RunRecord> records;  // canonical (group, repeat) order
    int cells_computed = 0;
    int cells_resumed = 0;
    int cells_failed = 0;
};

// Runs every (param set, repeat) cell: walk corpus -> training ->
// diameter normalization -> quality metrics, persisting the cloud and a
// per-cell record as each cell commits. Cells already present in the store
// are skipped, making interrupted runs resumable. Afterwards the derived
// files (records.csv, quality.csv, distances.csv, stability_report.json,
// manifest.json) are rebuilt from the per-cell records. A failing cell is
// recorded and skipped; only all cells failing raises.
//
// Per-cell wall-clock times land in timings/, the one store area whose
// bytes legitimately differ between identical runs.
ExperimentResult run_experiment(const ExperimentSpec& spec, int threads = 1,
                                std::ostream* progress = nullptr);

// Per-group distance summaries, pairwise group comparisons (both paired and
// unpaired, each Bonferroni-corrected at alpha), and the Spearman
// correlation between parameter Hamming distance and median cross-group
// distance. `headline_mode` selects which comparison feeds the top-level
// fraction_significant values.
nlohmann::json stability_report_json(const DistanceMatrixSummary& distances,
                                     const std::vector<ParamSet>& groups,
                                     const std::vector<std::string>& metrics,
                                     double alpha, ComparisonMode headline_mode);

struct StoreAudit {
    int clouds_checked = 0;
    double worst_error = 0.0;             // max |diameter - 1| seen
    std::vector<std::string> offenders;   // clouds beyond tolerance
};

// Loads every cloud in the store and checks its diameter is 1 within
// tolerance.
StoreAudit audit_store_diameters(const std::string& store_dir,
                                 double tolerance = 1e-9);

}  // namespace embstab
