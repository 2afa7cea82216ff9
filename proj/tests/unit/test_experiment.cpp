#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "embstab/errors.hpp"
#include "embstab/experiment.hpp"
#include "embstab/graph.hpp"

using namespace embstab;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        path = fs::temp_directory_path() /
               ("embstab-exp-" + tag + "-" + std::to_string(counter++));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string str() const { return path.string(); }
};

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p);
    out << text;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int line_count(const std::string& text) {
    int n = 0;
    for (char c : text)
        if (c == '\n') ++n;
    return n;
}

// Two-group, two-repeat sweep on a small random graph; fast enough to run
// end to end inside the unit suite.
ExperimentSpec mini_spec(const std::string& output_dir) {
    ExperimentSpec spec;
    spec.name = "mini";
    spec.graph.model = "er";
    spec.graph.num_nodes = 20;
    spec.graph.edge_prob = 0.3;
    spec.graph.seed = 7;
    spec.grid.walk_lengths = {5};
    spec.grid.walks_per_node = {5};
    spec.grid.dims = {8};
    spec.grid.windows = {3};
    spec.grid.return_biases = {1.0};
    spec.grid.inout_biases = {1.0, 2.0};
    spec.repeats = 2;
    spec.experiment_seed = 11;
    spec.train.epochs_max = 2;
    spec.output_dir = output_dir;
    return spec;
}

}  // namespace

TEST_CASE("param set labels are canonical") {
    ParamSet p{5, 10, 16, 5, 1.0, 2.0};
    CHECK(p.label() == "L5-N10-d16-C5-p1-q2");
    p.return_bias = 0.5;
    p.inout_bias = 0.25;
    CHECK(p.label() == "L5-N10-d16-C5-p0.5-q0.25");
    CHECK(cell_stem(p, 3) == "L5-N10-d16-C5-p0.5-q0.25__r3");
}

TEST_CASE("param distance counts differing fields") {
    const ParamSet a{5, 10, 16, 5, 1.0, 2.0};
    CHECK(param_distance(a, a) == 0);
    ParamSet b = a;
    b.dim = 64;
    CHECK(param_distance(a, b) == 1);
    b.walk_length = 20;
    b.walks_per_node = 7;
    b.window = 10;
    b.return_bias = 0.5;
    b.inout_bias = 4.0;
    CHECK(param_distance(a, b) == 6);
}

TEST_CASE("grid enumeration is sorted, deduplicated, q-fastest") {
    GridSpec grid;
    grid.walk_lengths = {20, 5, 5};  // unsorted with a duplicate
    grid.dims = {16, 64};
    grid.windows = {5, 10};
    grid.inout_biases = {1.0, 2.0};
    const auto groups = enumerate_grid(grid);
    REQUIRE(groups.size() == 16);

    CHECK(groups[0].label() == "L5-N10-d16-C5-p1-q1");
    CHECK(groups[1].label() == "L5-N10-d16-C5-p1-q2");  // q varies fastest
    CHECK(groups[2].label() == "L5-N10-d16-C10-p1-q1");
    CHECK(groups[8].walk_length == 20);  // L varies slowest

    // all labels distinct
    std::vector<std::string> labels;
    for (const auto& g : groups) labels.push_back(g.label());
    std::sort(labels.begin(), labels.end());
    CHECK(std::unique(labels.begin(), labels.end()) == labels.end());

    grid.dims = {};
    CHECK_THROWS_AS(enumerate_grid(grid), std::invalid_argument);
}

TEST_CASE("full sweep has thirty-six groups") {
    GridSpec grid;
    grid.walk_lengths = {5, 10, 20};
    grid.dims = {16, 32, 64};
    grid.windows = {5, 10};
    grid.inout_biases = {1.0, 2.0};
    grid.walks_per_node = {10};
    CHECK(enumerate_grid(grid).size() == 36);
}

TEST_CASE("experiment spec loads from a json file") {
    TempDir tmp("spec");
    const fs::path file = tmp.path / "exp.json";
    write_file(file, R"({
        "name": "demo",
        "graph": {"model": "sbm", "block_sizes": [10, 10],
                  "p_intra": 0.3, "p_inter": 0.05, "seed": 3},
        "grid": {"L": [5, 10], "q": [1.0, 2.0]},
        "repeats": 4,
        "experiment_seed": 99,
        "train": {"epochs_max": 3, "learning_rate": 0.05},
        "alpha": 0.01,
        "comparison_mode": "paired",
        "output": "out/demo"
    })");

    const ExperimentSpec spec = load_experiment_spec(file.string());
    CHECK(spec.name == "demo");
    CHECK(spec.graph.model == "sbm");
    CHECK(spec.graph.block_sizes == std::vector<NodeId>{10, 10});
    CHECK(spec.graph.p_intra == 0.3);
    CHECK(spec.graph.seed == 3);
    CHECK(spec.grid.walk_lengths == std::vector<int>{5, 10});
    CHECK(spec.grid.inout_biases == std::vector<double>{1.0, 2.0});
    CHECK(spec.grid.dims == std::vector<int>{32});  // untouched default
    CHECK(spec.repeats == 4);
    CHECK(spec.experiment_seed == 99);
    CHECK(spec.train.epochs_max == 3);
    CHECK(spec.train.learning_rate == 0.05);
    CHECK(spec.alpha == 0.01);
    CHECK(spec.comparison_mode == ComparisonMode::Paired);
    CHECK(spec.output_dir == "out/demo");
    CHECK(spec.distance_metrics == kDistanceMetrics);
    CHECK(spec.quality_metrics == kQualityMetrics);

    // manifest serialization mirrors the fields but omits the output path
    const json round = spec_to_json(spec);
    CHECK(round.at("name") == "demo");
    CHECK(round.at("repeats") == 4);
    CHECK(round.at("comparison_mode") == "paired");
    CHECK(round.at("grid").at("L") == json({5, 10}));
    CHECK_FALSE(round.contains("output"));
}

TEST_CASE("experiment spec rejects malformed input") {
    TempDir tmp("badspec");
    auto expect_parse_error = [&](const std::string& body) {
        const fs::path file = tmp.path / "exp.json";
        write_file(file, body);
        CHECK_THROWS_AS(load_experiment_spec(file.string()), ParseError);
    };

    expect_parse_error("{ not json");
    // unknown top-level key
    expect_parse_error(R"({"graph": {"model": "er", "n": 5, "p": 0.5},
                           "output": "o", "typo_field": 1})");
    // unknown grid key
    expect_parse_error(R"({"graph": {"model": "er", "n": 5, "p": 0.5},
                           "grid": {"Z": [1]}, "output": "o"})");
    // unknown graph model
    expect_parse_error(R"({"graph": {"model": "ba", "n": 5, "p": 0.5},
                           "output": "o"})");
    // bad comparison mode
    expect_parse_error(R"({"graph": {"model": "er", "n": 5, "p": 0.5},
                           "comparison_mode": "welch", "output": "o"})");
    // missing output
    expect_parse_error(R"({"graph": {"model": "er", "n": 5, "p": 0.5}})");

    // out-of-range alpha passes parsing but fails validation
    const fs::path file = tmp.path / "exp.json";
    write_file(file, R"({"graph": {"model": "er", "n": 5, "p": 0.5},
                         "alpha": 1.5, "output": "o"})");
    CHECK_THROWS_AS(load_experiment_spec(file.string()), std::invalid_argument);
}

TEST_CASE("graph sources resolve to deterministic graphs") {
    GraphSource er;
    er.model = "er";
    er.num_nodes = 20;
    er.edge_prob = 0.3;
    er.seed = 7;
    const Graph g1 = resolve_graph(er);
    const Graph g2 = generate_er(20, 0.3, 7);
    CHECK(g1.fingerprint_hex() == g2.fingerprint_hex());

    GraphSource file;
    file.path = std::string(EMBSTAB_REPO_DIR) + "/data/lesmis.edges";
    const Graph g3 = resolve_graph(file);
    CHECK(g3.num_nodes() == 77);
    CHECK(g3.num_edges() == 254);
}

TEST_CASE("experiment run populates a complete store") {
    TempDir tmp("run");
    const ExperimentSpec spec = mini_spec((tmp.path / "store").string());
    const ExperimentResult result = run_experiment(spec);

    CHECK(result.cells_computed == 4);
    CHECK(result.cells_resumed == 0);
    CHECK(result.cells_failed == 0);
    REQUIRE(result.records.size() == 4);
    for (const auto& rec : result.records) {
        CHECK(rec.status == "ok");
        CHECK(rec.metrics.size() == 4);
        CHECK(rec.epochs_run >= 1);
    }
    // canonical order: group-major, repeat-minor
    CHECK(result.records[0].params.inout_bias == 1.0);
    CHECK(result.records[0].repeat == 0);
    CHECK(result.records[1].repeat == 1);
    CHECK(result.records[2].params.inout_bias == 2.0);

    const fs::path store(result.store_dir);
    for (const char* name : {"manifest.json", "graph.json", "records.csv",
                             "quality.csv", "distances.csv",
                             "stability_report.json"})
        CHECK(fs::exists(store / name));

    CHECK(line_count(slurp(store / "records.csv")) == 1 + 4);
    CHECK(line_count(slurp(store / "quality.csv")) == 1 + 4 * 4);
    // 4 runs -> C(4,2)=6 unordered pairs, two metrics each
    CHECK(line_count(slurp(store / "distances.csv")) == 1 + 6 * 2);

    const json manifest = json::parse(slurp(store / "manifest.json"));
    CHECK(manifest.at("format") == "embstab-store");
    CHECK(manifest.at("status") == "complete");
    CHECK(manifest.at("cells").at("total") == 4);
    CHECK(manifest.at("cells").at("ok") == 4);
    CHECK(manifest.at("groups").size() == 2);
    CHECK_FALSE(manifest.at("spec").contains("output"));

    const json report = json::parse(slurp(store / "stability_report.json"));
    CHECK(report.at("alpha") == 0.05);
    CHECK(report.at("headline_mode") == "unpaired");
    CHECK(report.at("group_summaries").size() == 2 * 2);
    for (const auto& metric : {"hausdorff", "wasserstein2"}) {
        const json& cmp = report.at("comparisons").at(metric);
        CHECK(cmp.contains("paired"));
        CHECK(cmp.contains("unpaired"));
        CHECK(cmp.at("unpaired").at("m") == 1);
        // two groups yield a single cross pair: too few for a correlation
        const json& corr = report.at("param_distance_correlation").at(metric);
        CHECK(corr.at("n_pairs") == 1);
        CHECK(corr.at("degenerate") == true);
        CHECK(report.at("fraction_significant").at(metric).is_number());
    }

    // every persisted cloud is normalized to unit diameter
    const StoreAudit audit = audit_store_diameters(result.store_dir);
    CHECK(audit.clouds_checked == 4);
    CHECK(audit.worst_error <= 1e-9);
    CHECK(audit.offenders.empty());

    SUBCASE("a second run resumes every cell") {
        const ExperimentResult again = run_experiment(spec);
        CHECK(again.cells_computed == 0);
        CHECK(again.cells_resumed == 4);
        CHECK(again.cells_failed == 0);
        REQUIRE(again.records.size() == 4);
        for (std::size_t i = 0; i < 4; ++i) {
            CHECK(again.records[i].seed == result.records[i].seed);
            CHECK(again.records[i].final_loss == result.records[i].final_loss);
        }
    }

    SUBCASE("a stale record is recomputed") {
        const fs::path rec_path =
            store / "records" / (cell_stem(result.records[0].params, 0) + ".json");
        json j = json::parse(slurp(rec_path));
        j["graph_id"] = "0000000000000000";
        write_file(rec_path, j.dump(2) + "\n");

        const ExperimentResult again = run_experiment(spec);
        CHECK(again.cells_computed == 1);
        CHECK(again.cells_resumed == 3);
        CHECK(again.records[0].final_loss == result.records[0].final_loss);
    }
}

TEST_CASE("experiment runs are reproducible across stores") {
    TempDir tmp("repro");
    ExperimentSpec a = mini_spec((tmp.path / "a").string());
    ExperimentSpec b = mini_spec((tmp.path / "b").string());
    const ExperimentResult ra = run_experiment(a, 1);
    const ExperimentResult rb = run_experiment(b, 2);  // threads must not matter
    REQUIRE(ra.records.size() == rb.records.size());
    for (std::size_t i = 0; i < ra.records.size(); ++i) {
        CHECK(ra.records[i].seed == rb.records[i].seed);
        CHECK(ra.records[i].final_loss == rb.records[i].final_loss);
        CHECK(ra.records[i].metrics == rb.records[i].metrics);
    }
    CHECK(slurp(tmp.path / "a" / "records.csv") ==
          slurp(tmp.path / "b" / "records.csv"));
    CHECK(slurp(tmp.path / "a" / "distances.csv") ==
          slurp(tmp.path / "b" / "distances.csv"));
}

TEST_CASE("a pre-recorded failure is kept on resume") {
    TempDir tmp("failcell");
    const ExperimentSpec spec = mini_spec((tmp.path / "store").string());
    const Graph graph = resolve_graph(spec.graph);
    const auto groups = enumerate_grid(spec.grid);

    fs::create_directories(tmp.path / "store" / "records");
    const json failed = {
        {"graph_id", graph.fingerprint_hex()},
        {"param_set",
         {{"L", groups[0].walk_length},
          {"N", groups[0].walks_per_node},
          {"d", groups[0].dim},
          {"C", groups[0].window},
          {"p", groups[0].return_bias},
          {"q", groups[0].inout_bias}}},
        {"repeat", 0},
        {"seed", 1},
        {"status", "failed"},
        {"error", "synthetic failure"}};
    write_file(tmp.path / "store" / "records" / (cell_stem(groups[0], 0) + ".json"),
               failed.dump(2) + "\n");

    const ExperimentResult result = run_experiment(spec);
    CHECK(result.cells_computed == 3);
    CHECK(result.cells_resumed == 1);
    CHECK(result.cells_failed == 1);
    CHECK(result.records[0].status == "failed");
    CHECK(result.records[0].error == "synthetic failure");

    const json manifest =
        json::parse(slurp(tmp.path / "store" / "manifest.json"));
    CHECK(manifest.at("status") == "complete-with-failures");
    CHECK(manifest.at("cells").at("failed") == 1);
    // quality rows only for the three healthy cells
    CHECK(line_count(slurp(tmp.path / "store" / "quality.csv")) == 1 + 3 * 4);
    CHECK(audit_store_diameters((tmp.path / "store").string()).clouds_checked == 3);
}

TEST_CASE("an edgeless graph fails every cell") {
    TempDir tmp("alldead");
    ExperimentSpec spec = mini_spec((tmp.path / "store").string());
    spec.graph.edge_prob = 0.0;  // no edges, so walks never leave their start
    CHECK_THROWS_AS(run_experiment(spec), TrainError);
}

TEST_CASE("single-repeat runs skip the distance analysis") {
    TempDir tmp("onerep");
    ExperimentSpec spec = mini_spec((tmp.path / "store").string());
    spec.repeats = 1;
    std::ostringstream progress;
    const ExperimentResult result = run_experiment(spec, 1, &progress);
    CHECK(result.cells_computed == 2);

    const fs::path store(result.store_dir);
    CHECK(line_count(slurp(store / "distances.csv")) == 1);  // header only
    const json report = json::parse(slurp(store / "stability_report.json"));
    CHECK(report.at("degenerate") == true);
    CHECK(progress.str().find("no distance analysis") != std::string::npos);
}
