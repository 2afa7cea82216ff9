// embstab: drive the embedding-stability pipeline from the shell.
//
// Exit codes: 0 success, 2 usage error, 3 I/O error, 4 computation error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "embstab/csv.hpp"
#include "embstab/errors.hpp"
#include "embstab/experiment.hpp"
#include "embstab/graph.hpp"
#include "embstab/linkquality.hpp"
#include "embstab/metrics.hpp"
#include "embstab/pointcloud.hpp"

namespace {

namespace fs = std::filesystem;
using namespace embstab;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;
constexpr int kExitCompute = 4;

int threads_from_env() {
    const char* env = std::getenv("EMBSTAB_THREADS");
    if (!env) return 1;
    try {
        const int n = std::stoi(env);
        return n >= 1 ? n : 1;
    } catch (const std::exception&) {
        return 1;
    }
}

struct GenerateArgs {
    std::string model;
    std::vector<NodeId> blocks;
    double p_intra = 0.0;
    double p_inter = 0.0;
    NodeId n = 0;
    double p = 0.0;
    std::uint64_t seed = 0;
    std::string out;
};

int cmd_generate(const GenerateArgs& args) {
    GraphSource source;
    source.model = args.model;
    source.block_sizes = args.blocks;
    source.p_intra = args.p_intra;
    source.p_inter = args.p_inter;
    source.num_nodes = args.n;
    source.edge_prob = args.p;
    source.seed = args.seed;
    const Graph g = resolve_graph(source);
    save_edge_list_file(g, args.out);
    std::cout << "nodes " << g.num_nodes() << "\n"
              << "edges " << g.num_edges() << "\n";
    return kExitOk;
}

struct RunArgs {
    std::string spec_path;
    std::string out_override;
    int threads = 0;  // 0: resolve from env
};

int cmd_run(const RunArgs& args) {
    ExperimentSpec spec = load_experiment_spec(args.spec_path);
    if (!args.out_override.empty()) spec.output_dir = args.out_override;
    const int threads = args.threads >= 1 ? args.threads : threads_from_env();
    const ExperimentResult result = run_experiment(spec, threads, &std::cerr);
    std::cout << "store " << result.store_dir << "\n"
              << "cells_computed " << result.cells_computed << "\n"
              << "cells_resumed " << result.cells_resumed << "\n"
              << "cells_failed " << result.cells_failed << "\n";
    if (result.cells_computed == 0 && result.cells_failed == 0)
        std::cout << "all cells complete\n";
    return kExitOk;
}

struct ReportArgs {
    std::string store;
    std::string out;
    int pca = 0;
};

void write_boxplot_csv(const fs::path& src, const fs::path& dst, bool within_only) {
    const auto rows = csv::read_file(src.string());
    if (rows.empty()) throw IoError("empty file: " + src.string());
    std::ostringstream out;
    csv::write_row(out, {"param_set", "metric", "value"});
    const auto& header = rows.front();
    // distances.csv: group_a,run_a,group_b,run_b,metric,value
    // quality.csv:   graph_id,param_set,repeat,metric,value
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& row = rows[i];
        if (row.size() != header.size()) continue;
        if (within_only) {
            if (row[0] != row[2]) continue;
            csv::write_row(out, {row[0], row[4], row[5]});
        } else {
            csv::write_row(out, {row[1], row[3], row[4]});
        }
    }
    std::ofstream f(dst, std::ios::binary);
    f << out.str();
    if (!f) throw IoError("cannot write " + dst.string());
}

int cmd_report(const ReportArgs& args) {
    const fs::path store(args.store);
    const fs::path manifest_path = store / "manifest.json";
    if (!fs::exists(manifest_path))
        throw IoError("not a result store (no manifest.json): " + args.store);
    const fs::path out_dir = args.out.empty() ? store / "report" : fs::path(args.out);
    fs::create_directories(out_dir);

    write_boxplot_csv(store / "distances.csv", out_dir / "distance_boxplot.csv", true);
    write_boxplot_csv(store / "quality.csv", out_dir / "quality_boxplot.csv", false);

    if (args.pca > 0) {
        std::vector<std::string> labels;
        {
            std::ifstream in(store / "graph.json", std::ios::binary);
            if (in) {
                std::ostringstream ss;
                ss << in.rdbuf();
                labels = graph_from_json(ss.str()).labels();
            }
        }
        const auto records = csv::read_file((store / "records.csv").string());
        std::ostringstream pca_out;
        std::vector<std::string> header = {"param_set", "repeat", "node"};
        for (int c = 1; c <= args.pca; ++c) header.push_back("c" + std::to_string(c));
        csv::write_row(pca_out, header);
        for (std::size_t i = 1; i < records.size(); ++i) {
            const auto& row = records[i];
            if (row.size() < 9 || row[4] != "ok" || row[8].empty()) continue;
            const PointCloud cloud = load_cloud_file((store / row[8]).string());
            const PcaResult pca = project_pca(cloud, args.pca);
            for (Eigen::Index r = 0; r < pca.projected.points.rows(); ++r) {
                std::vector<std::string> fields = {
                    row[1], row[2],
                    static_cast<std::size_t>(r) < labels.size()
                        ? labels[static_cast<std::size_t>(r)]
                        : std::to_string(r)};
                for (int c = 0; c < args.pca; ++c)
                    fields.push_back(csv::format_double(pca.projected.points(r, c)));
                csv::write_row(pca_out, fields);
            }
        }
        std::ofstream f(out_dir / "pca_coords.csv", std::ios::binary);
        f << pca_out.str();
        if (!f) throw IoError("cannot write pca_coords.csv");
    }

    // Human-readable rendering of the stability report.
    const fs::path report_path = store / "stability_report.json";
    std::ifstream in(report_path, std::ios::binary);
    if (!in) throw IoError("cannot read " + report_path.string());
    nlohmann::json report;
    in >> report;
    if (report.value("degenerate", false)) {
        std::cout << "stability report: degenerate ("
                  << report.value("reason", std::string{"unknown"}) << ")\n";
    } else {
        std::cout << "alpha " << report["alpha"].dump() << ", mode "
                  << report["headline_mode"].get<std::string>() << "\n";
        for (const auto& [metric, frac] : report["fraction_significant"].items()) {
            std::cout << metric << " fraction_significant " << frac.dump();
            const auto& comp =
                report["comparisons"][metric]
                      [report["headline_mode"].get<std::string>()];
            if (comp.contains("m")) std::cout << " (m=" << comp["m"].dump() << ")";
            std::cout << "\n";
        }
        for (const auto& [metric, corr] :
             report["param_distance_correlation"].items())
            std::cout << metric << " spearman_vs_param_distance "
                      << corr["value"].dump() << "\n";
    }
    std::cout << "report files in " << out_dir.string() << "\n";
    return kExitOk;
}

struct DistArgs {
    std::string cloud_a;
    std::string cloud_b;
    std::string metric = "both";
    bool normalize = false;
};

int cmd_dist(const DistArgs& args) {
    PointCloud a = load_cloud_file(args.cloud_a);
    PointCloud b = load_cloud_file(args.cloud_b);
    if (args.normalize) {
        a = normalize_diameter(a);
        b = normalize_diameter(b);
    }
    if (args.metric == "hausdorff" || args.metric == "both")
        std::cout << "hausdorff " << csv::format_double(hausdorff(a, b)) << "\n";
    if (args.metric == "wasserstein2" || args.metric == "both")
        std::cout << "wasserstein2 " << csv::format_double(wasserstein2(a, b))
                  << "\n";
    return kExitOk;
}

struct QualityArgs {
    std::string graph_path;
    bool weighted = false;
    std::string cloud_path;
};

int cmd_quality(const QualityArgs& args) {
    const Graph g = load_edge_list_file(args.graph_path, args.weighted).graph;
    const PointCloud cloud = load_cloud_file(args.cloud_path);
    for (const auto& [name, value] : link_quality_metrics(g, cloud))
        std::cout << name << " " << csv::format_double(value) << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"stability and quality lab for random-walk node embeddings"};
    app.require_subcommand(1);

    GenerateArgs gen;
    CLI::App* generate = app.add_subcommand("generate", "write a synthetic graph");
    generate->add_option("--model", gen.model, "graph model")
        ->required()
        ->check(CLI::IsMember({"sbm", "er"}));
    generate->add_option("--blocks", gen.blocks, "sbm block sizes")->delimiter(',');
    generate->add_option("--p-intra", gen.p_intra, "sbm within-block edge probability");
    generate->add_option("--p-inter", gen.p_inter, "sbm between-block edge probability");
    generate->add_option("--n", gen.n, "er node count");
    generate->add_option("--p", gen.p, "er edge probability");
    generate->add_option("--seed", gen.seed, "generator seed");
    generate->add_option("--out", gen.out, "output edge-list file")->required();

    RunArgs run;
    CLI::App* run_cmd = app.add_subcommand("run", "execute an experiment spec");
    run_cmd->add_option("--spec", run.spec_path, "experiment spec JSON")->required();
    run_cmd->add_option("--out", run.out_override, "override the spec's output dir");
    run_cmd->add_option("--threads", run.threads,
                        "worker threads (default: EMBSTAB_THREADS or 1)");

    ReportArgs rep;
    CLI::App* report = app.add_subcommand("report", "emit plot-ready tables");
    report->add_option("--store", rep.store, "result store directory")->required();
    report->add_option("--out", rep.out, "report output dir (default: store/report)");
    report->add_option("--pca", rep.pca, "also emit k-dim PCA coordinates per cloud")
        ->check(CLI::PositiveNumber);

    DistArgs dist;
    CLI::App* dist_cmd =
        app.add_subcommand("dist", "distance between two cloud files");
    dist_cmd->add_option("--a", dist.cloud_a, "first cloud file")->required();
    dist_cmd->add_option("--b", dist.cloud_b, "second cloud file")->required();
    dist_cmd->add_option("--metric", dist.metric, "which distance")
        ->check(CLI::IsMember({"hausdorff", "wasserstein2", "both"}));
    dist_cmd->add_flag("--normalize", dist.normalize,
                       "diameter-normalize both clouds first");

    QualityArgs qual;
    CLI::App* quality =
        app.add_subcommand("quality", "link-quality metrics for one embedding");
    quality->add_option("--graph", qual.graph_path, "edge-list file")->required();
    quality->add_flag("--weighted", qual.weighted, "respect edge weights");
    quality->add_option("--cloud", qual.cloud_path, "cloud file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (app.got_subcommand(generate)) return cmd_generate(gen);
        if (app.got_subcommand(run_cmd)) return cmd_run(run);
        if (app.got_subcommand(report)) return cmd_report(rep);
        if (app.got_subcommand(dist_cmd)) return cmd_dist(dist);
        return cmd_quality(qual);
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitCompute;
    }
}
