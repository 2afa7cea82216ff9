#include "embstab/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "embstab/csv.hpp"
#include "embstab/errors.hpp"
#include "embstab/pointcloud.hpp"
#include "embstab/rng.hpp"

namespace embstab {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// %g keeps integral reals free of a decimal point, matching the labels.
std::string g_format(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

void check_known_keys(const json& obj, const std::set<std::string>& allowed,
                      const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (allowed.find(it.key()) == allowed.end())
            throw ParseError("unknown field \"" + it.key() + "\" in " + where);
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// All store files are committed via a rename so readers and resumed runs
// never observe a half-written file.
void write_text_atomic(const fs::path& path, const std::string& content) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        out << content;
        if (!out) throw IoError("cannot write " + tmp.string());
    }
    fs::rename(tmp, path);
}

json param_set_to_json(const ParamSet& p) {
    return {{"L", p.walk_length}, {"N", p.walks_per_node}, {"d", p.dim},
            {"C", p.window},      {"p", p.return_bias},    {"q", p.inout_bias}};
}

ParamSet param_set_from_json(const json& j) {
    ParamSet p;
    p.walk_length = j.at("L").get<int>();
    p.walks_per_node = j.at("N").get<int>();
    p.dim = j.at("d").get<int>();
    p.window = j.at("C").get<int>();
    p.return_bias = j.at("p").get<double>();
    p.inout_bias = j.at("q").get<double>();
    return p;
}

json record_to_json(const RunRecord& rec) {
    return {{"graph_id", rec.graph_id},
            {"param_set", param_set_to_json(rec.params)},
            {"label", rec.params.label()},
            {"repeat", rec.repeat},
            {"seed", rec.seed},
            {"status", rec.status},
            {"error", rec.error},
            {"metrics", rec.metrics},
            {"epochs_run", rec.epochs_run},
            {"stopped_early", rec.stopped_early},
            {"final_loss", rec.final_loss},
            {"cloud", rec.cloud_file}};
}

RunRecord record_from_json(const json& j) {
    RunRecord rec;
    rec.graph_id = j.at("graph_id").get<std::string>();
    rec.params = param_set_from_json(j.at("param_set"));
    rec.repeat = j.at("repeat").get<int>();
    rec.seed = j.at("seed").get<std::uint64_t>();
    rec.status = j.at("status").get<std::string>();
    rec.error = j.value("error", std::string{});
    if (j.contains("metrics"))
        rec.metrics = j.at("metrics").get<std::map<std::string, double>>();
    rec.epochs_run = j.value("epochs_run", 0);
    rec.stopped_early = j.value("stopped_early", false);
    rec.final_loss = j.value("final_loss", 0.0);
    rec.cloud_file = j.value("cloud", std::string{});
    return rec;
}

template <typename T>
std::vector<T> canonical_values(std::vector<T> v, const char* field) {
    if (v.empty())
        throw std::invalid_argument(std::string("grid has no values for ") + field);
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

void require_known(const std::vector<std::string>& names,
                   const std::vector<std::string>& known, const char* what) {
    for (const auto& n : names)
        if (std::find(known.begin(), known.end(), n) == known.end())
            throw std::invalid_argument(std::string("unknown ") + what + ": " + n);
}

}  // namespace

std::string ParamSet::label() const {
    std::ostringstream ss;
    ss << "L" << walk_length << "-N" << walks_per_node << "-d" << dim << "-C"
       << window << "-p" << g_format(return_bias) << "-q" << g_format(inout_bias);
    return ss.str();
}

int param_distance(const ParamSet& a, const ParamSet& b) {
    int d = 0;
    d += a.walk_length != b.walk_length;
    d += a.walks_per_node != b.walks_per_node;
    d += a.dim != b.dim;
    d += a.window != b.window;
    d += a.return_bias != b.return_bias;
    d += a.inout_bias != b.inout_bias;
    return d;
}

std::vector<ParamSet> enumerate_grid(const GridSpec& grid) {
    const auto ls = canonical_values(grid.walk_lengths, "L");
    const auto ns = canonical_values(grid.walks_per_node, "N");
    const auto ds = canonical_values(grid.dims, "d");
    const auto cs = canonical_values(grid.windows, "C");
    const auto ps = canonical_values(grid.return_biases, "p");
    const auto qs = canonical_values(grid.inout_biases, "q");
    std::vector<ParamSet> out;
    out.reserve(ls.size() * ns.size() * ds.size() * cs.size() * ps.size() * qs.size());
    for (int l : ls)
        for (int n : ns)
            for (int d : ds)
                for (int c : cs)
                    for (double p : ps)
                        for (double q : qs) out.push_back({l, n, d, c, p, q});
    return out;
}

std::string GraphSource::describe() const {
    if (!path.empty()) return "file:" + path;
    std::ostringstream ss;
    if (model == "sbm") {
        ss << "sbm(blocks=";
        for (std::size_t i = 0; i < block_sizes.size(); ++i)
            ss << (i ? "+" : "") << block_sizes[i];
        ss << ",p_intra=" << g_format(p_intra) << ",p_inter=" << g_format(p_inter)
           << ",seed=" << seed << ")";
    } else {
        ss << "er(n=" << num_nodes << ",p=" << g_format(edge_prob) << ",seed=" << seed
           << ")";
    }
    return ss.str();
}

Graph resolve_graph(const GraphSource& source) {
    if (!source.path.empty())
        return load_edge_list_file(source.path, source.weighted).graph;
    if (source.model == "sbm") {
        SbmSpec sbm;
        sbm.block_sizes = source.block_sizes;
        sbm.p_intra = source.p_intra;
        sbm.p_inter = source.p_inter;
        sbm.seed = source.seed;
        return generate_sbm(sbm);
    }
    if (source.model == "er")
        return generate_er(source.num_nodes, source.edge_prob, source.seed);
    throw std::invalid_argument("graph source needs a path or a model (sbm|er)");
}

void ExperimentSpec::validate() const {
    if (output_dir.empty())
        throw std::invalid_argument("experiment spec needs an output directory");
    if (repeats < 1) throw std::invalid_argument("repeats must be >= 1");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("alpha must lie in (0,1)");
    require_known(distance_metrics, kDistanceMetrics, "distance metric");
    require_known(quality_metrics, kQualityMetrics, "quality metric");
    if (graph.path.empty() && graph.model.empty())
        throw std::invalid_argument("graph source needs a path or a model");
    enumerate_grid(grid);  // throws on empty value lists
}

ExperimentSpec load_experiment_spec(const std::string& path) {
    json j;
    try {
        j = json::parse(read_text(path));
    } catch (const json::exception& e) {
        throw ParseError(std::string("experiment spec: ") + e.what());
    }
    try {
        check_known_keys(j,
                         {"name", "graph", "grid", "repeats", "experiment_seed",
                          "train", "alpha", "comparison_mode", "distance_metrics",
                          "quality_metrics", "output"},
                         "experiment spec");
        ExperimentSpec spec;

        const json& g = j.at("graph");
        check_known_keys(g,
                         {"path", "weighted", "model", "block_sizes", "p_intra",
                          "p_inter", "n", "p", "seed"},
                         "graph");
        if (g.contains("path")) {
            spec.graph.path = g.at("path").get<std::string>();
            spec.graph.weighted = g.value("weighted", false);
        } else {
            spec.graph.model = g.at("model").get<std::string>();
            if (spec.graph.model == "sbm") {
                spec.graph.block_sizes = g.at("block_sizes").get<std::vector<NodeId>>();
                spec.graph.p_intra = g.at("p_intra").get<double>();
                spec.graph.p_inter = g.at("p_inter").get<double>();
            } else if (spec.graph.model == "er") {
                spec.graph.num_nodes = g.at("n").get<NodeId>();
                spec.graph.edge_prob = g.at("p").get<double>();
            } else {
                throw ParseError("unknown graph model \"" + spec.graph.model + "\"");
            }
            spec.graph.seed = g.value("seed", std::uint64_t{0});
        }

        if (j.contains("grid")) {
            const json& gr = j.at("grid");
            check_known_keys(gr, {"L", "N", "d", "C", "p", "q"}, "grid");
            if (gr.contains("L"))
                spec.grid.walk_lengths = gr.at("L").get<std::vector<int>>();
            if (gr.contains("N"))
                spec.grid.walks_per_node = gr.at("N").get<std::vector<int>>();
            if (gr.contains("d")) spec.grid.dims = gr.at("d").get<std::vector<int>>();
            if (gr.contains("C"))
                spec.grid.windows = gr.at("C").get<std::vector<int>>();
            if (gr.contains("p"))
                spec.grid.return_biases = gr.at("p").get<std::vector<double>>();
            if (gr.contains("q"))
                spec.grid.inout_biases = gr.at("q").get<std::vector<double>>();
        }

        spec.repeats = j.value("repeats", 10);
        spec.experiment_seed = j.value("experiment_seed", std::uint64_t{0});

        if (j.contains("train")) {
            const json& t = j.at("train");
            check_known_keys(t,
                             {"epochs_max", "learning_rate", "lr_floor",
                              "negatives_per_positive", "early_stop_patience",
                              "early_stop_min_delta_rel"},
                             "train");
            spec.train.epochs_max = t.value("epochs_max", spec.train.epochs_max);
            spec.train.learning_rate =
                t.value("learning_rate", spec.train.learning_rate);
            spec.train.lr_floor = t.value("lr_floor", spec.train.lr_floor);
            spec.train.negatives_per_positive = t.value(
                "negatives_per_positive", spec.train.negatives_per_positive);
            spec.train.early_stop_patience =
                t.value("early_stop_patience", spec.train.early_stop_patience);
            spec.train.early_stop_min_delta_rel = t.value(
                "early_stop_min_delta_rel", spec.train.early_stop_min_delta_rel);
        }

        spec.alpha = j.value("alpha", 0.05);
        if (j.contains("comparison_mode")) {
            const auto m = j.at("comparison_mode").get<std::string>();
            if (m == "paired")
                spec.comparison_mode = ComparisonMode::Paired;
            else if (m == "unpaired")
                spec.comparison_mode = ComparisonMode::Unpaired;
            else
                throw ParseError("comparison_mode must be \"paired\" or \"unpaired\"");
        }
        if (j.contains("distance_metrics"))
            spec.distance_metrics =
                j.at("distance_metrics").get<std::vector<std::string>>();
        if (j.contains("quality_metrics"))
            spec.quality_metrics =
                j.at("quality_metrics").get<std::vector<std::string>>();

        spec.output_dir = j.at("output").get<std::string>();
        spec.name = j.value("name", fs::path(spec.output_dir).filename().string());

        spec.validate();
        return spec;
    } catch (const json::exception& e) {
        throw ParseError(std::string("experiment spec: ") + e.what());
    }
}

json spec_to_json(const ExperimentSpec& spec) {
    json graph;
    if (!spec.graph.path.empty()) {
        graph = {{"path", spec.graph.path}, {"weighted", spec.graph.weighted}};
    } else if (spec.graph.model == "sbm") {
        graph = {{"model", "sbm"},
                 {"block_sizes", spec.graph.block_sizes},
                 {"p_intra", spec.graph.p_intra},
                 {"p_inter", spec.graph.p_inter},
                 {"seed", spec.graph.seed}};
    } else {
        graph = {{"model", "er"},
                 {"n", spec.graph.num_nodes},
                 {"p", spec.graph.edge_prob},
                 {"seed", spec.graph.seed}};
    }
    return {{"name", spec.name},
            {"graph", graph},
            {"grid",
             {{"L", spec.grid.walk_lengths},
              {"N", spec.grid.walks_per_node},
              {"d", spec.grid.dims},
              {"C", spec.grid.windows},
              {"p", spec.grid.return_biases},
              {"q", spec.grid.inout_biases}}},
            {"repeats", spec.repeats},
            {"experiment_seed", spec.experiment_seed},
            {"train",
             {{"epochs_max", spec.train.epochs_max},
              {"learning_rate", spec.train.learning_rate},
              {"lr_floor", spec.train.lr_floor},
              {"negatives_per_positive", spec.train.negatives_per_positive},
              {"early_stop_patience", spec.train.early_stop_patience},
              {"early_stop_min_delta_rel", spec.train.early_stop_min_delta_rel}}},
            {"alpha", spec.alpha},
            {"comparison_mode",
             spec.comparison_mode == ComparisonMode::Paired ? "paired" : "unpaired"},
            {"distance_metrics", spec.distance_metrics},
            {"quality_metrics", spec.quality_metrics}};
}

std::string cell_stem(const ParamSet& params, int repeat) {
    return params.label() + "__r" + std::to_string(repeat);
}

namespace {

void finalize_store(const ExperimentSpec& spec, const Graph& graph,
                    const std::string& graph_id,
                    const std::vector<ParamSet>& groups,
                    const std::vector<RunRecord>& records, int threads,
                    std::ostream* progress) {
    const fs::path store(spec.output_dir);

    std::ostringstream rc;
    csv::write_row(rc, {"graph_id", "param_set", "repeat", "seed", "status",
                        "epochs_run", "stopped_early", "final_loss", "cloud",
                        "error"});
    for (const auto& rec : records) {
        csv::write_row(rc, {rec.graph_id, rec.params.label(),
                            std::to_string(rec.repeat), std::to_string(rec.seed),
                            rec.status, std::to_string(rec.epochs_run),
                            rec.stopped_early ? "true" : "false",
                            rec.status == "ok" ? csv::format_double(rec.final_loss)
                                               : std::string{},
                            rec.cloud_file, rec.error});
    }
    write_text_atomic(store / "records.csv", rc.str());

    std::ostringstream qc;
    csv::write_row(qc, {"graph_id", "param_set", "repeat", "metric", "value"});
    for (const auto& rec : records) {
        if (rec.status != "ok") continue;
        for (const auto& metric : spec.quality_metrics) {
            const auto it = rec.metrics.find(metric);
            if (it == rec.metrics.end()) continue;
            csv::write_row(qc, {rec.graph_id, rec.params.label(),
                                std::to_string(rec.repeat), metric,
                                csv::format_double(it->second)});
        }
    }
    write_text_atomic(store / "quality.csv", qc.str());

    std::vector<std::string> run_groups;
    std::vector<int> run_indices;
    std::vector<PointCloud> clouds;
    for (const auto& rec : records) {
        if (rec.status != "ok") continue;
        run_groups.push_back(rec.params.label());
        run_indices.push_back(rec.repeat);
        clouds.push_back(load_cloud_file((store / rec.cloud_file).string()));
    }

    std::ostringstream dc;
    csv::write_row(dc, {"group_a", "run_a", "group_b", "run_b", "metric", "value"});
    json report;
    if (spec.repeats >= 2 && clouds.size() >= 2 && !spec.distance_metrics.empty()) {
        const DistanceMatrixSummary summary = distance_matrix(
            run_groups, run_indices, clouds, spec.distance_metrics, threads);
        for (const auto& rec : summary.records)
            csv::write_row(dc, {rec.group_a, std::to_string(rec.run_a), rec.group_b,
                                std::to_string(rec.run_b), rec.metric,
                                csv::format_double(rec.value)});
        report = stability_report_json(summary, groups, spec.distance_metrics,
                                       spec.alpha, spec.comparison_mode);
    } else {
        report = {{"degenerate", true},
                  {"reason", "stability analysis needs repeats >= 2 and at least "
                             "one distance metric"}};
        if (progress)
            *progress << "warning: no distance analysis (repeats < 2 or no "
                         "distance metrics)\n";
    }
    write_text_atomic(store / "distances.csv", dc.str());
    write_text_atomic(store / "stability_report.json", report.dump(2) + "\n");

    int ok = 0, failed = 0;
    for (const auto& rec : records) (rec.status == "ok" ? ok : failed) += 1;
    json labels = json::array();
    for (const auto& g : groups) labels.push_back(g.label());
    const json manifest = {
        {"format", "embstab-store"},
        {"version", 1},
        {"spec", spec_to_json(spec)},
        {"graph",
         {{"id", graph_id},
          {"source", spec.graph.describe()},
          {"num_nodes", graph.num_nodes()},
          {"num_edges", graph.num_edges()}}},
        {"groups", labels},
        {"cells", {{"total", records.size()}, {"ok", ok}, {"failed", failed}}},
        {"status", failed == 0 ? "complete" : "complete-with-failures"}};
    write_text_atomic(store / "manifest.json", manifest.dump(2) + "\n");
}

}  // namespace

ExperimentResult run_experiment(const ExperimentSpec& spec, int threads,
                                std::ostream* progress) {
    spec.validate();
    if (threads < 1) throw std::invalid_argument("threads must be >= 1");

    const fs::path store(spec.output_dir);
    fs::create_directories(store / "records");
    fs::create_directories(store / "clouds");
    fs::create_directories(store / "timings");

    const Graph graph = resolve_graph(spec.graph);
    const std::string graph_id = graph.fingerprint_hex();
    write_text_atomic(store / "graph.json", graph_to_json(graph));

    const std::vector<ParamSet> groups = enumerate_grid(spec.grid);
    struct Cell {
        const ParamSet* params;
        int repeat;
    };
    std::vector<Cell> cells;
    cells.reserve(groups.size() * static_cast<std::size_t>(spec.repeats));
    for (const auto& g : groups)
        for (int r = 0; r < spec.repeats; ++r) cells.push_back({&g, r});

    ExperimentResult result;
    result.store_dir = spec.output_dir;
    result.records.resize(cells.size());

    std::atomic<int> computed{0}, resumed{0}, failed{0};
    std::atomic<std::size_t> done{0};
    std::mutex log_mutex;
    auto note = [&](const std::string& line) {
        if (!progress) return;
        std::lock_guard<std::mutex> lock(log_mutex);
        *progress << line << std::endl;
    };

    auto run_cell = [&](std::size_t ci) {
        const Cell& cell = cells[ci];
        const ParamSet& ps = *cell.params;
        const std::string stem = cell_stem(ps, cell.repeat);
        const fs::path record_path = store / "records" / (stem + ".json");

        if (fs::exists(record_path)) {
            try {
                RunRecord prev = record_from_json(json::parse(read_text(record_path)));
                const bool cloud_present =
                    prev.status != "ok" || fs::exists(store / prev.cloud_file);
                if (prev.graph_id == graph_id && prev.params == ps &&
                    prev.repeat == cell.repeat && cloud_present) {
                    if (prev.status != "ok") ++failed;
                    result.records[ci] = std::move(prev);
                    ++resumed;
                    note("[" + std::to_string(++done) + "/" +
                         std::to_string(cells.size()) + "] " + stem +
                         " already complete");
                    return;
                }
            } catch (const std::exception&) {
                // unreadable or stale record: recompute the cell
            }
        }

        const auto t0 = std::chrono::steady_clock::now();
        RunRecord rec;
        rec.graph_id = graph_id;
        rec.params = ps;
        rec.repeat = cell.repeat;
        rec.seed = rng::derive_seed(spec.experiment_seed, ps.label(),
                                    static_cast<std::uint64_t>(cell.repeat));
        try {
            WalkParams wp;
            wp.walk_length = ps.walk_length;
            wp.walks_per_node = ps.walks_per_node;
            wp.return_bias = ps.return_bias;
            wp.inout_bias = ps.inout_bias;
            wp.seed = rec.seed;
            const WalkCorpus corpus = build_corpus(graph, wp, graph_id);

            EmbedParams ep = spec.train;
            ep.dim = ps.dim;
            ep.window = ps.window;
            ep.seed = rec.seed;
            ep.threads = 1;  // determinism: parallelism stays at cell level
            const TrainResult trained = train(corpus, ep);

            PointCloud cloud = normalize_diameter(trained.cloud);
            json prov = json::parse(cloud.provenance_json);
            prov["experiment"] = spec.name;
            prov["param_set"] = ps.label();
            prov["repeat"] = cell.repeat;
            prov["seed"] = rec.seed;
            cloud.provenance_json = prov.dump();

            for (const auto& [name, value] : link_quality_metrics(graph, cloud))
                if (std::find(spec.quality_metrics.begin(), spec.quality_metrics.end(),
                              name) != spec.quality_metrics.end())
                    rec.metrics[name] = value;

            rec.epochs_run = trained.loss.epochs_run();
            rec.stopped_early = trained.loss.stopped_early;
            rec.final_loss = trained.loss.epoch_mean_loss.back();
            rec.cloud_file = "clouds/" + stem + ".pcb";

            std::ostringstream blob;
            save_cloud_binary(cloud, blob);
            write_text_atomic(store / rec.cloud_file, blob.str());
        } catch (const std::exception& e) {
            rec.status = "failed";
            rec.error = e.what();
            rec.metrics.clear();
            rec.cloud_file.clear();
            ++failed;
        }
        write_text_atomic(record_path, record_to_json(rec).dump(2) + "\n");
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                .count();
        write_text_atomic(store / "timings" / (stem + ".json"),
                          json{{"seconds", seconds}}.dump() + "\n");
        note("[" + std::to_string(++done) + "/" + std::to_string(cells.size()) +
             "] " + stem + " " + rec.status +
             (rec.status == "ok"
                  ? " (" + std::to_string(rec.epochs_run) + " epochs)"
                  : ": " + rec.error));
        result.records[ci] = std::move(rec);
        ++computed;
    };

    if (threads == 1 || cells.size() < 2) {
        for (std::size_t ci = 0; ci < cells.size(); ++ci) run_cell(ci);
    } else {
        std::atomic<std::size_t> cursor{0};
        std::exception_ptr fatal;
        std::mutex fatal_mutex;
        std::vector<std::thread> pool;
        const auto workers = std::min<std::size_t>(threads, cells.size());
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                try {
                    for (;;) {
                        const std::size_t ci = cursor.fetch_add(1);
                        if (ci >= cells.size()) break;
                        run_cell(ci);
                    }
                } catch (...) {
                    std::lock_guard<std::mutex> lock(fatal_mutex);
                    if (!fatal) fatal = std::current_exception();
                }
            });
        }
        for (auto& t : pool) t.join();
        if (fatal) std::rethrow_exception(fatal);
    }

    result.cells_computed = computed;
    result.cells_resumed = resumed;
    result.cells_failed = failed;

    const bool any_ok =
        std::any_of(result.records.begin(), result.records.end(),
                    [](const RunRecord& r) { return r.status == "ok"; });
    if (!any_ok) {
        std::string detail;
        for (const auto& r : result.records)
            if (!r.error.empty()) {
                detail = "; first error: " + r.error;
                break;
            }
        throw TrainError("every cell failed" + detail);
    }

    finalize_store(spec, graph, graph_id, groups, result.records, threads, progress);
    return result;
}

nlohmann::json stability_report_json(const DistanceMatrixSummary& distances,
                                     const std::vector<ParamSet>& groups,
                                     const std::vector<std::string>& metrics,
                                     double alpha, ComparisonMode headline_mode) {
    std::vector<std::string> order;
    std::map<std::string, ParamSet> by_label;
    for (const auto& g : groups) {
        order.push_back(g.label());
        by_label[g.label()] = g;
    }

    json out;
    out["alpha"] = alpha;
    out["headline_mode"] =
        headline_mode == ComparisonMode::Paired ? "paired" : "unpaired";

    json summaries = json::array();
    for (const auto& s : distances.groups)
        summaries.push_back({{"group", s.group},
                             {"metric", s.metric},
                             {"count", s.count},
                             {"min", s.min},
                             {"q1", s.q1},
                             {"median", s.median},
                             {"q3", s.q3},
                             {"max", s.max},
                             {"variance", s.variance}});
    out["group_summaries"] = summaries;

    json comparisons = json::object();
    json headline = json::object();
    json correlations = json::object();

    for (const auto& metric : metrics) {
        std::map<std::string, int> counts;
        for (const auto& s : distances.groups)
            if (s.metric == metric) counts[s.group] = s.count;

        // Paired tests need equal-length vectors, so groups whose
        // within-pair count differs from the most common one sit out.
        int modal = 0, modal_freq = -1;
        {
            std::map<int, int> freq;
            for (const auto& [g, c] : counts) ++freq[c];
            for (const auto& [c, f] : freq)
                if (f > modal_freq || (f == modal_freq && c > modal)) {
                    modal_freq = f;
                    modal = c;
                }
        }

        json per_metric = json::object();
        for (const bool paired : {true, false}) {
            std::set<std::string> keep;
            json excluded = json::array();
            for (const auto& g : order) {
                const auto it = counts.find(g);
                const bool usable = it != counts.end() && it->second >= 1 &&
                                    (!paired || it->second == modal);
                if (usable)
                    keep.insert(g);
                else
                    excluded.push_back(g);
            }
            DistanceMatrixSummary subset;
            for (const auto& rec : distances.records)
                if (rec.metric == metric && rec.group_a == rec.group_b &&
                    keep.count(rec.group_a))
                    subset.records.push_back(rec);

            const char* key = paired ? "paired" : "unpaired";
            const ComparisonMode mode =
                paired ? ComparisonMode::Paired : ComparisonMode::Unpaired;
            if (keep.size() < 2) {
                per_metric[key] = {{"degenerate", true},
                                   {"reason", "fewer than 2 comparable groups"},
                                   {"excluded_groups", excluded}};
                if (mode == headline_mode) headline[metric] = nullptr;
                continue;
            }
            const PairwiseComparisonReport rep =
                compare_all_groups(subset, metric, alpha, mode);
            json jr = report_to_json(rep);
            jr["excluded_groups"] = excluded;
            per_metric[key] = std::move(jr);
            if (mode == headline_mode) headline[metric] = rep.fraction_significant;
        }
        comparisons[metric] = std::move(per_metric);

        std::map<std::pair<std::string, std::string>, std::vector<double>> cross;
        for (const auto& rec : distances.records)
            if (rec.metric == metric && rec.group_a != rec.group_b)
                cross[{rec.group_a, rec.group_b}].push_back(rec.value);
        std::vector<double> hamming, med;
        for (std::size_t i = 0; i < order.size(); ++i) {
            for (std::size_t j = i + 1; j < order.size(); ++j) {
                auto it = cross.find({order[i], order[j]});
                if (it == cross.end()) it = cross.find({order[j], order[i]});
                if (it == cross.end() || it->second.empty()) continue;
                std::vector<double> v = it->second;
                std::sort(v.begin(), v.end());
                hamming.push_back(
                    param_distance(by_label[order[i]], by_label[order[j]]));
                med.push_back(quantile_sorted(v, 0.5));
            }
        }
        json corr;
        corr["n_pairs"] = hamming.size();
        if (hamming.size() >= 2) {
            const double rho = spearman(hamming, med);
            if (std::isnan(rho)) {
                corr["value"] = nullptr;
                corr["degenerate"] = true;
            } else {
                corr["value"] = rho;
                corr["degenerate"] = false;
            }
        } else {
            corr["value"] = nullptr;
            corr["degenerate"] = true;
        }
        correlations[metric] = std::move(corr);
    }

    out["comparisons"] = std::move(comparisons);
    out["fraction_significant"] = std::move(headline);
    out["param_distance_correlation"] = std::move(correlations);
    return out;
}

StoreAudit audit_store_diameters(const std::string& store_dir, double tolerance) {
    const fs::path dir = fs::path(store_dir) / "clouds";
    if (!fs::exists(dir))
        throw IoError("store has no clouds directory: " + store_dir);
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".pcb")
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());

    StoreAudit audit;
    for (const auto& f : files) {
        const PointCloud cloud = load_cloud_file(f.string());
        const double err = std::abs(cloud_diameter(cloud.points) - 1.0);
        ++audit.clouds_checked;
        audit.worst_error = std::max(audit.worst_error, err);
        if (err > tolerance) audit.offenders.push_back(f.filename().string());
    }
    return audit;
}

}  // namespace embstab
