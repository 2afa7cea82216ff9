// Python bindings for the embedding-stability core. The surface mirrors the
// C++ API one to one; heavy calls (training, experiment runs) release the GIL.

#include <cstdint>
#include <string>
#include <tuple>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "embstab/assignment.hpp"
#include "embstab/errors.hpp"
#include "embstab/experiment.hpp"
#include "embstab/graph.hpp"
#include "embstab/linkquality.hpp"
#include "embstab/metrics.hpp"
#include "embstab/pointcloud.hpp"
#include "embstab/sgns.hpp"
#include "embstab/stats.hpp"
#include "embstab/walks.hpp"

namespace py = pybind11;
using namespace embstab;

namespace {

DistributionDistanceMode parse_mode(const std::string& mode) {
    if (mode == "discrete") return DistributionDistanceMode::Discrete;
    if (mode == "sorted-1d") return DistributionDistanceMode::Sorted1d;
    throw std::invalid_argument("unknown distribution distance mode: " + mode);
}

py::dict test_result_dict(const TestResult& r) {
    py::dict d;
    d["statistic"] = r.statistic;
    d["p_value"] = r.p_value;
    d["n_effective"] = r.n_effective;
    d["method"] = r.method;
    d["degenerate"] = r.degenerate;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Stability and quality laboratory for random-walk node embeddings";
    m.attr("__version__") = "0.1.0";

    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
    py::register_exception<IoError>(m, "IoError", PyExc_OSError);
    py::register_exception<TrainError>(m, "TrainError", PyExc_RuntimeError);

    py::class_<Graph>(m, "Graph")
        .def_property_readonly("num_nodes", &Graph::num_nodes)
        .def_property_readonly("num_edges", &Graph::num_edges)
        .def_property_readonly("labels", &Graph::labels)
        .def("edges",
             [](const Graph& g) {
                 std::vector<std::tuple<int, int, double>> out;
                 out.reserve(g.num_edges());
                 for (const Edge& e : g.edges()) out.emplace_back(e.u, e.v, e.w);
                 return out;
             })
        .def("degree", [](const Graph& g, NodeId v) { return g.degree(v); },
             py::arg("node"))
        .def("neighbors",
             [](const Graph& g, NodeId v) {
                 std::vector<std::tuple<int, double>> out;
                 for (const Neighbor& nb : g.neighbors(v))
                     out.emplace_back(nb.node, nb.weight);
                 return out;
             },
             py::arg("node"))
        .def("is_edge", &Graph::is_edge, py::arg("u"), py::arg("v"))
        .def("fingerprint", &Graph::fingerprint_hex)
        .def("density", [](const Graph& g) { return edge_density(g); })
        .def("__repr__", [](const Graph& g) {
            return "<Graph nodes=" + std::to_string(g.num_nodes()) +
                   " edges=" + std::to_string(g.num_edges()) + ">";
        });

    m.def(
        "load_graph",
        [](const std::string& path, bool weighted) {
            return load_edge_list_file(path, weighted).graph;
        },
        py::arg("path"), py::arg("weighted") = false,
        "Read an edge-list file (u v [w] per line, # comments).");

    m.def(
        "graph_from_edges",
        [](NodeId num_nodes, py::iterable edges, std::vector<std::string> labels) {
            std::vector<Edge> es;
            for (py::handle h : edges) {
                auto t = h.cast<py::sequence>();
                Edge e;
                e.u = t[0].cast<NodeId>();
                e.v = t[1].cast<NodeId>();
                e.w = py::len(t) > 2 ? t[2].cast<double>() : 1.0;
                es.push_back(e);
            }
            return Graph::from_edges(num_nodes, std::move(es), std::move(labels));
        },
        py::arg("num_nodes"), py::arg("edges"),
        py::arg("labels") = std::vector<std::string>{});

    m.def(
        "save_graph",
        [](const Graph& g, const std::string& path) { save_edge_list_file(g, path); },
        py::arg("graph"), py::arg("path"));

    m.def(
        "generate_sbm",
        [](std::vector<NodeId> block_sizes, double p_intra, double p_inter,
           std::uint64_t seed) {
            SbmSpec spec;
            spec.block_sizes = std::move(block_sizes);
            spec.p_intra = p_intra;
            spec.p_inter = p_inter;
            spec.seed = seed;
            return generate_sbm(spec);
        },
        py::arg("block_sizes"), py::arg("p_intra"), py::arg("p_inter"),
        py::arg("seed") = 0);

    m.def("generate_er", &generate_er, py::arg("num_nodes"), py::arg("edge_prob"),
          py::arg("seed") = 0);

    py::class_<WalkCorpus>(m, "WalkCorpus")
        .def_property_readonly("walks",
                               [](const WalkCorpus& c) { return c.walks; })
        .def_property_readonly("num_nodes",
                               [](const WalkCorpus& c) { return c.num_nodes; })
        .def_property_readonly("graph_id",
                               [](const WalkCorpus& c) { return c.graph_id; })
        .def("__len__", [](const WalkCorpus& c) { return c.walks.size(); });

    m.def(
        "build_walks",
        [](const Graph& g, int walk_length, int walks_per_node, double return_bias,
           double inout_bias, std::uint64_t seed) {
            WalkParams wp;
            wp.walk_length = walk_length;
            wp.walks_per_node = walks_per_node;
            wp.return_bias = return_bias;
            wp.inout_bias = inout_bias;
            wp.seed = seed;
            WalkCorpus corpus;
            {
                py::gil_scoped_release release;
                corpus = build_corpus(g, wp, g.fingerprint_hex());
            }
            return corpus;
        },
        py::arg("graph"), py::arg("walk_length") = 10,
        py::arg("walks_per_node") = 10, py::arg("return_bias") = 1.0,
        py::arg("inout_bias") = 1.0, py::arg("seed") = 0,
        "Second-order biased walks from every node; return_bias is the "
        "backtrack penalty, inout_bias the exploration penalty.");

    py::class_<PointCloud>(m, "PointCloud")
        .def(py::init([](const Eigen::MatrixXd& points, const std::string& graph_id) {
                 PointCloud c;
                 c.points = points;
                 c.graph_id = graph_id;
                 return c;
             }),
             py::arg("points"), py::arg("graph_id") = std::string())
        .def_property_readonly("points",
                               [](const PointCloud& c) { return c.points; })
        .def_property_readonly("graph_id",
                               [](const PointCloud& c) { return c.graph_id; })
        .def_property_readonly("provenance",
                               [](const PointCloud& c) { return c.provenance_json; })
        .def_property_readonly("dim", &PointCloud::dim)
        .def("__len__", [](const PointCloud& c) { return c.size(); });
    py::implicitly_convertible<Eigen::MatrixXd, PointCloud>();

    m.def(
        "train_embedding",
        [](const WalkCorpus& corpus, int dim, int window, int epochs_max,
           double learning_rate, double lr_floor, int negatives_per_positive,
           int early_stop_patience, double early_stop_min_delta_rel,
           std::uint64_t seed, int threads) {
            EmbedParams ep;
            ep.dim = dim;
            ep.window = window;
            ep.epochs_max = epochs_max;
            ep.learning_rate = learning_rate;
            ep.lr_floor = lr_floor;
            ep.negatives_per_positive = negatives_per_positive;
            ep.early_stop_patience = early_stop_patience;
            ep.early_stop_min_delta_rel = early_stop_min_delta_rel;
            ep.seed = seed;
            ep.threads = threads;
            TrainResult r;
            {
                py::gil_scoped_release release;
                r = train(corpus, ep);
            }
            return py::make_tuple(r.cloud, r.loss.epoch_mean_loss,
                                  r.loss.stopped_early);
        },
        py::arg("corpus"), py::arg("dim") = 32, py::arg("window") = 5,
        py::arg("epochs_max") = 5, py::arg("learning_rate") = 0.025,
        py::arg("lr_floor") = 1e-4, py::arg("negatives_per_positive") = 5,
        py::arg("early_stop_patience") = 2,
        py::arg("early_stop_min_delta_rel") = 1e-4, py::arg("seed") = 0,
        py::arg("threads") = 1,
        "Skip-gram training on a walk corpus. Returns (cloud, per-epoch mean "
        "loss, stopped_early). Deterministic per seed when threads == 1.");

    m.def("save_cloud",
          [](const PointCloud& c, const std::string& path, bool binary) {
              save_cloud_file(c, path, binary);
          },
          py::arg("cloud"), py::arg("path"), py::arg("binary") = true);
    m.def("load_cloud", &load_cloud_file, py::arg("path"));

    m.def("cloud_diameter", &cloud_diameter, py::arg("points"));
    m.def("normalize_diameter", &normalize_diameter, py::arg("cloud"),
          "Scale about the origin so the max pairwise distance is 1.");
    m.def("hausdorff", &hausdorff, py::arg("a"), py::arg("b"));
    m.def("wasserstein2", &wasserstein2, py::arg("a"), py::arg("b"),
          "Exact 2-Wasserstein distance between equal-size clouds "
          "(optimal bijection on squared Euclidean cost).");
    m.def(
        "wasserstein2_matching",
        [](const PointCloud& a, const PointCloud& b) {
            Wasserstein2Result r = wasserstein2_matching(a, b);
            return py::make_tuple(r.distance, r.matching);
        },
        py::arg("a"), py::arg("b"));
    m.def(
        "solve_assignment",
        [](const Eigen::MatrixXd& cost) {
            Assignment a = solve_assignment(cost);
            return py::make_tuple(a.col_of_row, a.cost);
        },
        py::arg("cost"),
        "Minimum-cost perfect matching on a square cost matrix; returns "
        "(column_of_row, total_cost).");
    m.def(
        "procrustes_align",
        [](const PointCloud& x, const PointCloud& y, bool allow_reflection) {
            ProcrustesResult r = procrustes_align(x, y, allow_reflection);
            return py::make_tuple(r.aligned, r.residual);
        },
        py::arg("x"), py::arg("y"), py::arg("allow_reflection") = false);
    m.def("pool_embeddings", &pool_embeddings, py::arg("clouds"),
          py::arg("align_first") = true);
    m.def(
        "project_pca",
        [](const PointCloud& x, int k) {
            PcaResult r = project_pca(x, k);
            return py::make_tuple(r.projected, r.explained_variance_ratio);
        },
        py::arg("cloud"), py::arg("k"));

    py::class_<LinkDistribution>(m, "LinkDistribution")
        .def(py::init([](std::vector<double> values, const std::string& graph_id) {
                 LinkDistribution d;
                 d.values = std::move(values);
                 d.graph_id = graph_id;
                 return d;
             }),
             py::arg("values"), py::arg("graph_id") = std::string())
        .def_property_readonly("values",
                               [](const LinkDistribution& d) { return d.values; })
        .def_property_readonly("graph_id",
                               [](const LinkDistribution& d) { return d.graph_id; })
        .def("__len__", [](const LinkDistribution& d) { return d.values.size(); });

    m.def("pair_index", &pair_index, py::arg("i"), py::arg("j"), py::arg("n"),
          "Dense index of the unordered pair {i, j} among C(n,2) pairs.");
    m.def("num_pairs", &num_pairs, py::arg("n"));
    m.def("observed_link_distribution", &observed_link_distribution,
          py::arg("graph"));
    m.def("empirical_link_distribution", &empirical_link_distribution,
          py::arg("cloud"));
    m.def(
        "distribution_distance",
        [](const LinkDistribution& p, const LinkDistribution& q,
           const std::string& mode) {
            return distribution_distance(p, q, parse_mode(mode));
        },
        py::arg("p"), py::arg("q"), py::arg("mode") = "discrete",
        "mode 'discrete' (total-variation style) or 'sorted-1d'.");

    py::class_<ScoreSweep>(m, "ScoreSweep")
        .def_property_readonly("thresholds",
                               [](const ScoreSweep& s) { return s.thresholds; })
        .def_property_readonly("tp", [](const ScoreSweep& s) { return s.tp; })
        .def_property_readonly("fp", [](const ScoreSweep& s) { return s.fp; })
        .def_property_readonly("tn", [](const ScoreSweep& s) { return s.tn; })
        .def_property_readonly("fn", [](const ScoreSweep& s) { return s.fn; })
        .def_property_readonly("num_edges",
                               [](const ScoreSweep& s) { return s.num_edges; })
        .def_property_readonly("num_non_edges",
                               [](const ScoreSweep& s) { return s.num_non_edges; });

    m.def("score_sweep", &score_sweep, py::arg("graph"), py::arg("cloud"));
    m.def("auprc", &auprc, py::arg("sweep"));
    m.def("auroc", &auroc, py::arg("sweep"));
    m.def(
        "link_quality",
        [](const Graph& g, const PointCloud& x) {
            py::dict d;
            for (const auto& [name, value] : link_quality_metrics(g, x))
                d[py::str(name)] = value;
            return d;
        },
        py::arg("graph"), py::arg("cloud"),
        "All four link-reconstruction quality metrics as a dict.");

    m.def(
        "wilcoxon_signed_rank",
        [](const std::vector<double>& a, const std::vector<double>& b) {
            return test_result_dict(wilcoxon_signed_rank(a, b));
        },
        py::arg("a"), py::arg("b"),
        "Paired two-sided signed-rank test; exact null for small samples.");
    m.def(
        "mann_whitney_u",
        [](const std::vector<double>& a, const std::vector<double>& b) {
            return test_result_dict(mann_whitney_u(a, b));
        },
        py::arg("a"), py::arg("b"),
        "Unpaired two-sided rank-sum test; exact null when tie-free and small.");
    m.def("bonferroni", &bonferroni, py::arg("p_values"), py::arg("alpha") = 0.05);
    m.def("spearman", &spearman, py::arg("x"), py::arg("y"));

    m.def(
        "run_experiment",
        [](const std::string& spec_path, int threads, const std::string& output_dir) {
            ExperimentSpec spec = load_experiment_spec(spec_path);
            if (!output_dir.empty()) spec.output_dir = output_dir;
            ExperimentResult res;
            {
                py::gil_scoped_release release;
                res = run_experiment(spec, threads, nullptr);
            }
            py::dict d;
            d["store_dir"] = res.store_dir;
            d["cells_computed"] = res.cells_computed;
            d["cells_resumed"] = res.cells_resumed;
            d["cells_failed"] = res.cells_failed;
            d["num_records"] = res.records.size();
            return d;
        },
        py::arg("spec_path"), py::arg("threads") = 1,
        py::arg("output_dir") = std::string(),
        "Run (or resume) every cell of an experiment spec and rebuild the "
        "store's derived files. Returns run counters.");
}
