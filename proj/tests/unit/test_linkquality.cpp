#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "embstab/graph.hpp"
#include "embstab/linkquality.hpp"
#include "embstab/pointcloud.hpp"
#include "embstab/rng.hpp"

using namespace embstab;

namespace {

std::string repo_path(const std::string& rel) {
    return std::string(EMBSTAB_REPO_DIR) + "/" + rel;
}

PointCloud make_cloud(const Eigen::MatrixXd& points, const std::string& id = "") {
    PointCloud c;
    c.points = points;
    c.graph_id = id;
    return c;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Embedding whose pairwise scores are exactly the adjacency indicator:
// one column per edge with 1.0 at both endpoints, so x_i . x_j sums a
// single 1*1 product iff {i,j} is an edge.
PointCloud indicator_cloud(const Graph& g) {
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(
        g.num_nodes(), std::max<Eigen::Index>(1, g.num_edges()));
    Eigen::Index col = 0;
    for (const Edge& e : g.edges()) {
        x(e.u, col) = 1.0;
        x(e.v, col) = 1.0;
        ++col;
    }
    return make_cloud(x, g.fingerprint_hex());
}

}  // namespace

TEST_CASE("pair_index enumerates unordered pairs densely") {
    const NodeId n = 10;
    CHECK(num_pairs(n) == 45);
    std::set<std::size_t> seen;
    for (NodeId i = 0; i < n; ++i)
        for (NodeId j = i + 1; j < n; ++j) {
            const std::size_t k = pair_index(i, j, n);
            CHECK(k < 45);
            seen.insert(k);
        }
    CHECK(seen.size() == 45);
    CHECK(pair_index(0, 1, n) == 0);
    CHECK(pair_index(8, 9, n) == 44);
    CHECK_THROWS(pair_index(3, 3, n));
    CHECK_THROWS(pair_index(5, 2, n));
    CHECK_THROWS(pair_index(0, 10, n));
}

TEST_CASE("observed distribution puts uniform mass on edges") {
    const Graph g = Graph::from_edges(4, {{0, 1, 1.0}, {2, 3, 1.0}});
    const LinkDistribution d = observed_link_distribution(g);
    REQUIRE(d.values.size() == 6);
    CHECK(d.values[pair_index(0, 1, 4)] == doctest::Approx(0.5));
    CHECK(d.values[pair_index(2, 3, 4)] == doctest::Approx(0.5));
    CHECK(d.values[pair_index(0, 2, 4)] == 0.0);
    CHECK(d.graph_id == g.fingerprint_hex());
    CHECK_THROWS(observed_link_distribution(Graph::from_edges(3, {})));
}

TEST_CASE("observed distribution of the bundled network") {
    const Graph g =
        load_edge_list_file(repo_path("data/lesmis.edges"), false).graph;
    const LinkDistribution d = observed_link_distribution(g);
    REQUIRE(d.values.size() == 2926);
    int nonzero = 0;
    double sum = 0.0;
    for (double v : d.values) {
        if (v != 0.0) {
            ++nonzero;
            CHECK(v == doctest::Approx(1.0 / 254).epsilon(1e-12));
        }
        sum += v;
    }
    CHECK(nonzero == 254);
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("empirical distribution is the normalized pairwise sigmoid") {
    // 1-d rows (0, t, ln3/t) give inner products (0, 0, ln3):
    // sigmoids (1/2, 1/2, 3/4) normalize to (2/7, 2/7, 3/7).
    const double t = 2.0;
    Eigen::MatrixXd x(3, 1);
    x << 0.0, t, std::log(3.0) / t;
    const LinkDistribution d = empirical_link_distribution(make_cloud(x));
    REQUIRE(d.values.size() == 3);
    CHECK(d.values[0] == doctest::Approx(2.0 / 7));
    CHECK(d.values[1] == doctest::Approx(2.0 / 7));
    CHECK(d.values[2] == doctest::Approx(3.0 / 7));

    CHECK_THROWS(empirical_link_distribution(make_cloud(Eigen::MatrixXd(1, 3))));
}

TEST_CASE("empirical distribution always sums to one") {
    rng::Stream stream(77, rng::Purpose::Tests);
    Eigen::MatrixXd x(9, 4);
    for (int i = 0; i < 9; ++i)
        for (int j = 0; j < 4; ++j) x(i, j) = stream.next_normal();
    const LinkDistribution d = empirical_link_distribution(make_cloud(x));
    REQUIRE(d.values.size() == 36);
    double sum = 0.0;
    for (double v : d.values) {
        CHECK(v >= 0.0);
        sum += v;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("distribution distances match hand calculations") {
    LinkDistribution p, q;
    p.values = {1.0, 0.0};
    q.values = {0.25, 0.75};
    CHECK(distribution_distance(p, q, DistributionDistanceMode::Discrete) ==
          doctest::Approx(0.75));
    // sorted profiles (0,1) vs (0.25,0.75): mean gap = 0.25
    CHECK(distribution_distance(p, q, DistributionDistanceMode::Sorted1d) ==
          doctest::Approx(0.25));

    CHECK(distribution_distance(p, p, DistributionDistanceMode::Discrete) == 0.0);

    LinkDistribution r;
    r.values = {1.0, 0.0, 0.0};
    CHECK_THROWS(distribution_distance(p, r));
}

TEST_CASE("distribution distance guards against mixing graphs") {
    LinkDistribution p, q;
    p.values = q.values = {0.5, 0.5};
    p.graph_id = "aaa";
    q.graph_id = "bbb";
    CHECK_THROWS(distribution_distance(p, q));
    q.graph_id = "";  // unknown provenance is allowed
    CHECK_NOTHROW(distribution_distance(p, q));
}

TEST_CASE("score sweep produces consistent contingency tables") {
    rng::Stream stream(78, rng::Purpose::Tests);
    const Graph g = generate_er(12, 0.4, 3);
    Eigen::MatrixXd x(12, 3);
    for (int i = 0; i < 12; ++i)
        for (int j = 0; j < 3; ++j) x(i, j) = stream.next_normal();
    const PointCloud cloud = make_cloud(x, g.fingerprint_hex());

    const ScoreSweep sweep = score_sweep(g, cloud);
    const long E = static_cast<long>(g.num_edges());
    const long NE = static_cast<long>(num_pairs(12)) - E;
    CHECK(sweep.num_edges == E);
    CHECK(sweep.num_non_edges == NE);
    REQUIRE(!sweep.thresholds.empty());

    for (std::size_t k = 0; k < sweep.thresholds.size(); ++k) {
        CHECK(sweep.tp[k] + sweep.fn[k] == E);
        CHECK(sweep.fp[k] + sweep.tn[k] == NE);
        if (k > 0) {
            CHECK(sweep.thresholds[k] < sweep.thresholds[k - 1]);
            CHECK(sweep.tp[k] >= sweep.tp[k - 1]);
            CHECK(sweep.fp[k] >= sweep.fp[k - 1]);
        }
        // brute-force the same threshold
        long tp = 0, fp = 0;
        for (NodeId i = 0; i < 12; ++i)
            for (NodeId j = i + 1; j < 12; ++j) {
                const double s = x.row(i).dot(x.row(j));
                if (s >= sweep.thresholds[k]) (g.is_edge(i, j) ? tp : fp) += 1;
            }
        CHECK(sweep.tp[k] == tp);
        CHECK(sweep.fp[k] == fp);
    }
    // last threshold admits every pair
    CHECK(sweep.tp.back() == E);
    CHECK(sweep.fp.back() == NE);
}

TEST_CASE("tied scores enter the sweep together") {
    // all-equal embedding rows make every pairwise score identical
    const Graph g = Graph::from_edges(4, {{0, 1, 1.0}, {1, 2, 1.0}});
    Eigen::MatrixXd x = Eigen::MatrixXd::Ones(4, 2);
    const ScoreSweep sweep = score_sweep(g, make_cloud(x, g.fingerprint_hex()));
    REQUIRE(sweep.thresholds.size() == 1);
    CHECK(sweep.tp[0] == 2);
    CHECK(sweep.fp[0] == 4);
}

TEST_CASE("constant scores give chance-level areas") {
    const Graph g =
        load_edge_list_file(repo_path("data/lesmis.edges"), false).graph;
    const PointCloud flat =
        make_cloud(Eigen::MatrixXd::Zero(g.num_nodes(), 4), g.fingerprint_hex());
    const ScoreSweep sweep = score_sweep(g, flat);
    CHECK(auprc(sweep) == doctest::Approx(254.0 / 2926.0).epsilon(1e-12));
    CHECK(auroc(sweep) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("adjacency-indicator scores are a perfect classifier") {
    for (const Graph& g :
         {Graph::from_edges(4, {{0, 1, 1.0}, {1, 2, 1.0}, {2, 3, 1.0}}),
          generate_er(15, 0.3, 2)}) {
        const ScoreSweep sweep = score_sweep(g, indicator_cloud(g));
        CHECK(auprc(sweep) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(auroc(sweep) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("auroc equals the pairwise comparison probability") {
    // independent oracle: P(edge score > non-edge score) + P(tie)/2
    rng::Stream stream(79, rng::Purpose::Tests);
    for (int trial = 0; trial < 10; ++trial) {
        const Graph g = generate_er(10, 0.35, 100 + trial);
        if (g.num_edges() == 0 || g.num_edges() == num_pairs(10)) continue;
        Eigen::MatrixXd x(10, 2);
        for (int i = 0; i < 10; ++i)
            for (int j = 0; j < 2; ++j) x(i, j) = stream.next_normal();
        const PointCloud cloud = make_cloud(x, g.fingerprint_hex());

        std::vector<double> edge_scores, non_edge_scores;
        for (NodeId i = 0; i < 10; ++i)
            for (NodeId j = i + 1; j < 10; ++j) {
                const double s = x.row(i).dot(x.row(j));
                (g.is_edge(i, j) ? edge_scores : non_edge_scores).push_back(s);
            }
        double wins = 0.0;
        for (double e : edge_scores)
            for (double ne : non_edge_scores)
                wins += e > ne ? 1.0 : (e == ne ? 0.5 : 0.0);
        const double expected =
            wins / (static_cast<double>(edge_scores.size()) *
                    static_cast<double>(non_edge_scores.size()));

        CHECK(auroc(score_sweep(g, cloud)) ==
              doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("areas are invariant under monotone score transforms") {
    rng::Stream stream(80, rng::Purpose::Tests);
    const Graph g = generate_er(12, 0.3, 9);
    Eigen::MatrixXd x(12, 3);
    for (int i = 0; i < 12; ++i)
        for (int j = 0; j < 3; ++j) x(i, j) = stream.next_normal();
    const PointCloud cloud = make_cloud(x, g.fingerprint_hex());
    // scaling by a positive constant transforms all scores monotonically
    const PointCloud scaled = make_cloud(2.5 * x.eval(), g.fingerprint_hex());

    CHECK(auprc(score_sweep(g, cloud)) ==
          doctest::Approx(auprc(score_sweep(g, scaled))).epsilon(1e-12));
    CHECK(auroc(score_sweep(g, cloud)) ==
          doctest::Approx(auroc(score_sweep(g, scaled))).epsilon(1e-12));
}

TEST_CASE("degenerate classes are rejected") {
    // complete graph: no non-edges, so the ROC x-axis is undefined
    const Graph complete =
        Graph::from_edges(3, {{0, 1, 1.0}, {0, 2, 1.0}, {1, 2, 1.0}});
    const ScoreSweep sweep =
        score_sweep(complete, indicator_cloud(complete));
    CHECK_NOTHROW(auprc(sweep));
    CHECK_THROWS(auroc(sweep));

    // score_sweep itself wants a real graph-sized cloud
    const Graph g = Graph::from_edges(4, {{0, 1, 1.0}});
    CHECK_THROWS(score_sweep(g, make_cloud(Eigen::MatrixXd::Zero(3, 2))));
}

TEST_CASE("link quality bundle reports all four metrics") {
    const Graph g = generate_er(10, 0.4, 4);
    rng::Stream stream(81, rng::Purpose::Tests);
    Eigen::MatrixXd x(10, 3);
    for (int i = 0; i < 10; ++i)
        for (int j = 0; j < 3; ++j) x(i, j) = stream.next_normal();
    const auto metrics =
        link_quality_metrics(g, make_cloud(x, g.fingerprint_hex()));
    REQUIRE(metrics.size() == 4);
    CHECK(metrics[0].first == "w_link_discrete");
    CHECK(metrics[1].first == "w_link_sorted1d");
    CHECK(metrics[2].first == "auprc");
    CHECK(metrics[3].first == "auroc");

    // the discrete distance is a total-variation style quantity in [0,1]
    CHECK(metrics[0].second >= 0.0);
    CHECK(metrics[0].second <= 1.0);
    CHECK(metrics[2].second >= 0.0);
    CHECK(metrics[2].second <= 1.0);
    CHECK(metrics[3].second >= 0.0);
    CHECK(metrics[3].second <= 1.0);

    // oracle for the discrete mode: half the L1 gap between distributions
    const LinkDistribution pg = observed_link_distribution(g);
    const LinkDistribution px =
        empirical_link_distribution(make_cloud(x, g.fingerprint_hex()));
    double l1 = 0.0;
    for (std::size_t k = 0; k < pg.values.size(); ++k)
        l1 += std::abs(pg.values[k] - px.values[k]);
    CHECK(metrics[0].second == doctest::Approx(0.5 * l1).epsilon(1e-12));
}
