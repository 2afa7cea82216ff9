#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "embstab/errors.hpp"
#include "embstab/graph.hpp"

using namespace embstab;

namespace {
std::string repo_path(const std::string& rel) {
    return std::string(EMBSTAB_REPO_DIR) + "/" + rel;
}
}  // namespace

TEST_CASE("from_edges canonicalizes orientation and order") {
    const Graph g = Graph::from_edges(4, {{3, 1, 2.0}, {0, 2, 1.0}, {1, 0, 1.0}});
    REQUIRE(g.num_edges() == 3);
    CHECK(g.edges()[0] == Edge{0, 1, 1.0});
    CHECK(g.edges()[1] == Edge{0, 2, 1.0});
    CHECK(g.edges()[2] == Edge{1, 3, 2.0});
    CHECK(g.is_edge(1, 3));
    CHECK(g.is_edge(3, 1));
    CHECK_FALSE(g.is_edge(2, 3));
    CHECK(g.degree(0) == 2);
    CHECK(g.degree(3) == 1);
}

TEST_CASE("from_edges rejects malformed input") {
    CHECK_THROWS(Graph::from_edges(3, {{1, 1, 1.0}}));           // self-loop
    CHECK_THROWS(Graph::from_edges(3, {{0, 1, 1.0}, {1, 0, 1.0}}));  // duplicate
    CHECK_THROWS(Graph::from_edges(3, {{0, 1, 0.0}}));           // non-positive weight
    CHECK_THROWS(Graph::from_edges(3, {{0, 3, 1.0}}));           // id out of range
    CHECK_THROWS(Graph::from_edges(2, {{0, 1, 1.0}}, {"only-one-label"}));
}

TEST_CASE("neighbors are sorted and mirror both directions") {
    const Graph g = Graph::from_edges(5, {{2, 0, 1.0}, {2, 4, 1.0}, {2, 1, 1.0}});
    const auto nb = g.neighbors(2);
    REQUIRE(nb.size() == 3);
    CHECK(nb[0].node == 0);
    CHECK(nb[1].node == 1);
    CHECK(nb[2].node == 4);
    CHECK(g.neighbors(3).empty());
}

TEST_CASE("edge list parser handles comments, labels and weights") {
    std::istringstream in(
        "# a comment\n"
        "alice bob 2.0\n"
        "\n"
        "bob carol\n"
        "carol alice 1.5\n");
    const LoadResult r = load_edge_list(in, /*weighted=*/true);
    CHECK(r.graph.num_nodes() == 3);
    CHECK(r.graph.num_edges() == 3);
    CHECK(r.self_loops_dropped == 0);
    CHECK(r.duplicates_collapsed == 0);
    // ids follow first appearance: alice=0, bob=1, carol=2
    CHECK(r.graph.label(0) == "alice");
    CHECK(r.graph.label(1) == "bob");
    CHECK(r.graph.label(2) == "carol");
    CHECK(r.graph.edges()[0].w == 2.0);
}

TEST_CASE("edge list parser drops self-loops and collapses duplicates") {
    std::istringstream in(
        "a a 1\n"
        "a b 3\n"
        "b a 9\n"
        "a b 5\n");
    const LoadResult r = load_edge_list(in, /*weighted=*/true);
    CHECK(r.graph.num_edges() == 1);
    CHECK(r.self_loops_dropped == 1);
    CHECK(r.duplicates_collapsed == 2);
    CHECK(r.graph.edges()[0].w == 3.0);  // first weight wins
}

TEST_CASE("unweighted load forces unit weights") {
    std::istringstream in("a b 7.5\n");
    const LoadResult r = load_edge_list(in, /*weighted=*/false);
    CHECK(r.graph.edges()[0].w == 1.0);
}

TEST_CASE("malformed edge lines report their line number") {
    std::istringstream in("a b\nonly-one-token\n");
    try {
        load_edge_list(in, false);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
    }
}

TEST_CASE("edge list save/load round trip") {
    const Graph g = Graph::from_edges(
        4, {{0, 1, 1.0}, {1, 2, 2.5}, {2, 3, 1.0}}, {"w", "x", "y", "z"});
    std::ostringstream out;
    save_edge_list(g, out);
    std::istringstream in(out.str());
    const Graph back = load_edge_list(in, /*weighted=*/true).graph;
    CHECK(back.num_nodes() == 4);
    CHECK(back.num_edges() == 3);
    CHECK(back.edges()[1].w == 2.5);
    CHECK(back.label(3) == "z");
}

TEST_CASE("JSON round trip preserves isolated nodes and labels") {
    const Graph g =
        Graph::from_edges(5, {{0, 1, 1.0}, {1, 2, 2.0}}, {"a", "b", "c", "d", "e"});
    const Graph back = graph_from_json(graph_to_json(g));
    CHECK(back.num_nodes() == 5);  // nodes 3 and 4 are isolated but kept
    CHECK(back.num_edges() == 2);
    CHECK(back.edges() == g.edges());
    CHECK(back.labels() == g.labels());
    CHECK(back.fingerprint() == g.fingerprint());
}

TEST_CASE("fingerprint ignores edge input order but sees structure") {
    const Graph a = Graph::from_edges(4, {{0, 1, 1.0}, {2, 3, 1.0}});
    const Graph b = Graph::from_edges(4, {{3, 2, 1.0}, {1, 0, 1.0}});
    const Graph c = Graph::from_edges(4, {{0, 1, 1.0}, {1, 3, 1.0}});
    const Graph d = Graph::from_edges(4, {{0, 1, 1.0}, {2, 3, 2.0}});
    CHECK(a.fingerprint() == b.fingerprint());
    CHECK(a.fingerprint() != c.fingerprint());
    CHECK(a.fingerprint() != d.fingerprint());  // weights matter

    const std::string hex = a.fingerprint_hex();
    CHECK(hex.size() == 16);
    CHECK(hex.find_first_not_of("0123456789abcdef") == std::string::npos);
}

TEST_CASE("the bundled co-occurrence network has the canonical shape") {
    const LoadResult r = load_edge_list_file(repo_path("data/lesmis.edges"), false);
    CHECK(r.graph.num_nodes() == 77);
    CHECK(r.graph.num_edges() == 254);
    CHECK(edge_density(r.graph) == doctest::Approx(254.0 / 2926.0).epsilon(1e-12));
}

TEST_CASE("two-block generator hits its expected edge count") {
    // blocks 100+100: 9900 intra pairs at 0.2 plus 10000 inter pairs at 0.8
    // give mean 9980, sigma ~ 47. Check within 4 sigma across seeds.
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
        SbmSpec spec;
        spec.block_sizes = {100, 100};
        spec.p_intra = 0.2;
        spec.p_inter = 0.8;
        spec.seed = seed;
        const Graph g = generate_sbm(spec);
        CHECK(g.num_nodes() == 200);
        CHECK(std::abs(static_cast<double>(g.num_edges()) - 9980.0) < 4 * 47.0);
    }
}

TEST_CASE("three-block generator hits its expected edge count") {
    // blocks 100x3: 3*4950 intra at 0.8 plus 30000 inter at 0.2 -> 17880.
    SbmSpec spec;
    spec.block_sizes = {100, 100, 100};
    spec.p_intra = 0.8;
    spec.p_inter = 0.2;
    spec.seed = 7;
    const Graph g = generate_sbm(spec);
    CHECK(g.num_nodes() == 300);
    // sigma = sqrt(14850*0.8*0.2 + 30000*0.2*0.8) ~ 85
    CHECK(std::abs(static_cast<double>(g.num_edges()) - 17880.0) < 4 * 85.0);
}

TEST_CASE("block generator is deterministic per seed") {
    SbmSpec spec;
    spec.block_sizes = {30, 30};
    spec.p_intra = 0.5;
    spec.p_inter = 0.1;
    spec.seed = 11;
    const Graph a = generate_sbm(spec);
    const Graph b = generate_sbm(spec);
    CHECK(a.fingerprint() == b.fingerprint());
    spec.seed = 12;
    CHECK(generate_sbm(spec).fingerprint() != a.fingerprint());
}

TEST_CASE("uniform random graph respects edge probability extremes") {
    CHECK(generate_er(50, 0.0, 3).num_edges() == 0);
    CHECK(generate_er(50, 1.0, 3).num_edges() == 50 * 49 / 2);

    // p = 0.1 over 19900 pairs: mean 1990, sigma ~ 42.3.
    const Graph g = generate_er(200, 0.1, 5);
    CHECK(std::abs(static_cast<double>(g.num_edges()) - 1990.0) < 4 * 42.3);
    CHECK(generate_er(200, 0.1, 5).fingerprint() == g.fingerprint());
}

TEST_CASE("edge_density needs at least two nodes") {
    CHECK_THROWS(edge_density(Graph::from_edges(1, {})));
    CHECK(edge_density(Graph::from_edges(2, {{0, 1, 1.0}})) == 1.0);
}
