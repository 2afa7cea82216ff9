#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace embstab {

using NodeId = std::int32_t;

struct Edge {
    NodeId u = 0;  // u < v always
    NodeId v = 0;
    double w = 1.0;

    friend bool operator==(const Edge&, const Edge&) = default;
};

struct Neighbor {
    NodeId node = 0;
    double weight = 1.0;
};

// Immutable undirected weighted graph with contiguous node ids 0..n-1.
// Edges are stored once with u < v; the adjacency lists mirror them in both
// directions and are sorted by neighbor id. Safe to share across threads
// once constructed.
class Graph {
  public:
    Graph() = default;

    // Validates and canonicalizes: rejects self-loops, duplicate edges,
    // non-positive weights and out-of-range ids. Edge order is normalized
    // to (u < v) pairs sorted lexicographically.
    static Graph from_edges(NodeId num_nodes, std::vector<Edge> edges,
                            std::vector<std::string> labels = {});

    NodeId num_nodes() const { return num_nodes_; }
    std::size_t num_edges() const { return edges_.size(); }
    const std::vector<Edge>& edges() const { return edges_; }
    std::span<const Neighbor> neighbors(NodeId v) const;
    std::size_t degree(NodeId v) const { return neighbors(v).size(); }
    bool is_edge(NodeId u, NodeId v) const;
    const std::vector<std::string>& labels() const { return labels_; }
    std::string label(NodeId v) const;

    // Stable fingerprint of (num_nodes, canonical edge list); used by the
    // experiment store to detect graph mismatches on resume.
    std::uint64_t fingerprint() const;

    // fingerprint() as a fixed-width hex string, the graph_id used across
    // corpora, clouds and store records.
    std::string fingerprint_hex() const;

  private:
    NodeId num_nodes_ = 0;
    std::vector<Edge> edges_;
    std::vector<Neighbor> adjacency_flat_;
    std::vector<std::size_t> adjacency_offsets_;  // size num_nodes_ + 1
    std::vector<std::string> labels_;             // empty or size num_nodes_
};

struct LoadResult {
    Graph graph;
    long self_loops_dropped = 0;
    long duplicates_collapsed = 0;
};

// Parses "u v [w]" lines ('#' starts a comment, blank lines ignored).
// String ids are mapped to contiguous integers in first-appearance order.
// Duplicate edges collapse keeping the first weight; self-loops are dropped
// and counted. With weighted=false any weight token is read but forced to 1.
LoadResult load_edge_list(std::istream& in, bool weighted);
LoadResult load_edge_list_file(const std::string& path, bool weighted);

// Inverse of load_edge_list: one "u v w" line per edge, labels used when
// present. Isolated nodes are not representable in this format; the JSON
// form below preserves them.
void save_edge_list(const Graph& g, std::ostream& out);
void save_edge_list_file(const Graph& g, const std::string& path);

std::string graph_to_json(const Graph& g);
Graph graph_from_json(const std::string& text);

struct SbmSpec {
    std::vector<NodeId> block_sizes;
    double p_intra = 0.0;
    double p_inter = 0.0;
    std::uint64_t seed = 0;
};

// Planted-partition stochastic block model: every unordered intra-block
// pair is an edge with p_intra, inter-block pairs with p_inter.
// Deterministic per seed.
Graph generate_sbm(const SbmSpec& spec);

// Erdos-Renyi G(n, p), deterministic per seed.
Graph generate_er(NodeId n, double p, std::uint64_t seed);

// |E| / C(n,2). Requires at least two nodes.
double edge_density(const Graph& g);

}  // namespace embstab
