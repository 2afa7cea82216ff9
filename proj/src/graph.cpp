#include "embstab/graph.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "embstab/csv.hpp"
#include "embstab/errors.hpp"
#include "embstab/rng.hpp"

namespace embstab {

namespace {

bool parse_weight(const std::string& token, double& out) {
    const char* first = token.data();
    const char* last = first + token.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last;
}

Graph generate_pairwise(NodeId n, std::uint64_t seed, std::string_view salt,
                        auto&& pair_prob) {
    if (n < 1) throw std::invalid_argument("graph needs at least one node");
    rng::Stream stream(seed, rng::Purpose::GraphGen, rng::fnv1a64(salt));
    std::vector<Edge> edges;
    for (NodeId i = 0; i < n; ++i) {
        for (NodeId j = i + 1; j < n; ++j) {
            const double p = pair_prob(i, j);
            if (stream.next_double() < p) edges.push_back({i, j, 1.0});
        }
    }
    return Graph::from_edges(n, std::move(edges));
}

}  // namespace

Graph Graph::from_edges(NodeId num_nodes, std::vector<Edge> edges,
                        std::vector<std::string> labels) {
    if (num_nodes < 0) throw std::invalid_argument("negative node count");
    if (!labels.empty() && static_cast<NodeId>(labels.size()) != num_nodes)
        throw std::invalid_argument("label count does not match node count");

    for (Edge& e : edges) {
        if (e.u == e.v) throw std::invalid_argument("self-loop not allowed");
        if (e.u < 0 || e.v < 0 || e.u >= num_nodes || e.v >= num_nodes)
            throw std::invalid_argument("edge endpoint out of range");
        if (!(e.w > 0.0)) throw std::invalid_argument("edge weight must be positive");
        if (e.u > e.v) std::swap(e.u, e.v);
    }
    std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
        return std::tie(a.u, a.v) < std::tie(b.u, b.v);
    });
    for (std::size_t i = 1; i < edges.size(); ++i) {
        if (edges[i - 1].u == edges[i].u && edges[i - 1].v == edges[i].v)
            throw std::invalid_argument("duplicate edge");
    }

    Graph g;
    g.num_nodes_ = num_nodes;
    g.edges_ = std::move(edges);
    g.labels_ = std::move(labels);

    std::vector<std::size_t> degrees(static_cast<std::size_t>(num_nodes) + 1, 0);
    for (const Edge& e : g.edges_) {
        ++degrees[static_cast<std::size_t>(e.u) + 1];
        ++degrees[static_cast<std::size_t>(e.v) + 1];
    }
    g.adjacency_offsets_.resize(static_cast<std::size_t>(num_nodes) + 1, 0);
    for (NodeId v = 0; v < num_nodes; ++v)
        g.adjacency_offsets_[v + 1] = g.adjacency_offsets_[v] + degrees[v + 1];
    g.adjacency_flat_.resize(g.adjacency_offsets_.back());
    std::vector<std::size_t> cursor(g.adjacency_offsets_.begin(),
                                    g.adjacency_offsets_.end() - 1);
    for (const Edge& e : g.edges_) {
        g.adjacency_flat_[cursor[e.u]++] = {e.v, e.w};
        g.adjacency_flat_[cursor[e.v]++] = {e.u, e.w};
    }
    for (NodeId v = 0; v < num_nodes; ++v) {
        auto begin = g.adjacency_flat_.begin() + g.adjacency_offsets_[v];
        auto end = g.adjacency_flat_.begin() + g.adjacency_offsets_[v + 1];
        std::sort(begin, end, [](const Neighbor& a, const Neighbor& b) {
            return a.node < b.node;
        });
    }
    return g;
}

std::span<const Neighbor> Graph::neighbors(NodeId v) const {
    if (v < 0 || v >= num_nodes_) throw std::out_of_range("node id out of range");
    return {adjacency_flat_.data() + adjacency_offsets_[v],
            adjacency_offsets_[v + 1] - adjacency_offsets_[v]};
}

bool Graph::is_edge(NodeId u, NodeId v) const {
    auto span = neighbors(u);
    auto it = std::lower_bound(span.begin(), span.end(), v,
                               [](const Neighbor& n, NodeId id) { return n.node < id; });
    return it != span.end() && it->node == v;
}

std::string Graph::label(NodeId v) const {
    if (v < 0 || v >= num_nodes_) throw std::out_of_range("node id out of range");
    return labels_.empty() ? std::to_string(v) : labels_[v];
}

std::uint64_t Graph::fingerprint() const {
    std::uint64_t h = rng::fnv1a64("embstab-graph");
    auto mix = [&h](std::uint64_t x) {
        h ^= x + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    };
    mix(static_cast<std::uint64_t>(num_nodes_));
    for (const Edge& e : edges_) {
        mix(static_cast<std::uint64_t>(e.u));
        mix(static_cast<std::uint64_t>(e.v));
        std::uint64_t bits;
        static_assert(sizeof(bits) == sizeof(e.w));
        std::memcpy(&bits, &e.w, sizeof(bits));
        mix(bits);
    }
    return h;
}

std::string Graph::fingerprint_hex() const {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fingerprint()));
    return buf;
}

LoadResult load_edge_list(std::istream& in, bool weighted) {
    std::unordered_map<std::string, NodeId> id_of;
    std::vector<std::string> labels;
    auto intern = [&](const std::string& token) {
        auto [it, inserted] = id_of.try_emplace(token, static_cast<NodeId>(labels.size()));
        if (inserted) labels.push_back(token);
        return it->second;
    };

    std::map<std::pair<NodeId, NodeId>, double> first_weight;
    LoadResult result;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto pos = line.find('#'); pos != std::string::npos) line.resize(pos);
        std::istringstream tokens(line);
        std::string tu, tv, tw, extra;
        if (!(tokens >> tu)) continue;  // blank or comment-only line
        if (!(tokens >> tv)) throw ParseError("expected 'u v [w]'", line_no);
        double w = 1.0;
        if (tokens >> tw) {
            if (tokens >> extra) throw ParseError("too many tokens", line_no);
            double parsed = 0.0;
            if (!parse_weight(tw, parsed))
                throw ParseError("non-numeric weight '" + tw + "'", line_no);
            if (!(parsed > 0.0)) throw ParseError("weight must be positive", line_no);
            if (weighted) w = parsed;
        }
        NodeId u = intern(tu);
        NodeId v = intern(tv);
        if (u == v) {
            ++result.self_loops_dropped;
            continue;
        }
        auto key = std::minmax(u, v);
        auto [it, inserted] = first_weight.try_emplace(key, w);
        (void)it;
        if (!inserted) ++result.duplicates_collapsed;
    }
    if (labels.empty()) throw ParseError("empty graph");

    std::vector<Edge> edges;
    edges.reserve(first_weight.size());
    for (const auto& [key, w] : first_weight) edges.push_back({key.first, key.second, w});
    const auto num_nodes = static_cast<NodeId>(labels.size());
    result.graph = Graph::from_edges(num_nodes, std::move(edges), std::move(labels));
    return result;
}

LoadResult load_edge_list_file(const std::string& path, bool weighted) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    return load_edge_list(in, weighted);
}

void save_edge_list(const Graph& g, std::ostream& out) {
    for (const Edge& e : g.edges())
        out << g.label(e.u) << ' ' << g.label(e.v) << ' '
            << csv::format_double(e.w) << '\n';
}

void save_edge_list_file(const Graph& g, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    save_edge_list(g, out);
    if (!out) throw IoError("write failed: " + path);
}

std::string graph_to_json(const Graph& g) {
    nlohmann::json j;
    j["num_nodes"] = g.num_nodes();
    auto& edges = j["edges"] = nlohmann::json::array();
    for (const Edge& e : g.edges()) edges.push_back({e.u, e.v, e.w});
    if (g.labels().empty())
        j["labels"] = nullptr;
    else
        j["labels"] = g.labels();
    return j.dump(2);
}

Graph graph_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    std::vector<Edge> edges;
    for (const auto& e : j.at("edges"))
        edges.push_back({e.at(0).get<NodeId>(), e.at(1).get<NodeId>(), e.at(2).get<double>()});
    std::vector<std::string> labels;
    if (j.contains("labels") && !j["labels"].is_null())
        labels = j["labels"].get<std::vector<std::string>>();
    return Graph::from_edges(j.at("num_nodes").get<NodeId>(), std::move(edges),
                             std::move(labels));
}

Graph generate_sbm(const SbmSpec& spec) {
    if (spec.block_sizes.empty())
        throw std::invalid_argument("SBM needs at least one block");
    for (NodeId b : spec.block_sizes)
        if (b < 1) throw std::invalid_argument("block sizes must be >= 1");
    for (double p : {spec.p_intra, spec.p_inter})
        if (!(p >= 0.0 && p <= 1.0))
            throw std::invalid_argument("probability outside [0,1]");

    std::vector<NodeId> block_of;
    for (std::size_t b = 0; b < spec.block_sizes.size(); ++b)
        block_of.insert(block_of.end(), spec.block_sizes[b], static_cast<NodeId>(b));

    return generate_pairwise(
        static_cast<NodeId>(block_of.size()), spec.seed, "sbm",
        [&](NodeId i, NodeId j) {
            return block_of[i] == block_of[j] ? spec.p_intra : spec.p_inter;
        });
}

Graph generate_er(NodeId n, double p, std::uint64_t seed) {
    if (!(p >= 0.0 && p <= 1.0))
        throw std::invalid_argument("probability outside [0,1]");
    return generate_pairwise(n, seed, "er", [p](NodeId, NodeId) { return p; });
}

double edge_density(const Graph& g) {
    if (g.num_nodes() < 2)
        throw std::invalid_argument("edge density needs at least two nodes");
    const double pairs = 0.5 * static_cast<double>(g.num_nodes()) *
                         static_cast<double>(g.num_nodes() - 1);
    return static_cast<double>(g.num_edges()) / pairs;
}

}  // namespace embstab
