#include "embstab/walks.hpp"

#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "embstab/errors.hpp"

namespace embstab {

void WalkParams::validate() const {
    if (walk_length < 1) throw std::invalid_argument("walk_length must be >= 1");
    if (walks_per_node < 1) throw std::invalid_argument("walks_per_node must be >= 1");
    if (!(return_bias > 0.0)) throw std::invalid_argument("return bias p must be > 0");
    if (!(inout_bias > 0.0)) throw std::invalid_argument("in-out bias q must be > 0");
}

std::optional<NodeId> walk_step(const Graph& g, std::optional<NodeId> prev,
                                NodeId cur, const WalkParams& params,
                                rng::Stream& stream) {
    auto nbrs = g.neighbors(cur);
    if (nbrs.empty()) return std::nullopt;

    // Cumulative-weight inversion over the sorted neighbor list.
    double total = 0.0;
    auto alpha = [&](NodeId x) {
        if (!prev) return 1.0;
        if (x == *prev) return 1.0 / params.return_bias;
        if (g.is_edge(*prev, x)) return 1.0;
        return 1.0 / params.inout_bias;
    };
    for (const Neighbor& nb : nbrs) total += nb.weight * alpha(nb.node);

    const double target = stream.next_double() * total;
    double cumulative = 0.0;
    for (const Neighbor& nb : nbrs) {
        cumulative += nb.weight * alpha(nb.node);
        if (target < cumulative) return nb.node;
    }
    return nbrs.back().node;  // target == total after rounding
}

WalkCorpus build_corpus(const Graph& g, const WalkParams& params,
                        const std::string& graph_id) {
    params.validate();
    if (g.num_nodes() == 0) throw std::invalid_argument("empty graph");

    WalkCorpus corpus;
    corpus.num_nodes = g.num_nodes();
    corpus.params = params;
    corpus.graph_id = graph_id;
    corpus.walks.reserve(static_cast<std::size_t>(g.num_nodes()) *
                         static_cast<std::size_t>(params.walks_per_node));

    for (NodeId start = 0; start < g.num_nodes(); ++start) {
        for (int rep = 0; rep < params.walks_per_node; ++rep) {
            rng::Stream stream(params.seed, rng::Purpose::Walks,
                               static_cast<std::uint64_t>(start),
                               static_cast<std::uint64_t>(rep));
            std::vector<NodeId> walk;
            walk.reserve(static_cast<std::size_t>(params.walk_length) + 1);
            walk.push_back(start);
            std::optional<NodeId> prev;
            NodeId cur = start;
            for (int step = 0; step < params.walk_length; ++step) {
                auto next = walk_step(g, prev, cur, params, stream);
                if (!next) break;  // isolated start node
                walk.push_back(*next);
                prev = cur;
                cur = *next;
            }
            corpus.walks.push_back(std::move(walk));
        }
    }
    return corpus;
}

void save_corpus(const WalkCorpus& corpus, std::ostream& out) {
    for (const auto& walk : corpus.walks) {
        for (std::size_t i = 0; i < walk.size(); ++i) {
            if (i > 0) out << ' ';
            out << walk[i];
        }
        out << '\n';
    }
}

WalkCorpus load_corpus(std::istream& in, NodeId num_nodes) {
    WalkCorpus corpus;
    corpus.num_nodes = num_nodes;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream tokens(line);
        std::vector<NodeId> walk;
        long id = 0;
        while (tokens >> id) {
            if (id < 0 || id >= num_nodes)
                throw ParseError("node id out of range", line_no);
            walk.push_back(static_cast<NodeId>(id));
        }
        if (!tokens.eof()) throw ParseError("non-numeric token", line_no);
        if (!walk.empty()) corpus.walks.push_back(std::move(walk));
    }
    return corpus;
}

}  // namespace embstab
