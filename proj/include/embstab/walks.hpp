#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "embstab/graph.hpp"
#include "embstab/rng.hpp"

namespace embstab {

// Second-order biased walk parameters (the p,q walk of node2vec).
struct WalkParams {
    int walk_length = 10;      // steps per walk; a walk holds walk_length+1 ids
    int walks_per_node = 10;
    double return_bias = 1.0;  // p
    double inout_bias = 1.0;   // q
    std::uint64_t seed = 0;

    void validate() const;
};

struct WalkCorpus {
    std::vector<std::vector<NodeId>> walks;
    NodeId num_nodes = 0;
    WalkParams params;
    std::string graph_id;
};

// One step of the biased walk. Neighbors x of cur are sampled with
// unnormalized weight w(cur,x) * alpha, where alpha = 1/p when x == prev,
// 1 when x is adjacent to prev, and 1/q otherwise. Without a previous node
// every alpha is 1 (plain weighted step). Returns nullopt iff cur has no
// neighbors.
std::optional<NodeId> walk_step(const Graph& g, std::optional<NodeId> prev,
                                NodeId cur, const WalkParams& params,
                                rng::Stream& stream);

// walks_per_node walks from every node, in (node ascending, repetition)
// order. Each (node, repetition) pair draws from its own substream derived
// from (params.seed, node, repetition), so the corpus is identical no matter
// how construction is scheduled. A walk stops short only when it starts at
// an isolated node.
WalkCorpus build_corpus(const Graph& g, const WalkParams& params,
                        const std::string& graph_id = {});

// Debug dump: one walk per line, space-separated node ids.
void save_corpus(const WalkCorpus& corpus, std::ostream& out);

// Parses a dump produced by save_corpus. Only the walks are recoverable;
// params are left default.
WalkCorpus load_corpus(std::istream& in, NodeId num_nodes);

}  // namespace embstab
