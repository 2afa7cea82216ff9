#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "embstab/graph.hpp"
#include "embstab/pointcloud.hpp"

namespace embstab {

// Probability mass over the C(n,2) unordered node pairs, indexed by
// pair_index. Entries are nonnegative and sum to 1.
struct LinkDistribution {
    std::vector<double> values;
    std::string graph_id;
};

// Canonical dense index of the unordered pair {i,j}, i < j, among n nodes.
std::size_t pair_index(NodeId i, NodeId j, NodeId n);
std::size_t num_pairs(NodeId n);

// Mass 1/|E| on every edge pair, 0 elsewhere. Throws on edgeless graphs.
LinkDistribution observed_link_distribution(const Graph& g);

// Linear-kernel score between two embedding rows.
double similarity(const Eigen::RowVectorXd& a, const Eigen::RowVectorXd& b);

// sigma(x_i . x_j) over all unordered pairs, normalized to sum to 1.
LinkDistribution empirical_link_distribution(const PointCloud& x);

enum class DistributionDistanceMode {
    Discrete,  // W1 under the discrete ground metric == total variation
    Sorted1d,  // W1 between the sorted per-pair mass profiles
};

double distribution_distance(const LinkDistribution& p, const LinkDistribution& q,
                             DistributionDistanceMode mode =
                                 DistributionDistanceMode::Discrete);

// Link-reconstruction contingency tables swept over every distinct pairwise
// score. thresholds[k] holds the k-th largest distinct score; tp/fp/tn/fn
// count pairs with score >= thresholds[k] against the true edge set, so
// tp[k] is nondecreasing in k.
struct ScoreSweep {
    std::vector<double> thresholds;
    std::vector<long> tp, fp, tn, fn;
    long num_edges = 0;
    long num_non_edges = 0;
    std::string graph_id;
};

ScoreSweep score_sweep(const Graph& g, const PointCloud& x);

// Area under precision vs. recall, step-wise right-continuous through
// descending thresholds. Throws when the sweep has no true edges.
double auprc(const ScoreSweep& sweep);

// Area under the ROC curve by the trapezoidal rule; equals the probability
// a random edge outscores a random non-edge, ties counting one half.
// Throws when either class is empty.
double auroc(const ScoreSweep& sweep);

inline const std::vector<std::string> kQualityMetrics = {
    "w_link_discrete", "w_link_sorted1d", "auprc", "auroc"};

// The four reported quality metrics of one embedding against its graph,
// in kQualityMetrics order.
std::vector<std::pair<std::string, double>> link_quality_metrics(
    const Graph& g, const PointCloud& x);

}  // namespace embstab
