#include "embstab/linkquality.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace embstab {

namespace {

void require_same_indexing(const LinkDistribution& p, const LinkDistribution& q) {
    if (p.values.size() != q.values.size())
        throw std::invalid_argument("link distributions index different pair sets");
    if (!p.graph_id.empty() && !q.graph_id.empty() && p.graph_id != q.graph_id)
        throw std::invalid_argument("link distributions belong to different graphs");
}

}  // namespace

std::size_t pair_index(NodeId i, NodeId j, NodeId n) {
    if (i < 0 || j <= i || j >= n)
        throw std::invalid_argument("pair_index expects 0 <= i < j < n");
    const auto ui = static_cast<std::size_t>(i);
    const auto uj = static_cast<std::size_t>(j);
    const auto un = static_cast<std::size_t>(n);
    return ui * un - ui * (ui + 1) / 2 + (uj - ui - 1);
}

std::size_t num_pairs(NodeId n) {
    if (n < 0) throw std::invalid_argument("negative node count");
    const auto un = static_cast<std::size_t>(n);
    return un * (un - 1) / 2;
}

LinkDistribution observed_link_distribution(const Graph& g) {
    if (g.num_edges() == 0)
        throw std::invalid_argument("observed link distribution of edgeless graph");
    LinkDistribution dist;
    dist.graph_id = g.fingerprint_hex();
    dist.values.assign(num_pairs(g.num_nodes()), 0.0);
    const double mass = 1.0 / static_cast<double>(g.num_edges());
    for (const Edge& e : g.edges())
        dist.values[pair_index(e.u, e.v, g.num_nodes())] = mass;
    return dist;
}

double similarity(const Eigen::RowVectorXd& a, const Eigen::RowVectorXd& b) {
    if (a.size() != b.size())
        throw std::invalid_argument("similarity of vectors with different dimensions");
    return a.dot(b);
}

LinkDistribution empirical_link_distribution(const PointCloud& x) {
    const Eigen::Index n = x.points.rows();
    if (n < 2)
        throw std::invalid_argument("empirical link distribution needs >= 2 points");
    LinkDistribution dist;
    dist.graph_id = x.graph_id;
    dist.values.reserve(num_pairs(static_cast<NodeId>(n)));
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double s = x.points.row(i).dot(x.points.row(j));
            const double sigma = 1.0 / (1.0 + std::exp(-s));
            dist.values.push_back(sigma);
            total += sigma;
        }
    for (double& v : dist.values) v /= total;
    return dist;
}

double distribution_distance(const LinkDistribution& p, const LinkDistribution& q,
                             DistributionDistanceMode mode) {
    require_same_indexing(p, q);
    if (mode == DistributionDistanceMode::Discrete) {
        double sum = 0.0;
        for (std::size_t k = 0; k < p.values.size(); ++k)
            sum += std::abs(p.values[k] - q.values[k]);
        return 0.5 * sum;
    }
    // W1 between two same-size empirical value profiles: match sorted atoms.
    std::vector<double> ps = p.values, qs = q.values;
    std::sort(ps.begin(), ps.end());
    std::sort(qs.begin(), qs.end());
    double sum = 0.0;
    for (std::size_t k = 0; k < ps.size(); ++k) sum += std::abs(ps[k] - qs[k]);
    return sum / static_cast<double>(ps.size());
}

ScoreSweep score_sweep(const Graph& g, const PointCloud& x) {
    if (x.points.rows() != g.num_nodes())
        throw std::invalid_argument("embedding and graph disagree on node count");
    const NodeId n = g.num_nodes();
    if (n < 2) throw std::invalid_argument("score sweep needs >= 2 nodes");

    struct ScoredPair {
        double score;
        bool is_edge;
    };
    std::vector<ScoredPair> pairs;
    pairs.reserve(num_pairs(n));
    for (NodeId i = 0; i < n; ++i)
        for (NodeId j = i + 1; j < n; ++j)
            pairs.push_back({x.points.row(i).dot(x.points.row(j)), g.is_edge(i, j)});
    std::sort(pairs.begin(), pairs.end(),
              [](const ScoredPair& a, const ScoredPair& b) { return a.score > b.score; });

    ScoreSweep sweep;
    sweep.graph_id = g.fingerprint_hex();
    sweep.num_edges = static_cast<long>(g.num_edges());
    sweep.num_non_edges = static_cast<long>(pairs.size()) - sweep.num_edges;

    long tp = 0, fp = 0;
    std::size_t k = 0;
    while (k < pairs.size()) {
        const double lambda = pairs[k].score;
        // Tied pairs enter the superlevel set together.
        while (k < pairs.size() && pairs[k].score == lambda) {
            if (pairs[k].is_edge)
                ++tp;
            else
                ++fp;
            ++k;
        }
        sweep.thresholds.push_back(lambda);
        sweep.tp.push_back(tp);
        sweep.fp.push_back(fp);
        sweep.fn.push_back(sweep.num_edges - tp);
        sweep.tn.push_back(sweep.num_non_edges - fp);
    }
    return sweep;
}

double auprc(const ScoreSweep& sweep) {
    if (sweep.num_edges < 1)
        throw std::invalid_argument("auprc undefined without true edges");
    double area = 0.0;
    double recall_prev = 0.0;
    for (std::size_t k = 0; k < sweep.thresholds.size(); ++k) {
        const double predicted = static_cast<double>(sweep.tp[k] + sweep.fp[k]);
        const double precision = static_cast<double>(sweep.tp[k]) / predicted;
        const double recall =
            static_cast<double>(sweep.tp[k]) / static_cast<double>(sweep.num_edges);
        area += (recall - recall_prev) * precision;
        recall_prev = recall;
    }
    return area;
}

double auroc(const ScoreSweep& sweep) {
    if (sweep.num_edges < 1 || sweep.num_non_edges < 1)
        throw std::invalid_argument("auroc needs both an edge and a non-edge");
    double area = 0.0;
    double tpr_prev = 0.0, fpr_prev = 0.0;
    for (std::size_t k = 0; k < sweep.thresholds.size(); ++k) {
        const double tpr =
            static_cast<double>(sweep.tp[k]) / static_cast<double>(sweep.num_edges);
        const double fpr =
            static_cast<double>(sweep.fp[k]) / static_cast<double>(sweep.num_non_edges);
        area += (fpr - fpr_prev) * 0.5 * (tpr + tpr_prev);
        tpr_prev = tpr;
        fpr_prev = fpr;
    }
    return area;
}

std::vector<std::pair<std::string, double>> link_quality_metrics(
    const Graph& g, const PointCloud& x) {
    const LinkDistribution observed = observed_link_distribution(g);
    const LinkDistribution empirical = empirical_link_distribution(x);
    const ScoreSweep sweep = score_sweep(g, x);
    return {
        {"w_link_discrete", distribution_distance(observed, empirical,
                                                  DistributionDistanceMode::Discrete)},
        {"w_link_sorted1d", distribution_distance(observed, empirical,
                                                  DistributionDistanceMode::Sorted1d)},
        {"auprc", auprc(sweep)},
        {"auroc", auroc(sweep)},
    };
}

}  // namespace embstab
