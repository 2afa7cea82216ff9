#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "embstab/pointcloud.hpp"

namespace embstab {

// Max pairwise Euclidean distance, by exhaustive pair scan.
double cloud_diameter(const Eigen::MatrixXd& points);

// Uniform scaling about the origin so the diameter becomes 1. No translation
// or rotation. Throws if the cloud has < 2 points or zero diameter.
PointCloud normalize_diameter(const PointCloud& x);

// max( sup_x min_y d(x,y), sup_y min_x d(x,y) ) under Euclidean distance.
double hausdorff(const PointCloud& x, const PointCloud& y);

struct Wasserstein2Result {
    double distance = 0.0;
    std::vector<int> matching;  // row i of x paired with row matching[i] of y
};

// Exact ( min over bijections of sum ||x - eta(x)||^2 )^(1/2), solved as an
// optimal assignment on the squared-distance cost matrix. Clouds must have
// equal cardinality and dimension.
Wasserstein2Result wasserstein2_matching(const PointCloud& x, const PointCloud& y);
double wasserstein2(const PointCloud& x, const PointCloud& y);

struct ProcrustesResult {
    PointCloud aligned;
    double residual = 0.0;  // Frobenius norm of (aligned - y)
};

// Orthogonal Procrustes: mean-centers both clouds, finds the orthogonal
// matrix minimizing the Frobenius misfit to y, and returns x mapped onto
// y's frame. Reflections are excluded unless allow_reflection is set.
ProcrustesResult procrustes_align(const PointCloud& x, const PointCloud& y,
                                  bool allow_reflection = false);

// Row-wise mean of same-shape clouds of the same graph, optionally
// Procrustes-aligning every cloud to the first beforehand.
PointCloud pool_embeddings(const std::vector<PointCloud>& clouds, bool align_first);

struct PcaResult {
    PointCloud projected;                          // n x k, mean-centered
    std::vector<double> explained_variance_ratio;  // length k, descending
};

// Projection onto the top-k principal directions of the centered cloud.
// Component signs are fixed by making each direction's largest-magnitude
// coordinate positive.
PcaResult project_pca(const PointCloud& x, int k);

// One pairwise distance between two runs; run indices are repeat indices
// within their parameter groups.
struct DistanceRecord {
    std::string group_a;
    int run_a = 0;
    std::string group_b;
    int run_b = 0;
    std::string metric;
    double value = 0.0;
};

struct GroupSummary {
    std::string group;
    std::string metric;
    int count = 0;  // number of within-group pairs
    double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0;
    double variance = 0.0;  // sample variance; 0 when count < 2
};

struct DistanceMatrixSummary {
    std::vector<DistanceRecord> records;  // comparable unordered run pairs
    std::vector<GroupSummary> groups;     // within-group distributions
};

inline const std::vector<std::string> kDistanceMetrics = {"hausdorff",
                                                          "wasserstein2"};

// Distances between unordered pairs of runs (within and across groups) for
// each named metric, plus per-group summaries over the within-group values.
// Pairs whose clouds differ in dimension are skipped: neither metric is
// defined for them, and a sweep that varies the embedding dimension still
// has meaningful same-dimension comparisons. Pair evaluation parallelizes
// over preassigned slots, so results are identical for any thread count.
DistanceMatrixSummary distance_matrix(const std::vector<std::string>& run_groups,
                                      const std::vector<int>& run_indices,
                                      const std::vector<PointCloud>& clouds,
                                      const std::vector<std::string>& metrics,
                                      int threads = 1);

// Linear-interpolation quantile of an ascending-sorted sample (the common
// spreadsheet definition: h = (n-1)q).
double quantile_sorted(const std::vector<double>& sorted_values, double q);

}  // namespace embstab
