#include "embstab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <thread>

#include "embstab/assignment.hpp"

namespace embstab {

namespace {

void require_same_dim(const PointCloud& x, const PointCloud& y) {
    if (x.points.cols() != y.points.cols())
        throw std::invalid_argument("point clouds have different dimensions");
}

// Largest sup-min distance from rows of a to the row set of b.
double directed_hausdorff_sq(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (Eigen::Index j = 0; j < b.rows(); ++j) {
            const double d2 = (a.row(i) - b.row(j)).squaredNorm();
            if (d2 < best) best = d2;
        }
        if (best > worst) worst = best;
    }
    return worst;
}

}  // namespace

double cloud_diameter(const Eigen::MatrixXd& points) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < points.rows(); ++i)
        for (Eigen::Index j = i + 1; j < points.rows(); ++j)
            worst = std::max(worst, (points.row(i) - points.row(j)).squaredNorm());
    return std::sqrt(worst);
}

PointCloud normalize_diameter(const PointCloud& x) {
    if (x.points.rows() < 2)
        throw std::invalid_argument("diameter normalization needs >= 2 points");
    const double diam = cloud_diameter(x.points);
    if (!(diam > 0.0))
        throw std::invalid_argument("cloud has zero diameter (all points identical)");
    PointCloud out = x;
    out.points /= diam;
    return out;
}

double hausdorff(const PointCloud& x, const PointCloud& y) {
    require_same_dim(x, y);
    if (x.points.rows() == 0 || y.points.rows() == 0)
        throw std::invalid_argument("point clouds must be nonempty");
    return std::sqrt(std::max(directed_hausdorff_sq(x.points, y.points),
                              directed_hausdorff_sq(y.points, x.points)));
}

Wasserstein2Result wasserstein2_matching(const PointCloud& x, const PointCloud& y) {
    require_same_dim(x, y);
    if (x.points.rows() != y.points.rows())
        throw std::invalid_argument(
            "wasserstein2 compares clouds of equal cardinality");
    const Eigen::Index n = x.points.rows();
    if (n == 0) throw std::invalid_argument("point clouds must be nonempty");

    Eigen::MatrixXd cost(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            cost(i, j) = (x.points.row(i) - y.points.row(j)).squaredNorm();

    Assignment best = solve_assignment(cost);
    Wasserstein2Result result;
    result.distance = std::sqrt(std::max(0.0, best.cost));
    result.matching = std::move(best.col_of_row);
    return result;
}

double wasserstein2(const PointCloud& x, const PointCloud& y) {
    return wasserstein2_matching(x, y).distance;
}

ProcrustesResult procrustes_align(const PointCloud& x, const PointCloud& y,
                                  bool allow_reflection) {
    require_same_dim(x, y);
    if (x.points.rows() != y.points.rows())
        throw std::invalid_argument("procrustes_align needs equal shapes");
    if (x.points.rows() == 0) throw std::invalid_argument("empty point cloud");

    const Eigen::RowVectorXd mean_x = x.points.colwise().mean();
    const Eigen::RowVectorXd mean_y = y.points.colwise().mean();
    const Eigen::MatrixXd xc = x.points.rowwise() - mean_x;
    const Eigen::MatrixXd yc = y.points.rowwise() - mean_y;

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(xc.transpose() * yc,
                                          Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::MatrixXd u = svd.matrixU();
    const Eigen::MatrixXd v = svd.matrixV();
    Eigen::MatrixXd rotation = u * v.transpose();
    if (!allow_reflection && rotation.determinant() < 0.0) {
        // Flip the direction of least misfit to stay in SO(d).
        u.col(u.cols() - 1) *= -1.0;
        rotation = u * v.transpose();
    }

    ProcrustesResult result;
    result.aligned = x;
    result.aligned.points = (xc * rotation).rowwise() + mean_y;
    result.residual = (result.aligned.points - y.points).norm();
    return result;
}

PointCloud pool_embeddings(const std::vector<PointCloud>& clouds, bool align_first) {
    if (clouds.empty())
        throw std::invalid_argument("pool_embeddings needs at least one cloud");
    const auto& first = clouds.front();
    for (const auto& c : clouds) {
        if (c.points.rows() != first.points.rows() ||
            c.points.cols() != first.points.cols())
            throw std::invalid_argument("pooled clouds must share a shape");
        if (c.graph_id != first.graph_id)
            throw std::invalid_argument("pooled clouds must embed the same graph");
    }

    PointCloud pooled = first;
    Eigen::MatrixXd sum = first.points;
    for (std::size_t i = 1; i < clouds.size(); ++i)
        sum += align_first ? procrustes_align(clouds[i], first).aligned.points
                           : clouds[i].points;
    pooled.points = sum / static_cast<double>(clouds.size());
    return pooled;
}

PcaResult project_pca(const PointCloud& x, int k) {
    const Eigen::Index n = x.points.rows();
    const Eigen::Index d = x.points.cols();
    if (k < 1 || k > d)
        throw std::invalid_argument("pca component count must be in [1, dim]");
    if (n < 2) throw std::invalid_argument("pca needs >= 2 points");

    const Eigen::MatrixXd centered = x.points.rowwise() - x.points.colwise().mean();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(centered.transpose() * centered);
    if (eig.info() != Eigen::Success)
        throw std::runtime_error("pca eigendecomposition failed");

    // Eigen reports ascending eigenvalues; walk them from the back.
    const Eigen::VectorXd values = eig.eigenvalues().cwiseMax(0.0);
    const double total = values.sum();

    Eigen::MatrixXd directions(d, k);
    PcaResult result;
    result.explained_variance_ratio.reserve(static_cast<std::size_t>(k));
    for (int c = 0; c < k; ++c) {
        const Eigen::Index src = d - 1 - c;
        Eigen::VectorXd dir = eig.eigenvectors().col(src);
        Eigen::Index peak;
        dir.cwiseAbs().maxCoeff(&peak);
        if (dir(peak) < 0.0) dir = -dir;
        directions.col(c) = dir;
        result.explained_variance_ratio.push_back(
            total > 0.0 ? values(src) / total : 0.0);
    }

    result.projected = x;
    result.projected.points = centered * directions;
    return result;
}

double quantile_sorted(const std::vector<double>& sorted_values, double q) {
    if (sorted_values.empty())
        throw std::invalid_argument("quantile of empty sample");
    if (q < 0.0 || q > 1.0) throw std::invalid_argument("quantile must be in [0,1]");
    const double h = q * static_cast<double>(sorted_values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, sorted_values.size() - 1);
    const double frac = h - static_cast<double>(lo);
    return sorted_values[lo] + frac * (sorted_values[hi] - sorted_values[lo]);
}

DistanceMatrixSummary distance_matrix(const std::vector<std::string>& run_groups,
                                      const std::vector<int>& run_indices,
                                      const std::vector<PointCloud>& clouds,
                                      const std::vector<std::string>& metrics,
                                      int threads) {
    const std::size_t n = clouds.size();
    if (run_groups.size() != n || run_indices.size() != n)
        throw std::invalid_argument("run labels and clouds disagree in length");
    for (const auto& m : metrics)
        if (m != "hausdorff" && m != "wasserstein2")
            throw std::invalid_argument("unknown distance metric: " + m);
    if (threads < 1) throw std::invalid_argument("threads must be >= 1");

    // Pairs of clouds with different dimensionality are incomparable under
    // both metrics; they are omitted rather than reported as errors so that a
    // sweep over several embedding dimensions still yields the comparable part.
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    pairs.reserve(n * (n - 1) / 2);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (clouds[i].dim() == clouds[j].dim()) pairs.emplace_back(i, j);

    DistanceMatrixSummary out;
    out.records.resize(pairs.size() * metrics.size());

    auto eval_pair = [&](std::size_t p) {
        const auto [i, j] = pairs[p];
        Wasserstein2Result w2;
        bool have_w2 = false;
        for (std::size_t m = 0; m < metrics.size(); ++m) {
            DistanceRecord& rec = out.records[p * metrics.size() + m];
            rec.group_a = run_groups[i];
            rec.run_a = run_indices[i];
            rec.group_b = run_groups[j];
            rec.run_b = run_indices[j];
            rec.metric = metrics[m];
            if (metrics[m] == "hausdorff") {
                rec.value = hausdorff(clouds[i], clouds[j]);
            } else {
                if (!have_w2) {
                    w2 = wasserstein2_matching(clouds[i], clouds[j]);
                    have_w2 = true;
                }
                rec.value = w2.distance;
            }
        }
    };

    if (threads == 1 || pairs.size() < 2) {
        for (std::size_t p = 0; p < pairs.size(); ++p) eval_pair(p);
    } else {
        std::vector<std::thread> pool;
        const auto workers = std::min<std::size_t>(threads, pairs.size());
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                for (std::size_t p = w; p < pairs.size(); p += workers) eval_pair(p);
            });
        }
        for (auto& t : pool) t.join();
    }

    // Within-group value lists, keyed (group, metric) in first-seen group order.
    std::vector<std::string> group_order;
    std::map<std::pair<std::string, std::string>, std::vector<double>> within;
    for (const auto& g : run_groups)
        if (std::find(group_order.begin(), group_order.end(), g) == group_order.end())
            group_order.push_back(g);
    for (const auto& rec : out.records)
        if (rec.group_a == rec.group_b)
            within[{rec.group_a, rec.metric}].push_back(rec.value);

    for (const auto& g : group_order) {
        for (const auto& m : metrics) {
            auto it = within.find({g, m});
            if (it == within.end() || it->second.empty()) continue;
            std::vector<double>& vals = it->second;
            std::sort(vals.begin(), vals.end());
            GroupSummary s;
            s.group = g;
            s.metric = m;
            s.count = static_cast<int>(vals.size());
            s.min = vals.front();
            s.q1 = quantile_sorted(vals, 0.25);
            s.median = quantile_sorted(vals, 0.5);
            s.q3 = quantile_sorted(vals, 0.75);
            s.max = vals.back();
            if (vals.size() > 1) {
                double mean = 0.0;
                for (double v : vals) mean += v;
                mean /= static_cast<double>(vals.size());
                double ss = 0.0;
                for (double v : vals) ss += (v - mean) * (v - mean);
                s.variance = ss / static_cast<double>(vals.size() - 1);
            }
            out.groups.push_back(std::move(s));
        }
    }
    return out;
}

}  // namespace embstab
