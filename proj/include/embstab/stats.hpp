#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "embstab/metrics.hpp"

namespace embstab {

struct TestResult {
    double statistic = 0.0;  // min-tail rank statistic (W or U)
    double p_value = 1.0;
    int n_effective = 0;
    std::string method;  // "exact" | "normal-approximation" | "degenerate"
    bool degenerate = false;
};

// Midranks of a sample: tied values share the average of their rank block.
std::vector<double> midranks(const std::vector<double>& values);

double normal_cdf(double z);

// Paired two-sided signed-rank test. Differences a[i]-b[i]; zeros dropped;
// W = min(W+, W-). Exact null distribution (equivalent to enumerating all
// 2^n sign assignments) for n_effective <= 25, otherwise normal
// approximation with tie-corrected variance and continuity correction.
TestResult wilcoxon_signed_rank(const std::vector<double>& a,
                                const std::vector<double>& b);

// Unpaired two-sided rank-sum test on independent samples. U = min of the
// two U statistics. Exact null distribution when the pooled sample has no
// ties and n+m <= 40, otherwise tie-corrected normal approximation.
TestResult mann_whitney_u(const std::vector<double>& a,
                          const std::vector<double>& b);

// flag[i] = (p[i] < alpha / m) with m = p_values.size().
std::vector<bool> bonferroni(const std::vector<double>& p_values, double alpha);

enum class ComparisonMode { Paired, Unpaired };

struct PairComparison {
    std::string group_a;
    std::string group_b;
    TestResult test;
    bool significant = false;
};

struct PairwiseComparisonReport {
    double alpha = 0.05;
    int num_comparisons = 0;
    ComparisonMode mode = ComparisonMode::Paired;
    std::string metric;
    std::vector<PairComparison> pairs;
    double fraction_significant = 0.0;
};

// Tests every unordered pair of parameter groups on their within-group
// distance vectors for one metric, Bonferroni-corrected across all pairs.
// Paired mode aligns vectors positionally in canonical repeat-pair order
// and requires equal lengths; unpaired mode runs the rank-sum test.
PairwiseComparisonReport compare_all_groups(const DistanceMatrixSummary& distances,
                                            const std::string& metric, double alpha,
                                            ComparisonMode mode);

nlohmann::json report_to_json(const PairwiseComparisonReport& report);

// Spearman rank correlation with midranks; NaN when either sample has no
// rank variation.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace embstab
