#include "embstab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>
#include <tuple>

namespace embstab {

namespace {

constexpr int kExactSignedRankLimit = 25;
constexpr int kExactRankSumLimit = 40;  // pooled size

// Tie-group sizes of an ascending-sorted sample.
std::vector<int> tie_groups(const std::vector<double>& sorted) {
    std::vector<int> groups;
    std::size_t i = 0;
    while (i < sorted.size()) {
        std::size_t j = i + 1;
        while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
        groups.push_back(static_cast<int>(j - i));
        i = j;
    }
    return groups;
}

double two_sided_from_z(double distance_from_mean, double sigma) {
    // Continuity correction: pull the statistic half a step toward the mean.
    const double z = (std::abs(distance_from_mean) - 0.5) / sigma;
    return std::min(1.0, 2.0 * (1.0 - normal_cdf(z)));
}

}  // namespace

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

std::vector<double> midranks(const std::vector<double>& values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i + 1;
        while (j < n && values[order[j]] == values[order[i]]) ++j;
        const double shared = 0.5 * static_cast<double>(i + j + 1);  // 1-based
        for (std::size_t k = i; k < j; ++k) ranks[order[k]] = shared;
        i = j;
    }
    return ranks;
}

TestResult wilcoxon_signed_rank(const std::vector<double>& a,
                                const std::vector<double>& b) {
    if (a.size() != b.size())
        throw std::invalid_argument("signed-rank test needs equal-length samples");
    if (a.empty()) throw std::invalid_argument("signed-rank test on empty samples");

    std::vector<double> abs_diffs;
    std::vector<bool> positive;
    abs_diffs.reserve(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        if (d == 0.0) continue;
        abs_diffs.push_back(std::abs(d));
        positive.push_back(d > 0.0);
    }

    TestResult result;
    result.n_effective = static_cast<int>(abs_diffs.size());
    if (abs_diffs.empty()) {
        result.method = "degenerate";
        result.degenerate = true;
        return result;  // all differences zero: W = 0, p = 1
    }

    const std::vector<double> ranks = midranks(abs_diffs);
    double w_plus = 0.0;
    for (std::size_t i = 0; i < ranks.size(); ++i)
        if (positive[i]) w_plus += ranks[i];
    const auto n = static_cast<double>(abs_diffs.size());
    const double total = n * (n + 1.0) / 2.0;
    const double w_minus = total - w_plus;
    result.statistic = std::min(w_plus, w_minus);

    if (result.n_effective <= kExactSignedRankLimit) {
        result.method = "exact";
        // Doubled midranks are integers, so the 2^n sign-assignment null
        // distribution of 2*W+ tabulates by subset-sum counting.
        std::vector<long> doubled(ranks.size());
        long total2 = 0;
        for (std::size_t i = 0; i < ranks.size(); ++i) {
            doubled[i] = std::lround(2.0 * ranks[i]);
            total2 += doubled[i];
        }
        std::vector<double> count(static_cast<std::size_t>(total2) + 1, 0.0);
        count[0] = 1.0;
        for (long r : doubled)
            for (long s = total2; s >= r; --s)
                count[static_cast<std::size_t>(s)] +=
                    count[static_cast<std::size_t>(s - r)];
        const long w2 = std::lround(2.0 * result.statistic);
        double tails = 0.0;
        for (long s = 0; s <= w2; ++s) tails += count[static_cast<std::size_t>(s)];
        for (long s = total2 - w2; s <= total2; ++s)
            tails += count[static_cast<std::size_t>(s)];
        result.p_value = std::min(1.0, tails / std::pow(2.0, n));
        return result;
    }

    result.method = "normal-approximation";
    std::vector<double> sorted_abs = abs_diffs;
    std::sort(sorted_abs.begin(), sorted_abs.end());
    double tie_term = 0.0;
    for (int t : tie_groups(sorted_abs))
        tie_term += static_cast<double>(t) * t * t - t;
    const double mean = total / 2.0;
    const double variance = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term / 48.0;
    if (!(variance > 0.0)) {
        result.method = "degenerate";
        result.degenerate = true;
        result.p_value = 1.0;
        return result;
    }
    result.p_value = two_sided_from_z(result.statistic - mean, std::sqrt(variance));
    return result;
}

TestResult mann_whitney_u(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.empty() || b.empty())
        throw std::invalid_argument("rank-sum test needs two nonempty samples");
    const auto na = static_cast<double>(a.size());
    const auto nb = static_cast<double>(b.size());

    std::vector<double> pooled = a;
    pooled.insert(pooled.end(), b.begin(), b.end());
    const std::vector<double> ranks = midranks(pooled);

    double rank_sum_a = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) rank_sum_a += ranks[i];
    const double u_a = rank_sum_a - na * (na + 1.0) / 2.0;
    const double u_b = na * nb - u_a;

    TestResult result;
    result.statistic = std::min(u_a, u_b);
    result.n_effective = static_cast<int>(pooled.size());

    std::vector<double> sorted_pooled = pooled;
    std::sort(sorted_pooled.begin(), sorted_pooled.end());
    const std::vector<int> ties = tie_groups(sorted_pooled);
    const bool has_ties = ties.size() != pooled.size();

    if (!has_ties && pooled.size() <= kExactRankSumLimit) {
        result.method = "exact";
        // count[j][s]: subsets of j ranks from {1..N} with rank sum s.
        const int N = static_cast<int>(pooled.size());
        const int ja = static_cast<int>(a.size());
        const int max_sum = ja * N - ja * (ja - 1) / 2;
        std::vector<std::vector<double>> count(
            ja + 1, std::vector<double>(static_cast<std::size_t>(max_sum) + 1, 0.0));
        count[0][0] = 1.0;
        for (int r = 1; r <= N; ++r)
            for (int j = std::min(r, ja); j >= 1; --j)
                for (int s = max_sum; s >= r; --s)
                    count[j][static_cast<std::size_t>(s)] +=
                        count[j - 1][static_cast<std::size_t>(s - r)];
        const int base = ja * (ja + 1) / 2;  // u = rank sum - base
        const auto u_lim = static_cast<int>(na * nb);
        const auto u_min = static_cast<int>(std::lround(result.statistic));
        double tails = 0.0, all = 0.0;
        for (int u = 0; u <= u_lim; ++u) {
            const double c = count[ja][static_cast<std::size_t>(u + base)];
            all += c;
            if (u <= u_min || u >= u_lim - u_min) tails += c;
        }
        result.p_value = std::min(1.0, tails / all);
        return result;
    }

    result.method = "normal-approximation";
    const double N = na + nb;
    double tie_term = 0.0;
    for (int t : ties) tie_term += static_cast<double>(t) * t * t - t;
    const double variance =
        na * nb / 12.0 * ((N + 1.0) - tie_term / (N * (N - 1.0)));
    if (!(variance > 0.0)) {
        result.method = "degenerate";
        result.degenerate = true;
        result.p_value = 1.0;
        return result;
    }
    result.p_value =
        two_sided_from_z(result.statistic - na * nb / 2.0, std::sqrt(variance));
    return result;
}

std::vector<bool> bonferroni(const std::vector<double>& p_values, double alpha) {
    if (p_values.empty())
        throw std::invalid_argument("bonferroni correction of an empty family");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("alpha must lie in (0,1)");
    const double cutoff = alpha / static_cast<double>(p_values.size());
    std::vector<bool> flags(p_values.size());
    for (std::size_t i = 0; i < p_values.size(); ++i) flags[i] = p_values[i] < cutoff;
    return flags;
}

PairwiseComparisonReport compare_all_groups(const DistanceMatrixSummary& distances,
                                            const std::string& metric, double alpha,
                                            ComparisonMode mode) {
    // Within-group vectors in canonical repeat-pair order, groups in
    // first-appearance order.
    std::vector<std::string> group_order;
    std::map<std::string, std::vector<std::tuple<int, int, double>>> values;
    for (const auto& rec : distances.records) {
        if (rec.metric != metric || rec.group_a != rec.group_b) continue;
        if (values.find(rec.group_a) == values.end()) group_order.push_back(rec.group_a);
        values[rec.group_a].emplace_back(rec.run_a, rec.run_b, rec.value);
    }
    if (group_order.size() < 2)
        throw std::invalid_argument("group comparison needs >= 2 groups");

    std::map<std::string, std::vector<double>> vectors;
    std::size_t expected = values[group_order.front()].size();
    for (const auto& g : group_order) {
        auto& tuples = values[g];
        std::sort(tuples.begin(), tuples.end());
        if (mode == ComparisonMode::Paired && tuples.size() != expected)
            throw std::invalid_argument(
                "paired comparison needs equal within-group pair counts");
        auto& v = vectors[g];
        v.reserve(tuples.size());
        for (const auto& [ra, rb, val] : tuples) v.push_back(val);
    }

    PairwiseComparisonReport report;
    report.alpha = alpha;
    report.mode = mode;
    report.metric = metric;
    std::vector<double> p_values;
    for (std::size_t i = 0; i < group_order.size(); ++i) {
        for (std::size_t j = i + 1; j < group_order.size(); ++j) {
            PairComparison pc;
            pc.group_a = group_order[i];
            pc.group_b = group_order[j];
            const auto& va = vectors[pc.group_a];
            const auto& vb = vectors[pc.group_b];
            pc.test = mode == ComparisonMode::Paired ? wilcoxon_signed_rank(va, vb)
                                                     : mann_whitney_u(va, vb);
            p_values.push_back(pc.test.p_value);
            report.pairs.push_back(std::move(pc));
        }
    }
    report.num_comparisons = static_cast<int>(report.pairs.size());
    const std::vector<bool> flags = bonferroni(p_values, alpha);
    int significant = 0;
    for (std::size_t k = 0; k < flags.size(); ++k) {
        report.pairs[k].significant = flags[k];
        if (flags[k]) ++significant;
    }
    report.fraction_significant =
        static_cast<double>(significant) / static_cast<double>(report.pairs.size());
    return report;
}

nlohmann::json report_to_json(const PairwiseComparisonReport& report) {
    nlohmann::json pairs = nlohmann::json::array();
    for (const auto& pc : report.pairs) {
        pairs.push_back({{"group_a", pc.group_a},
                         {"group_b", pc.group_b},
                         {"W", pc.test.statistic},
                         {"p", pc.test.p_value},
                         {"n_effective", pc.test.n_effective},
                         {"method", pc.test.method},
                         {"significant", pc.significant}});
    }
    return {{"alpha", report.alpha},
            {"m", report.num_comparisons},
            {"mode", report.mode == ComparisonMode::Paired ? "paired" : "unpaired"},
            {"metric", report.metric},
            {"pairs", std::move(pairs)},
            {"fraction_significant", report.fraction_significant}};
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size())
        throw std::invalid_argument("spearman needs equal-length samples");
    if (x.size() < 2) throw std::invalid_argument("spearman needs >= 2 observations");
    const std::vector<double> rx = midranks(x);
    const std::vector<double> ry = midranks(y);
    const auto n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += rx[i];
        my += ry[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    if (!(sxx > 0.0) || !(syy > 0.0))
        return std::numeric_limits<double>::quiet_NaN();
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace embstab
