#include "embstab/assignment.hpp"

#include <limits>
#include <stdexcept>

namespace embstab {

// Kuhn-Munkres with dual potentials, the 1-indexed formulation with a
// virtual column 0 that kicks off each augmenting search.
Assignment solve_assignment(const Eigen::MatrixXd& cost) {
    if (cost.rows() != cost.cols())
        throw std::invalid_argument("cost matrix must be square");
    if (!cost.allFinite())
        throw std::invalid_argument("cost matrix must be finite");
    const int n = static_cast<int>(cost.rows());
    if (n == 0) return {};

    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> match(n + 1, 0), parent(n + 1, 0);

    for (int i = 1; i <= n; ++i) {
        match[0] = i;
        int j0 = 0;
        std::vector<double> slack(n + 1, inf);
        std::vector<char> visited(n + 1, 0);
        do {
            visited[j0] = 1;
            const int i0 = match[j0];
            int j_next = 0;
            double delta = inf;
            for (int j = 1; j <= n; ++j) {
                if (visited[j]) continue;
                const double reduced = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (reduced < slack[j]) {
                    slack[j] = reduced;
                    parent[j] = j0;
                }
                if (slack[j] < delta) {
                    delta = slack[j];
                    j_next = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (visited[j]) {
                    u[match[j]] += delta;
                    v[j] -= delta;
                } else {
                    slack[j] -= delta;
                }
            }
            j0 = j_next;
        } while (match[j0] != 0);
        while (j0 != 0) {  // flip matches along the alternating path
            const int j_prev = parent[j0];
            match[j0] = match[j_prev];
            j0 = j_prev;
        }
    }

    Assignment result;
    result.col_of_row.assign(n, -1);
    for (int j = 1; j <= n; ++j) result.col_of_row[match[j] - 1] = j - 1;
    for (int i = 0; i < n; ++i) result.cost += cost(i, result.col_of_row[i]);
    return result;
}

}  // namespace embstab
