#pragma once

#include <vector>

#include <Eigen/Dense>

namespace embstab {

struct Assignment {
    std::vector<int> col_of_row;  // col_of_row[i] = column matched to row i
    double cost = 0.0;
};

// Exact minimum-cost perfect matching on a square cost matrix, O(n^3).
// Throws std::invalid_argument on non-square or non-finite input.
Assignment solve_assignment(const Eigen::MatrixXd& cost);

}  // namespace embstab
