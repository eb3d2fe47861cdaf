#pragma once

#include <vector>

namespace swgeo::lp {

enum class Status { optimal, infeasible, unbounded };

struct Solution {
    Status status = Status::infeasible;
    double value = 0.0;
    std::vector<double> x;
};

// Maximizes c.x subject to A x <= b and x >= 0 with a dense two-phase
// simplex tableau and Bland's rule. Intended for small problems.
Solution maximize(const std::vector<std::vector<double>>& A, const std::vector<double>& b, const std::vector<double>& c);

}  // namespace swgeo::lp
