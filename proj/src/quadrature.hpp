#pragma once

#include <cstddef>
#include <vector>

namespace swgeo::quad {

struct Rule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// Gauss-Legendre rule on [a, b].
Rule gauss_legendre(std::size_t n, double a, double b);

// C-infinity step: 1 for x <= lo, 0 for x >= hi.
double smooth_cutoff(double x, double lo, double hi);

}  // namespace swgeo::quad
