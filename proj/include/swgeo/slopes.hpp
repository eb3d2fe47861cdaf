#pragma once

#include <functional>
#include <span>
#include <vector>

#include "swgeo/measures.hpp"
#include "swgeo/radon.hpp"
#include "swgeo/swdist.hpp"

namespace swgeo {

// Potential V >= 0: sampled on a grid for absolutely continuous measures and
// evaluated pointwise (value and gradient) for discrete ones.
struct Potential {
    GridField grid;
    std::function<double(std::span<const double>)> value;
    std::function<std::vector<double>(std::span<const double>)> gradient;

    // Samples value on the grid.
    static Potential analytic(const Box& box, const std::vector<std::size_t>& shape,
                              std::function<double(std::span<const double>)> value,
                              std::function<std::vector<double>(std::span<const double>)> gradient);
    // Bilinear value and centered-difference gradient from grid data (d = 2).
    static Potential from_grid(GridField grid);
};

Potential translated(const Potential& v, std::span<const double> shift);

double potential_energy(const Potential& v, const DiscreteMeasure& mu);
double potential_energy(const Potential& v, const GridDensity& mu);

// ||grad V||_{L^2(mu)}.
double w_slope(const Potential& v, const DiscreteMeasure& mu);
double w_slope(const Potential& v, const GridDensity& mu);

// sqrt(d) * w_slope at discrete measures.
double sw_slope_discrete(const Potential& v, const DiscreteMeasure& mu);

// [V(mu) - V(nu)]_+ / SW(mu, nu) for nu = {x_i - h grad V(x_i)}.
double sw_slope_probe(const Potential& v, const DiscreteMeasure& mu, double h, const DirectionSet& dirs);

// c^{-1} (sum_k w_k int |d/dr Lambda R V|^2 dmu_k)^{1/2}; V and mu share a 2D grid.
double sw_slope_ac_upper(const Potential& v, const GridDensity& mu, const DirectionSet& dirs);

// Difference quotient of the energy along mu - t psi, psi the order-3 radial
// multiplier of V restricted to supp mu and centered, against the exact
// linear-path action; a lower estimate for the slope in the length metric.
double sw_slope_ac_lower(const Potential& v, const GridDensity& mu, const DirectionSet& dirs);

// ||V||_{H-dot^{(d+1)/2}}.
double hdot_slope(const Potential& v);

struct GradientFlowFlux {
    std::vector<GridField> grid;  // one component per axis, on V's grid
    SlicedFlux sliced;
};

// Flux c^{-2} mu_hat Lambda R(grad V) on the Radon domain and its plane
// reconstruction R* Lambda of the same.
GradientFlowFlux gf_flux(const Potential& v, const GridDensity& mu, const DirectionSet& dirs);

struct Dissipation {
    double lhs;  // <grad V, J> on the grid
    double rhs;  // c^{-2} sum_k w_k int |Lambda R grad V|^2 dmu_k
};

Dissipation dissipation_check(const Potential& v, const GridDensity& mu, const DirectionSet& dirs);

}  // namespace swgeo
