#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "swgeo/measures.hpp"
#include "swgeo/ot1d.hpp"
#include "swgeo/radon.hpp"

namespace swgeo {

// A measure known only through its projections, e.g. uniform on segments.
struct ProjectedMeasure {
    std::size_t dim;
    std::function<Slice1D(std::span<const double>)> project;
};

struct WeightedSegment {
    std::vector<double> from;
    std::vector<double> to;
    double mass;
};

// Mixture of uniform measures on segments (degenerate segments are atoms).
ProjectedMeasure uniform_on_segments(std::vector<WeightedSegment> segments);

using Measure = std::variant<DiscreteMeasure, GridDensity, ProjectedMeasure>;

std::size_t measure_dim(const Measure& m);

// Slices of any measure kind; grid inputs use radon_grid on the given radial
// grid (default: covering the box at the grid spacing).
SliceMeasureFamily slices_of(const Measure& m, const DirectionSet& dirs, const std::optional<RGrid>& grid = std::nullopt);
RGrid default_rgrid(const GridDensity& density);

double sw_p(const SliceMeasureFamily& mu, const SliceMeasureFamily& nu, double p = 2.0);
double sw_p(const Measure& mu, const Measure& nu, double p, const DirectionSet& dirs);

// Exact W2 between discrete measures by min-cost flow (support sizes <= 512).
double w2_discrete(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

struct LswUpper {
    FlaggedValue value;
    double clipped_tail = 0.0;
};

// Upper bound on the SW length metric via the linear path from mu to nu:
// 2 (sum_k w_k |mu_k - nu_k|^2_{H^-1(mu_k)})^{1/2}. The slices of mu must
// carry densities; atoms there give +inf.
LswUpper lsw_upper_linear(const SliceMeasureFamily& mu, const SliceMeasureFamily& nu);
LswUpper lsw_upper_linear(const Measure& mu, const Measure& nu, const DirectionSet& dirs);

// Vector flux on the Radon domain: one sliced component per axis, and the
// transformed density on the same directions and radial grid.
struct SlicedFlux {
    std::vector<SlicedField> components;
    SlicedField density;
};

// sum_k w_k int |theta_k . J / mu|^2 mu dr with 0/0 = 0; +inf where flux sits
// on density below tol * peak density.
FlaggedValue b_sw(const SlicedFlux& flux, double tol = 1e-10);

struct CurveDiscretization {
    std::vector<double> times;
    std::vector<Measure> nodes;

    CurveDiscretization(std::vector<double> times, std::vector<Measure> nodes);
};

double curve_length(const CurveDiscretization& c, const DirectionSet& dirs, double p = 2.0);
// Central difference SW(mu_{i-1}, mu_{i+1}) / (t_{i+1} - t_{i-1}).
double metric_derivative_fd(const CurveDiscretization& c, std::size_t index, const DirectionSet& dirs);

struct MidpointGap {
    double value;      // smallest objective found
    double certified;  // weak-duality lower bound on the minimum over the candidate class
    std::vector<double> weights;
};

// Distance in the sliced sense from the candidate class (convex weights on the
// candidate atoms) to the slice-wise displacement midpoints of mu0 and mu1.
MidpointGap midpoint_gap(const DiscreteMeasure& mu0, const DiscreteMeasure& mu1,
                         const std::vector<std::vector<double>>& candidates, const DirectionSet& dirs);

}  // namespace swgeo
