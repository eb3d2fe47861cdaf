#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "swgeo/measures.hpp"
#include "swgeo/ot1d.hpp"
#include "swgeo/random.hpp"

namespace swgeo {

enum class DirectionScheme { equiangular, fibonacci, monte_carlo };

// Quadrature for the normalized sphere average. Directions live on a fixed
// half-sphere (antipodes identified); weights sum to one.
class DirectionSet {
public:
    DirectionSet(std::size_t dim, std::vector<double> coords, std::vector<double> weights, DirectionScheme scheme);

    std::size_t dim() const { return dim_; }
    std::size_t size() const { return weights_.size(); }
    std::span<const double> direction(std::size_t k) const { return {coords_.data() + k * dim_, dim_}; }
    double weight(std::size_t k) const { return weights_[k]; }
    DirectionScheme scheme() const { return scheme_; }

private:
    std::size_t dim_;
    std::vector<double> coords_;
    std::vector<double> weights_;
    DirectionScheme scheme_;
};

DirectionSet make_directions(std::size_t dim, std::size_t count, DirectionScheme scheme = DirectionScheme::equiangular,
                             std::optional<RandomSeed> seed = std::nullopt);

// Cell-centered radial grid on [-L, L]: r_j = -L + (j + 1/2) * step.
struct RGrid {
    double half_width;
    std::size_t count;

    double step() const { return 2.0 * half_width / static_cast<double>(count); }
    double r(std::size_t j) const { return -half_width + (static_cast<double>(j) + 0.5) * step(); }

    // L = 1.5 x the largest |x| on the box, count a power of two with
    // step <= max_step.
    static RGrid covering(const Box& box, double max_step);
    static RGrid covering_radius(double radius, double max_step);
};

// Real function on the Radon domain stored per half-sphere direction.
// parity is +1 for fields with g(-theta,-r) = g(theta,r) (transforms of
// functions) and -1 for odd ones (after one r-derivative).
class SlicedField {
public:
    SlicedField(DirectionSet dirs, RGrid grid, int parity = 1);
    SlicedField(DirectionSet dirs, RGrid grid, std::vector<double> values, int parity = 1);

    const DirectionSet& directions() const { return dirs_; }
    const RGrid& grid() const { return grid_; }
    int parity() const { return parity_; }
    std::span<const double> slice(std::size_t k) const { return {values_.data() + k * grid_.count, grid_.count}; }
    std::span<double> slice(std::size_t k) { return {values_.data() + k * grid_.count, grid_.count}; }
    double at(std::size_t k, std::size_t j) const { return values_[k * grid_.count + j]; }
    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }

private:
    DirectionSet dirs_;
    RGrid grid_;
    std::vector<double> values_;
    int parity_;
};

struct SliceMeasureFamily {
    DirectionSet directions;
    std::vector<Slice1D> slices;
};

Slice1D project_discrete(const DiscreteMeasure& mu, std::span<const double> theta);
SliceMeasureFamily project_discrete(const DiscreteMeasure& mu, const DirectionSet& dirs);

// Line sums of a 2D grid field; each cell value carries a quadratic B-spline
// of unit mass, so slices are C1 in r for every direction.
SlicedField radon_grid(const GridField& f, const DirectionSet& dirs, const RGrid& grid);
// Line sums of a function evaluated pointwise, taken as zero outside the box.
SlicedField radon_function(const std::function<double(std::span<const double>)>& fn, const Box& box, double step,
                           const DirectionSet& dirs, const RGrid& grid);
// Each slice as a piecewise-constant Slice1D (input must be a density transform).
SliceMeasureFamily slice_measures(const SlicedField& density_slices);

// Sphere average of g(theta, x . theta) at the cell centers of the target grid.
GridField dual_radon(const SlicedField& g, const Box& box, const std::vector<std::size_t>& shape);

// Applies |zeta|^a (i zeta)^b per slice on a zero-padded periodic grid.
SlicedField slice_multiplier(const SlicedField& g, double a, int b, std::size_t padding = 2);
// Multiplies each slice by the given component of its direction.
SlicedField times_direction_component(const SlicedField& g, std::size_t axis);

double inversion_constant(std::size_t dim);
GridField invert_radon(const SlicedField& g, const Box& box, const std::vector<std::size_t>& shape);

struct FourierSliceOptions {
    std::size_t directions = 8;
    std::vector<double> frequencies;  // empty: 0, 0.5, ..., 8
};
double fourier_slice_gap(const GridField& f, const DirectionSet& dirs, const RGrid& grid,
                         const FourierSliceOptions& opts = {});

// Atom projections convolved with a Gaussian of the given width and
// renormalized on the radial grid.
SliceMeasureFamily smooth_project(const DiscreteMeasure& mu, const DirectionSet& dirs, const RGrid& grid,
                                  double bandwidth);

// Header "N_theta,N_r,L_r", then rows "theta_index,r_index,value".
void write_sliced_csv(std::ostream& out, const SlicedField& g);

}  // namespace swgeo
