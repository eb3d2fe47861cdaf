#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "swgeo/random.hpp"

namespace swgeo {

// Weighted point cloud in R^d; weights are positive and sum to one.
class DiscreteMeasure {
public:
    // coords holds the points row by row (size n * dim).
    DiscreteMeasure(std::size_t dim, std::vector<double> coords, std::vector<double> weights);

    std::size_t dim() const { return dim_; }
    std::size_t size() const { return weights_.size(); }
    std::span<const double> point(std::size_t i) const { return {coords_.data() + i * dim_, dim_}; }
    double weight(std::size_t i) const { return weights_[i]; }
    const std::vector<double>& weights() const { return weights_; }
    const std::vector<double>& coords() const { return coords_; }
    bool uniform_weights() const;

private:
    std::size_t dim_;
    std::vector<double> coords_;
    std::vector<double> weights_;
};

// Omitted weights mean uniform 1/n; given weights are normalized.
DiscreteMeasure from_points(const std::vector<std::vector<double>>& points,
                            const std::optional<std::vector<double>>& weights = std::nullopt);
DiscreteMeasure dirac(std::vector<double> x);

// Merges atoms at identical positions. Never done implicitly.
DiscreteMeasure canonicalize(const DiscreteMeasure& mu);
// Smallest distance between two atoms (l_mu); 0 with coincident atoms.
double min_pairwise_gap(const DiscreteMeasure& mu);
DiscreteMeasure translated(const DiscreteMeasure& mu, std::span<const double> shift);

struct Box {
    std::vector<double> lo;
    std::vector<double> hi;
    std::size_t dim() const { return lo.size(); }
};

// Real values at the cell centers of a uniform box grid, row-major with the
// last axis fastest. Integrals use midpoint quadrature.
class GridField {
public:
    GridField(Box box, std::vector<std::size_t> shape, std::vector<double> values);
    GridField(Box box, std::vector<std::size_t> shape);  // zeros

    const Box& box() const { return box_; }
    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t dim() const { return shape_.size(); }
    std::size_t size() const { return values_.size(); }
    double spacing(std::size_t axis) const;
    double cell_volume() const;
    double center(std::size_t axis, std::size_t i) const;
    // Cell center of the flat index.
    std::vector<double> center_of(std::size_t flat) const;

    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }
    double& operator[](std::size_t i) { return values_[i]; }
    double operator[](std::size_t i) const { return values_[i]; }

    double integral() const;
    // Bilinear interpolation of cell-center values, zero beyond the outer
    // centers (d = 2 only).
    double sample(double x, double y) const;

    bool same_grid(const GridField& other) const;

private:
    Box box_;
    std::vector<std::size_t> shape_;
    std::vector<double> values_;
};

GridField make_field(const Box& box, const std::vector<std::size_t>& shape,
                     const std::function<double(std::span<const double>)>& fn);

// Nonnegative grid field with unit mass.
class GridDensity {
public:
    // Validates nonnegativity and unit mass (1e-9).
    explicit GridDensity(GridField field);
    // Rescales to unit mass.
    static GridDensity normalized(GridField field);

    const GridField& field() const { return field_; }
    std::size_t dim() const { return field_.dim(); }

private:
    GridField field_;
};

GridDensity make_density(const Box& box, const std::vector<std::size_t>& shape,
                         const std::function<double(std::span<const double>)>& fn);

// Draws one point into out (size = dim).
using PointSampler = std::function<void(Rng&, std::span<double>)>;

DiscreteMeasure sample_empirical(const GridDensity& density, std::size_t n, RandomSeed seed);
DiscreteMeasure sample_empirical(const PointSampler& sampler, std::size_t dim, std::size_t n,
                                 RandomSeed seed);

double second_moment(const DiscreteMeasure& mu);
double second_moment(const GridDensity& mu);

// Bottleneck distance between equal-size uniform clouds.
double winfty_discrete(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

// CSV: header "dim,n", rows "x1,...,xd,weight".
DiscreteMeasure read_measure_csv(std::istream& in);
void write_measure_csv(std::ostream& out, const DiscreteMeasure& mu);
// Grid text: "box lo... hi...", "shape n1 ... nd", then values row-major.
GridField read_grid(std::istream& in);
void write_grid(std::ostream& out, const GridField& f);

}  // namespace swgeo
