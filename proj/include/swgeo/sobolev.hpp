#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <vector>

#include "swgeo/core.hpp"
#include "swgeo/measures.hpp"
#include "swgeo/radon.hpp"

namespace swgeo {

// Unitary Fourier transform of a zero-padded grid field (d = 1 or 2), real
// half-spectrum along the last axis.
struct SpectralField {
    std::vector<std::size_t> shape;  // padded real shape
    std::vector<double> dxi;         // frequency spacing per axis
    std::vector<std::complex<double>> coeffs;

    std::size_t half_last() const { return shape.back() / 2 + 1; }
    // Frequency along an axis for a raw index.
    double frequency(std::size_t axis, std::size_t index) const;
    double cell() const;  // product of the spacings
};

SpectralField spectrum(const GridField& f, std::size_t padding);

// (sum over xi of |xi|^{2t} (1+|xi|^2)^{s-t} |F f(xi)|^2 dxi)^{1/2}. The zero
// bin is dropped for t != 0. For t < 0 the field must be mean-zero, else the
// result is flagged infinite.
FlaggedValue hts_norm_grid(const GridField& f, double s, double t);

// Norm on the Radon domain with weight |zeta|^{2s}, prefactor 1/(2 (2 pi)^{d-1})
// against the unnormalized sphere measure.
FlaggedValue hdot_norm_sliced(const SlicedField& g, double s);

// Relative gap between the plane norm of order -(d+1)/2 and the sliced norm
// of order -1 of the transform.
double isometry_gap(const GridField& f, const DirectionSet& dirs, const RGrid& grid);

// Applies a radial Fourier multiplier m(|xi|) to a 2D grid field.
GridField radial_multiplier(const GridField& f, const std::function<double(double)>& symbol, std::size_t padding = 2);

double sphere_area(std::size_t dim);

}  // namespace swgeo
