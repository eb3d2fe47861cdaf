#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "swgeo/core.hpp"

namespace swgeo {

// A probability measure on the line, stored through its quantile function.
// Piece i covers cumulative mass (u[i], u[i+1]] and maps it linearly onto
// [lo[i], hi[i]]: lo == hi is an atom, lo < hi a uniform density block. Atoms
// and piecewise-constant grid densities are both exact in this form.
class Slice1D {
public:
    struct Segment {
        double lo;
        double hi;
        double mass;
    };

    // Atoms at arbitrary positions; sorted internally.
    static Slice1D from_atoms(std::span<const double> positions, std::span<const double> weights);
    // Piecewise-constant density on cells centered at first_center + j*step.
    // Values are clamped at zero (tiny negatives only) and renormalized.
    static Slice1D from_grid(double first_center, double step, std::span<const double> values);
    // Non-overlapping blocks sorted by position; mass is renormalized.
    static Slice1D from_segments(std::vector<Segment> segments);
    // Sum of blocks and atoms in any order, overlaps allowed; mass is
    // renormalized.
    static Slice1D from_mixture(const std::vector<Segment>& parts);

    std::size_t pieces() const { return lo_.size(); }
    double u(std::size_t i) const { return u_[i]; }
    double lo(std::size_t i) const { return lo_[i]; }
    double hi(std::size_t i) const { return hi_[i]; }
    bool is_atom(std::size_t i) const { return hi_[i] == lo_[i]; }
    bool has_atoms() const;
    bool has_density() const;

    // Right-continuous distribution function.
    double cdf(double r) const;
    // Generalized inverse inf{r : F(r) >= u}, u in [0, 1].
    double quantile(double u) const;
    // Density value at r (0 off the density blocks, and at atoms).
    double density(double r) const;
    double mean() const;
    double support_lo() const { return lo_.front(); }
    double support_hi() const { return hi_.back(); }

    // Quantile on piece i evaluated at cumulative mass u.
    double quantile_on(std::size_t i, double u) const;

private:
    Slice1D() = default;
    static Slice1D build(std::vector<Segment> segments, bool merge_atoms);

    std::vector<double> u_;
    std::vector<double> lo_;
    std::vector<double> hi_;
};

enum class SliceQuery { cdf, quantile };
double cdf_quantile(const Slice1D& s, SliceQuery mode, double query);

double w_p_1d(const Slice1D& mu, const Slice1D& nu, double p);
double w_infty_1d(const Slice1D& mu, const Slice1D& nu);
// p-th power of W_p, avoids a root/power round trip in sliced sums.
double w_p_pow_1d(const Slice1D& mu, const Slice1D& nu, double p);
Slice1D displacement_1d(const Slice1D& mu, const Slice1D& nu, double t);

struct WeightedNorm {
    FlaggedValue norm;
    // Integral of (F_mu - F_nu)^2 over the region dropped by the clip.
    double clipped_tail = 0.0;
};

// (int (F_mu - F_nu)^2 / f_sigma dr)^{1/2}, integrated exactly on the
// piecewise-linear class, over {F_sigma (1 - F_sigma) > clip}.
WeightedNorm weighted_hneg1(const Slice1D& mu, const Slice1D& nu, const Slice1D& sigma, double clip = 1e-12);

}  // namespace swgeo
