#include "swgeo/sobolev.hpp"

#include <cmath>
#include <numbers>

#include "fft.hpp"
#include "quadrature.hpp"

namespace swgeo {

namespace {

constexpr double kMeanTolerance = 1e-9;

double weight(double xi, double s, double t) {
    const double x2 = xi * xi;
    double w = t == 0.0 ? 1.0 : std::pow(x2, t);
    if (s != t) w *= std::pow(1.0 + x2, s - t);
    return w;
}

bool mean_zero(double mean, double abs_mass) { return std::abs(mean) <= kMeanTolerance * std::max(1.0, abs_mass); }

// Negative orders make the integrand singular at the origin, where a lattice
// sum is only first-order accurate. A smooth partition hands the band
// |xi| < band to a Gauss rule on directly evaluated transforms; the lattice
// keeps the (smooth) remainder.
constexpr double kBandBins = 16.0;

double band_share(double xi, double band) { return quad::smooth_cutoff(xi, 0.5 * band, band); }

// Unitary transform of a 2D grid field at an arbitrary frequency (modulus only
// is used, so coordinates are taken relative to the box center).
double transform_sq_2d(const GridField& f, double xi0, double xi1) {
    const std::size_t n0 = f.shape()[0], n1 = f.shape()[1];
    const double c0 = 0.5 * (f.box().lo[0] + f.box().hi[0]), c1 = 0.5 * (f.box().lo[1] + f.box().hi[1]);
    std::vector<std::complex<double>> ey(n1);
    for (std::size_t j = 0; j < n1; ++j) {
        const double ph = -xi1 * (f.center(1, j) - c1);
        ey[j] = {std::cos(ph), std::sin(ph)};
    }
    std::complex<double> total = 0.0;
    for (std::size_t i = 0; i < n0; ++i) {
        std::complex<double> row = 0.0;
        const double* v = f.values().data() + i * n1;
        for (std::size_t j = 0; j < n1; ++j) row += v[j] * ey[j];
        const double ph = -xi0 * (f.center(0, i) - c0);
        total += std::complex<double>(std::cos(ph), std::sin(ph)) * row;
    }
    return std::norm(total * (f.cell_volume() / (2.0 * std::numbers::pi)));
}

double transform_sq_1d(std::span<const double> g, double first, double step, double zeta) {
    const double center = first + 0.5 * step * static_cast<double>(g.size() - 1);
    std::complex<double> total = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) {
        if (g[j] == 0.0) continue;
        const double ph = -zeta * (first + step * static_cast<double>(j) - center);
        total += g[j] * std::complex<double>(std::cos(ph), std::sin(ph));
    }
    return std::norm(total * step) / (2.0 * std::numbers::pi);
}

double half_diagonal(const Box& box) {
    double r2 = 0.0;
    for (std::size_t a = 0; a < box.dim(); ++a) r2 += 0.25 * (box.hi[a] - box.lo[a]) * (box.hi[a] - box.lo[a]);
    return std::sqrt(r2);
}

}  // namespace

double SpectralField::frequency(std::size_t axis, std::size_t index) const {
    const std::size_t n = shape[axis];
    if (axis + 1 == shape.size()) return dxi[axis] * static_cast<double>(index);
    const long signed_index = index <= n / 2 ? static_cast<long>(index) : static_cast<long>(index) - static_cast<long>(n);
    return dxi[axis] * static_cast<double>(signed_index);
}

double SpectralField::cell() const {
    double c = 1.0;
    for (double v : dxi) c *= v;
    return c;
}

SpectralField spectrum(const GridField& f, std::size_t padding) {
    const std::size_t d = f.dim();
    if (d > 2) throw InputError("spectral norms are implemented for d = 1 and d = 2");
    SpectralField out;
    for (std::size_t a = 0; a < d; ++a) {
        out.shape.push_back(padding * f.shape()[a]);
        out.dxi.push_back(2.0 * std::numbers::pi / (static_cast<double>(out.shape[a]) * f.spacing(a)));
    }
    const double norm = f.cell_volume() / std::pow(2.0 * std::numbers::pi, 0.5 * static_cast<double>(d));
    if (d == 1) {
        std::vector<double> buf(out.shape[0], 0.0);
        std::copy(f.values().begin(), f.values().end(), buf.begin());
        out.coeffs.resize(out.half_last());
        fft::forward_1d(buf, out.coeffs);
    } else {
        const std::size_t n0 = out.shape[0], n1 = out.shape[1];
        std::vector<double> buf(n0 * n1, 0.0);
        for (std::size_t i = 0; i < f.shape()[0]; ++i)
            for (std::size_t j = 0; j < f.shape()[1]; ++j) buf[i * n1 + j] = f[i * f.shape()[1] + j];
        out.coeffs.resize(n0 * out.half_last());
        fft::forward_2d(n0, n1, buf, out.coeffs);
    }
    for (auto& c : out.coeffs) c *= norm;
    return out;
}

namespace {

double low_band_grid(const GridField& f, double s, double t, double band) {
    const double reach = band * half_diagonal(f.box());
    const auto radial = quad::gauss_legendre(std::max<std::size_t>(32, static_cast<std::size_t>(std::ceil(reach))), 0.0, band);
    if (f.dim() == 1) {
        double acc = 0.0;
        const GridField& g = f;
        for (std::size_t q = 0; q < radial.nodes.size(); ++q) {
            const double z = radial.nodes[q];
            acc += radial.weights[q] * band_share(z, band) * weight(z, s, t) *
                   transform_sq_1d(g.values(), g.center(0, 0), g.spacing(0), z);
        }
        return 2.0 * acc;
    }
    // Even integrand: half circle, doubled.
    const std::size_t n_angle = std::max<std::size_t>(64, static_cast<std::size_t>(std::ceil(2.0 * reach)));
    const double dphi = std::numbers::pi / static_cast<double>(n_angle);
    std::vector<double> rings(radial.nodes.size(), 0.0);
    parallel_for(radial.nodes.size(), [&](std::size_t q) {
        const double rho = radial.nodes[q];
        double ring = 0.0;
        for (std::size_t a = 0; a < n_angle; ++a) {
            const double phi = dphi * static_cast<double>(a);
            ring += transform_sq_2d(f, rho * std::cos(phi), rho * std::sin(phi));
        }
        rings[q] = radial.weights[q] * band_share(rho, band) * weight(rho, s, t) * rho * ring * dphi * 2.0;
    });
    return ordered_sum(rings);
}

}  // namespace

FlaggedValue hts_norm_grid(const GridField& f, double s, double t) {
    const double d = static_cast<double>(f.dim());
    // Mean-zero inputs vanish to first order at the origin, which extends
    // integrability one order below -d/2.
    if (t <= -0.5 * d - 1.0) throw InputError("order t is outside the range where the norm is defined");
    if (t < 0.0) {
        double mean = 0.0, abs_mass = 0.0;
        for (double v : f.values()) {
            mean += v;
            abs_mass += std::abs(v);
        }
        if (!mean_zero(mean * f.cell_volume(), abs_mass * f.cell_volume()))
            return FlaggedValue::infinite("negative-order norm of a field with nonzero mean");
    }
    const SpectralField sp = spectrum(f, t < 0.0 ? 4 : 2);
    double band = 0.0;
    if (t < 0.0)
        for (double dx : sp.dxi) band = std::max(band, kBandBins * dx);
    const std::size_t h = sp.half_last();
    const std::size_t n_last = sp.shape.back();
    const std::size_t rows = sp.coeffs.size() / h;
    std::vector<double> partial(rows, 0.0);
    parallel_for(rows, [&](std::size_t i) {
        const double xi0 = sp.shape.size() == 2 ? sp.frequency(0, i) : 0.0;
        double acc = 0.0;
        for (std::size_t j = 0; j < h; ++j) {
            const double xi1 = sp.frequency(sp.shape.size() - 1, j);
            const double xi = std::hypot(xi0, xi1);
            if (xi == 0.0 && t != 0.0) continue;
            // Columns other than 0 and Nyquist stand for a conjugate pair.
            const double mult = (j == 0 || (n_last % 2 == 0 && j == n_last / 2)) ? 1.0 : 2.0;
            const double keep = band > 0.0 ? 1.0 - band_share(xi, band) : 1.0;
            if (keep == 0.0) continue;
            acc += mult * keep * weight(xi, s, t) * std::norm(sp.coeffs[i * h + j]);
        }
        partial[i] = acc;
    });
    double total = ordered_sum(partial) * sp.cell();
    if (band > 0.0) total += low_band_grid(f, s, t, band);
    return {std::sqrt(total), true, {}};
}

double sphere_area(std::size_t dim) {
    const double d = static_cast<double>(dim);
    return 2.0 * std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d);
}

FlaggedValue hdot_norm_sliced(const SlicedField& g, double s) {
    const DirectionSet& dirs = g.directions();
    const RGrid& grid = g.grid();
    const std::size_t padding = s < 0.0 ? 4 : 2;
    const std::size_t m = padding * grid.count;
    const double dzeta = 2.0 * std::numbers::pi / (static_cast<double>(m) * grid.step());
    const double norm = grid.step() / std::sqrt(2.0 * std::numbers::pi);
    const double band = s < 0.0 ? kBandBins * dzeta : 0.0;
    const quad::Rule radial = quad::gauss_legendre(
        std::max<std::size_t>(32, static_cast<std::size_t>(std::ceil(band * grid.half_width))), 0.0, band > 0.0 ? band : 1.0);
    std::vector<double> per_slice(dirs.size(), 0.0);
    std::vector<char> nonzero_mean(dirs.size(), 0);
    parallel_for(dirs.size(), [&](std::size_t k) {
        const auto sl = g.slice(k);
        if (s < 0.0) {
            double mean = 0.0, abs_mass = 0.0;
            for (double v : sl) {
                mean += v;
                abs_mass += std::abs(v);
            }
            if (!mean_zero(mean * grid.step(), abs_mass * grid.step())) {
                nonzero_mean[k] = 1;
                return;
            }
        }
        std::vector<double> buf(m, 0.0);
        std::copy(sl.begin(), sl.end(), buf.begin());
        std::vector<std::complex<double>> spec(m / 2 + 1);
        fft::forward_1d(buf, spec);
        double acc = 0.0;
        for (std::size_t q = 0; q < spec.size(); ++q) {
            const double z = dzeta * static_cast<double>(q);
            if (q == 0 && s != 0.0) continue;
            const double mult = (q == 0 || q == m / 2) ? 1.0 : 2.0;
            const double keep = band > 0.0 ? 1.0 - band_share(z, band) : 1.0;
            if (keep == 0.0) continue;
            acc += mult * keep * weight(z, s, s) * std::norm(spec[q] * norm);
        }
        acc *= dzeta;
        if (band > 0.0) {
            double low = 0.0;
            for (std::size_t q = 0; q < radial.nodes.size(); ++q) {
                const double z = radial.nodes[q];
                low += radial.weights[q] * band_share(z, band) * weight(z, s, s) *
                       transform_sq_1d(sl, grid.r(0), grid.step(), z);
            }
            acc += 2.0 * low;
        }
        per_slice[k] = dirs.weight(k) * acc;
    });
    for (std::size_t k = 0; k < dirs.size(); ++k)
        if (nonzero_mean[k]) return FlaggedValue::infinite("slice " + std::to_string(k) + " is not mean-zero");
    const double d = static_cast<double>(dirs.dim());
    const double pref = sphere_area(dirs.dim()) / (2.0 * std::pow(2.0 * std::numbers::pi, d - 1.0));
    return {std::sqrt(pref * ordered_sum(per_slice)), true, {}};
}

double isometry_gap(const GridField& f, const DirectionSet& dirs, const RGrid& grid) {
    if (f.dim() != 2) throw InputError("isometry check is two-dimensional");
    const double order = -0.5 * (static_cast<double>(f.dim()) + 1.0);
    const FlaggedValue plane = hts_norm_grid(f, order, order);
    const FlaggedValue sliced = hdot_norm_sliced(radon_grid(f, dirs, grid), -1.0);
    if (!plane.finite || !sliced.finite) throw NumericalError("isometry check needs a mean-zero field");
    if (plane.value == 0.0) return sliced.value == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return std::abs(plane.value - sliced.value) / plane.value;
}

GridField radial_multiplier(const GridField& f, const std::function<double(double)>& symbol, std::size_t padding) {
    if (f.dim() != 2) throw InputError("radial multiplier is implemented for d = 2");
    SpectralField sp = spectrum(f, padding);
    const std::size_t n0 = sp.shape[0], n1 = sp.shape[1], h = sp.half_last();
    for (std::size_t i = 0; i < n0; ++i)
        for (std::size_t j = 0; j < h; ++j) sp.coeffs[i * h + j] *= symbol(std::hypot(sp.frequency(0, i), sp.frequency(1, j)));
    std::vector<double> buf(n0 * n1);
    fft::inverse_2d(n0, n1, sp.coeffs, buf);
    // Undo the unitary scaling and the unnormalized inverse.
    const double back = 2.0 * std::numbers::pi / (f.cell_volume() * static_cast<double>(n0 * n1));
    GridField out(f.box(), f.shape());
    for (std::size_t i = 0; i < f.shape()[0]; ++i)
        for (std::size_t j = 0; j < f.shape()[1]; ++j) out[i * f.shape()[1] + j] = buf[i * n1 + j] * back;
    return out;
}

}  // namespace swgeo
