#include "swgeo/radon.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <iomanip>
#include <numbers>
#include <ostream>

#include "fft.hpp"
#include "swgeo/core.hpp"

namespace swgeo {

DirectionSet::DirectionSet(std::size_t dim, std::vector<double> coords, std::vector<double> weights,
                           DirectionScheme scheme)
    : dim_(dim), coords_(std::move(coords)), weights_(std::move(weights)), scheme_(scheme) {
    if (dim_ < 2 || dim_ > 3) throw InputError("directions are supported for d = 2 and d = 3");
    if (weights_.empty() || coords_.size() != dim_ * weights_.size()) throw InputError("direction set size mismatch");
    double total = 0.0;
    for (double w : weights_) {
        if (!(w > 0.0)) throw InputError("direction weights must be positive");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-12) throw InputError("direction weights must sum to one");
    for (std::size_t k = 0; k < size(); ++k) {
        double n2 = 0.0;
        for (double c : direction(k)) n2 += c * c;
        if (std::abs(std::sqrt(n2) - 1.0) > 1e-12) throw InputError("direction is not a unit vector");
    }
}

namespace {

// Flips v onto the representative half-sphere: last nonzero coordinate > 0.
void to_half_sphere(std::span<double> v) {
    for (std::size_t a = v.size(); a-- > 0;) {
        if (v[a] == 0.0) continue;
        if (v[a] < 0.0)
            for (double& c : v) c = -c;
        return;
    }
}

}  // namespace

DirectionSet make_directions(std::size_t dim, std::size_t count, DirectionScheme scheme, std::optional<RandomSeed> seed) {
    if (dim < 2 || dim > 3) throw InputError("unsupported dimension for directions");
    if (count < 2) throw InputError("need at least two directions");
    std::vector<double> coords(dim * count);
    const double n = static_cast<double>(count);
    switch (scheme) {
        case DirectionScheme::equiangular: {
            if (dim != 2) throw InputError("equiangular directions are two-dimensional");
            for (std::size_t k = 0; k < count; ++k) {
                const double a = std::numbers::pi * static_cast<double>(k) / n;
                coords[2 * k] = std::cos(a);
                coords[2 * k + 1] = std::sin(a);
            }
            break;
        }
        case DirectionScheme::fibonacci: {
            if (dim != 3) throw InputError("spiral directions are three-dimensional");
            // Spiral nodes on the upper half sphere, each paired with its quarter
            // turn about the pole so the two horizontal axes are balanced.
            const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
            const std::size_t base = (count + 1) / 2;
            for (std::size_t k = 0; k < count; ++k) {
                const std::size_t j = k / 2;
                const double z = (static_cast<double>(j) + 0.5) / static_cast<double>(base);
                const double rho = std::sqrt(1.0 - z * z);
                const double phi = golden * static_cast<double>(j) + (k % 2 ? 0.5 * std::numbers::pi : 0.0);
                coords[3 * k] = rho * std::cos(phi);
                coords[3 * k + 1] = rho * std::sin(phi);
                coords[3 * k + 2] = z;
            }
            break;
        }
        case DirectionScheme::monte_carlo: {
            Rng rng(seed.value_or(RandomSeed{0}));
            for (std::size_t k = 0; k < count; ++k) {
                std::span<double> v(coords.data() + k * dim, dim);
                double n2 = 0.0;
                while (n2 < 1e-20) {
                    n2 = 0.0;
                    for (double& c : v) {
                        c = rng.normal();
                        n2 += c * c;
                    }
                }
                const double inv = 1.0 / std::sqrt(n2);
                for (double& c : v) c *= inv;
                to_half_sphere(v);
            }
            break;
        }
    }
    return DirectionSet(dim, std::move(coords), std::vector<double>(count, 1.0 / n), scheme);
}

RGrid RGrid::covering_radius(double radius, double max_step) {
    if (!(radius > 0.0) || !(max_step > 0.0)) throw InputError("radial grid needs positive radius and step");
    const double half = 1.5 * radius;
    std::size_t count = 8;
    while (2.0 * half / static_cast<double>(count) > max_step) count *= 2;
    return {half, count};
}

RGrid RGrid::covering(const Box& box, double max_step) {
    double r2 = 0.0;
    for (std::size_t a = 0; a < box.dim(); ++a) {
        const double m = std::max(std::abs(box.lo[a]), std::abs(box.hi[a]));
        r2 += m * m;
    }
    return covering_radius(std::sqrt(r2), max_step);
}

SlicedField::SlicedField(DirectionSet dirs, RGrid grid, int parity)
    : SlicedField(dirs, grid, std::vector<double>(dirs.size() * grid.count, 0.0), parity) {}

SlicedField::SlicedField(DirectionSet dirs, RGrid grid, std::vector<double> values, int parity)
    : dirs_(std::move(dirs)), grid_(grid), values_(std::move(values)), parity_(parity) {
    if (grid_.count < 8) throw InputError("radial grid needs at least 8 points");
    if (values_.size() != dirs_.size() * grid_.count) throw InputError("sliced field size mismatch");
    if (parity_ != 1 && parity_ != -1) throw InputError("parity must be +1 or -1");
}

Slice1D project_discrete(const DiscreteMeasure& mu, std::span<const double> theta) {
    if (theta.size() != mu.dim()) throw InputError("direction dimension differs from measure dimension");
    std::vector<double> pos(mu.size());
    for (std::size_t i = 0; i < mu.size(); ++i) {
        const auto x = mu.point(i);
        double s = 0.0;
        for (std::size_t a = 0; a < x.size(); ++a) s += x[a] * theta[a];
        pos[i] = s;
    }
    return Slice1D::from_atoms(pos, mu.weights());
}

SliceMeasureFamily project_discrete(const DiscreteMeasure& mu, const DirectionSet& dirs) {
    if (dirs.dim() != mu.dim()) throw InputError("direction dimension differs from measure dimension");
    std::vector<std::optional<Slice1D>> tmp(dirs.size());
    parallel_for(dirs.size(), [&](std::size_t k) { tmp[k] = project_discrete(mu, dirs.direction(k)); });
    SliceMeasureFamily fam{dirs, {}};
    fam.slices.reserve(dirs.size());
    for (auto& s : tmp) fam.slices.push_back(std::move(*s));
    return fam;
}

namespace {

// Line sums over the box at the given step along each line x . theta = r.
template <class Sampler>
SlicedField line_sums(const Sampler& sample, double xlo, double xhi, double ylo, double yhi, double step,
                      const DirectionSet& dirs, const RGrid& grid) {
    SlicedField out(dirs, grid);
    parallel_for(dirs.size(), [&](std::size_t k) {
        const double c = dirs.direction(k)[0], s = dirs.direction(k)[1];
        auto row = out.slice(k);
        for (std::size_t j = 0; j < grid.count; ++j) {
            const double r = grid.r(j);
            const double px = r * c, py = r * s;  // foot point; line runs along (-s, c)
            double tmin = -std::numeric_limits<double>::infinity(), tmax = std::numeric_limits<double>::infinity();
            auto clip = [&](double p, double d, double lo, double hi) {
                if (std::abs(d) < 1e-15) {
                    if (p < lo || p > hi) tmin = 1.0, tmax = 0.0;
                    return;
                }
                double t0 = (lo - p) / d, t1 = (hi - p) / d;
                if (t0 > t1) std::swap(t0, t1);
                tmin = std::max(tmin, t0);
                tmax = std::min(tmax, t1);
            };
            clip(px, -s, xlo, xhi);
            clip(py, c, ylo, yhi);
            if (!(tmax > tmin)) continue;
            const long m0 = static_cast<long>(std::ceil(tmin / step));
            const long m1 = static_cast<long>(std::floor(tmax / step));
            double acc = 0.0;
            for (long m = m0; m <= m1; ++m) {
                const double t = static_cast<double>(m) * step;
                acc += sample(px - t * s, py + t * c);
            }
            row[j] = acc * step;
        }
    });
    return out;
}

// Quadratic B-spline weights of the three nearest cells for fractional offset t in [-1/2, 1/2].
struct SplineTaps {
    long first;
    double w[3];
};

SplineTaps spline_taps(double frac_index) {
    const double centre = std::round(frac_index);
    const double t = frac_index - centre;
    return {static_cast<long>(centre) - 1, {0.5 * (0.5 - t) * (0.5 - t), 0.75 - t * t, 0.5 * (0.5 + t) * (0.5 + t)}};
}

// C1 nonnegative representation of cell values: each value carries a
// quadratic B-spline of unit mass, so slices are differentiable in every
// direction, including the grid axes.
double spline_sample(const GridField& f, double x, double y) {
    const long nx = static_cast<long>(f.shape()[0]), ny = static_cast<long>(f.shape()[1]);
    const SplineTaps sx = spline_taps((x - f.box().lo[0]) / f.spacing(0) - 0.5);
    const SplineTaps sy = spline_taps((y - f.box().lo[1]) / f.spacing(1) - 0.5);
    double acc = 0.0;
    for (int a = 0; a < 3; ++a) {
        const long i = sx.first + a;
        if (i < 0 || i >= nx) continue;
        double row = 0.0;
        for (int b = 0; b < 3; ++b) {
            const long j = sy.first + b;
            if (j < 0 || j >= ny) continue;
            row += sy.w[b] * f[static_cast<std::size_t>(i * ny + j)];
        }
        acc += sx.w[a] * row;
    }
    return acc;
}

}  // namespace

SlicedField radon_grid(const GridField& f, const DirectionSet& dirs, const RGrid& grid) {
    if (f.dim() != 2 || dirs.dim() != 2) throw InputError("grid Radon transform is two-dimensional");
    const double hx = f.spacing(0), hy = f.spacing(1);
    // The spline vanishes one cell beyond the box.
    return line_sums([&f](double x, double y) { return spline_sample(f, x, y); }, f.box().lo[0] - hx, f.box().hi[0] + hx,
                     f.box().lo[1] - hy, f.box().hi[1] + hy, std::min(hx, hy), dirs, grid);
}

SlicedField radon_function(const std::function<double(std::span<const double>)>& fn, const Box& box, double step,
                           const DirectionSet& dirs, const RGrid& grid) {
    if (box.dim() != 2 || dirs.dim() != 2) throw InputError("Radon transform of a function is two-dimensional");
    if (!(step > 0.0)) throw InputError("line step must be positive");
    return line_sums(
        [&fn](double x, double y) {
            const double p[2] = {x, y};
            return fn(std::span<const double>(p, 2));
        },
        box.lo[0], box.hi[0], box.lo[1], box.hi[1], step, dirs, grid);
}

SliceMeasureFamily slice_measures(const SlicedField& g) {
    if (g.parity() != 1) throw InputError("odd sliced field is not a family of measures");
    std::vector<std::optional<Slice1D>> tmp(g.directions().size());
    const RGrid& grid = g.grid();
    parallel_for(tmp.size(), [&](std::size_t k) { tmp[k] = Slice1D::from_grid(grid.r(0), grid.step(), g.slice(k)); });
    SliceMeasureFamily fam{g.directions(), {}};
    for (auto& s : tmp) fam.slices.push_back(std::move(*s));
    return fam;
}

GridField dual_radon(const SlicedField& g, const Box& box, const std::vector<std::size_t>& shape) {
    GridField out(box, shape);
    const DirectionSet& dirs = g.directions();
    if (dirs.dim() != shape.size()) throw InputError("target grid dimension differs from the directions");
    // Odd fields average to zero over the full sphere.
    if (g.parity() != 1) return out;
    const RGrid& grid = g.grid();
    const double inv_step = 1.0 / grid.step();
    const long last = static_cast<long>(grid.count) - 1;
    const std::size_t d = dirs.dim();
    const std::size_t rows = shape[0];
    const std::size_t per_row = out.size() / rows;
    parallel_for(rows, [&](std::size_t row) {
        for (std::size_t q = row * per_row; q < (row + 1) * per_row; ++q) {
            const auto x = out.center_of(q);
            double acc = 0.0;
            for (std::size_t k = 0; k < dirs.size(); ++k) {
                const auto th = dirs.direction(k);
                double r = 0.0;
                for (std::size_t a = 0; a < d; ++a) r += x[a] * th[a];
                const double fr = (r + grid.half_width) * inv_step - 0.5;
                if (fr <= -1.0 || fr >= static_cast<double>(last + 1)) continue;
                const double fl = std::floor(fr);
                const long j0 = static_cast<long>(fl);
                const double t = fr - fl;
                const double v0 = j0 >= 0 ? g.at(k, static_cast<std::size_t>(j0)) : 0.0;
                const double v1 = j0 + 1 <= last ? g.at(k, static_cast<std::size_t>(j0 + 1)) : 0.0;
                acc += dirs.weight(k) * ((1.0 - t) * v0 + t * v1);
            }
            out[q] = acc;
        }
    });
    return out;
}

SlicedField slice_multiplier(const SlicedField& g, double a, int b, std::size_t padding) {
    if (a < 0.0 || (b != 0 && b != 1)) throw InputError("multiplier needs a >= 0 and b in {0,1}");
    if (padding < 1) throw InputError("padding factor must be at least 1");
    const RGrid& grid = g.grid();
    const std::size_t n = grid.count, m = padding * n;
    const double dzeta = 2.0 * std::numbers::pi / (static_cast<double>(m) * grid.step());
    std::vector<std::complex<double>> symbol(m / 2 + 1);
    for (std::size_t q = 0; q <= m / 2; ++q) {
        const double z = dzeta * static_cast<double>(q);
        std::complex<double> s = (a == 0.0) ? 1.0 : (q == 0 ? 0.0 : std::pow(z, a));
        if (b == 1) s *= std::complex<double>(0.0, z);
        symbol[q] = s;
    }
    // Odd derivatives have no real representation at the Nyquist frequency.
    if (b == 1 && m % 2 == 0) symbol[m / 2] = 0.0;

    SlicedField out(g.directions(), grid, b == 1 ? -g.parity() : g.parity());
    std::vector<double> failures(g.directions().size(), 0.0);
    parallel_for(g.directions().size(), [&](std::size_t k) {
        const auto in = g.slice(k);
        double peak = 0.0;
        for (double v : in) peak = std::max(peak, std::abs(v));
        if (peak == 0.0) return;
        if (std::max(std::abs(in.front()), std::abs(in.back())) > 1e-6 * peak) {
            failures[k] = 1.0;
            return;
        }
        std::vector<double> buf(m, 0.0);
        std::copy(in.begin(), in.end(), buf.begin());
        std::vector<std::complex<double>> spec(m / 2 + 1);
        fft::forward_1d(buf, spec);
        for (std::size_t q = 0; q < spec.size(); ++q) spec[q] *= symbol[q];
        fft::inverse_1d(spec, buf);
        auto dst = out.slice(k);
        const double scale = 1.0 / static_cast<double>(m);
        for (std::size_t j = 0; j < n; ++j) dst[j] = buf[j] * scale;
    });
    for (std::size_t k = 0; k < failures.size(); ++k)
        if (failures[k] != 0.0)
            throw NumericalError("slice " + std::to_string(k) +
                                 " does not decay at the radial grid ends; periodization would corrupt the multiplier");
    return out;
}

SlicedField times_direction_component(const SlicedField& g, std::size_t axis) {
    const DirectionSet& dirs = g.directions();
    if (axis >= dirs.dim()) throw InputError("direction component out of range");
    SlicedField out(dirs, g.grid(), g.values(), -g.parity());
    for (std::size_t k = 0; k < dirs.size(); ++k) {
        const double c = dirs.direction(k)[axis];
        for (double& v : out.slice(k)) v *= c;
    }
    return out;
}

double inversion_constant(std::size_t dim) {
    const double d = static_cast<double>(dim);
    return std::pow(4.0 * std::numbers::pi, 0.5 * (d - 1.0)) * std::tgamma(0.5 * d) / std::tgamma(0.5);
}

GridField invert_radon(const SlicedField& g, const Box& box, const std::vector<std::size_t>& shape) {
    const std::size_t d = g.directions().dim();
    GridField out = dual_radon(slice_multiplier(g, static_cast<double>(d - 1), 0), box, shape);
    const double inv = 1.0 / inversion_constant(d);
    for (double& v : out.values()) v *= inv;
    return out;
}

double fourier_slice_gap(const GridField& f, const DirectionSet& dirs, const RGrid& grid, const FourierSliceOptions& opts) {
    if (f.dim() != 2) throw InputError("Fourier slice check is two-dimensional");
    std::vector<double> freqs = opts.frequencies;
    if (freqs.empty())
        for (int q = 0; q <= 16; ++q) freqs.push_back(0.5 * q);
    const SlicedField rf = radon_grid(f, dirs, grid);
    const std::size_t stride = std::max<std::size_t>(1, dirs.size() / std::max<std::size_t>(1, opts.directions));
    std::vector<std::size_t> picked;
    for (std::size_t k = 0; k < dirs.size() && picked.size() < opts.directions; k += stride) picked.push_back(k);

    const double two_pi = 2.0 * std::numbers::pi;
    const double area = f.cell_volume();
    std::vector<double> gaps(picked.size(), 0.0);
    parallel_for(picked.size(), [&](std::size_t p) {
        const std::size_t k = picked[p];
        const double c = dirs.direction(k)[0], s = dirs.direction(k)[1];
        double worst = 0.0;
        for (double z : freqs) {
            // Plane side, scaled by (2 pi)^{1/2}: (2 pi)^{-1/2} sum f e^{-i x.xi} dA.
            std::complex<double> plane = 0.0;
            for (std::size_t q = 0; q < f.size(); ++q) {
                if (f[q] == 0.0) continue;
                const auto x = f.center_of(q);
                const double ph = -z * (x[0] * c + x[1] * s);
                plane += f[q] * std::complex<double>(std::cos(ph), std::sin(ph));
            }
            plane *= area / std::sqrt(two_pi);
            std::complex<double> line = 0.0;
            const auto sl = rf.slice(k);
            for (std::size_t j = 0; j < grid.count; ++j) {
                const double ph = -z * grid.r(j);
                line += sl[j] * std::complex<double>(std::cos(ph), std::sin(ph));
            }
            line *= grid.step() / std::sqrt(two_pi);
            worst = std::max(worst, std::abs(plane - line));
        }
        gaps[p] = worst;
    });
    return gaps.empty() ? 0.0 : *std::max_element(gaps.begin(), gaps.end());
}

SliceMeasureFamily smooth_project(const DiscreteMeasure& mu, const DirectionSet& dirs, const RGrid& grid,
                                  double bandwidth) {
    if (!(bandwidth > 0.0)) throw InputError("smoothing bandwidth must be positive");
    if (dirs.dim() != mu.dim()) throw InputError("direction dimension differs from measure dimension");
    const double step = grid.step();
    const double reach = 8.0 * bandwidth;
    std::vector<std::optional<Slice1D>> tmp(dirs.size());
    parallel_for(dirs.size(), [&](std::size_t k) {
        const auto th = dirs.direction(k);
        std::vector<double> vals(grid.count, 0.0);
        for (std::size_t i = 0; i < mu.size(); ++i) {
            const auto x = mu.point(i);
            double c = 0.0;
            for (std::size_t a = 0; a < x.size(); ++a) c += x[a] * th[a];
            const double lo = (c - reach + grid.half_width) / step - 0.5;
            const double hi = (c + reach + grid.half_width) / step - 0.5;
            const long j0 = std::max(0L, static_cast<long>(std::ceil(lo)));
            const long j1 = std::min(static_cast<long>(grid.count) - 1, static_cast<long>(std::floor(hi)));
            for (long j = j0; j <= j1; ++j) {
                const double z = (grid.r(static_cast<std::size_t>(j)) - c) / bandwidth;
                vals[static_cast<std::size_t>(j)] += mu.weight(i) * std::exp(-0.5 * z * z);
            }
        }
        tmp[k] = Slice1D::from_grid(grid.r(0), step, vals);
    });
    SliceMeasureFamily fam{dirs, {}};
    for (auto& s : tmp) fam.slices.push_back(std::move(*s));
    return fam;
}

void write_sliced_csv(std::ostream& out, const SlicedField& g) {
    out << "N_theta,N_r,L_r\n"
        << g.directions().size() << ',' << g.grid().count << ',' << std::setprecision(17) << g.grid().half_width << '\n';
    for (std::size_t k = 0; k < g.directions().size(); ++k)
        for (std::size_t j = 0; j < g.grid().count; ++j) out << k << ',' << j << ',' << g.at(k, j) << '\n';
}

}  // namespace swgeo
