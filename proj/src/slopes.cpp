#include "swgeo/slopes.hpp"

#include <algorithm>
#include <cmath>

#include "swgeo/sobolev.hpp"

namespace swgeo {

Potential Potential::analytic(const Box& box, const std::vector<std::size_t>& shape,
                              std::function<double(std::span<const double>)> value,
                              std::function<std::vector<double>(std::span<const double>)> gradient) {
    GridField grid = make_field(box, shape, value);
    return {std::move(grid), std::move(value), std::move(gradient)};
}

Potential Potential::from_grid(GridField grid) {
    if (grid.dim() != 2) throw InputError("grid potentials are two-dimensional");
    for (double v : grid.values())
        if (v < 0.0) throw InputError("potential must be nonnegative");
    const std::size_t n0 = grid.shape()[0], n1 = grid.shape()[1];
    if (n0 < 2 || n1 < 2) throw InputError("potential grid too small");
    GridField d0(grid.box(), grid.shape()), d1(grid.box(), grid.shape());
    const double h0 = grid.spacing(0), h1 = grid.spacing(1);
    for (std::size_t i = 0; i < n0; ++i)
        for (std::size_t j = 0; j < n1; ++j) {
            const std::size_t ia = i == 0 ? 0 : i - 1, ib = std::min(i + 1, n0 - 1);
            const std::size_t ja = j == 0 ? 0 : j - 1, jb = std::min(j + 1, n1 - 1);
            d0[i * n1 + j] = (grid[ib * n1 + j] - grid[ia * n1 + j]) / (static_cast<double>(ib - ia) * h0);
            d1[i * n1 + j] = (grid[i * n1 + jb] - grid[i * n1 + ja]) / (static_cast<double>(jb - ja) * h1);
        }
    auto value = [g = grid](std::span<const double> x) { return g.sample(x[0], x[1]); };
    auto gradient = [d0 = std::move(d0), d1 = std::move(d1)](std::span<const double> x) {
        return std::vector<double>{d0.sample(x[0], x[1]), d1.sample(x[0], x[1])};
    };
    return {std::move(grid), std::move(value), std::move(gradient)};
}

Potential translated(const Potential& v, std::span<const double> shift) {
    Box box = v.grid.box();
    for (std::size_t a = 0; a < box.dim(); ++a) {
        box.lo[a] += shift[a];
        box.hi[a] += shift[a];
    }
    std::vector<double> s(shift.begin(), shift.end());
    auto back = [s](std::span<const double> x) {
        std::vector<double> y(x.begin(), x.end());
        for (std::size_t a = 0; a < y.size(); ++a) y[a] -= s[a];
        return y;
    };
    return {GridField(box, v.grid.shape(), v.grid.values()),
            [f = v.value, back](std::span<const double> x) { return f(back(x)); },
            [g = v.gradient, back](std::span<const double> x) { return g(back(x)); }};
}

double potential_energy(const Potential& v, const DiscreteMeasure& mu) {
    double e = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) e += mu.weight(i) * v.value(mu.point(i));
    return e;
}

double potential_energy(const Potential& v, const GridDensity& mu) {
    const GridField& f = mu.field();
    double e = 0.0;
    for (std::size_t c = 0; c < f.size(); ++c)
        if (f[c] != 0.0) e += f[c] * v.value(f.center_of(c));
    return e * f.cell_volume();
}

namespace {

double grad_sq(const Potential& v, std::span<const double> x) {
    double s = 0.0;
    for (double g : v.gradient(x)) s += g * g;
    return s;
}

void require_shared_grid(const Potential& v, const GridDensity& mu) {
    if (mu.dim() != 2) throw InputError("absolutely continuous slopes need d = 2");
    if (!v.grid.same_grid(mu.field())) throw InputError("potential and density must share a grid");
}

void require_boundary_decay(const GridField& f) {
    const std::size_t n0 = f.shape()[0], n1 = f.shape()[1];
    double edge = 0.0;
    for (std::size_t i = 0; i < n0; ++i) edge = std::max({edge, std::abs(f[i * n1]), std::abs(f[i * n1 + n1 - 1])});
    for (std::size_t j = 0; j < n1; ++j) edge = std::max({edge, std::abs(f[j]), std::abs(f[(n0 - 1) * n1 + j])});
    if (edge >= 1e-8) throw InputError("potential does not decay below 1e-8 at the box boundary");
}

// Same values on the box moved so its center is the origin; the Radon domain
// is then anchored to the data and results do not depend on position.
GridField centered(const GridField& f) {
    Box box = f.box();
    for (std::size_t a = 0; a < box.dim(); ++a) {
        const double mid = 0.5 * (box.lo[a] + box.hi[a]);
        box.lo[a] -= mid;
        box.hi[a] -= mid;
    }
    return GridField(std::move(box), f.shape(), f.values());
}

RGrid radial_grid_for(const GridField& f) {
    return RGrid::covering(f.box(), std::min(f.spacing(0), f.spacing(1)));
}

struct RadonPieces {
    SlicedField density;   // mu_hat
    SlicedField gradient;  // d/dr Lambda R V (odd)
};

RadonPieces radon_pieces(const Potential& v, const GridDensity& mu, const DirectionSet& dirs) {
    require_shared_grid(v, mu);
    require_boundary_decay(v.grid);
    const GridField vc = centered(v.grid), mc = centered(mu.field());
    const RGrid grid = radial_grid_for(vc);
    const double order = static_cast<double>(dirs.dim() - 1);
    // V is transformed from its pointwise values rather than from a grid
    // representation, whose limited smoothness the order-d filter amplifies.
    std::vector<double> mid(vc.dim());
    for (std::size_t a = 0; a < mid.size(); ++a) mid[a] = v.grid.box().lo[a] - vc.box().lo[a];
    auto shifted = [&v, &mid](std::span<const double> x) {
        std::vector<double> y(x.begin(), x.end());
        for (std::size_t a = 0; a < y.size(); ++a) y[a] += mid[a];
        return v.value(y);
    };
    const double step = std::min(vc.spacing(0), vc.spacing(1));
    return {radon_grid(mc, dirs, grid), slice_multiplier(radon_function(shifted, vc.box(), step, dirs, grid), order, 1)};
}

double weighted_square_sum(const RadonPieces& p) {
    const DirectionSet& dirs = p.density.directions();
    const std::size_t nr = p.density.grid().count;
    std::vector<double> terms(dirs.size());
    for (std::size_t k = 0; k < dirs.size(); ++k) {
        double s = 0.0;
        for (std::size_t j = 0; j < nr; ++j) s += p.density.at(k, j) * p.gradient.at(k, j) * p.gradient.at(k, j);
        terms[k] = dirs.weight(k) * s * p.density.grid().step();
    }
    return ordered_sum(terms);
}

}  // namespace

double w_slope(const Potential& v, const DiscreteMeasure& mu) {
    double s = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) s += mu.weight(i) * grad_sq(v, mu.point(i));
    return std::sqrt(s);
}

double w_slope(const Potential& v, const GridDensity& mu) {
    const GridField& f = mu.field();
    double s = 0.0;
    for (std::size_t c = 0; c < f.size(); ++c)
        if (f[c] != 0.0) s += f[c] * grad_sq(v, f.center_of(c));
    return std::sqrt(s * f.cell_volume());
}

double sw_slope_discrete(const Potential& v, const DiscreteMeasure& mu) {
    return std::sqrt(static_cast<double>(mu.dim())) * w_slope(v, mu);
}

double sw_slope_probe(const Potential& v, const DiscreteMeasure& mu, double h, const DirectionSet& dirs) {
    if (!(h > 0.0)) throw InputError("probe step must be positive");
    std::vector<double> moved(mu.coords());
    for (std::size_t i = 0; i < mu.size(); ++i) {
        const std::vector<double> g = v.gradient(mu.point(i));
        for (std::size_t a = 0; a < mu.dim(); ++a) moved[i * mu.dim() + a] -= h * g[a];
    }
    const DiscreteMeasure nu(mu.dim(), std::move(moved), mu.weights());
    const double dist = sw_p(Measure{mu}, Measure{nu}, 2.0, dirs);
    if (dist == 0.0) return 0.0;
    return std::max(0.0, potential_energy(v, mu) - potential_energy(v, nu)) / dist;
}

double sw_slope_ac_upper(const Potential& v, const GridDensity& mu, const DirectionSet& dirs) {
    const RadonPieces p = radon_pieces(v, mu, dirs);
    return std::sqrt(weighted_square_sum(p)) / inversion_constant(dirs.dim());
}

double sw_slope_ac_lower(const Potential& v, const GridDensity& mu, const DirectionSet& dirs) {
    require_shared_grid(v, mu);
    require_boundary_decay(v.grid);
    const GridField& m = mu.field();
    const GridField vc = centered(v.grid);
    GridField psi = radial_multiplier(vc, [](double xi) { return xi * xi * xi; }, 2);

    double inside = 0.0, mean = 0.0, lowest = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < m.size(); ++c)
        if (m[c] > 0.0) {
            inside += 1.0;
            mean += psi[c];
            lowest = std::min(lowest, m[c]);
        }
    if (inside == 0.0) throw InputError("density has no positive cells");
    mean /= inside;
    double pairing = 0.0, peak = 0.0;
    for (std::size_t c = 0; c < m.size(); ++c) {
        psi[c] = m[c] > 0.0 ? psi[c] - mean : 0.0;
        pairing += psi[c] * v.grid[c];
        peak = std::max(peak, std::abs(psi[c]));
    }
    pairing *= m.cell_volume();
    if (peak == 0.0 || pairing <= 0.0) return 0.0;

    // mu - t psi stays a probability density; its distance quotient is exact
    // because the slice CDF difference is linear in t.
    const double t = 0.5 * lowest / peak;
    GridField moved(centered(m));
    for (std::size_t c = 0; c < m.size(); ++c) moved[c] = m[c] - t * psi[c];
    const GridDensity base(centered(m));
    const GridDensity perturbed = GridDensity::normalized(moved);
    const LswUpper path = lsw_upper_linear(Measure{base}, Measure{perturbed}, dirs);
    if (!path.value.finite) throw NumericalError("perturbation leaves the density support: " + path.value.diagnostic);
    const double speed = 0.5 * path.value.value / t;
    return speed > 0.0 ? pairing / speed : 0.0;
}

double hdot_slope(const Potential& v) {
    const double order = 0.5 * static_cast<double>(v.grid.dim() + 1);
    const FlaggedValue n = hts_norm_grid(v.grid, order, order);
    if (!n.finite) throw NumericalError(n.diagnostic);
    return n.value;
}

GradientFlowFlux gf_flux(const Potential& v, const GridDensity& mu, const DirectionSet& dirs) {
    const RadonPieces p = radon_pieces(v, mu, dirs);
    const std::size_t dim = dirs.dim();
    const double c = inversion_constant(dim);
    const double order = static_cast<double>(dim - 1);
    const GridField vc = centered(v.grid);

    GradientFlowFlux out{{}, SlicedFlux{{}, p.density}};
    for (std::size_t a = 0; a < dim; ++a) {
        SlicedField comp = times_direction_component(p.gradient, a);
        auto& vals = comp.values();
        for (std::size_t q = 0; q < vals.size(); ++q) vals[q] *= p.density.values()[q] / (c * c);
        GridField plane = dual_radon(slice_multiplier(comp, order, 0), vc.box(), vc.shape());
        out.grid.emplace_back(v.grid.box(), v.grid.shape(), std::move(plane.values()));
        out.sliced.components.push_back(std::move(comp));
    }
    return out;
}

Dissipation dissipation_check(const Potential& v, const GridDensity& mu, const DirectionSet& dirs) {
    const RadonPieces p = radon_pieces(v, mu, dirs);
    const double c = inversion_constant(dirs.dim());
    const double rhs = weighted_square_sum(p) / (c * c);
    const GradientFlowFlux flux = gf_flux(v, mu, dirs);
    const GridField& g = v.grid;
    double lhs = 0.0;
    for (std::size_t q = 0; q < g.size(); ++q) {
        const std::vector<double> grad = v.gradient(g.center_of(q));
        for (std::size_t a = 0; a < grad.size(); ++a) lhs += grad[a] * flux.grid[a][q];
    }
    lhs *= g.cell_volume();
    if (rhs == 0.0 && lhs != 0.0) throw NumericalError("dissipation rhs vanishes while lhs does not: inversion failure");
    return {lhs, rhs};
}

}  // namespace swgeo
