#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "swgeo/core.hpp"
#include "swgeo/random.hpp"
#include "swgeo/slopes.hpp"
#include "swgeo/sobolev.hpp"

using namespace swgeo;
using std::numbers::pi;
using Point = std::span<const double>;

namespace {

// A exp(-|x - c|^2 / (2 s^2)) with its exact gradient.
struct Bump {
    double amp, cx, cy, width;

    double operator()(Point x) const {
        const double dx = x[0] - cx, dy = x[1] - cy;
        return amp * std::exp(-0.5 * (dx * dx + dy * dy) / (width * width));
    }
    std::vector<double> gradient(Point x) const {
        const double v = (*this)(x), k = -1.0 / (width * width);
        return {k * (x[0] - cx) * v, k * (x[1] - cy) * v};
    }
};

Potential bump_potential(const Box& box, std::size_t n, Bump b) {
    return Potential::analytic(box, {n, n}, b, [b](Point x) { return b.gradient(x); });
}

Potential quadratic_potential() {
    return Potential::analytic(Box{{-2.0, -2.0}, {2.0, 2.0}}, {8, 8}, [](Point x) { return x[0] * x[0] + x[1] * x[1]; },
                               [](Point x) { return std::vector<double>{2.0 * x[0], 2.0 * x[1]}; });
}

Potential constant_potential(const Box& box, std::size_t n, double level) {
    return Potential::analytic(box, {n, n}, [level](Point) { return level; },
                               [](Point) { return std::vector<double>{0.0, 0.0}; });
}

// Unit square inside a margin of a quarter on every side; n must be a
// multiple of 6 so cell edges fall on the square.
const Box kFrame{{-0.25, -0.25}, {1.25, 1.25}};

GridDensity unit_square(std::size_t n) {
    return make_density(kFrame, {n, n}, [](Point x) { return x[0] >= 0.0 && x[0] <= 1.0 && x[1] >= 0.0 && x[1] <= 1.0; });
}

const Bump kCentral{1.0, 0.52, 0.47, 0.08};

template <class F>
double simpson(F f, double a, double b, int n) {
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
    return s * h / 3.0;
}

// Gauss-Legendre nodes on [-1, 1] by Newton iteration.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
    x.assign(n, 0.0);
    w.assign(n, 0.0);
    for (int i = 0; i < n; ++i) {
        double z = std::cos(pi * (i + 0.75) / (n + 0.5)), dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = z;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (z * p1 - p0) / (z * z - 1.0);
            const double dz = p1 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-15) break;
        }
        x[i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
}

double chord_of_unit_square(double c, double s, double r) {
    double lo = -1e300, hi = 1e300;
    auto clip = [&](double p, double d) {
        if (std::abs(d) < 1e-15) {
            if (p < 0.0 || p > 1.0) lo = 1.0, hi = 0.0;
            return;
        }
        double t0 = -p / d, t1 = (1.0 - p) / d;
        if (t0 > t1) std::swap(t0, t1);
        lo = std::max(lo, t0);
        hi = std::min(hi, t1);
    };
    clip(r * c, -s);
    clip(r * s, c);
    return std::max(0.0, hi - lo);
}

GridDensity shifted(const GridDensity& mu, double dx, double dy) {
    Box box = mu.field().box();
    box.lo[0] += dx;
    box.hi[0] += dx;
    box.lo[1] += dy;
    box.hi[1] += dy;
    return GridDensity(GridField(box, mu.field().shape(), mu.field().values()));
}

}  // namespace

TEST_CASE("Wasserstein slope examples") {
    CHECK(w_slope(quadratic_potential(), dirac({1.0, 0.0})) == doctest::Approx(2.0).epsilon(1e-15));
    Rng rng(RandomSeed{71});
    std::vector<std::vector<double>> pts(10, std::vector<double>(2));
    for (auto& p : pts) p = {rng.normal(), rng.normal()};
    CHECK(w_slope(constant_potential(kFrame, 8, 3.0), from_points(pts)) == 0.0);
    CHECK(w_slope(constant_potential(kFrame, 48, 3.0), unit_square(48)) == 0.0);
}

TEST_CASE("Wasserstein slope of a bump under a uniform disk") {
    const Box box{{-1.25, -1.25}, {1.25, 1.25}};
    const std::size_t n = 1000;
    const Bump b{1.0, 0.1, -0.2, 0.2};
    const GridDensity disk = make_density(box, {n, n}, [](Point x) { return x[0] * x[0] + x[1] * x[1] <= 1.0; });
    const double grid_value = w_slope(bump_potential(box, n, b), disk);

    // Polar Gauss-Legendre over the unit disk with density 1/pi.
    std::vector<double> xr, wr;
    gauss_legendre(200, xr, wr);
    const int angles = 400;
    double integral = 0.0;
    for (std::size_t i = 0; i < xr.size(); ++i) {
        const double rho = 0.5 * (xr[i] + 1.0);
        for (int a = 0; a < angles; ++a) {
            const double phi = 2.0 * pi * a / angles;
            const double p[2] = {rho * std::cos(phi), rho * std::sin(phi)};
            const auto g = b.gradient(p);
            integral += 0.5 * wr[i] * rho * (2.0 * pi / angles) * (g[0] * g[0] + g[1] * g[1]);
        }
    }
    const double oracle = std::sqrt(integral / pi);
    CHECK(std::abs(grid_value - oracle) < 1e-4 * oracle);
}

TEST_CASE("sliced slope at discrete measures") {
    CHECK(sw_slope_discrete(quadratic_potential(), dirac({1.0, 0.0})) == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-15));
    CHECK(sw_slope_discrete(constant_potential(kFrame, 8, 1.0), dirac({1.0, 0.0})) == 0.0);

    Rng rng(RandomSeed{72});
    std::vector<std::vector<double>> pts(40, std::vector<double>(2));
    for (auto& p : pts) p = {rng.uniform(0.3, 0.7), rng.uniform(0.3, 0.7)};
    const DiscreteMeasure cloud = from_points(pts);
    const Potential v = bump_potential(kFrame, 48, Bump{1.0, 0.5, 0.5, 0.2});
    const double exact = sw_slope_discrete(v, cloud);
    const double probe = sw_slope_probe(v, cloud, 1e-3, make_directions(2, 256));
    CHECK(std::abs(probe - exact) < 0.05 * exact);
    CHECK_THROWS_AS(sw_slope_probe(v, cloud, 0.0, make_directions(2, 8)), InputError);
}

TEST_CASE("sliced slope upper estimate at a uniform square") {
    const std::size_t n = 192;
    const GridDensity mu = unit_square(n);
    const DirectionSet dirs = make_directions(2, 32);
    CHECK(sw_slope_ac_upper(constant_potential(kFrame, n, 0.0), mu, dirs) == 0.0);

    const Potential v = bump_potential(kFrame, n, kCentral);
    const double upper = sw_slope_ac_upper(v, mu, dirs);

    // The transform of the bump is a Gaussian in r of width s and height
    // amp sqrt(2 pi) s; d/dr |D| of it is -(1/pi) int_0^inf z^2 G(z) sin(z u) dz
    // with G(z) = 2 pi amp s^2 exp(-s^2 z^2 / 2). Tabulated in u.
    const double s = kCentral.width, amp = kCentral.amp;
    const double du = 2.5e-4, umax = 1.6;
    const auto cells = static_cast<std::size_t>(2.0 * umax / du) + 1;
    std::vector<double> table(cells);
    for (std::size_t i = 0; i < cells; ++i) {
        const double u = -umax + du * static_cast<double>(i);
        table[i] = -simpson([&](double z) { return z * z * 2.0 * pi * amp * s * s * std::exp(-0.5 * s * s * z * z) * std::sin(z * u); },
                            0.0, 12.0 / s, 3000) /
                   pi;
    }
    auto filtered = [&](double u) {
        const double f = (u + umax) / du;
        const auto i = static_cast<std::size_t>(f);
        const double t = f - static_cast<double>(i);
        return (1.0 - t) * table[i] + t * table[i + 1];
    };
    double total = 0.0;
    for (std::size_t k = 0; k < dirs.size(); ++k) {
        const double c = dirs.direction(k)[0], sn = dirs.direction(k)[1];
        const double centre = kCentral.cx * c + kCentral.cy * sn;
        std::vector<double> knots{std::min(0.0, c) + std::min(0.0, sn), c, sn, std::max(0.0, c) + std::max(0.0, sn)};
        std::sort(knots.begin(), knots.end());
        double slice = 0.0;
        for (std::size_t i = 0; i + 1 < knots.size(); ++i)
            if (knots[i + 1] > knots[i] + 1e-12)
                slice += simpson(
                    [&](double r) {
                        const double g = filtered(r - centre);
                        return chord_of_unit_square(c, sn, r) * g * g;
                    },
                    knots[i], knots[i + 1], 4000);
        total += dirs.weight(k) * slice;
    }
    const double oracle = std::sqrt(total) / inversion_constant(2);
    MESSAGE("upper " << upper << " vs quadrature " << oracle);
    CHECK(std::abs(upper - oracle) < 1e-3 * oracle);

    // Density bound b = 1 on the unit square; the largest slice density of
    // Lebesgue measure on it is sqrt(2), along the diagonal.
    CHECK(upper <= std::sqrt(std::sqrt(2.0)) * hdot_slope(v));
    CHECK(sw_slope_ac_lower(v, mu, dirs) <= upper);

    // Refinement changes the estimate by little.
    const double fine = sw_slope_ac_upper(bump_potential(kFrame, 2 * n, kCentral), unit_square(2 * n), dirs);
    CHECK(std::abs(fine - upper) < 1e-3 * upper);
}

TEST_CASE("slope estimates need a shared grid and a decaying potential") {
    const DirectionSet dirs = make_directions(2, 8);
    const GridDensity mu = unit_square(48);
    CHECK_THROWS_AS(sw_slope_ac_upper(bump_potential(kFrame, 96, kCentral), mu, dirs), InputError);
    CHECK_THROWS_AS(sw_slope_ac_upper(constant_potential(kFrame, 48, 1.0), mu, dirs), InputError);
    GridField negative(kFrame, {48, 48});
    negative[5] = -1.0;
    CHECK_THROWS_AS(Potential::from_grid(negative), InputError);
}

TEST_CASE("Sobolev slope of a Gaussian") {
    const Box box{{-8.0, -8.0}, {8.0, 8.0}};
    CHECK(hdot_slope(constant_potential(box, 64, 0.0)) == 0.0);
    const Potential unit = bump_potential(box, 256, Bump{1.0, 0.0, 0.0, 1.0});
    CHECK(hdot_slope(unit) == doctest::Approx(std::sqrt(pi * std::tgamma(2.5))).epsilon(1e-3));

    // V(x / 2) scales the order-3/2 norm by 2^{-1/2}.
    const Box wide{{-16.0, -16.0}, {16.0, 16.0}};
    const double narrow = hdot_slope(bump_potential(wide, 512, Bump{1.0, 0.0, 0.0, 1.0}));
    const double dilated = hdot_slope(bump_potential(wide, 512, Bump{1.0, 0.0, 0.0, 2.0}));
    CHECK(dilated / narrow == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-3));
}

TEST_CASE("gradient-flow flux structure") {
    const std::size_t n = 96;
    const DirectionSet dirs = make_directions(2, 48);
    const GridDensity mu = unit_square(n);

    const GradientFlowFlux none = gf_flux(constant_potential(kFrame, n, 0.0), mu, dirs);
    for (const auto& comp : none.grid)
        for (double x : comp.values()) CHECK(x == 0.0);

    // Slice masses are conserved: the sliced flux vanishes at both ends of
    // every slice, so the r-integral of its derivative is zero.
    const GradientFlowFlux flux = gf_flux(bump_potential(kFrame, n, kCentral), mu, dirs);
    double peak = 0.0, ends = 0.0;
    for (std::size_t k = 0; k < dirs.size(); ++k) {
        std::vector<double> normal(flux.sliced.density.grid().count, 0.0);
        for (std::size_t a = 0; a < 2; ++a)
            for (std::size_t j = 0; j < normal.size(); ++j)
                normal[j] += dirs.direction(k)[a] * flux.sliced.components[a].at(k, j);
        for (double x : normal) peak = std::max(peak, std::abs(x));
        ends = std::max({ends, std::abs(normal.front()), std::abs(normal.back())});
    }
    CHECK(peak > 0.0);
    CHECK(ends <= 1e-8 * peak);

    const FlaggedValue action = b_sw(flux.sliced);
    CHECK(action.finite);
    CHECK(action.value > 0.0);
}

TEST_CASE("gradient-flow flux is linear in the potential") {
    const std::size_t n = 96;
    const DirectionSet dirs = make_directions(2, 24);
    const GridDensity mu = unit_square(n);
    const Bump a{1.0, 0.45, 0.5, 0.07}, b{0.5, 0.6, 0.55, 0.06};
    const Potential sum = Potential::analytic(kFrame, {n, n}, [&](Point x) { return a(x) + b(x); },
                                              [&](Point x) {
                                                  auto ga = a.gradient(x), gb = b.gradient(x);
                                                  return std::vector<double>{ga[0] + gb[0], ga[1] + gb[1]};
                                              });
    const GradientFlowFlux fa = gf_flux(bump_potential(kFrame, n, a), mu, dirs);
    const GradientFlowFlux fb = gf_flux(bump_potential(kFrame, n, b), mu, dirs);
    const GradientFlowFlux fs = gf_flux(sum, mu, dirs);
    double err = 0.0, scale = 0.0;
    for (std::size_t c = 0; c < 2; ++c)
        for (std::size_t q = 0; q < fs.grid[c].size(); ++q) {
            err = std::max(err, std::abs(fs.grid[c][q] - fa.grid[c][q] - fb.grid[c][q]));
            scale = std::max(scale, std::abs(fs.grid[c][q]));
        }
    CHECK(err <= 1e-10 * scale);
}

TEST_CASE("gradient-flow flux of radial data is radial") {
    const Box box{{-1.5, -1.5}, {1.5, 1.5}};
    const std::size_t n = 128;
    const GridDensity mu = make_density(box, {n, n}, [](Point x) { return std::exp(-4.0 * (x[0] * x[0] + x[1] * x[1])); });
    const Potential v = bump_potential(box, n, Bump{1.0, 0.0, 0.0, 0.15});
    const GradientFlowFlux flux = gf_flux(v, mu, make_directions(2, 90));
    double tangential = 0.0, size = 0.0, turn = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const std::size_t q = i * n + j;
            const auto x = flux.grid[0].center_of(q);
            const double jx = flux.grid[0][q], jy = flux.grid[1][q];
            const double r = std::hypot(x[0], x[1]);
            size = std::max(size, std::hypot(jx, jy));
            tangential = std::max(tangential, std::abs(x[0] * jy - x[1] * jx) / r);
            // A quarter turn maps cell (i, j) to (n-1-j, i) and rotates J.
            const std::size_t p = (n - 1 - j) * n + i;
            turn = std::max({turn, std::abs(flux.grid[0][p] + jy), std::abs(flux.grid[1][p] - jx)});
        }
    MESSAGE("tangential " << tangential / size << ", rotation " << turn / size);
    CHECK(tangential <= 1e-3 * size);
    CHECK(turn <= 1e-3 * size);
}

TEST_CASE("dissipation identity") {
    const std::size_t n = 192;
    const DirectionSet dirs = make_directions(2, 64);
    const GridDensity mu = unit_square(n);
    const Dissipation zero = dissipation_check(constant_potential(kFrame, n, 0.0), mu, dirs);
    CHECK(zero.lhs == 0.0);
    CHECK(zero.rhs == 0.0);

    const Potential v = bump_potential(kFrame, n, kCentral);
    const Dissipation d = dissipation_check(v, mu, dirs);
    CHECK(std::abs(d.lhs - d.rhs) < 2e-2 * d.rhs);

    // The rhs is linear in the density.
    const GridDensity other = make_density(kFrame, {n, n}, [](Point x) {
        return x[0] >= 0.0 && x[0] <= 1.0 && x[1] >= 0.0 && x[1] <= 1.0 ? 1.0 + x[0] * x[1] : 0.0;
    });
    GridField half(kFrame, {n, n});
    for (std::size_t c = 0; c < half.size(); ++c) half[c] = 0.5 * (mu.field()[c] + other.field()[c]);
    const double mixed = dissipation_check(v, GridDensity(half), dirs).rhs;
    CHECK(mixed == doctest::Approx(0.5 * (d.rhs + dissipation_check(v, other, dirs).rhs)).epsilon(1e-12));
}

TEST_CASE("slopes are invariant under translation") {
    const std::size_t n = 96;
    const DirectionSet dirs = make_directions(2, 32);
    const GridDensity mu = unit_square(n);
    const Potential v = bump_potential(kFrame, n, kCentral);
    // Shift by a whole number of cells.
    const double h = mu.field().spacing(0);
    const double shift[2] = {7.0 * h, -3.0 * h};
    const GridDensity mu2 = shifted(mu, shift[0], shift[1]);
    const Bump moved{kCentral.amp, kCentral.cx + shift[0], kCentral.cy + shift[1], kCentral.width};
    Box box2 = mu2.field().box();
    const Potential v2 = Potential::analytic(box2, {n, n}, moved, [moved](Point x) { return moved.gradient(x); });
    const Potential v3 = translated(v, shift);

    auto close = [](double a, double b) { return std::abs(a - b) <= 1e-8 * std::max(1.0, std::abs(a)); };
    CHECK(close(w_slope(v, mu), w_slope(v2, mu2)));
    CHECK(close(w_slope(v, mu), w_slope(v3, mu2)));
    CHECK(close(sw_slope_ac_upper(v, mu, dirs), sw_slope_ac_upper(v2, mu2, dirs)));
    CHECK(close(sw_slope_ac_lower(v, mu, dirs), sw_slope_ac_lower(v2, mu2, dirs)));
    CHECK(close(hdot_slope(v), hdot_slope(v2)));
    const Dissipation a = dissipation_check(v, mu, dirs), b = dissipation_check(v2, mu2, dirs);
    CHECK(close(a.lhs, b.lhs));
    CHECK(close(a.rhs, b.rhs));
}
