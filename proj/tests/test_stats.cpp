#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "swgeo/core.hpp"
#include "swgeo/measures.hpp"
#include "swgeo/radon.hpp"
#include "swgeo/stats.hpp"
#include "swgeo/swdist.hpp"

using namespace swgeo;
using std::numbers::pi;
using Point = std::span<const double>;

namespace {

template <class F>
double simpson(F f, double a, double b, int n) {
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
    return s * h / 3.0;
}

double normal_cdf(double r) { return 0.5 * std::erfc(-r / std::sqrt(2.0)); }
double normal_pdf(double r) { return std::exp(-0.5 * r * r) / std::sqrt(2.0 * pi); }

// Piecewise-constant 1D density sampled at cell centers of [lo, hi].
template <class F>
Slice1D slice_from(F density, double lo, double hi, std::size_t cells) {
    const double step = (hi - lo) / static_cast<double>(cells);
    std::vector<double> v(cells);
    for (std::size_t j = 0; j < cells; ++j) v[j] = density(lo + (static_cast<double>(j) + 0.5) * step);
    return Slice1D::from_grid(lo + 0.5 * step, step, v);
}

// J2 of a X + b Y with X, Y uniform on [0, 1]: a trapezoid density. The
// integrand is a cubic on the ramps and a quadratic on the plateau, so
// Simpson's rule is exact.
double trapezoid_j2(double a, double b) {
    if (a < b) std::swap(a, b);
    if (b < 1e-14) return a / 6.0;
    const double ramp = simpson([=](double r) { return 0.5 * r * (1.0 - r * r / (2.0 * a * b)); }, 0.0, b, 2);
    const double plateau = simpson(
        [=](double r) {
            const double F = (r - 0.5 * b) / a;
            return a * F * (1.0 - F);
        },
        b, a, 2);
    return 2.0 * ramp + plateau;
}

// Unit square with its edges on cell boundaries (n a multiple of 6).
GridDensity unit_square(std::size_t n) {
    const Box frame{{-0.25, -0.25}, {1.25, 1.25}};
    return make_density(frame, {n, n}, [](Point x) {
        return x[0] > 0.0 && x[0] < 1.0 && x[1] > 0.0 && x[1] < 1.0 ? 1.0 : 0.0;
    });
}

GridDensity disk(double radius, const Box& box, std::size_t n) {
    return make_density(box, {n, n}, [=](Point x) { return x[0] * x[0] + x[1] * x[1] <= radius * radius ? 1.0 : 0.0; });
}

// Quarter turn about the origin of a field on a symmetric square grid.
GridField quarter_turn(const GridField& f) {
    const std::size_t n = f.shape()[0];
    GridField out(f.box(), f.shape());
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) out[i * n + j] = f[j * n + (n - 1 - i)];
    return out;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
}

}  // namespace

TEST_CASE("sj2 of uniform segments") {
    const FlaggedValue unit = sj2(Slice1D::from_segments({{0.0, 1.0, 1.0}}));
    REQUIRE(unit.finite);
    CHECK(unit.value == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
    for (double len : {2.0, 5.0})
        CHECK(sj2(Slice1D::from_segments({{0.0, len, 1.0}})).value == doctest::Approx(len * len / 6.0));
    // Split blocks with the same density give the same value.
    CHECK(sj2(Slice1D::from_segments({{0.0, 0.3, 0.3}, {0.3, 1.0, 0.7}})).value == doctest::Approx(1.0 / 6.0));
}

TEST_CASE("sj2 of a truncated Gaussian matches quadrature") {
    // On the whole line F (1 - F) / f decays like 1/|r|, so the value is
    // finite only for truncated tails.
    const double cut = 4.0, mass = 1.0 - 2.0 * normal_cdf(-cut);
    auto integrand = [=](double r) {
        const double F = (normal_cdf(r) - normal_cdf(-cut)) / mass;
        return F * (1.0 - F) / (normal_pdf(r) / mass);
    };
    const double oracle = simpson(integrand, -cut, cut, 20000);
    const FlaggedValue v = sj2(slice_from(normal_pdf, -cut, cut, 8000));
    REQUIRE(v.finite);
    CHECK(std::abs(v.value - oracle) < 1e-3);

    const FlaggedValue wide = sj2(slice_from(normal_pdf, -6.0, 6.0, 12000));
    REQUIRE(wide.finite);
    CHECK(wide.value > v.value);
}

TEST_CASE("sj2 of the unit square against trapezoid marginals") {
    const DirectionSet dirs = make_directions(2, 36);
    double oracle = 0.0;
    for (std::size_t k = 0; k < dirs.size(); ++k) {
        const auto t = dirs.direction(k);
        oracle += dirs.weight(k) * trapezoid_j2(std::abs(t[0]), std::abs(t[1]));
    }
    const FlaggedValue v = sj2(unit_square(384), dirs);
    REQUIRE(v.finite);
    MESSAGE("square sj2 " << v.value << " oracle " << oracle);
    CHECK(std::abs(v.value - oracle) < 1e-3);
}

TEST_CASE("sj2 is rotation invariant") {
    const Box box{{-1.0, -1.0}, {1.0, 1.0}};
    auto blob = [](double x, double y) {
        const double q = 1.0 - (x - 0.1) * (x - 0.1) / 0.64 - y * y / 0.16;
        return q > 0.0 ? q * q : 0.0;
    };
    const GridField field = make_field(box, {256, 256}, [&](Point x) { return blob(x[0], x[1]); });
    const DirectionSet dirs = make_directions(2, 180);
    const FlaggedValue base = sj2(GridDensity::normalized(field), dirs);
    REQUIRE(base.finite);

    const FlaggedValue quarter = sj2(GridDensity::normalized(quarter_turn(field)), dirs);
    REQUIRE(quarter.finite);
    CHECK(std::abs(quarter.value - base.value) < 1e-9 * base.value);

    const double c = std::cos(pi / 6.0), s = std::sin(pi / 6.0);
    const GridField turned = make_field(box, {256, 256}, [&](Point x) { return blob(c * x[0] + s * x[1], -s * x[0] + c * x[1]); });
    const FlaggedValue thirty = sj2(GridDensity::normalized(turned), dirs);
    REQUIRE(thirty.finite);
    MESSAGE("sj2 " << base.value << " after 30 degrees " << thirty.value);
    CHECK(std::abs(thirty.value - base.value) < 2e-3 * base.value);
}

TEST_CASE("sj2 is infinite on atoms and gaps") {
    const double at[] = {0.0, 1.0}, w[] = {0.5, 0.5};
    const FlaggedValue atoms = sj2(Slice1D::from_atoms(at, w));
    CHECK_FALSE(atoms.finite);
    CHECK_FALSE(atoms.diagnostic.empty());

    const FlaggedValue gap = sj2(Slice1D::from_segments({{0.0, 1.0, 0.5}, {2.0, 3.0, 0.5}}));
    CHECK_FALSE(gap.finite);
    CHECK(gap.diagnostic.find("gap") != std::string::npos);

    const FlaggedValue mixed = sj2(Slice1D::from_mixture({{0.0, 1.0, 0.9}, {0.5, 0.5, 0.1}}));
    CHECK_FALSE(mixed.finite);

    const GridDensity two = make_density({{-2.0, -2.0}, {2.0, 2.0}}, {96, 96}, [](Point x) {
        return std::abs(x[0]) > 0.5 && std::abs(x[0]) < 1.5 && std::abs(x[1]) < 1.0 ? 1.0 : 0.0;
    });
    const FlaggedValue split = sj2(two, make_directions(2, 8));
    CHECK_FALSE(split.finite);
    CHECK(split.diagnostic.find("direction") != std::string::npos);
}

TEST_CASE("cheeger constant of uniform segments scales as 2/L") {
    for (double len : {1.0, 2.0, 5.0})
        CHECK(cheeger_1d(Slice1D::from_segments({{0.0, len, 1.0}})) == doctest::Approx(2.0 / len).epsilon(1e-12));
    CHECK(cheeger_1d(slice_from([](double) { return 1.0; }, 0.0, 1.0, 1000)) == doctest::Approx(2.0).epsilon(1e-3));
}

TEST_CASE("cheeger constant of a Gaussian sits at the median") {
    const double h = cheeger_1d(slice_from(normal_pdf, -8.0, 8.0, 16001));
    CHECK(std::abs(h - std::sqrt(2.0 / pi)) < 1e-3);
}

TEST_CASE("cheeger constant detects bottlenecks") {
    auto bumps = [](double r) { return std::exp(-2.0 * (r - 3.0) * (r - 3.0)) + std::exp(-2.0 * (r + 3.0) * (r + 3.0)); };
    CHECK(cheeger_1d(slice_from(bumps, -6.0, 6.0, 6000)) < 0.1);
    CHECK(cheeger_1d(Slice1D::from_segments({{0.0, 1.0, 0.5}, {2.0, 3.0, 0.5}})) == 0.0);
    const double at[] = {0.0}, w[] = {1.0};
    CHECK_THROWS_AS(cheeger_1d(Slice1D::from_atoms(at, w)), InputError);
}

TEST_CASE("sliced Cheeger bound instances") {
    const DirectionSet dirs = make_directions(2, 180);
    const CheegerBound d = sj2_cheeger_bound(disk(1.0, {{-1.25, -1.25}, {1.25, 1.25}}, 256), 1.0, dirs);
    REQUIRE(d.sj2.finite);
    MESSAGE("disk: sj2 " << d.sj2.value << " bound " << d.bound << " slack " << d.bound - d.sj2.value);
    CHECK(d.sj2.value <= d.bound);
    CHECK(d.bound == doctest::Approx(2.0 / d.min_cheeger));

    const GridDensity gauss = make_density({{-4.5, -4.5}, {4.5, 4.5}}, {256, 256}, [](Point x) {
        const double r2 = x[0] * x[0] + x[1] * x[1];
        return r2 <= 16.0 ? std::exp(-0.5 * r2) : 0.0;
    });
    const CheegerBound g = sj2_cheeger_bound(gauss, 4.0, dirs);
    REQUIRE(g.sj2.finite);
    MESSAGE("truncated Gaussian: sj2 " << g.sj2.value << " bound " << g.bound);
    CHECK(g.sj2.value <= g.bound);

    // Two disks joined by a faint corridor.
    const GridDensity dumbbell = make_density({{-1.25, -1.25}, {1.25, 1.25}}, {256, 256}, [](Point x) {
        const double a = (x[0] - 0.5) * (x[0] - 0.5) + x[1] * x[1], b = (x[0] + 0.5) * (x[0] + 0.5) + x[1] * x[1];
        if (a <= 0.16 || b <= 0.16) return 1.0;
        return std::abs(x[1]) < 0.05 && std::abs(x[0]) < 0.5 ? 1e-4 : 0.0;
    });
    const CheegerBound n = sj2_cheeger_bound(dumbbell, 1.0, dirs);
    MESSAGE("dumbbell: sj2 " << n.sj2.value << " bound " << n.bound);
    CHECK(n.bound > 100.0 * d.bound);
    if (n.sj2.finite) CHECK(n.sj2.value <= n.bound);

    CHECK_THROWS_AS(sj2_cheeger_bound(disk(1.0, {{-1.25, -1.25}, {1.25, 1.25}}, 64), 0.5, dirs), InputError);
}

TEST_CASE("rate experiment is reproducible across thread counts") {
    const GridDensity mu = unit_square(48);
    const DirectionSet dirs = make_directions(2, 16);
    const unsigned saved = thread_count();
    set_thread_count(1);
    const RateReport a = rate_experiment(mu, {16, 32, 64}, 10, RandomSeed{7}, dirs);
    set_thread_count(4);
    const RateReport b = rate_experiment(mu, {16, 32, 64}, 10, RandomSeed{7}, dirs);
    set_thread_count(saved);

    REQUIRE(a.rows.size() == 30);
    REQUIRE(b.rows.size() == 30);
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        CHECK(a.rows[i].n == a.ns[i / 10]);
        CHECK(a.rows[i].trial == i % 10);
        CHECK(a.rows[i].sw == b.rows[i].sw);
        CHECK(a.rows[i].lsw_upper == b.rows[i].lsw_upper);
    }
    CHECK(a.slope == b.slope);
    CHECK(a.slope_stderr == b.slope_stderr);
    CHECK(a.rate_constant == 4.0);
    CHECK(a.seed == 7);
    for (const auto& s : a.summary) {
        CHECK(s.sw_q10 <= s.sw_q50);
        CHECK(s.sw_q50 <= s.sw_q90);
        CHECK(s.lsw_q10 <= s.lsw_q90);
    }

    const RateReport other = rate_experiment(mu, {16, 32, 64}, 10, RandomSeed{8}, dirs);
    CHECK(other.rows[0].sw != a.rows[0].sw);
}

TEST_CASE("rate experiment validates its inputs") {
    const GridDensity mu = unit_square(48);
    const DirectionSet dirs = make_directions(2, 8);
    CHECK_THROWS_AS(rate_experiment(mu, {}, 10, RandomSeed{1}, dirs), InputError);
    CHECK_THROWS_AS(rate_experiment(mu, {64, 32}, 10, RandomSeed{1}, dirs), InputError);
    CHECK_THROWS_AS(rate_experiment(mu, {32, 32}, 10, RandomSeed{1}, dirs), InputError);
    CHECK_THROWS_AS(rate_experiment(mu, {1, 32}, 10, RandomSeed{1}, dirs), InputError);
    CHECK_THROWS_AS(rate_experiment(mu, {16, 32}, 9, RandomSeed{1}, dirs), InputError);

    const GridDensity split = make_density({{-2.0, -2.0}, {2.0, 2.0}}, {48, 48}, [](Point x) {
        return std::abs(x[0]) > 0.5 && std::abs(x[0]) < 1.5 && std::abs(x[1]) < 1.0 ? 1.0 : 0.0;
    });
    CHECK_THROWS_AS(rate_experiment(split, {16, 32}, 10, RandomSeed{1}, dirs), InputError);
}

TEST_CASE("rate experiment orderings") {
    const RateReport r = rate_experiment(unit_square(96), {256, 512}, 40, RandomSeed{11}, make_directions(2, 32));
    std::size_t within = 0;
    for (const auto& t : r.rows) {
        CHECK(t.sw <= t.lsw_upper * (1.0 + 1e-12));
        CHECK(t.clipped_tail >= 0.0);
        CHECK(t.bound == doctest::Approx(std::sqrt(64.0 * 4.0 * std::log(double(t.n)) / double(t.n) * r.sj2)));
        if (t.lsw_upper <= t.bound) ++within;
    }
    MESSAGE("lsw within the rate bound in " << within << " of " << r.rows.size() << " trials");
    CHECK(double(within) >= 0.99 * double(r.rows.size()));
    CHECK(r.summary[1].sw_mean < r.summary[0].sw_mean);
}

TEST_CASE("tail bound and its half level") {
    CHECK(vc_tail_bound(10, 2, 1.0) == doctest::Approx(8.0 * std::pow(21.0, 3.0) * std::exp(-10.0 / 16.0)));
    const GridDensity mu = unit_square(48);
    const VcReport r = vc_statistic(mu, 200, 20, RandomSeed{3}, make_directions(2, 16));
    CHECK(vc_tail_bound(200, 2, r.eps_half) == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(r.statistic.size() == 20);
    CHECK(r.exceedance <= 0.5 + 3.0 / std::sqrt(20.0));
    for (double s : r.statistic) CHECK(s > 0.0);
    CHECK_THROWS_AS(vc_statistic(mu, 0, 20, RandomSeed{3}, make_directions(2, 16)), InputError);
}

TEST_CASE("relative deviation statistic is scale invariant") {
    const std::vector<std::size_t> shape{48, 48};
    auto square = [](double side) {
        return [side](Point x) { return x[0] > 0.0 && x[0] < side && x[1] > 0.0 && x[1] < side ? 1.0 : 0.0; };
    };
    const GridDensity small = make_density({{-0.25, -0.25}, {1.25, 1.25}}, shape, square(1.0));
    const GridDensity large = make_density({{-0.5, -0.5}, {2.5, 2.5}}, shape, square(2.0));
    const DirectionSet dirs = make_directions(2, 16);
    const VcReport a = vc_statistic(small, 100, 10, RandomSeed{5}, dirs);
    const VcReport b = vc_statistic(large, 100, 10, RandomSeed{5}, dirs);
    for (std::size_t t = 0; t < 10; ++t) CHECK(b.statistic[t] == doctest::Approx(a.statistic[t]).epsilon(1e-6));
}

TEST_CASE("relative deviation statistic shrinks with the sample size") {
    const GridDensity mu = unit_square(48);
    const DirectionSet dirs = make_directions(2, 16);
    const VcReport small = vc_statistic(mu, 64, 30, RandomSeed{9}, dirs);
    const VcReport large = vc_statistic(mu, 256, 30, RandomSeed{9}, dirs);
    MESSAGE("medians " << median(small.statistic) << " -> " << median(large.statistic));
    CHECK(median(large.statistic) < median(small.statistic));
}

TEST_CASE("discrete comparison") {
    const DiscreteMeasure mu = from_points({{0.0, 0.0}, {1.0, 0.2}, {0.3, 1.1}, {-0.8, 0.6}, {0.5, -0.9}});
    const DirectionSet dirs = make_directions(2, 64);
    const double gap = min_pairwise_gap(mu);

    // Unperturbed atoms: both sides vanish.
    CHECK(w2_discrete(mu, mu) == 0.0);
    CHECK(sw_p(project_discrete(mu, dirs), project_discrete(mu, dirs), 2.0) == 0.0);

    // The closest projected pair is about 1.07e-3 apart on one direction, so
    // the last jitter keeps every slice order and the identity coupling.
    const std::vector<double> eps{0.2 * gap, 0.05 * gap, 0.0125 * gap, 0.003 * gap, 3e-4 * gap};
    const std::size_t trials = 20;
    const auto rows = discrete_comparison(mu, eps, trials, RandomSeed{21}, dirs);
    REQUIRE(rows.size() == eps.size() * trials);
    std::vector<double> worst(eps.size(), 0.0);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const ComparisonRow& r = rows[i];
        CHECK(r.eps == eps[i / trials]);
        CHECK(r.w2_over_d - r.sw2 >= -1e-12 * r.w2_over_d);
        CHECK(r.winfty <= r.eps * (1.0 + 1e-12));
        CHECK(std::isfinite(r.ratio1));
        worst[i / trials] = std::max(worst[i / trials], r.ratio2 - 1.0);
    }
    for (std::size_t e = 0; e < eps.size(); ++e) MESSAGE("eps " << eps[e] << ": max ratio2 - 1 = " << worst[e]);
    // Monotone up to trial noise: a single near-tie can hold the maximum flat.
    for (std::size_t e = 1; e < eps.size(); ++e) CHECK(worst[e] <= 1.05 * worst[e - 1] + 1e-12);
    CHECK(worst.back() < 1e-9);

    CHECK_THROWS_AS(discrete_comparison(mu, {0.25 * gap}, 2, RandomSeed{1}, dirs), InputError);
    CHECK_THROWS_AS(discrete_comparison(mu, {0.0}, 2, RandomSeed{1}, dirs), InputError);
    const DiscreteMeasure twice = from_points({{0.0, 0.0}, {0.0, 0.0}, {1.0, 0.0}});
    CHECK_THROWS_AS(discrete_comparison(twice, {0.01}, 2, RandomSeed{1}, dirs), InputError);
}
