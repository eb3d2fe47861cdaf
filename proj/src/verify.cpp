#include "swgeo/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

#include "swgeo/core.hpp"
#include "swgeo/measures.hpp"
#include "swgeo/ot1d.hpp"
#include "swgeo/radon.hpp"
#include "swgeo/slopes.hpp"
#include "swgeo/sobolev.hpp"
#include "swgeo/stats.hpp"
#include "swgeo/swdist.hpp"

namespace swgeo::verify {

namespace {

using Clock = std::chrono::steady_clock;
using Point = std::span<const double>;

struct Outcome {
    bool passed;
    double metric;
    double threshold;
    std::string detail;
};

RandomSeed seed_or(const Options& opts, std::uint64_t fallback) { return opts.seed.value_or(RandomSeed{fallback}); }

std::string fmt(double x) {
    std::ostringstream s;
    s.precision(6);
    s << x;
    return s.str();
}

DiscreteMeasure random_cloud(Rng& rng, std::size_t n, double spread, bool random_weights) {
    std::vector<std::vector<double>> pts(n, std::vector<double>(2));
    std::vector<double> w(n, 1.0);
    for (auto& p : pts)
        for (double& x : p) x = spread * rng.normal();
    if (random_weights)
        for (double& x : w) x = rng.uniform(0.1, 1.0);
    return from_points(pts, w);
}

Box square_box(double half) { return Box{{-half, -half}, {half, half}}; }

double gaussian(Point x, double cx, double cy, double s) {
    const double dx = x[0] - cx, dy = x[1] - cy;
    return std::exp(-(dx * dx + dy * dy) / (2.0 * s * s)) / (2.0 * std::numbers::pi * s * s);
}

Outcome identity_delta(const Options& opts) {
    const std::size_t atoms = opts.atoms.value_or(10);
    if (atoms == 0) throw InputError("identity-delta needs at least one atom");
    Rng rng(seed_or(opts, 1));
    const DirectionSet dirs = make_directions(2, 64);
    const Measure origin{dirac({0.0, 0.0})};
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
        const DiscreteMeasure mu = random_cloud(rng, atoms, 1.5, true);
        const double sw = sw_p(Measure{mu}, origin, 2.0, dirs);
        worst = std::max(worst, std::abs(sw * sw - second_moment(mu) / 2.0));
    }
    const double tol = 1e-12 * opts.tol_scale;
    return {worst < tol, worst, tol, "max |SW^2(mu, delta_0) - M2/2| = " + fmt(worst) + " over 20 measures"};
}

Outcome sw_below_w(const Options& opts) {
    Rng rng(seed_or(opts, 2));
    const DirectionSet dirs = make_directions(2, 180);
    double worst = -std::numeric_limits<double>::infinity();
    for (int t = 0; t < 50; ++t) {
        const auto n = static_cast<std::size_t>(1 + rng.bits() % 32), m = static_cast<std::size_t>(1 + rng.bits() % 32);
        const DiscreteMeasure mu = random_cloud(rng, n, 1.0, true);
        const DiscreteMeasure nu = random_cloud(rng, m, 1.0, true);
        const double w = w2_discrete(mu, nu);
        const double sw = sw_p(Measure{mu}, Measure{nu}, 2.0, dirs);
        worst = std::max(worst, sw - w / std::sqrt(2.0));
    }
    const double tol = 1e-9 * opts.tol_scale;
    return {worst <= tol, worst, tol, "max SW - W/sqrt(2) = " + fmt(worst) + " over 50 pairs"};
}

// Minimum over all matchings of equal-size uniform atom sets.
double brute_force_wp(std::vector<double> a, const std::vector<double>& b, double p) {
    std::vector<std::size_t> perm(b.size());
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) s += std::pow(std::abs(a[i] - b[perm[i]]), p);
        best = std::min(best, s / static_cast<double>(a.size()));
    } while (std::next_permutation(perm.begin(), perm.end()));
    return std::pow(best, 1.0 / p);
}

Outcome ot1d_oracle(const Options& opts) {
    Rng rng(seed_or(opts, 3));
    const double orders[] = {1.0, 1.5, 2.0, 3.0};
    double worst = 0.0;
    for (int t = 0; t < 200; ++t) {
        const auto n = static_cast<std::size_t>(1 + rng.bits() % 6);
        const double p = orders[rng.bits() % 4];
        std::vector<double> a(n), b(n), w(n, 1.0 / static_cast<double>(n));
        for (double& x : a) x = rng.uniform(-2.0, 2.0);
        for (double& x : b) x = rng.uniform(-1.0, 3.0);
        const double fast = w_p_1d(Slice1D::from_atoms(a, w), Slice1D::from_atoms(b, w), p);
        worst = std::max(worst, std::abs(fast - brute_force_wp(a, b, p)));
    }
    const double tol = 1e-10 * opts.tol_scale;
    return {worst < tol, worst, tol, "max |w_p_1d - brute force| = " + fmt(worst) + " over 200 cases"};
}

struct GaussianSetup {
    Box box = square_box(5.0);
    std::vector<std::size_t> shape{256, 256};
    DirectionSet dirs = make_directions(2, 180);
    GridField f = make_field(box, shape, [](Point x) { return gaussian(x, 0.0, 0.0, 1.0); });
    RGrid grid = RGrid::covering(box, f.spacing(0));
};

Outcome radon_inversion(const Options& opts) {
    const GaussianSetup s;
    const GridField back = invert_radon(radon_grid(s.f, s.dirs, s.grid), s.box, s.shape);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < s.f.size(); ++i) {
        num += (back[i] - s.f[i]) * (back[i] - s.f[i]);
        den += s.f[i] * s.f[i];
    }
    const double rel = std::sqrt(num / den), tol = 2e-2 * opts.tol_scale;
    return {rel < tol, rel, tol, "relative L2 error " + fmt(rel)};
}

Outcome fourier_slice(const Options& opts) {
    const GaussianSetup s;
    const double gap = fourier_slice_gap(s.f, s.dirs, s.grid), tol = 1e-4 * opts.tol_scale;
    return {gap < tol, gap, tol, "max slice/plane spectrum gap " + fmt(gap)};
}

Outcome sobolev_isometry(const Options& opts) {
    const GaussianSetup s;
    const double offsets[][2] = {{0.75, 0.5}, {1.0, 0.0}, {0.3, -0.6}};
    double worst = 0.0;
    for (const auto& o : offsets) {
        const GridField diff = make_field(s.box, s.shape, [&](Point x) {
            return gaussian(x, o[0], o[1], 1.0) - gaussian(x, -o[0], -o[1], 1.0);
        });
        worst = std::max(worst, isometry_gap(diff, s.dirs, s.grid));
    }
    const double tol = 2e-2 * opts.tol_scale;
    return {worst < tol, worst, tol, "max relative norm gap " + fmt(worst) + " over 3 offsets"};
}

Outcome comparison_ac(const Options& opts) {
    // Densities relative to the uniform unit square stay in [a, b] and equal 1
    // within 0.15 of the boundary.
    const double a = 0.5, b = 2.0, radius = 0.15;
    const double peak_slice_density = std::sqrt(2.0);  // diagonal projection of the square
    const Box box{{-0.25, -0.25}, {1.25, 1.25}};
    const std::vector<std::size_t> shape{192, 192};
    const DirectionSet dirs = make_directions(2, 180);
    auto bump = [radius](double dx, double dy) {
        const double r = std::sqrt(dx * dx + dy * dy) / radius;
        return r < 1.0 ? std::pow(std::cos(0.5 * std::numbers::pi * r), 2) : 0.0;
    };
    auto density = [&](double amp, const double* c) {
        return make_density(box, shape, [=](Point x) {
            if (x[0] < 0.0 || x[0] > 1.0 || x[1] < 0.0 || x[1] > 1.0) return 0.0;
            return 1.0 + amp * (bump(x[0] - c[0], x[1] - c[1]) - bump(x[0] - c[2], x[1] - c[3]));
        });
    };
    Rng rng(seed_or(opts, 7));
    double lower_worst = 0.0, upper_worst = 0.0;
    for (int t = 0; t < 10; ++t) {
        double c[8];
        for (double& v : c) v = rng.uniform(0.3, 0.7);
        const double amp_mu = rng.uniform(0.2, 0.5), amp_nu = rng.uniform(0.2, 0.5);
        const GridDensity mu = density(amp_mu, c), nu = density(amp_nu, c + 4);
        const double sw = sw_p(Measure{mu}, Measure{nu}, 2.0, dirs);
        GridField diff = mu.field();
        for (std::size_t i = 0; i < diff.size(); ++i) diff[i] -= nu.field()[i];
        const FlaggedValue h = hts_norm_grid(diff, -1.5, -1.5);
        const LswUpper up = lsw_upper_linear(Measure{mu}, Measure{nu}, dirs);
        if (!h.finite || !up.value.finite) throw NumericalError("comparison norms are infinite");
        lower_worst = std::max(lower_worst, std::sqrt(1.0 / (b * peak_slice_density)) * h.value / sw);
        upper_worst = std::max(upper_worst, up.value.value / (2.0 * std::sqrt(b / a) * sw));
    }
    const double tol = 1.0 + 0.05 * opts.tol_scale;
    const double metric = std::max(lower_worst, upper_worst);
    return {metric <= tol, metric, tol,
            "max lower/SW = " + fmt(lower_worst) + ", max lsw_upper/(2 sqrt(b/a) SW) = " + fmt(upper_worst) +
                " over 10 pairs"};
}

Outcome comparison_discrete(const Options& opts) {
    const DiscreteMeasure mu = from_points({{0.0, 0.0}, {1.0, 0.0}, {0.3, 1.2}, {1.9, 0.8}, {-0.7, 1.6}});
    const std::vector<double> eps{0.1, 0.03, 0.01, 0.003};
    const auto rows = discrete_comparison(mu, eps, 30, seed_or(opts, 5), make_directions(2, 720));
    std::vector<double> excess(eps.size(), -std::numeric_limits<double>::infinity());
    double lowest = std::numeric_limits<double>::infinity();
    for (std::size_t e = 0; e < eps.size(); ++e)
        for (std::size_t t = 0; t < 30; ++t) {
            const ComparisonRow& r = rows[e * 30 + t];
            lowest = std::min(lowest, r.w2_over_d - r.sw2);
            excess[e] = std::max(excess[e], r.ratio2 - 1.0);
        }
    bool decreasing = true;
    for (std::size_t e = 1; e < eps.size(); ++e) decreasing = decreasing && excess[e] < excess[e - 1];
    const double tol = 0.05 * opts.tol_scale;
    std::string detail = "min W^2/d - SW^2 = " + fmt(lowest) + "; max ratio - 1 per eps:";
    for (double x : excess) detail += " " + fmt(x);
    return {lowest >= -1e-9 * opts.tol_scale && decreasing && excess.back() < tol, excess.back(), tol, detail};
}

Outcome non_geodesic(const Options& opts) {
    const DiscreteMeasure m0 = from_points({{-1.0, -1.0}, {1.0, 1.0}});
    const DiscreteMeasure m1 = from_points({{-1.0, 1.0}, {1.0, -1.0}});
    const double sw = sw_p(Measure{m0}, Measure{m1}, 2.0, make_directions(2, 720));
    const double sw_err = std::abs(sw * sw - (2.0 - 4.0 / std::numbers::pi));
    const MidpointGap gap =
        midpoint_gap(m0, m1, {{-1.0, -1.0}, {1.0, 1.0}, {-1.0, 1.0}, {1.0, -1.0}}, make_directions(2, 180));
    const double tol = 1e-3 * opts.tol_scale;
    return {gap.certified > 0.05 && sw_err < tol, gap.certified, 0.05,
            "certified gap " + fmt(gap.certified) + " (best found " + fmt(gap.value) + "), |SW^2 - (2 - 4/pi)| = " +
                fmt(sw_err)};
}

Outcome metric_derivative(const Options& opts) {
    Rng rng(seed_or(opts, 10));
    const DiscreteMeasure base = random_cloud(rng, 8, 1.0, false);
    std::vector<double> velocity(base.coords().size());
    for (double& v : velocity) v = rng.normal();
    const double h = 1e-4;
    auto at = [&](double t) {
        std::vector<double> c(base.coords());
        for (std::size_t i = 0; i < c.size(); ++i) c[i] += t * velocity[i];
        return DiscreteMeasure(2, std::move(c), base.weights());
    };
    const CurveDiscretization curve({-h, 0.0, h}, {Measure{at(-h)}, Measure{at(0.0)}, Measure{at(h)}});
    const double sw_speed = metric_derivative_fd(curve, 1, make_directions(2, 720));
    const double w_speed = w2_discrete(at(-h), at(h)) / (2.0 * h);
    const double ratio = sw_speed * std::sqrt(2.0) / w_speed;
    const double tol = 1e-3 * opts.tol_scale;
    return {std::abs(ratio - 1.0) <= tol, ratio, tol, "sqrt(d) |mu'|_SW / |mu'|_W = " + fmt(ratio)};
}

Potential gaussian_potential(const Box& box, const std::vector<std::size_t>& shape, double s) {
    return Potential::analytic(
        box, shape, [s](Point x) { return std::exp(-(x[0] * x[0] + x[1] * x[1]) / (2.0 * s * s)); },
        [s](Point x) {
            const double e = std::exp(-(x[0] * x[0] + x[1] * x[1]) / (2.0 * s * s));
            return std::vector<double>{-x[0] / (s * s) * e, -x[1] / (s * s) * e};
        });
}

Outcome dissipation(const Options& opts) {
    const Box box = square_box(1.5);
    const std::vector<std::size_t> shape{256, 256};
    const GridDensity mu =
        make_density(box, shape, [](Point x) { return std::abs(x[0]) < 1.0 && std::abs(x[1]) < 1.0 ? 1.0 : 0.0; });
    const Dissipation d = dissipation_check(gaussian_potential(box, shape, 0.2), mu, make_directions(2, 180));
    const double rel = std::abs(d.lhs - d.rhs) / d.rhs, tol = 2e-2 * opts.tol_scale;
    return {rel < tol, rel, tol, "lhs " + fmt(d.lhs) + ", rhs " + fmt(d.rhs) + ", relative gap " + fmt(rel)};
}

// exp(-1 / (1 - |x|^2 / R^2)) inside the ball of radius R.
double bump_value(double r2, double radius) {
    const double q = r2 / (radius * radius);
    return q < 1.0 ? std::exp(-1.0 / (1.0 - q)) : 0.0;
}

// Derivative of bump_value with respect to r2.
double bump_slope(double r2, double radius) {
    const double q = r2 / (radius * radius);
    if (q >= 1.0) return 0.0;
    return -bump_value(r2, radius) / ((1.0 - q) * (1.0 - q) * radius * radius);
}

Outcome slope_discrete(const Options& opts) {
    const double radius = 1.0;
    const Potential v = Potential::analytic(
        square_box(1.25), {64, 64}, [=](Point x) { return bump_value(x[0] * x[0] + x[1] * x[1], radius); },
        [=](Point x) {
            const double g = 2.0 * bump_slope(x[0] * x[0] + x[1] * x[1], radius);
            return std::vector<double>{g * x[0], g * x[1]};
        });
    Rng rng(seed_or(opts, 12));
    std::vector<std::vector<double>> pts;
    while (pts.size() < 10) {
        const double x = rng.uniform(-0.7, 0.7), y = rng.uniform(-0.7, 0.7);
        if (x * x + y * y < 0.49) pts.push_back({x, y});
    }
    const DiscreteMeasure mu = from_points(pts);
    const double probe = sw_slope_probe(v, mu, 1e-3, make_directions(2, 720));
    const double exact = sw_slope_discrete(v, mu);
    const double rel = std::abs(probe - exact) / exact, tol = 5e-2 * opts.tol_scale;
    return {rel < tol, rel, tol, "probe " + fmt(probe) + " vs sqrt(d) |grad V| " + fmt(exact) + ", relative " + fmt(rel)};
}

Outcome rate(const Options& opts) {
    const Box box{{-0.25, -0.25}, {1.25, 1.25}};
    const GridDensity mu = make_density(box, {384, 384}, [](Point x) {
        return x[0] >= 0.0 && x[0] <= 1.0 && x[1] >= 0.0 && x[1] <= 1.0 ? 1.0 : 0.0;
    });
    const RateReport r = rate_experiment(mu, {64, 256, 1024, 4096}, 50, seed_or(opts, 1), make_directions(2, 64));
    std::size_t above_upper = 0, bound_ok = 0, bound_total = 0;
    for (const RateTrial& t : r.rows) {
        if (t.sw > t.lsw_upper) ++above_upper;
        if (t.n >= 256) {
            ++bound_total;
            if (t.lsw_upper <= t.bound) ++bound_ok;
        }
    }
    const double coverage = static_cast<double>(bound_ok) / static_cast<double>(bound_total);
    const bool passed = r.slope >= -0.6 && r.slope <= -0.4 && above_upper == 0 && coverage >= 0.99;
    return {passed, r.slope, -0.5,
            "log-log slope " + fmt(r.slope) + " +- " + fmt(r.slope_stderr) + ", SW > lsw_upper in " +
                std::to_string(above_upper) + " trials, bound coverage " + fmt(coverage) + ", SJ2 " + fmt(r.sj2)};
}

Outcome sj2_cheeger(const Options& opts) {
    const Slice1D unit = Slice1D::from_segments({{0.0, 1.0, 1.0}});
    const FlaggedValue j = sj2(unit);
    const double h = cheeger_1d(unit);
    const GridDensity disk = make_density(square_box(1.25), {256, 256}, [](Point x) {
        return x[0] * x[0] + x[1] * x[1] <= 1.0 ? 1.0 : 0.0;
    });
    const CheegerBound cb = sj2_cheeger_bound(disk, 1.0, make_directions(2, 180));
    const double j_err = std::abs(j.value - 1.0 / 6.0), h_err = std::abs(h - 2.0);
    const bool passed = j.finite && j_err < 1e-4 * opts.tol_scale && h_err < 1e-3 * opts.tol_scale &&
                        cb.sj2.finite && cb.sj2.value <= cb.bound;
    return {passed, cb.bound - cb.sj2.value, 0.0,
            "sj2(U[0,1]) = " + fmt(j.value) + ", cheeger = " + fmt(h) + "; disk sj2 " + fmt(cb.sj2.value) +
                " <= bound " + fmt(cb.bound) + " (slack " + fmt(cb.bound - cb.sj2.value) + ")"};
}

Outcome non_lsc(const Options& opts) {
    const double radius = 0.4, freq = 300.0;
    const Box box = square_box(0.75);
    const std::vector<std::size_t> shape{512, 512};
    const Potential v = Potential::analytic(
        box, shape,
        [=](Point x) { return bump_value(x[0] * x[0] + x[1] * x[1], radius) * (1.0 + std::cos(freq * x[0])); },
        [=](Point x) {
            const double r2 = x[0] * x[0] + x[1] * x[1];
            const double b = bump_value(r2, radius), db = 2.0 * bump_slope(r2, radius);
            const double wave = 1.0 + std::cos(freq * x[0]);
            return std::vector<double>{db * x[0] * wave - b * freq * std::sin(freq * x[0]), db * x[1] * wave};
        });
    const GridDensity mu =
        make_density(box, shape, [](Point x) { return std::abs(x[0]) < 0.5 && std::abs(x[1]) < 0.5 ? 1.0 : 0.0; });
    const DiscreteMeasure emp = sample_empirical(
        [](Rng& r, std::span<double> out) {
            out[0] = r.uniform(-0.5, 0.5);
            out[1] = r.uniform(-0.5, 0.5);
        },
        2, 10000, seed_or(opts, 11));
    const double scale = std::sqrt(2.0) * w_slope(v, mu);
    const double blowup = hdot_slope(v) / scale, discrete = sw_slope_discrete(v, emp) / scale;
    const double tol = 0.1 * opts.tol_scale;
    return {blowup > 10.0 && std::abs(discrete - 1.0) <= tol, blowup, 10.0,
            "Hdot slope ratio " + fmt(blowup) + ", discrete slope ratio " + fmt(discrete)};
}

struct Entry {
    Check check;
    double time_limit;
    std::function<Outcome(const Options&)> run;
};

const std::vector<Entry>& registry() {
    static const std::vector<Entry> entries{
        {{1, "identity-delta", "SW^2 to a Dirac equals half the second moment"}, 1.0, identity_delta},
        {{2, "sw-below-w", "SW <= W / sqrt(d) with exact discrete W"}, 10.0, sw_below_w},
        {{3, "ot1d-oracle", "1D W_p against brute-force matchings"}, 5.0, ot1d_oracle},
        {{4, "radon-inversion", "filtered back projection recovers a Gaussian"}, 30.0, radon_inversion},
        {{5, "fourier-slice", "slice spectra match the plane spectrum"}, 10.0, fourier_slice},
        {{6, "sobolev-isometry", "plane and sliced negative Sobolev norms agree"}, 30.0, sobolev_isometry},
        {{7, "comparison-ac", "norm sandwich near the uniform square"}, 120.0, comparison_ac},
        {{8, "comparison-discrete", "W^2/d and SW^2 merge under small jitter"}, 60.0, comparison_discrete},
        {{9, "non-geodesic", "midpoint gap for the square configuration"}, 10.0, non_geodesic},
        {{10, "metric-derivative", "discrete SW speed is W speed over sqrt(d)"}, 5.0, metric_derivative},
        {{11, "dissipation", "energy dissipation matches the flux action"}, 60.0, dissipation},
        {{12, "slope-discrete", "probe slope at a discrete measure"}, 30.0, slope_discrete},
        {{13, "rate", "empirical rate and its bound"}, 600.0, rate},
        {{14, "sj2-cheeger", "SJ2 and per-slice Cheeger values"}, 30.0, sj2_cheeger},
        {{15, "non-lsc", "Sobolev slope blows up while discrete slopes stay put"}, 120.0, non_lsc},
    };
    return entries;
}

Result execute(const Entry& e, const Options& opts) {
    const auto start = Clock::now();
    Outcome o{false, std::numeric_limits<double>::quiet_NaN(), 0.0, ""};
    try {
        o = e.run(opts);
    } catch (const InputError&) {
        throw;
    } catch (const std::exception& ex) {
        o.detail = std::string("error: ") + ex.what();
    }
    const double secs = std::chrono::duration<double>(Clock::now() - start).count();
    const bool in_time = secs < e.time_limit;
    if (!in_time) o.detail += "; over the time limit";
    return {e.check.id, e.check.name, o.passed && in_time, o.metric, o.threshold, o.detail, secs, e.time_limit};
}

}  // namespace

const std::vector<Check>& checks() {
    static const std::vector<Check> list = [] {
        std::vector<Check> out;
        for (const auto& e : registry()) out.push_back(e.check);
        return out;
    }();
    return list;
}

std::vector<Result> run(const std::string& suite, const Options& opts) {
    if (!(opts.tol_scale > 0.0)) throw InputError("tolerance scale must be positive");
    std::vector<Result> out;
    for (const auto& e : registry())
        if (suite == "all" || suite == e.check.name || suite == std::to_string(e.check.id)) out.push_back(execute(e, opts));
    if (out.empty()) throw InputError("unknown verify suite '" + suite + "'");
    return out;
}

std::string format(const Result& r) {
    std::ostringstream s;
    s.precision(3);
    s << (r.passed ? "PASS " : "FAIL ") << r.id << ' ' << r.name << ": " << r.detail << " (" << std::fixed << r.seconds
      << "s)";
    return s.str();
}

}  // namespace swgeo::verify
