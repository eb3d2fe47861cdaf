#include "swgeo/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "swgeo/swdist.hpp"

namespace swgeo {

namespace {

constexpr double kClip = 1e-12;
// Smallest level u with u (1 - u) > kClip.
const double kEdge = 0.5 - std::sqrt(0.25 - kClip);

// Interior gap between pieces i-1 and i, ignoring round-off at shared cell edges.
bool gap_before(const Slice1D& s, std::size_t i) {
    const double span = s.support_hi() - s.support_lo();
    return i > 0 && s.lo(i) - s.hi(i - 1) > 1e-9 * span && s.u(i) * (1.0 - s.u(i)) > kClip;
}

double quantile_of(std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

}  // namespace

FlaggedValue sj2(const Slice1D& s) {
    FlaggedValue out;
    out.value = 0.0;
    for (std::size_t i = 0; i < s.pieces(); ++i) {
        const double ua = s.u(i), ub = s.u(i + 1);
        if (s.is_atom(i)) return FlaggedValue::infinite("slice has an atom");
        if (gap_before(s, i)) {
            std::ostringstream why;
            why << "support has a gap on [" << s.hi(i - 1) << ", " << s.lo(i) << "]";
            return FlaggedValue::infinite(why.str());
        }
        if (!(ub > ua)) {
            // Zero-mass block: a gap inside the support, nothing at its ends.
            if (ua * (1.0 - ua) > kClip) {
                std::ostringstream why;
                why << "density vanishes on [" << s.lo(i) << ", " << s.hi(i) << "]";
                return FlaggedValue::infinite(why.str());
            }
            continue;
        }
        // F is linear on the block with slope f: int u(1-u)/f^2 du over the
        // unclipped levels, in midpoint form to avoid cancellation near u = 1.
        const double a = std::max(ua, kEdge), b = std::min(ub, 1.0 - kEdge);
        if (!(b > a)) continue;
        const double f = (ub - ua) / (s.hi(i) - s.lo(i));
        const double mid = 0.5 * (a + b), len = b - a;
        out.value += len * (mid * (1.0 - mid) - len * len / 12.0) / (f * f);
    }
    return out;
}

FlaggedValue sj2(const GridDensity& mu, const DirectionSet& dirs) {
    const SliceMeasureFamily fam = slices_of(Measure{mu}, dirs);
    std::vector<double> terms(dirs.size());
    for (std::size_t k = 0; k < dirs.size(); ++k) {
        const FlaggedValue v = sj2(fam.slices[k]);
        if (!v.finite) {
            std::ostringstream why;
            why << "direction " << k << ": " << v.diagnostic;
            return FlaggedValue::infinite(why.str());
        }
        terms[k] = dirs.weight(k) * v.value;
    }
    FlaggedValue out;
    out.value = ordered_sum(terms);
    return out;
}

double cheeger_1d(const Slice1D& s) {
    if (s.has_atoms()) throw InputError("Cheeger constant needs a slice density");
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < s.pieces(); ++i) {
        const double ua = s.u(i), ub = s.u(i + 1);
        if (gap_before(s, i)) return 0.0;
        // Largest min(F, 1-F) on the block, restricted to the unclipped levels.
        const double a = std::max(ua, kEdge), b = std::min(ub, 1.0 - kEdge);
        if (!(b > a)) continue;
        const double widest = (a <= 0.5 && b >= 0.5) ? 0.5 : std::max(std::min(a, 1.0 - a), std::min(b, 1.0 - b));
        const double f = (ub - ua) / (s.hi(i) - s.lo(i));
        best = std::min(best, f / widest);
    }
    return best;
}

CheegerBound sj2_cheeger_bound(const GridDensity& mu, double radius, const DirectionSet& dirs) {
    const GridField& f = mu.field();
    double half_diag = 0.0;
    for (std::size_t a = 0; a < f.dim(); ++a) half_diag += 0.25 * f.spacing(a) * f.spacing(a);
    half_diag = std::sqrt(half_diag);
    for (std::size_t c = 0; c < f.size(); ++c) {
        if (f[c] <= 0.0) continue;
        double r2 = 0.0;
        for (double x : f.center_of(c)) r2 += x * x;
        if (std::sqrt(r2) > radius + half_diag) throw InputError("density support exceeds the given radius");
    }
    const SliceMeasureFamily fam = slices_of(Measure{mu}, dirs);
    CheegerBound out{sj2(mu, dirs), 0.0, std::numeric_limits<double>::infinity()};
    for (const auto& s : fam.slices) out.min_cheeger = std::min(out.min_cheeger, cheeger_1d(s));
    out.bound = out.min_cheeger > 0.0 ? 2.0 * radius / out.min_cheeger : std::numeric_limits<double>::infinity();
    return out;
}

RateReport rate_experiment(const GridDensity& mu, const std::vector<std::size_t>& ns, std::size_t trials,
                           RandomSeed seed, const DirectionSet& dirs) {
    if (ns.empty()) throw InputError("no sample sizes");
    for (std::size_t i = 0; i < ns.size(); ++i)
        if (ns[i] < 2 || (i > 0 && ns[i] <= ns[i - 1])) throw InputError("sample sizes must increase strictly from 2");
    if (trials < 10) throw InputError("rate experiment needs at least 10 trials");

    const SliceMeasureFamily base = slices_of(Measure{mu}, dirs);
    RateReport report{ns, trials, seed.value, static_cast<double>(mu.dim() + 2), 0.0, {}, {}, 0.0, 0.0};
    const FlaggedValue j2 = sj2(mu, dirs);
    if (!j2.finite) throw InputError("rate experiment needs finite SJ2: " + j2.diagnostic);
    report.sj2 = j2.value;

    report.rows.resize(ns.size() * trials);
    parallel_for(report.rows.size(), [&](std::size_t item) {
        const std::size_t ni = item / trials, t = item % trials;
        const std::size_t n = ns[ni];
        const DiscreteMeasure sample = sample_empirical(mu, n, derive_seed(seed, ni, t));
        const SliceMeasureFamily fam = project_discrete(sample, dirs);
        const LswUpper upper = lsw_upper_linear(base, fam);
        if (!upper.value.finite) throw NumericalError("length bound is infinite: " + upper.value.diagnostic);
        const double nn = static_cast<double>(n);
        report.rows[item] = {n,
                             t,
                             sw_p(base, fam, 2.0),
                             upper.value.value,
                             upper.clipped_tail,
                             std::sqrt(64.0 * report.rate_constant * std::log(nn) / nn) * std::sqrt(report.sj2)};
    });

    std::vector<double> lx, ly;
    for (std::size_t ni = 0; ni < ns.size(); ++ni) {
        std::vector<double> sw, ls;
        for (std::size_t t = 0; t < trials; ++t) {
            sw.push_back(report.rows[ni * trials + t].sw);
            ls.push_back(report.rows[ni * trials + t].lsw_upper);
        }
        report.summary.push_back({ns[ni], mean_of(sw), quantile_of(sw, 0.1), quantile_of(sw, 0.5), quantile_of(sw, 0.9),
                                  mean_of(ls), quantile_of(ls, 0.1), quantile_of(ls, 0.5), quantile_of(ls, 0.9)});
        lx.push_back(std::log(static_cast<double>(ns[ni])));
        ly.push_back(std::log(report.summary.back().sw_mean));
    }
    const double mx = mean_of(lx), my = mean_of(ly);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    if (lx.size() >= 2) {
        report.slope = sxy / sxx;
        if (lx.size() >= 3) {
            double rss = 0.0;
            for (std::size_t i = 0; i < lx.size(); ++i) {
                const double e = ly[i] - my - report.slope * (lx[i] - mx);
                rss += e * e;
            }
            report.slope_stderr = std::sqrt(rss / static_cast<double>(lx.size() - 2) / sxx);
        }
    }
    return report;
}

double vc_tail_bound(std::size_t n, std::size_t dim, double eps) {
    const double nn = static_cast<double>(n);
    return 8.0 * std::pow(2.0 * nn + 1.0, static_cast<double>(dim + 1)) * std::exp(-nn * eps * eps / 16.0);
}

double vc_sup(const SliceMeasureFamily& mu, const DiscreteMeasure& sample) {
    const SliceMeasureFamily fam = project_discrete(sample, mu.directions);
    double best = 0.0;
    for (std::size_t k = 0; k < fam.slices.size(); ++k) {
        const Slice1D& emp = fam.slices[k];
        const Slice1D& ref = mu.slices[k];
        // Between jumps of F_n the ratio is monotone in F, so the endpoints
        // (left and right limits at each atom) carry the supremum.
        for (std::size_t i = 0; i < emp.pieces(); ++i) {
            const double F = ref.cdf(emp.lo(i));
            const double var = F * (1.0 - F);
            if (var <= kClip) continue;
            const double gap = std::max(std::abs(F - emp.u(i)), std::abs(F - emp.u(i + 1)));
            best = std::max(best, gap / std::sqrt(var));
        }
    }
    return best;
}

VcReport vc_statistic(const GridDensity& mu, std::size_t n, std::size_t trials, RandomSeed seed,
                      const DirectionSet& dirs) {
    if (n == 0 || trials == 0) throw InputError("vc statistic needs samples and trials");
    const SliceMeasureFamily base = slices_of(Measure{mu}, dirs);
    VcReport out{n, std::vector<double>(trials), 0.0, 0.0};
    parallel_for(trials, [&](std::size_t t) { out.statistic[t] = vc_sup(base, sample_empirical(mu, n, derive_seed(seed, n, t))); });
    // Solve 8 (2n+1)^{d+1} exp(-n eps^2 / 16) = 1/2.
    const double nn = static_cast<double>(n);
    const double logs = std::log(16.0) + static_cast<double>(mu.dim() + 1) * std::log(2.0 * nn + 1.0);
    out.eps_half = std::sqrt(16.0 * logs / nn);
    std::size_t above = 0;
    for (double s : out.statistic)
        if (s > out.eps_half) ++above;
    out.exceedance = static_cast<double>(above) / static_cast<double>(trials);
    return out;
}

std::vector<ComparisonRow> discrete_comparison(const DiscreteMeasure& mu, const std::vector<double>& eps,
                                               std::size_t trials, RandomSeed seed, const DirectionSet& dirs) {
    const double gap = min_pairwise_gap(mu);
    if (gap == 0.0) throw InputError("atoms must be distinct");
    for (double e : eps)
        if (!(e > 0.0) || e >= 0.25 * gap) throw InputError("jitter must lie in (0, l_mu / 4)");
    const std::size_t d = mu.dim();
    const SliceMeasureFamily base = project_discrete(mu, dirs);
    std::vector<ComparisonRow> rows(eps.size() * trials);
    parallel_for(trials, [&](std::size_t t) {
        // Unit jitter, uniform in the ball.
        Rng rng(derive_seed(seed, t));
        std::vector<double> unit(mu.size() * d);
        for (std::size_t i = 0; i < mu.size(); ++i) {
            std::span<double> v(unit.data() + i * d, d);
            for (;;) {
                double n2 = 0.0;
                for (double& c : v) {
                    c = rng.uniform(-1.0, 1.0);
                    n2 += c * c;
                }
                if (n2 <= 1.0) break;
            }
        }
        for (std::size_t e = 0; e < eps.size(); ++e) {
            std::vector<double> coords(mu.coords());
            double largest = 0.0;
            for (std::size_t i = 0; i < mu.size(); ++i) {
                double n2 = 0.0;
                for (std::size_t a = 0; a < d; ++a) {
                    const double step = eps[e] * unit[i * d + a];
                    coords[i * d + a] += step;
                    n2 += step * step;
                }
                largest = std::max(largest, std::sqrt(n2));
            }
            const DiscreteMeasure nu(d, std::move(coords), mu.weights());
            const double w = w2_discrete(mu, nu);
            const double sw = sw_p(base, project_discrete(nu, dirs), 2.0);
            // Jitter below l_mu / 4 makes the identity coupling optimal for W_inf.
            const double winf = mu.uniform_weights() ? winfty_discrete(mu, nu) : largest;
            const double w2d = w * w / static_cast<double>(d), sw2 = sw * sw;
            const double r1 = (winf > 0.0 && sw2 > 0.0) ? (w2d - sw2) / (winf * sw2) : 0.0;
            const double r2 = sw2 > 0.0 ? w2d / sw2 : 1.0;
            rows[e * trials + t] = {eps[e], t, w2d, sw2, winf, r1, r2};
        }
    });
    return rows;
}

}  // namespace swgeo
