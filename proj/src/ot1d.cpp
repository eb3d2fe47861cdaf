#include "swgeo/ot1d.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace swgeo {

Slice1D Slice1D::build(std::vector<Segment> segments, bool merge_atoms) {
    segments.erase(std::remove_if(segments.begin(), segments.end(), [](const Segment& s) { return s.mass <= 0.0; }),
                   segments.end());
    if (segments.empty()) throw InputError("slice has no mass");
    if (merge_atoms) {
        std::vector<Segment> merged;
        for (const auto& s : segments) {
            if (!merged.empty() && merged.back().lo == s.lo && merged.back().hi == s.hi && s.lo == s.hi)
                merged.back().mass += s.mass;
            else
                merged.push_back(s);
        }
        segments.swap(merged);
    }
    double total = 0.0;
    for (const auto& s : segments) total += s.mass;
    Slice1D out;
    out.u_.reserve(segments.size() + 1);
    out.u_.push_back(0.0);
    double run = 0.0;
    for (std::size_t i = 0; i < segments.size(); ++i) {
        run += segments[i].mass;
        out.u_.push_back(i + 1 == segments.size() ? 1.0 : run / total);
        out.lo_.push_back(segments[i].lo);
        out.hi_.push_back(segments[i].hi);
    }
    return out;
}

Slice1D Slice1D::from_atoms(std::span<const double> positions, std::span<const double> weights) {
    if (positions.size() != weights.size()) throw InputError("atom positions and weights differ in length");
    std::vector<std::size_t> order(positions.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return positions[a] < positions[b]; });
    std::vector<Segment> segs;
    segs.reserve(order.size());
    for (std::size_t i : order) {
        if (weights[i] < 0.0) throw InputError("negative atom weight");
        segs.push_back({positions[i], positions[i], weights[i]});
    }
    return build(std::move(segs), false);
}

Slice1D Slice1D::from_grid(double first_center, double step, std::span<const double> values) {
    if (!(step > 0.0)) throw InputError("grid step must be positive");
    double peak = 0.0;
    for (double v : values) peak = std::max(peak, std::abs(v));
    std::vector<Segment> segs;
    for (std::size_t j = 0; j < values.size(); ++j) {
        double v = values[j];
        if (v < -1e-12 * peak) throw InputError("slice density is negative");
        if (v <= 0.0) continue;
        const double c = first_center + static_cast<double>(j) * step;
        segs.push_back({c - 0.5 * step, c + 0.5 * step, v * step});
    }
    return build(std::move(segs), false);
}

Slice1D Slice1D::from_segments(std::vector<Segment> segments) {
    for (std::size_t i = 0; i < segments.size(); ++i) {
        if (segments[i].hi < segments[i].lo || segments[i].mass < 0.0) throw InputError("malformed segment");
        if (i > 0 && segments[i].lo < segments[i - 1].hi) throw InputError("segments overlap or are unsorted");
    }
    return build(std::move(segments), false);
}

Slice1D Slice1D::from_mixture(const std::vector<Segment>& parts) {
    std::vector<double> cuts;
    std::vector<Segment> atoms;
    for (const auto& s : parts) {
        if (s.hi < s.lo || s.mass < 0.0) throw InputError("malformed segment");
        if (s.mass == 0.0) continue;
        if (s.hi == s.lo) {
            atoms.push_back(s);
            cuts.push_back(s.lo);
            continue;
        }
        cuts.push_back(s.lo);
        cuts.push_back(s.hi);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    std::sort(atoms.begin(), atoms.end(), [](const Segment& a, const Segment& b) { return a.lo < b.lo; });

    std::vector<Segment> segs;
    std::size_t next_atom = 0;
    auto flush_atoms_upto = [&](double x) {
        while (next_atom < atoms.size() && atoms[next_atom].lo <= x) {
            const Segment& a = atoms[next_atom++];
            if (!segs.empty() && segs.back().lo == a.lo && segs.back().hi == a.lo)
                segs.back().mass += a.mass;
            else
                segs.push_back(a);
        }
    };
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
        const double a = cuts[c], b = cuts[c + 1];
        flush_atoms_upto(a);
        double rho = 0.0;
        for (const auto& s : parts)
            if (s.hi > s.lo && s.mass > 0.0 && s.lo <= a && s.hi >= b) rho += s.mass / (s.hi - s.lo);
        if (rho > 0.0) segs.push_back({a, b, rho * (b - a)});
    }
    flush_atoms_upto(std::numeric_limits<double>::infinity());
    return build(std::move(segs), false);
}

bool Slice1D::has_atoms() const {
    for (std::size_t i = 0; i < pieces(); ++i)
        if (is_atom(i)) return true;
    return false;
}

bool Slice1D::has_density() const {
    for (std::size_t i = 0; i < pieces(); ++i)
        if (!is_atom(i)) return true;
    return false;
}

double Slice1D::cdf(double r) const {
    const auto it = std::upper_bound(lo_.begin(), lo_.end(), r);
    if (it == lo_.begin()) return 0.0;
    const auto i = static_cast<std::size_t>(it - lo_.begin()) - 1;
    if (r >= hi_[i]) return u_[i + 1];
    return u_[i] + (r - lo_[i]) / (hi_[i] - lo_[i]) * (u_[i + 1] - u_[i]);
}

double Slice1D::quantile_on(std::size_t i, double u) const {
    if (hi_[i] == lo_[i]) return lo_[i];
    const double frac = std::clamp((u - u_[i]) / (u_[i + 1] - u_[i]), 0.0, 1.0);
    return lo_[i] + frac * (hi_[i] - lo_[i]);
}

double Slice1D::quantile(double u) const {
    if (!(u >= 0.0 && u <= 1.0)) throw InputError("quantile level outside [0,1]");
    if (u == 0.0) return lo_.front();
    const auto it = std::lower_bound(u_.begin() + 1, u_.end(), u);
    const auto i = static_cast<std::size_t>(it - u_.begin()) - 1;
    return quantile_on(std::min(i, pieces() - 1), u);
}

double Slice1D::density(double r) const {
    const auto it = std::upper_bound(lo_.begin(), lo_.end(), r);
    if (it == lo_.begin()) return 0.0;
    const auto i = static_cast<std::size_t>(it - lo_.begin()) - 1;
    if (is_atom(i) || r >= hi_[i]) return 0.0;
    return (u_[i + 1] - u_[i]) / (hi_[i] - lo_[i]);
}

double Slice1D::mean() const {
    double m = 0.0;
    for (std::size_t i = 0; i < pieces(); ++i) m += (u_[i + 1] - u_[i]) * 0.5 * (lo_[i] + hi_[i]);
    return m;
}

double cdf_quantile(const Slice1D& s, SliceQuery mode, double query) {
    return mode == SliceQuery::cdf ? s.cdf(query) : s.quantile(query);
}

namespace {

// Integral of |D|^p over an interval of length len on which D is linear from a to b.
double linear_power_integral(double a, double b, double len, double p) {
    if (p == 2.0) return len * (a * a + a * b + b * b) / 3.0;
    const double A = std::abs(a), B = std::abs(b);
    if (a * b < 0.0) {
        const double l1 = len * A / (A + B);
        return (l1 * std::pow(A, p) + (len - l1) * std::pow(B, p)) / (p + 1.0);
    }
    if (p == 1.0) return len * 0.5 * (A + B);
    const double m = 0.5 * (A + B), delta = B - A;
    if (m == 0.0) return 0.0;
    if (std::abs(delta) < 1e-6 * m) {
        const double q = delta / m;
        return len * std::pow(m, p) * (1.0 + p * (p - 1.0) * q * q / 24.0);
    }
    return len * (std::pow(B, p + 1.0) - std::pow(A, p + 1.0)) / ((p + 1.0) * delta);
}

// Visits the common refinement of the two quantile partitions; fn receives
// (u_a, u_b, D_a, D_b) with D the quantile difference at the interval ends.
template <class Fn>
void sweep_quantiles(const Slice1D& mu, const Slice1D& nu, Fn&& fn) {
    std::size_t i = 0, j = 0;
    double ua = 0.0;
    while (i < mu.pieces() && j < nu.pieces()) {
        const double ui = mu.u(i + 1), uj = nu.u(j + 1);
        const double ub = std::min(ui, uj);
        if (ub > ua) {
            fn(ua, ub, mu.quantile_on(i, ua) - nu.quantile_on(j, ua), mu.quantile_on(i, ub) - nu.quantile_on(j, ub), i, j);
            ua = ub;
        }
        if (ui == ub) ++i;
        if (uj == ub) ++j;
    }
}

}  // namespace

double w_p_pow_1d(const Slice1D& mu, const Slice1D& nu, double p) {
    if (!(p >= 1.0)) throw InputError("Wasserstein order must be >= 1");
    double total = 0.0;
    sweep_quantiles(mu, nu, [&](double ua, double ub, double da, double db, std::size_t, std::size_t) {
        total += linear_power_integral(da, db, ub - ua, p);
    });
    return total;
}

double w_p_1d(const Slice1D& mu, const Slice1D& nu, double p) {
    const double v = w_p_pow_1d(mu, nu, p);
    return p == 2.0 ? std::sqrt(v) : std::pow(v, 1.0 / p);
}

double w_infty_1d(const Slice1D& mu, const Slice1D& nu) {
    double best = 0.0;
    sweep_quantiles(mu, nu, [&](double, double, double da, double db, std::size_t, std::size_t) {
        best = std::max({best, std::abs(da), std::abs(db)});
    });
    return best;
}

Slice1D displacement_1d(const Slice1D& mu, const Slice1D& nu, double t) {
    if (!(t >= 0.0 && t <= 1.0)) throw InputError("interpolation time outside [0,1]");
    if (t == 0.0) return mu;
    if (t == 1.0) return nu;
    std::vector<Slice1D::Segment> segs;
    sweep_quantiles(mu, nu, [&](double ua, double ub, double, double, std::size_t i, std::size_t j) {
        const double lo = (1 - t) * mu.quantile_on(i, ua) + t * nu.quantile_on(j, ua);
        double hi = (1 - t) * mu.quantile_on(i, ub) + t * nu.quantile_on(j, ub);
        if (mu.is_atom(i) && nu.is_atom(j)) hi = lo;
        segs.push_back({lo, std::max(lo, hi), ub - ua});
    });
    // Consecutive pieces may touch; from_segments only forbids overlap, so
    // round-off inversions are clamped here.
    for (std::size_t k = 1; k < segs.size(); ++k) {
        if (segs[k].lo < segs[k - 1].hi) {
            segs[k].lo = segs[k - 1].hi;
            segs[k].hi = std::max(segs[k].hi, segs[k].lo);
        }
    }
    return Slice1D::from_segments(std::move(segs));
}

WeightedNorm weighted_hneg1(const Slice1D& mu, const Slice1D& nu, const Slice1D& sigma, double clip) {
    WeightedNorm out;
    if (sigma.has_atoms()) {
        out.norm = FlaggedValue::infinite("weight measure has an atomic part; a density is required");
        return out;
    }
    std::vector<double> cuts;
    cuts.reserve(2 * (mu.pieces() + nu.pieces() + sigma.pieces()));
    for (const Slice1D* s : {&mu, &nu, &sigma})
        for (std::size_t i = 0; i < s->pieces(); ++i) {
            cuts.push_back(s->lo(i));
            cuts.push_back(s->hi(i));
        }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    // All functions below are linear on (cuts[k], cuts[k+1]); values at the
    // quarter points reconstruct the end values without touching the jumps.
    auto sq_integral = [](double da, double db, double len) { return len * (da * da + da * db + db * db) / 3.0; };
    const double lower_level = clip, upper_level = 1.0 - clip;
    // Intervals this short are round-off between coincident breakpoints.
    const double negligible = 1e-12 * (cuts.back() - cuts.front());
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        const double ra = cuts[k], rb = cuts[k + 1], len = rb - ra;
        if (len <= negligible) continue;
        const double q1 = ra + 0.25 * len, q3 = rb - 0.25 * len;
        const double d1 = mu.cdf(q1) - nu.cdf(q1), d3 = mu.cdf(q3) - nu.cdf(q3);
        const double slope = (d3 - d1) / (0.5 * len);
        const double da = d1 - 0.25 * len * slope, db = d3 + 0.25 * len * slope;
        const double f = sigma.density(0.5 * (ra + rb));
        if (f <= 0.0) {
            if (std::max(std::abs(da), std::abs(db)) > 1e-12) {
                std::ostringstream why;
                why << "distribution functions differ on [" << ra << ", " << rb << "] where the weight density vanishes";
                out.norm = FlaggedValue::infinite(why.str());
                return out;
            }
            continue;
        }
        const double s1 = sigma.cdf(q1), s3 = sigma.cdf(q3);
        const double fa = s1 - 0.25 * len * (s3 - s1) / (0.5 * len);
        const double fb = s3 + 0.25 * len * (s3 - s1) / (0.5 * len);
        // Kept part: where lower_level < F_sigma < upper_level.
        double ka = ra, kb = rb;
        if (fa < lower_level) ka = fb <= lower_level ? rb : ra + (lower_level - fa) / (fb - fa) * len;
        if (fb > upper_level) kb = fa >= upper_level ? ra : ra + (upper_level - fa) / (fb - fa) * len;
        auto d_at = [&](double r) { return da + (db - da) * (r - ra) / len; };
        if (kb > ka) {
            total += sq_integral(d_at(ka), d_at(kb), kb - ka) / f;
            out.clipped_tail += sq_integral(da, d_at(ka), ka - ra) + sq_integral(d_at(kb), db, rb - kb);
        } else {
            out.clipped_tail += sq_integral(da, db, len);
        }
    }
    out.norm.value = std::sqrt(total);
    return out;
}

}  // namespace swgeo
