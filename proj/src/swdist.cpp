#include "swgeo/swdist.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <sstream>

#include "linprog.hpp"

namespace swgeo {

ProjectedMeasure uniform_on_segments(std::vector<WeightedSegment> segments) {
    if (segments.empty()) throw InputError("no segments");
    const std::size_t dim = segments.front().from.size();
    for (const auto& s : segments)
        if (s.from.size() != dim || s.to.size() != dim || !(s.mass > 0.0)) throw InputError("malformed segment");
    return {dim, [segs = std::move(segments)](std::span<const double> theta) {
                std::vector<Slice1D::Segment> parts;
                parts.reserve(segs.size());
                for (const auto& s : segs) {
                    double a = 0.0, b = 0.0;
                    for (std::size_t i = 0; i < theta.size(); ++i) {
                        a += s.from[i] * theta[i];
                        b += s.to[i] * theta[i];
                    }
                    if (a > b) std::swap(a, b);
                    parts.push_back({a, b, s.mass});
                }
                return Slice1D::from_mixture(parts);
            }};
}

std::size_t measure_dim(const Measure& m) {
    return std::visit(
        [](const auto& x) -> std::size_t {
            if constexpr (std::is_same_v<std::decay_t<decltype(x)>, ProjectedMeasure>)
                return x.dim;
            else
                return x.dim();
        },
        m);
}

RGrid default_rgrid(const GridDensity& density) {
    const auto& f = density.field();
    double h = f.spacing(0);
    for (std::size_t a = 1; a < f.dim(); ++a) h = std::min(h, f.spacing(a));
    return RGrid::covering(f.box(), h);
}

SliceMeasureFamily slices_of(const Measure& m, const DirectionSet& dirs, const std::optional<RGrid>& grid) {
    if (measure_dim(m) != dirs.dim()) throw InputError("measure and directions differ in dimension");
    if (const auto* d = std::get_if<DiscreteMeasure>(&m)) return project_discrete(*d, dirs);
    if (const auto* g = std::get_if<GridDensity>(&m)) {
        if (g->dim() != 2) throw InputError("grid slices need d = 2");
        return slice_measures(radon_grid(g->field(), dirs, grid ? *grid : default_rgrid(*g)));
    }
    const auto& pm = std::get<ProjectedMeasure>(m);
    std::vector<Slice1D> slices;
    slices.reserve(dirs.size());
    for (std::size_t k = 0; k < dirs.size(); ++k) slices.push_back(pm.project(dirs.direction(k)));
    return {dirs, std::move(slices)};
}

double sw_p(const SliceMeasureFamily& mu, const SliceMeasureFamily& nu, double p) {
    if (!(p >= 1.0)) throw InputError("order p must be >= 1");
    if (mu.slices.size() != nu.slices.size() || mu.slices.size() != mu.directions.size())
        throw InputError("slice families do not match");
    std::vector<double> terms(mu.slices.size());
    parallel_for(terms.size(), [&](std::size_t k) {
        terms[k] = mu.directions.weight(k) * w_p_pow_1d(mu.slices[k], nu.slices[k], p);
    });
    const double s = ordered_sum(terms);
    return p == 2.0 ? std::sqrt(s) : std::pow(s, 1.0 / p);
}

double sw_p(const Measure& mu, const Measure& nu, double p, const DirectionSet& dirs) {
    if (measure_dim(mu) != measure_dim(nu)) throw InputError("measures differ in dimension");
    return sw_p(slices_of(mu, dirs), slices_of(nu, dirs), p);
}

namespace {

std::vector<std::int64_t> integer_masses(const std::vector<double>& w, std::int64_t total) {
    std::vector<std::int64_t> out(w.size());
    std::vector<std::pair<double, std::size_t>> rest(w.size());
    std::int64_t used = 0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double x = w[i] * static_cast<double>(total);
        out[i] = static_cast<std::int64_t>(std::floor(x));
        used += out[i];
        rest[i] = {x - std::floor(x), i};
    }
    std::sort(rest.begin(), rest.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t r = 0; used < total; ++r, ++used) ++out[rest[r % rest.size()].second];
    return out;
}

}  // namespace

// Successive shortest paths with Dijkstra on reduced costs (dense graph).
double w2_discrete(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
    if (mu.dim() != nu.dim()) throw InputError("measures differ in dimension");
    const std::size_t n = mu.size(), m = nu.size();
    if (n > 512 || m > 512) throw InputError("support too large for exact transport (limit 512)");

    std::vector<double> cost(n * m);
    double max_cost = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            double c = 0.0;
            for (std::size_t a = 0; a < mu.dim(); ++a) {
                const double d = mu.point(i)[a] - nu.point(j)[a];
                c += d * d;
            }
            cost[i * m + j] = c;
            max_cost = std::max(max_cost, c);
        }
    const double quantum = std::max(1e-9, max_cost / 1e12);
    std::vector<std::int64_t> icost(n * m);
    for (std::size_t e = 0; e < n * m; ++e) icost[e] = std::llround(cost[e] / quantum);

    // Augmentations are counted in saturated nodes, not units, so a fine mass
    // quantum costs nothing.
    std::int64_t total = 1'000'000'000'000'000;
    if (mu.uniform_weights() && nu.uniform_weights()) total = static_cast<std::int64_t>(std::lcm(n, m));
    std::vector<std::int64_t> supply = integer_masses(mu.weights(), total);
    std::vector<std::int64_t> demand = integer_masses(nu.weights(), total);

    const std::size_t nodes = n + m;
    constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max() / 4;
    std::vector<std::int64_t> pot(nodes, 0), dist(nodes);
    for (std::size_t j = 0; j < m; ++j) {
        std::int64_t lo = kInf;
        for (std::size_t i = 0; i < n; ++i) lo = std::min(lo, icost[i * m + j]);
        pot[n + j] = lo;
    }
    std::vector<std::int64_t> flow(n * m, 0);
    std::vector<std::size_t> prev(nodes);
    std::vector<char> done(nodes);
    std::int64_t remaining = total;

    while (remaining > 0) {
        std::fill(dist.begin(), dist.end(), kInf);
        std::fill(done.begin(), done.end(), 0);
        for (std::size_t i = 0; i < n; ++i)
            if (supply[i] > 0) dist[i] = 0;
        std::size_t target = nodes;
        for (;;) {
            std::size_t u = nodes;
            for (std::size_t v = 0; v < nodes; ++v)
                if (!done[v] && dist[v] < kInf && (u == nodes || dist[v] < dist[u])) u = v;
            if (u == nodes) break;
            done[u] = 1;
            if (u >= n && demand[u - n] > 0) {
                target = u;
                break;
            }
            if (u < n) {
                for (std::size_t j = 0; j < m; ++j) {
                    const std::int64_t nd = dist[u] + icost[u * m + j] + pot[u] - pot[n + j];
                    if (nd < dist[n + j]) {
                        dist[n + j] = nd;
                        prev[n + j] = u;
                    }
                }
            } else {
                const std::size_t j = u - n;
                for (std::size_t i = 0; i < n; ++i) {
                    if (flow[i * m + j] <= 0) continue;
                    const std::int64_t nd = dist[u] - icost[i * m + j] - pot[i] + pot[u];
                    if (nd < dist[i]) {
                        dist[i] = nd;
                        prev[i] = u;
                    }
                }
            }
        }
        if (target == nodes) throw NumericalError("transport solver found no augmenting path");
        const std::int64_t reach = dist[target];
        for (std::size_t v = 0; v < nodes; ++v) pot[v] += std::min(dist[v], reach);

        // Walk back to the source; the path alternates source -> sink edges.
        std::int64_t push = demand[target - n];
        std::size_t v = target;
        while (true) {
            const std::size_t u = prev[v];
            if (u >= n) push = std::min(push, flow[v * m + (u - n)]);  // backward edge sink u -> source v
            v = u;
            if (v < n && dist[v] == 0 && supply[v] > 0) break;
        }
        const std::size_t source = v;
        push = std::min(push, supply[source]);
        v = target;
        while (v != source) {
            const std::size_t u = prev[v];
            if (u < n)
                flow[u * m + (v - n)] += push;
            else
                flow[v * m + (u - n)] -= push;
            v = u;
        }
        supply[source] -= push;
        demand[target - n] -= push;
        remaining -= push;
    }

    // Exactness: integer primal equals the dual built from the potentials,
    // and every edge satisfies dual feasibility.
    __int128 primal = 0;
    double objective = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            const std::int64_t f = flow[i * m + j];
            if (icost[i * m + j] + pot[i] - pot[n + j] < 0) throw NumericalError("transport dual infeasible");
            if (f > 0 && icost[i * m + j] + pot[i] - pot[n + j] != 0)
                throw NumericalError("transport complementary slackness violated");
            primal += static_cast<__int128>(f) * icost[i * m + j];
            objective += static_cast<double>(f) * cost[i * m + j];
        }
    const double rounded = static_cast<double>(primal) * quantum;
    if (std::abs(rounded - objective) > 0.5 * quantum * static_cast<double>(total) * (1.0 + 1e-9))
        throw NumericalError("quantized transport cost disagrees with float objective");
    return std::sqrt(std::max(0.0, objective / static_cast<double>(total)));
}

LswUpper lsw_upper_linear(const SliceMeasureFamily& mu, const SliceMeasureFamily& nu) {
    if (mu.slices.size() != nu.slices.size() || mu.slices.size() != mu.directions.size())
        throw InputError("slice families do not match");
    std::vector<WeightedNorm> norms(mu.slices.size(), WeightedNorm{});
    parallel_for(norms.size(),
                 [&](std::size_t k) { norms[k] = weighted_hneg1(mu.slices[k], nu.slices[k], mu.slices[k]); });
    LswUpper out;
    std::vector<double> terms(norms.size());
    for (std::size_t k = 0; k < norms.size(); ++k) {
        if (!norms[k].norm.finite) {
            std::ostringstream why;
            why << "direction " << k << ": " << norms[k].norm.diagnostic;
            out.value = FlaggedValue::infinite(why.str());
            return out;
        }
        terms[k] = mu.directions.weight(k) * norms[k].norm.value * norms[k].norm.value;
        out.clipped_tail += mu.directions.weight(k) * norms[k].clipped_tail;
    }
    out.value.value = 2.0 * std::sqrt(ordered_sum(terms));
    return out;
}

LswUpper lsw_upper_linear(const Measure& mu, const Measure& nu, const DirectionSet& dirs) {
    if (measure_dim(mu) != measure_dim(nu)) throw InputError("measures differ in dimension");
    return lsw_upper_linear(slices_of(mu, dirs), slices_of(nu, dirs));
}

FlaggedValue b_sw(const SlicedFlux& flux, double tol) {
    const SlicedField& rho = flux.density;
    const DirectionSet& dirs = rho.directions();
    const std::size_t nr = rho.grid().count;
    if (flux.components.size() != dirs.dim()) throw InputError("flux needs one component per axis");
    for (const auto& c : flux.components)
        if (c.grid().count != nr || c.directions().size() != dirs.size()) throw InputError("flux and density grids differ");

    std::vector<double> normal(dirs.size() * nr, 0.0);
    double rho_peak = 0.0, flux_peak = 0.0;
    for (std::size_t k = 0; k < dirs.size(); ++k) {
        const auto theta = dirs.direction(k);
        for (std::size_t j = 0; j < nr; ++j) {
            double s = 0.0;
            for (std::size_t a = 0; a < theta.size(); ++a) s += theta[a] * flux.components[a].at(k, j);
            normal[k * nr + j] = s;
            flux_peak = std::max(flux_peak, std::abs(s));
            rho_peak = std::max(rho_peak, rho.at(k, j));
        }
    }
    if (flux_peak == 0.0) return {};
    const double dr = rho.grid().step();
    std::vector<double> terms(dirs.size());
    for (std::size_t k = 0; k < dirs.size(); ++k) {
        double s = 0.0;
        for (std::size_t j = 0; j < nr; ++j) {
            const double q = normal[k * nr + j], d = rho.at(k, j);
            if (d <= tol * rho_peak) {
                if (std::abs(q) > tol * flux_peak) {
                    std::ostringstream why;
                    why << "flux on zero density at direction " << k << ", r = " << rho.grid().r(j);
                    return FlaggedValue::infinite(why.str());
                }
                continue;
            }
            s += q * q / d;
        }
        terms[k] = dirs.weight(k) * s * dr;
    }
    FlaggedValue out;
    out.value = ordered_sum(terms);
    return out;
}

CurveDiscretization::CurveDiscretization(std::vector<double> t, std::vector<Measure> n)
    : times(std::move(t)), nodes(std::move(n)) {
    if (times.size() != nodes.size() || times.size() < 2) throw InputError("curve needs matching times and >= 2 nodes");
    for (std::size_t i = 1; i < times.size(); ++i)
        if (!(times[i] > times[i - 1])) throw InputError("curve times must increase strictly");
    for (const auto& m : nodes) {
        if (m.index() != nodes.front().index()) throw InputError("curve mixes measure kinds");
        if (measure_dim(m) != measure_dim(nodes.front())) throw InputError("curve mixes dimensions");
    }
}

double curve_length(const CurveDiscretization& c, const DirectionSet& dirs, double p) {
    std::vector<SliceMeasureFamily> slices;
    slices.reserve(c.nodes.size());
    for (const auto& m : c.nodes) slices.push_back(slices_of(m, dirs));
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < slices.size(); ++i) total += sw_p(slices[i], slices[i + 1], p);
    return total;
}

double metric_derivative_fd(const CurveDiscretization& c, std::size_t index, const DirectionSet& dirs) {
    if (index == 0 || index + 1 >= c.nodes.size()) throw InputError("metric derivative needs an interior node");
    return sw_p(c.nodes[index - 1], c.nodes[index + 1], 2.0, dirs) / (c.times[index + 1] - c.times[index - 1]);
}

namespace {

// Target-side potential of the monotone coupling between two atomic slices,
// built along the coupling's staircase.
std::vector<double> target_potential(const Slice1D& source, const Slice1D& target) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> phi(source.pieces(), nan), psi(target.pieces(), nan);
    auto c = [&](std::size_t i, std::size_t j) {
        const double d = source.lo(i) - target.lo(j);
        return d * d;
    };
    std::size_t i = 0, j = 0;
    double ua = 0.0;
    while (i < source.pieces() && j < target.pieces()) {
        const double ub = std::min(source.u(i + 1), target.u(j + 1));
        if (ub > ua) {
            if (std::isnan(psi[j])) {
                if (std::isnan(phi[i])) {
                    double best = std::numeric_limits<double>::infinity();
                    for (std::size_t q = 0; q < source.pieces(); ++q)
                        if (!std::isnan(phi[q])) best = std::min(best, c(q, j) - phi[q]);
                    psi[j] = std::isinf(best) ? 0.0 : best;
                } else {
                    psi[j] = c(i, j) - phi[i];
                }
            }
            if (std::isnan(phi[i])) phi[i] = c(i, j) - psi[j];
            ua = ub;
        }
        const bool step_i = source.u(i + 1) == ub, step_j = target.u(j + 1) == ub;
        if (step_i) ++i;
        if (step_j) ++j;
    }
    for (double& v : psi)
        if (std::isnan(v)) v = 0.0;
    return psi;
}

struct MidpointProblem {
    std::vector<std::vector<double>> positions;  // [direction][site]
    std::vector<Slice1D> targets;
    const DirectionSet* dirs;

    double objective(const std::vector<double>& w) const {
        double s = 0.0;
        for (std::size_t k = 0; k < targets.size(); ++k) {
            const Slice1D nu = Slice1D::from_atoms(positions[k], w);
            s += dirs->weight(k) * w_p_pow_1d(nu, targets[k], 2.0);
        }
        return s;
    }

    // Subgradient in the weights from dual potentials (site potential is the
    // c-transform of the target potential). Also returns the duality gap at w,
    // which is zero when the potentials are optimal.
    std::vector<double> subgradient(const std::vector<double>& w, double value, double& gap) const {
        std::vector<double> g(w.size(), 0.0);
        double dual = 0.0;
        for (std::size_t k = 0; k < targets.size(); ++k) {
            const Slice1D& tgt = targets[k];
            const std::vector<double> psi = target_potential(Slice1D::from_atoms(positions[k], w), tgt);
            for (std::size_t j = 0; j < tgt.pieces(); ++j) dual += dirs->weight(k) * (tgt.u(j + 1) - tgt.u(j)) * psi[j];
            for (std::size_t c = 0; c < w.size(); ++c) {
                double f = std::numeric_limits<double>::infinity();
                for (std::size_t j = 0; j < tgt.pieces(); ++j) {
                    const double d = positions[k][c] - tgt.lo(j);
                    f = std::min(f, d * d - psi[j]);
                }
                g[c] += dirs->weight(k) * f;
            }
        }
        for (std::size_t c = 0; c < w.size(); ++c) dual += w[c] * g[c];
        gap = value - dual;
        return g;
    }
};

}  // namespace

MidpointGap midpoint_gap(const DiscreteMeasure& mu0, const DiscreteMeasure& mu1,
                         const std::vector<std::vector<double>>& candidates, const DirectionSet& dirs) {
    if (candidates.empty()) throw InputError("empty candidate grid");
    if (candidates.size() > 16) throw InputError("at most 16 candidate sites");
    if (mu0.dim() != dirs.dim() || mu1.dim() != dirs.dim()) throw InputError("dimension mismatch");
    for (const auto& c : candidates)
        if (c.size() != dirs.dim()) throw InputError("candidate dimension mismatch");

    MidpointProblem prob{{}, {}, &dirs};
    for (std::size_t k = 0; k < dirs.size(); ++k) {
        const auto theta = dirs.direction(k);
        std::vector<double> pos(candidates.size());
        for (std::size_t c = 0; c < candidates.size(); ++c)
            pos[c] = std::inner_product(theta.begin(), theta.end(), candidates[c].begin(), 0.0);
        prob.positions.push_back(std::move(pos));
        prob.targets.push_back(displacement_1d(project_discrete(mu0, theta), project_discrete(mu1, theta), 0.5));
        for (std::size_t j = 0; j < prob.targets.back().pieces(); ++j)
            if (!prob.targets.back().is_atom(j)) throw InputError("midpoint targets must be atomic");
    }
    const std::size_t sites = candidates.size();
    // Site potentials are c-transforms, so their spread never exceeds the
    // largest site-to-target cost.
    double spread_cap = 0.0;
    for (std::size_t k = 0; k < dirs.size(); ++k)
        for (double x : prob.positions[k])
            for (std::size_t j = 0; j < prob.targets[k].pieces(); ++j)
                spread_cap = std::max(spread_cap, (x - prob.targets[k].lo(j)) * (x - prob.targets[k].lo(j)));

    // Exhaustive lattice on the simplex, as fine as ~2e4 points allow.
    auto lattice_count = [&](std::size_t res) {
        double count = 1.0;
        for (std::size_t q = 1; q < sites; ++q)
            count = count * static_cast<double>(res + q) / static_cast<double>(q);
        return count;
    };
    std::size_t res = 1;
    while (res < 1000 && lattice_count(res + 1) <= 2e4) ++res;
    // Every weight vector is within this l1 distance of a lattice point.
    const double radius = static_cast<double>(sites) / (2.0 * static_cast<double>(res));

    // Convexity: on the cell around lattice point w, the objective is at
    // least G(w) - spread(g) * radius / 2 for any subgradient g at w.
    std::vector<double> best_w;
    double best = std::numeric_limits<double>::infinity();
    double certified = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> comp(sites, 0);
    comp.back() = res;
    std::vector<double> w(sites);
    for (;;) {
        for (std::size_t c = 0; c < sites; ++c) w[c] = static_cast<double>(comp[c]) / static_cast<double>(res);
        const double v = prob.objective(w);
        if (v < best) {
            best = v;
            best_w = w;
        }
        if (v - 0.5 * radius * spread_cap < certified) {
            double gap = 0.0;
            const std::vector<double> g = prob.subgradient(w, v, gap);
            if (std::abs(gap) > 1e-9 * (1.0 + v)) throw NumericalError("midpoint dual potentials are not optimal");
            const auto [lo, hi] = std::minmax_element(g.begin(), g.end());
            certified = std::min(certified, v - 0.5 * radius * (*hi - *lo));
        }
        if (sites == 1) break;
        // Next composition of res into `sites` parts.
        std::size_t q = sites - 1;
        while (q > 0 && comp[q] == 0) --q;
        if (q == 0) break;
        const std::size_t tail = comp[q];
        comp[q] = 0;
        ++comp[q - 1];
        comp.back() = tail - 1;
    }

    // The objective is convex and piecewise linear, and every dual solution
    // gives an affine minorant D0 + g.w that is tight at its point. Kelley's
    // cutting planes over the simplex then close in on the exact minimum.
    std::vector<std::vector<double>> cut_rows;
    std::vector<double> cut_rhs;
    auto add_cut = [&](const std::vector<double>& at) {
        const double v = prob.objective(at);
        if (v < best) {
            best = v;
            best_w = at;
        }
        double gap = 0.0;
        const std::vector<double> g = prob.subgradient(at, v, gap);
        const double offset = v - gap - std::inner_product(g.begin(), g.end(), at.begin(), 0.0);
        std::vector<double> row(g);
        row.push_back(-1.0);
        cut_rows.push_back(std::move(row));
        cut_rhs.push_back(-offset);
        return v;
    };
    add_cut(best_w);
    for (std::size_t c = 0; c < sites; ++c) {
        std::vector<double> vertex(sites, 0.0);
        vertex[c] = 1.0;
        add_cut(vertex);
    }
    std::vector<double> objective(sites + 1, 0.0);
    objective.back() = -1.0;
    std::vector<double> ones(sites, 1.0), minus_ones(sites, -1.0);
    ones.push_back(0.0);
    minus_ones.push_back(0.0);
    for (int iter = 0; iter < 1000; ++iter) {
        std::vector<std::vector<double>> rows = cut_rows;
        std::vector<double> rhs = cut_rhs;
        rows.push_back(ones);
        rhs.push_back(1.0);
        rows.push_back(minus_ones);
        rhs.push_back(-1.0);
        const lp::Solution sol = lp::maximize(rows, rhs, objective);
        if (sol.status != lp::Status::optimal) break;
        const double lower = sol.x.back();
        if (best - lower <= 1e-12 * (1.0 + best)) break;
        std::vector<double> at(sol.x.begin(), sol.x.end() - 1);
        double total = 0.0;
        for (double& x : at) total += (x = std::max(x, 0.0));
        if (!(total > 0.0)) break;
        for (double& x : at) x /= total;
        const double v = add_cut(at);
        if (v - lower <= 1e-12 * (1.0 + v)) break;
    }
    return {best, std::clamp(certified, 0.0, best), best_w};
}

}  // namespace swgeo
