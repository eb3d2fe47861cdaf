#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "swgeo/core.hpp"
#include "swgeo/measures.hpp"
#include "swgeo/ot1d.hpp"
#include "swgeo/radon.hpp"
#include "swgeo/random.hpp"

namespace swgeo {

// int F (1 - F) / f dr with 0/0 = 0 over {F (1 - F) > 1e-12}; +inf on atoms
// or on interior gaps of the support.
FlaggedValue sj2(const Slice1D& s);
// Direction average of the slice values (d = 2 grid densities).
FlaggedValue sj2(const GridDensity& mu, const DirectionSet& dirs);

// ess inf of f / min(F, 1 - F) over {F (1 - F) > 1e-12}; 0 across gaps.
double cheeger_1d(const Slice1D& s);

struct CheegerBound {
    FlaggedValue sj2;
    double bound;           // 2 M / min_k cheeger_1d(slice k)
    double min_cheeger;
};
CheegerBound sj2_cheeger_bound(const GridDensity& mu, double radius, const DirectionSet& dirs);

struct RateTrial {
    std::size_t n;
    std::size_t trial;
    double sw;
    double lsw_upper;
    double clipped_tail;
    double bound;  // sqrt(64 c log n / n) sqrt(SJ2)
};

struct RateSummary {
    std::size_t n;
    double sw_mean;
    double sw_q10, sw_q50, sw_q90;
    double lsw_mean;
    double lsw_q10, lsw_q50, lsw_q90;
};

struct RateReport {
    std::vector<std::size_t> ns;
    std::size_t trials;
    std::uint64_t seed;
    double rate_constant;  // c
    double sj2;
    std::vector<RateTrial> rows;  // ordered by n, then trial
    std::vector<RateSummary> summary;
    double slope;         // least-squares slope of log mean SW against log n
    double slope_stderr;
};

// Empirical samples of mu against mu itself; trial streams come from
// derive_seed(seed, n index, trial). c = d + 2.
RateReport rate_experiment(const GridDensity& mu, const std::vector<std::size_t>& ns, std::size_t trials,
                           RandomSeed seed, const DirectionSet& dirs);

struct VcReport {
    std::size_t n;
    std::vector<double> statistic;  // per trial
    double eps_half;                // level where the tail bound equals 1/2
    double exceedance;              // fraction of trials above eps_half
};

// 8 (2n + 1)^{d+1} exp(-n eps^2 / 16).
double vc_tail_bound(std::size_t n, std::size_t dim, double eps);
// sup over directions and r of |F - F_n| / sqrt(F (1 - F)) for empirical
// samples of mu.
double vc_sup(const SliceMeasureFamily& mu, const DiscreteMeasure& sample);
VcReport vc_statistic(const GridDensity& mu, std::size_t n, std::size_t trials, RandomSeed seed,
                      const DirectionSet& dirs);

struct ComparisonRow {
    double eps;
    std::size_t trial;
    double w2_over_d;  // W^2 / d
    double sw2;
    double winfty;
    double ratio1;  // (W^2/d - SW^2) / (W_inf SW^2)
    double ratio2;  // (W^2/d) / SW^2
};

// Jitters every atom uniformly in the eps-ball (weights kept). A trial uses
// the same unit jitter at every eps.
std::vector<ComparisonRow> discrete_comparison(const DiscreteMeasure& mu, const std::vector<double>& eps,
                                               std::size_t trials, RandomSeed seed, const DirectionSet& dirs);

}  // namespace swgeo
