#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lts/common.hpp"
#include "lts/design.hpp"

namespace lts {

// Per-stratum link tallies over a fixed initial-sample assignment.
// r.at(l, k) counts links from initial units in stratum l to initial units in
// stratum k; s.at(l, k) counts the remaining nominations of initial units in
// stratum l toward stratum k (links pointing outside the initial sample,
// whether or not the target was ever observed).
struct CountStatistics {
    std::vector<int> n0;
    Grid<std::int64_t> r;
    Grid<std::int64_t> s;
    std::vector<std::uint8_t> certainty;
    std::vector<std::uint8_t> include_in_total;

    int num_strata() const { return static_cast<int>(n0.size()); }
};

CountStatistics count_statistics(const ReducedData &data, const RoleMask &initial);

// Ratio estimate of one stratum size. Certainty strata report their initial
// count exactly. The stabilized variant shifts every tally by one before
// forming the ratio and subtracts the shift afterwards.
double stratum_size_estimate(const CountStatistics &stats, int stratum,
                             bool stabilized);

std::vector<double> stratum_size_estimates(const CountStatistics &stats,
                                           bool stabilized);

// Sum of stratum estimates over strata flagged include_in_total.
double population_size_estimate(const CountStatistics &stats, bool stabilized);

// Delete-one jackknife combiners. The single-stratum form centers the spread
// at the mean of the leave-one-out values; the stratified term centers at the
// full-data estimate and is summed over strata by the caller.
double jackknife_combine_single(std::span<const double> loo);
double jackknife_combine_term(std::span<const double> loo, double full_estimate);

double jackknife_variance_size(const ReducedData &data, const RoleMask &initial,
                               bool stabilized);

enum class IntervalMethod { none, clt, log_transform };

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

// Asymmetric interval for a size estimate: the excess over the realized
// sample size is scaled by a log-normal factor. Degenerates to a point when
// the estimate does not exceed the sample size.
Interval ci_log_transform(double point, double variance, double sample_size);

Interval ci_clt(double point, double variance);

struct EstimateWithVariance {
    double point = 0.0;
    double variance = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    IntervalMethod method = IntervalMethod::none;
    bool conservative = false;
};

// Size estimate with jackknife variance and log-transform interval.
EstimateWithVariance size_estimate(const ReducedData &data,
                                   const RoleMask &initial, bool stabilized);

enum class MeanMode { pooled, stratified };

// Mean of a response over the estimated population, with a finite-population
// corrected variance and a normal-theory interval.
EstimateWithVariance mean_estimate(const ReducedData &data,
                                   const RoleMask &initial, int response_index,
                                   MeanMode mode, bool stabilized);

// Share of the estimated population falling in the target strata, with a
// delete-one jackknife variance.
EstimateWithVariance proportion_estimate(const ReducedData &data,
                                         const RoleMask &initial,
                                         std::span<const int> target_strata,
                                         bool stabilized);

EstimateWithVariance proportion_estimate(const ReducedData &data,
                                         const RoleMask &initial, int stratum,
                                         bool stabilized);

} // namespace lts
