#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "lts/common.hpp"
#include "lts/estimators.hpp"
#include "lts/reorder.hpp"

namespace lts {

// One quantity to average over role assignments. The estimator is evaluated
// on a role mask over fixed data; the interval method and sample size shape
// the final confidence interval of the averaged estimate.
struct RBQuantitySpec {
    std::function<EstimateWithVariance(const RoleMask &)> estimator;
    IntervalMethod interval = IntervalMethod::clt;
    double sample_size = 0.0;
};

struct RBQuantityResult {
    EstimateWithVariance preliminary;    // at the observed ordering
    EstimateWithVariance blackwellized;  // averaged over reorderings
};

struct RBRunInfo {
    std::uint64_t states = 0;
    std::uint64_t distinct_evals = 0;
    double acceptance_rate = 0.0;
    std::optional<double> gelman_rubin; // first quantity, two or more chains
    std::vector<std::vector<double>> chain_traces; // first quantity, per chain
    std::vector<std::vector<std::uint8_t>> chain_accepts;
};

struct RBResult {
    std::vector<RBQuantityResult> quantities;
    RBRunInfo info;
};

// Weighted average of the quantities over an explicit set of reorderings.
// Weights need not be normalized; scaling them jointly leaves every result
// unchanged. The averaged variance is the weighted mean of the
// per-reordering variance estimates minus the weighted spread of the
// per-reordering points; when that difference is negative the spread term is
// dropped and the estimate is flagged conservative.
std::vector<RBQuantityResult> rb_from_enumeration(
    std::span<const Reordering> reorderings, std::span<const double> weights,
    const RoleMask &observed, std::span<const RBQuantitySpec> quantities);

// Exhaustive average over all consistent reorderings.
RBResult rb_exact(const ReorderContext &ctx, const ObservedSample &d0,
                  std::span<const RBQuantitySpec> quantities,
                  std::uint64_t cap = 1'000'000);

// Chain average: one interchange chain per seed, each advanced chain_length
// steps; every held state (seed included) contributes one term. Chains run
// sequentially off the given generator.
RBResult rb_mcmc(const ReorderContext &ctx, const ObservedSample &d0,
                 std::span<const Reordering> seeds, int chain_length,
                 std::span<const double> gamma,
                 std::span<const RBQuantitySpec> quantities, Rng &rng);

} // namespace lts
