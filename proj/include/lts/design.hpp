#pragma once

#include "lts/common.hpp"
#include "lts/population.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace lts {

/// Two-phase design parameters: per-stratum Bernoulli probabilities for
/// the initial sample and a trace-probability matrix indexed
/// (origin stratum, target stratum). Certainty units are forced into
/// every initial sample.
struct DesignParams {
    std::vector<double> alpha;
    Grid<double> beta;
    std::vector<UnitId> certainty_units;

    bool operator==(const DesignParams &) const = default;
};

/// Checks dimensions and probability ranges against K strata.
void validate_design(const DesignParams &params, int num_strata);

/// One sampled unit as observed: analysis stratum, selection wave,
/// out-nomination counts per stratum against the full graph, responses.
struct SampleMember {
    UnitId unit = 0;
    int stratum = 0; // 0-based
    int wave = 0;    // 0 = initial sample, 1 = first wave
    std::vector<int> out_nominations;
    std::vector<double> responses;

    bool operator==(const SampleMember &) const = default;
};

struct ObservedSample {
    int num_strata = 0;
    DesignParams design;
    std::vector<std::uint8_t> certainty;        // per stratum
    std::vector<std::uint8_t> include_in_total; // per stratum
    std::vector<std::string> response_names;
    std::vector<SampleMember> members;               // sorted by unit id
    std::vector<std::pair<UnitId, UnitId>> links;    // in-sample ordered pairs

    bool operator==(const ObservedSample &) const = default;
};

/// The sufficient reduction of an observed sample: wave labels dropped,
/// per-stratum initial-sample counts kept.
struct ReducedData {
    int num_strata = 0;
    DesignParams design;
    std::vector<std::uint8_t> certainty;
    std::vector<std::uint8_t> include_in_total;
    std::vector<std::string> response_names;
    std::vector<SampleMember> members; // wave is meaningless here, kept 0
    std::vector<std::pair<UnitId, UnitId>> links;
    std::vector<int> n0; // initial-sample count per stratum

    bool operator==(const ReducedData &) const = default;
};

/// Which sampled units play the initial-sample role; index-aligned with
/// the member list of the sample it describes.
using RoleMask = std::vector<std::uint8_t>;

/// The randomness of one design realization: a uniform coin per unit and
/// per stored link. Different analysis designs can be realized against
/// the same coins, which couples their samples.
struct SampleCoins {
    std::vector<double> unit;              // indexed unit-1
    std::vector<std::vector<double>> link; // aligned with out_neighbors order
};

struct Membership {
    std::vector<UnitId> initial; // sorted
    std::vector<UnitId> wave1;   // sorted
};

SampleCoins draw_coins(const Population &pop, Rng &rng);

/// Resolves the coins under a concrete design: initial sample by
/// per-stratum Bernoulli (forced units always in), then one wave of
/// link-tracing out of the initial sample.
Membership realize(const Population &pop, const SampleCoins &coins,
                   const Stratification &strat, const DesignParams &params,
                   std::span<const UnitId> forced);

/// Builds the observed data for a membership under an analysis
/// stratification: waves, per-stratum out-nomination counts against the
/// full graph, in-sample links, responses.
ObservedSample observe(const Population &pop, const Membership &membership,
                       const Stratification &strat, const DesignParams &params,
                       const std::vector<StratumMeta> &meta);

/// Simulates the design end to end under the population's own strata.
ObservedSample draw_sample(const Population &pop, const DesignParams &params,
                           Rng &rng);

ReducedData reduce(const ObservedSample &d0);

/// The original ordering's role assignment.
RoleMask initial_mask(const ObservedSample &d0);

/// Structural validation; throws DataError on violated invariants.
void validate(const ObservedSample &d0);
void validate(const ReducedData &dr);

} // namespace lts
