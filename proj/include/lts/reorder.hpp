#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "lts/common.hpp"
#include "lts/design.hpp"

namespace lts {

// One assignment of the initial-sample role across the final sample. The
// mask is aligned with the member list of the data it was built from; logp
// is the log conditional probability of the tracing wave under that
// assignment, or -infinity when the assignment is impossible.
struct Reordering {
    RoleMask mask;
    double logp = 0.0;
};

struct Proposal {
    Reordering candidate;
    double log_fwd = 0.0;
    double log_rev = 0.0; // -infinity when the move cannot be reversed
};

// Precomputed in-sample link structure and tracing log-factors for one data
// set. The context copies what it needs; the source data may be discarded.
class ReorderContext {
public:
    explicit ReorderContext(const ReducedData &data);

    int num_members() const { return static_cast<int>(stratum_.size()); }
    int num_strata() const { return num_strata_; }
    int wave1_count() const { return wave1_count_; }
    const std::vector<int> &n0() const { return n0_; }
    int stratum_of_member(int position) const { return stratum_[position]; }
    UnitId unit_of_member(int position) const { return units_[position]; }

    double log_prob(const RoleMask &mask) const;
    Reordering make(RoleMask mask) const;
    bool consistent(const RoleMask &mask) const;

    // In-sample nominators of the member that currently hold the initial
    // role and have a positive tracing rate toward it.
    std::vector<int> eligible_nominators(int position, const RoleMask &mask) const;

private:
    int num_strata_ = 0;
    int wave1_count_ = 0;
    std::vector<int> n0_;
    std::vector<int> sampled_per_stratum_;
    std::vector<UnitId> units_;
    std::vector<int> stratum_;
    std::vector<std::vector<int>> in_pos_;
    std::vector<std::vector<int>> out_pos_;
    std::vector<double> initial_factor_;
    Grid<double> log1mb_;
    Grid<std::uint8_t> beta_positive_;
    Grid<std::uint8_t> beta_one_;
};

// Draw one role-swap proposal. gamma weights the number of simultaneous
// swaps. Returns nothing when the step dies before producing a candidate
// (too few wave-1 units, a nominator collision); an impossible candidate is
// returned with logp = -infinity so callers can classify it.
std::optional<Proposal> propose(const ReorderContext &ctx, const Reordering &cur,
                                std::span<const double> gamma, Rng &rng);

// One interchange step; returns whether the proposal was accepted. The
// reordering is advanced in place.
bool mh_step(const ReorderContext &ctx, Reordering &cur,
             std::span<const double> gamma, Rng &rng);

struct EnumeratedReorderings {
    std::vector<Reordering> consistent;
    std::uint64_t candidates = 0; // role assignments examined
};

// All consistent role assignments, by exhaustion over per-stratum
// combinations. Throws when the candidate count exceeds the cap.
EnumeratedReorderings enumerate_reorderings(const ReorderContext &ctx,
                                            std::uint64_t cap = 1'000'000);

// The as-observed assignment. Throws when the recorded waves carry zero
// tracing probability.
Reordering original_reordering(const ReorderContext &ctx,
                               const ObservedSample &d0);

} // namespace lts
