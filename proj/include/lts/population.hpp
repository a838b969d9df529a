#pragma once

#include "lts/common.hpp"

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace lts {

/// Per-stratum analysis flags. A certainty stratum is sampled with
/// probability one; strata excluded from the total contribute their
/// nominations to other strata's estimates but not their own size to N.
struct StratumMeta {
    bool certainty = false;
    bool include_in_total = true;

    bool operator==(const StratumMeta &) const = default;
};

/// Assignment of units to strata 1..K, stored 0-based. Used both for a
/// population's own strata and for analysis-time re-stratifications.
struct Stratification {
    std::vector<int> index_by_unit; // index 0 corresponds to unit id 1
    int count = 0;

    int stratum_of(UnitId unit) const { return index_by_unit[unit - 1]; }
};

struct PopulationData {
    std::vector<int> stratum_by_unit; // 0-based stratum index per unit
    std::vector<std::pair<UnitId, UnitId>> links;
    std::vector<std::string> response_names;
    std::vector<std::vector<double>> responses; // responses[c][unit-1]
    std::vector<StratumMeta> strata;            // optional; defaults applied
};

/// Total link counts between strata. The diagonal includes the N_k
/// notional self-loops; stored adjacency never contains them.
struct LinkCountMatrix {
    Grid<std::int64_t> w_lk;
    std::int64_t w = 0;
};

/// Immutable stratified directed nomination graph with named numeric
/// responses. Units are identified 1..N; strata are contiguous 1..K.
/// Safe to share across threads once constructed.
class Population {
  public:
    explicit Population(PopulationData data);

    int size() const { return static_cast<int>(strat_.index_by_unit.size()); }
    int num_strata() const { return strat_.count; }
    const Stratification &stratification() const { return strat_; }
    int stratum_index(UnitId unit) const { return strat_.stratum_of(unit); }
    const std::vector<int> &stratum_sizes() const { return stratum_sizes_; }
    const std::vector<StratumMeta> &strata_meta() const { return meta_; }

    std::span<const UnitId> out_neighbors(UnitId unit) const;
    std::span<const UnitId> in_neighbors(UnitId unit) const;
    bool has_link(UnitId from, UnitId to) const;
    std::int64_t num_links() const { return num_links_; }

    const std::vector<std::string> &response_names() const { return response_names_; }
    std::optional<int> find_response(const std::string &name) const;
    double response(UnitId unit, int column) const {
        return responses_[column][unit - 1];
    }
    std::span<const double> response_column(int column) const {
        return responses_[column];
    }

    /// Distinct-neighbour degree ignoring direction, self excluded.
    int degree(UnitId unit) const;

    /// The d highest-degree units; ties broken by smallest unit id.
    std::vector<UnitId> top_degree_units(int d) const;

    LinkCountMatrix link_counts() const;

    /// All stored links as sorted (from, to) pairs.
    std::vector<std::pair<UnitId, UnitId>> link_list() const;

  private:
    Stratification strat_;
    std::vector<int> stratum_sizes_;
    std::vector<StratumMeta> meta_;
    std::vector<std::vector<UnitId>> out_; // sorted per unit
    std::vector<std::vector<UnitId>> in_;  // sorted per unit
    std::int64_t num_links_ = 0;
    std::vector<std::string> response_names_;
    std::vector<std::vector<double>> responses_;
};

LinkCountMatrix link_counts(const Population &pop);

/// Synthetic population request. Exactly one of `density` / `mean_degree`
/// modes is used for link generation.
struct SynthSpec {
    std::vector<int> stratum_sizes;
    bool reciprocated = true;
    std::optional<double> density_within;  // per-pair link probability
    std::optional<double> density_between; // defaults to density_within
    std::optional<double> mean_degree;     // distinct-neighbour degree target
    // Response model: optional indicator of one stratum and/or the node
    // degree attached as named columns.
    std::optional<int> indicator_stratum; // 1-based
    bool degree_response = true;
    std::uint64_t seed = 1;
};

struct SyntheticPopulation {
    Population population;
    std::vector<double> stratum_proportions;
    double mean_degree = 0.0;
};

SyntheticPopulation generate_synthetic(const SynthSpec &spec);

} // namespace lts
