#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lts/design.hpp"
#include "lts/io.hpp"
#include "lts/population.hpp"
#include "lts/rao_blackwell.hpp"

namespace lts {

enum class RBMode { none, mcmc, exact };
enum class StrataMode { pooled, population };

// One way of analyzing every drawn sample. `pooled` collapses all units
// into a single stratum; `population` keeps the population's own strata.
// A positive certainty_top_degree moves that many highest-degree units
// (ties broken by smallest id) into an extra always-sampled stratum.
struct SetupConfig {
    std::string name;
    StrataMode strata = StrataMode::population;
    int certainty_top_degree = 0;
    bool stabilized = true;
};

struct QuantityConfig {
    bool size = true;
    std::optional<std::string> proportion_response;
    std::vector<std::string> mean_responses;
};

struct RBConfig {
    RBMode mode = RBMode::none;
    int chain_length = 2000;
    int chains = 2;
    std::vector<double> gamma; // empty: default by analysis strata count
    int search_length = 10000;
    std::uint64_t enumeration_cap = 1'000'000;
};

// Generative design with scalar broadcast: a single alpha (or a 1x1 beta)
// applies to every stratum (pair).
struct DesignSpec {
    std::vector<double> alpha{1.0};
    std::vector<std::vector<double>> beta{{0.0}};
    std::vector<UnitId> certainty_units;
};

DesignParams resolve_design(const DesignSpec &spec, int num_strata);

struct StudyConfig {
    std::optional<std::filesystem::path> nodes_file;
    std::optional<std::filesystem::path> edges_file;
    std::optional<SynthSpec> synthetic;
    DesignSpec design;
    std::vector<SetupConfig> setups;
    QuantityConfig quantities;
    int replications = 1;
    RBConfig rb;
    std::uint64_t seed = 1;
    int threads = 1;
    bool audit = false; // keep per-replication estimate rows
};

StudyConfig parse_study_config_text(const std::string &text,
                                    const std::filesystem::path &base_dir);
StudyConfig load_study_config(const std::filesystem::path &path);

struct ScoreRow {
    std::string quantity;
    std::string setup;
    std::string estimator; // "preliminary" or "rao_blackwell"
    double expectation = 0.0;
    double variance = 0.0; // across replications
    double coverage = 0.0;
    double mean_length = 0.0;
    double truth = 0.0;
    int replications_used = 0;
};

struct SetupAggregates {
    std::string setup;
    double mean_initial_size = 0.0;
    double mean_final_size = 0.0;
    std::optional<double> mean_acceptance;
    std::optional<double> mean_gelman_rubin;
    std::optional<double> median_gelman_rubin;
    int gelman_rubin_count = 0;
    int used_replications = 0;
    int failed_replications = 0;
};

struct FailureRecord {
    int replication = 0;
    std::string setup;
    std::string message;
};

struct AuditRow {
    int replication = 0;
    std::string quantity;
    std::string setup;
    std::string estimator;
    double point = 0.0;
    double variance = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    bool covered = false;
    double length = 0.0;
};

struct StudyReport {
    int replications = 0;
    std::vector<ScoreRow> scores;
    std::vector<SetupAggregates> setups;
    std::vector<FailureRecord> failures;
    std::vector<AuditRow> audit;
};

struct CoverageScore {
    bool covered = false;
    double length = 0.0;
};

CoverageScore coverage_score(double lo, double hi, double truth);

// Default swap-count weights for the interchange chain: single swaps only
// with one stratum, otherwise 0.9 on single swaps and the remainder split
// over larger moves.
std::vector<double> default_gamma(int num_strata);

StudyReport run_study(const StudyConfig &cfg, const Population &pop);
StudyReport run_study(const StudyConfig &cfg);

void save_study_report(const StudyReport &report,
                       const std::filesystem::path &out_dir,
                       const io::Provenance &prov);

} // namespace lts
