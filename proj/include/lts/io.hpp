#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lts/design.hpp"
#include "lts/estimators.hpp"
#include "lts/population.hpp"

namespace lts::io {

std::uint64_t fnv1a64(std::string_view text);

// Carried into every artifact this tool writes.
struct Provenance {
    std::uint64_t config_hash = 0;
    std::uint64_t seed = 0;
};

std::string read_text_file(const std::filesystem::path &path);
void write_text_file(const std::filesystem::path &path, std::string_view text);

// Population files: a nodes table `unit,stratum,<response columns...>` and an
// edges table `src,dst`. Unit ids are 1..N and strata are 1-based.
Population load_population_csv(const std::filesystem::path &nodes_file,
                               const std::filesystem::path &edges_file);
void save_population_csv(const Population &pop,
                         const std::filesystem::path &nodes_file,
                         const std::filesystem::path &edges_file);

SynthSpec parse_synth_spec_text(const std::string &text);
SynthSpec load_synth_spec(const std::filesystem::path &path);

void save_sample(const ObservedSample &d0, const std::filesystem::path &path,
                 const Provenance &prov);
ObservedSample load_sample(const std::filesystem::path &path);
void save_reduced(const ReducedData &data, const std::filesystem::path &path,
                  const Provenance &prov);
ReducedData load_reduced(const std::filesystem::path &path);

struct EstimateRecord {
    std::string quantity;
    std::string setup;
    double point = 0.0;
    double variance = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    std::string method;
    bool conservative = false;
};

std::string method_name(IntervalMethod method);
EstimateRecord to_record(std::string quantity, std::string setup,
                         const EstimateWithVariance &est);

void save_estimates_json(std::span<const EstimateRecord> records,
                         const std::filesystem::path &path,
                         const Provenance &prov);
void save_estimates_csv(std::span<const EstimateRecord> records,
                        const std::filesystem::path &path,
                        const Provenance &prov);

struct TraceRow {
    std::int64_t step = 0;
    int accepted = 0;
    double value = 0.0;
};

void save_trace_csv(const std::filesystem::path &path,
                    std::span<const TraceRow> rows, std::string_view value_name,
                    const Provenance &prov);

} // namespace lts::io
