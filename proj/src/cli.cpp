#include "lts/cli.hpp"

#include <cstdlib>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "json.hpp"

#include "lts/diagnostics.hpp"
#include "lts/estimators.hpp"
#include "lts/io.hpp"
#include "lts/rao_blackwell.hpp"
#include "lts/reorder.hpp"
#include "lts/study.hpp"

namespace lts {

namespace {

using nlohmann::json;

void emit_error(const std::string &type, const std::string &message) {
    const json rec{{"error", json{{"type", type}, {"message", message}}}};
    std::cerr << rec.dump() << "\n";
}

json parse_config(const std::string &text) {
    json doc = json::parse(text, nullptr, false);
    if (doc.is_discarded())
        throw ConfigError("malformed JSON in config file");
    return doc;
}

std::filesystem::path config_dir(const std::string &config_path) {
    const std::filesystem::path p(config_path);
    return p.has_parent_path() ? p.parent_path() : std::filesystem::path(".");
}

json estimate_to_json(const EstimateWithVariance &est) {
    return json{{"point", est.point},
                {"variance", est.variance},
                {"ci_lo", est.ci_lo},
                {"ci_hi", est.ci_hi},
                {"method", io::method_name(est.method)},
                {"conservative_flag", est.conservative}};
}

json provenance_json(const io::Provenance &prov) {
    return json{{"config_hash", std::to_string(prov.config_hash)},
                {"seed", std::to_string(prov.seed)}};
}

// Quantities requested against one sample file.
struct SampleQuantities {
    bool size = true;
    std::vector<int> proportion_strata; // 0-based
    std::vector<std::string> mean_responses;
};

SampleQuantities parse_sample_quantities(const json &doc, int num_strata) {
    SampleQuantities q;
    if (!doc.contains("quantities"))
        return q;
    const json &jq = doc.at("quantities");
    try {
        if (jq.contains("size"))
            q.size = jq.at("size").get<bool>();
        if (jq.contains("proportion_strata")) {
            for (int s : jq.at("proportion_strata").get<std::vector<int>>()) {
                if (s < 1 || s > num_strata)
                    throw ConfigError("proportion_strata entries must be 1.." +
                                      std::to_string(num_strata));
                q.proportion_strata.push_back(s - 1);
            }
        }
        if (jq.contains("mean_responses"))
            q.mean_responses =
                jq.at("mean_responses").get<std::vector<std::string>>();
    } catch (const json::exception &e) {
        throw ConfigError(std::string("bad quantities block: ") + e.what());
    }
    return q;
}

struct BoundQuantity {
    std::string name;
    RBQuantitySpec spec;
};

std::vector<BoundQuantity> bind_quantities(const SampleQuantities &q,
                                           const ReducedData &dr,
                                           bool stabilized) {
    double members_included = 0.0;
    for (const SampleMember &m : dr.members) {
        if (dr.include_in_total[m.stratum])
            members_included += 1.0;
    }
    std::vector<BoundQuantity> out;
    if (q.size) {
        BoundQuantity b;
        b.name = "size";
        b.spec.estimator = [&dr, stabilized](const RoleMask &mask) {
            return size_estimate(dr, mask, stabilized);
        };
        b.spec.interval = IntervalMethod::log_transform;
        b.spec.sample_size = members_included;
        out.push_back(std::move(b));
    }
    if (!q.proportion_strata.empty()) {
        BoundQuantity b;
        b.name = "proportion";
        const std::vector<int> target = q.proportion_strata;
        b.spec.estimator = [&dr, target, stabilized](const RoleMask &mask) {
            return proportion_estimate(dr, mask, target, stabilized);
        };
        b.spec.interval = IntervalMethod::clt;
        out.push_back(std::move(b));
    }
    for (const std::string &name : q.mean_responses) {
        const auto it = std::find(dr.response_names.begin(),
                                  dr.response_names.end(), name);
        if (it == dr.response_names.end())
            throw ConfigError("unknown response '" + name + "' in sample");
        const int col = static_cast<int>(it - dr.response_names.begin());
        const MeanMode mode =
            dr.num_strata == 1 ? MeanMode::pooled : MeanMode::stratified;
        BoundQuantity b;
        b.name = "mean_" + name;
        b.spec.estimator = [&dr, col, mode, stabilized](const RoleMask &mask) {
            return mean_estimate(dr, mask, col, mode, stabilized);
        };
        b.spec.interval = IntervalMethod::clt;
        out.push_back(std::move(b));
    }
    if (out.empty())
        throw ConfigError("no quantities requested");
    return out;
}

int run_validate(const std::string &config_path) {
    const std::string text = io::read_text_file(config_path);
    const json doc = parse_config(text);
    json summary;
    if (doc.contains("nodes") || doc.contains("edges")) {
        if (!doc.contains("nodes") || !doc.contains("edges"))
            throw ConfigError("validate needs both nodes and edges files");
        const auto dir = config_dir(config_path);
        const Population pop = io::load_population_csv(
            dir / doc.at("nodes").get<std::string>(),
            dir / doc.at("edges").get<std::string>());
        summary["population"] = json{{"units", pop.size()},
                                     {"strata", pop.num_strata()},
                                     {"links", pop.num_links()}};
    }
    if (doc.contains("sample")) {
        const ObservedSample d0 = io::load_sample(
            config_dir(config_path) / doc.at("sample").get<std::string>());
        int initial = 0;
        for (const SampleMember &m : d0.members)
            initial += m.wave == 0 ? 1 : 0;
        summary["sample"] = json{{"members", d0.members.size()},
                                 {"initial", initial},
                                 {"strata", d0.num_strata},
                                 {"links", d0.links.size()}};
    }
    if (summary.empty())
        throw ConfigError("validate config names neither population files nor "
                          "a sample");
    summary["status"] = "ok";
    std::cout << summary.dump(2) << "\n";
    return 0;
}

int run_synth(const std::string &config_path, const std::string &out_dir,
              std::optional<std::uint64_t> seed_flag) {
    const std::string text = io::read_text_file(config_path);
    SynthSpec spec = io::parse_synth_spec_text(text);
    if (seed_flag)
        spec.seed = *seed_flag;
    const SyntheticPopulation synth = generate_synthetic(spec);

    const std::filesystem::path out(out_dir);
    io::save_population_csv(synth.population, out / "nodes.csv",
                            out / "edges.csv");
    const io::Provenance prov{io::fnv1a64(text), spec.seed};
    const json summary{{"schema", "synth_summary/v1"},
                       {"provenance", provenance_json(prov)},
                       {"units", synth.population.size()},
                       {"strata", synth.population.num_strata()},
                       {"links", synth.population.num_links()},
                       {"stratum_proportions", synth.stratum_proportions},
                       {"mean_degree", synth.mean_degree}};
    io::write_text_file(out / "summary.json", summary.dump(2) + "\n");
    return 0;
}

int run_sample(const std::string &config_path, const std::string &out_dir,
               std::optional<std::uint64_t> seed_flag) {
    const std::string text = io::read_text_file(config_path);
    const json doc = parse_config(text);

    StudyConfig shell; // reuse the population/design parsing rules
    try {
        const json wrapper{{"population", doc.at("population")},
                           {"design", doc.value("design", json::object())},
                           {"setups", json::array({json{{"name", "sample"}}})}};
        shell = parse_study_config_text(wrapper.dump(), config_dir(config_path));
    } catch (const json::exception &e) {
        throw ConfigError(std::string("bad sample config: ") + e.what());
    }
    std::uint64_t seed = doc.value("seed", std::uint64_t{1});
    if (seed_flag)
        seed = *seed_flag;

    Population pop = [&]() {
        if (shell.nodes_file)
            return io::load_population_csv(*shell.nodes_file, *shell.edges_file);
        return generate_synthetic(*shell.synthetic).population;
    }();
    const DesignParams params = resolve_design(shell.design, pop.num_strata());

    Rng rng = Rng::stream(seed, 0, 1);
    const ObservedSample d0 = draw_sample(pop, params, rng);
    const io::Provenance prov{io::fnv1a64(text), seed};
    io::save_sample(d0, std::filesystem::path(out_dir) / "sample.json", prov);
    return 0;
}

int run_estimate(const std::string &config_path, const std::string &out_dir,
                 const std::string &format) {
    const std::string text = io::read_text_file(config_path);
    const json doc = parse_config(text);
    if (!doc.contains("sample"))
        throw ConfigError("estimate config must name a sample file");
    const ObservedSample d0 = io::load_sample(
        config_dir(config_path) / doc.at("sample").get<std::string>());
    const bool stabilized = doc.value("stabilized", true);
    const ReducedData dr = reduce(d0);
    const RoleMask observed = initial_mask(d0);
    const SampleQuantities q = parse_sample_quantities(doc, d0.num_strata);
    const std::vector<BoundQuantity> bound = bind_quantities(q, dr, stabilized);

    std::vector<io::EstimateRecord> records;
    for (const BoundQuantity &b : bound)
        records.push_back(
            io::to_record(b.name, "as_observed", b.spec.estimator(observed)));

    const io::Provenance prov{io::fnv1a64(text), 0};
    const std::filesystem::path out(out_dir);
    io::save_estimates_json(records, out / "estimates.json", prov);
    if (format == "csv")
        io::save_estimates_csv(records, out / "estimates.csv", prov);
    return 0;
}

int run_rb(const std::string &config_path, const std::string &out_dir,
           std::optional<std::uint64_t> seed_flag) {
    const std::string text = io::read_text_file(config_path);
    const json doc = parse_config(text);
    if (!doc.contains("sample"))
        throw ConfigError("rb config must name a sample file");
    const ObservedSample d0 = io::load_sample(
        config_dir(config_path) / doc.at("sample").get<std::string>());
    const bool stabilized = doc.value("stabilized", true);
    const bool traces = doc.value("traces", false);
    std::uint64_t seed = doc.value("seed", std::uint64_t{1});
    if (seed_flag)
        seed = *seed_flag;

    RBConfig rb;
    rb.mode = RBMode::mcmc;
    if (doc.contains("rb")) {
        const json &jr = doc.at("rb");
        try {
            if (jr.contains("mode")) {
                const std::string mode = jr.at("mode").get<std::string>();
                if (mode == "mcmc")
                    rb.mode = RBMode::mcmc;
                else if (mode == "exact")
                    rb.mode = RBMode::exact;
                else
                    throw ConfigError("rb mode must be mcmc or exact");
            }
            if (jr.contains("chain_length"))
                rb.chain_length = jr.at("chain_length").get<int>();
            if (jr.contains("chains"))
                rb.chains = jr.at("chains").get<int>();
            if (jr.contains("gamma"))
                rb.gamma = jr.at("gamma").get<std::vector<double>>();
            if (jr.contains("search_length"))
                rb.search_length = jr.at("search_length").get<int>();
            if (jr.contains("enumeration_cap"))
                rb.enumeration_cap = jr.at("enumeration_cap").get<std::uint64_t>();
        } catch (const json::exception &e) {
            throw ConfigError(std::string("bad rb block: ") + e.what());
        }
    }
    if (rb.chain_length < 1 || rb.chains < 1 || rb.search_length < 0)
        throw ConfigError("rb chain settings must be positive");

    const SampleQuantities q = parse_sample_quantities(doc, d0.num_strata);
    const ReducedData dr = reduce(d0);
    const std::vector<BoundQuantity> bound = bind_quantities(q, dr, stabilized);
    std::vector<RBQuantitySpec> specs;
    for (const BoundQuantity &b : bound)
        specs.push_back(b.spec);

    const ReorderContext ctx(dr);
    const std::vector<double> gamma =
        rb.gamma.empty() ? default_gamma(d0.num_strata) : rb.gamma;
    const io::Provenance prov{io::fnv1a64(text), seed};
    const std::filesystem::path out(out_dir);

    RBResult result;
    std::vector<std::vector<double>> search_traces;
    if (rb.mode == RBMode::exact) {
        result = rb_exact(ctx, d0, specs, rb.enumeration_cap);
    } else {
        const Reordering origin = original_reordering(ctx, d0);
        std::vector<Reordering> seeds;
        if (rb.chains == 1) {
            seeds.push_back(origin);
        } else {
            for (int c = 0; c < rb.chains; ++c) {
                Rng search_rng = Rng::stream(seed, 0, 100, c);
                std::vector<double> trace;
                seeds.push_back(search_overdispersed(
                    ctx, origin,
                    c % 2 == 0 ? SearchDirection::lower : SearchDirection::upper,
                    rb.search_length, gamma, search_rng,
                    traces ? &trace : nullptr));
                if (traces)
                    search_traces.push_back(std::move(trace));
            }
        }
        Rng chain_rng = Rng::stream(seed, 0, 200);
        result = rb_mcmc(ctx, d0, seeds, rb.chain_length, gamma, specs,
                         chain_rng);

        if (traces) {
            for (std::size_t c = 0; c < search_traces.size(); ++c) {
                std::vector<io::TraceRow> rows;
                double prev = origin.logp;
                for (std::size_t t = 0; t < search_traces[c].size(); ++t) {
                    io::TraceRow row;
                    row.step = static_cast<std::int64_t>(t) + 1;
                    row.accepted = search_traces[c][t] != prev ? 1 : 0;
                    row.value = search_traces[c][t];
                    prev = search_traces[c][t];
                    rows.push_back(row);
                }
                io::save_trace_csv(out / ("search_" + std::to_string(c) +
                                          ".csv"),
                                   rows, "log_prob", prov);
            }
            for (std::size_t c = 0; c < result.info.chain_traces.size(); ++c) {
                std::vector<io::TraceRow> rows;
                const auto &trace = result.info.chain_traces[c];
                const auto &accepts = result.info.chain_accepts[c];
                for (std::size_t t = 0; t < trace.size(); ++t) {
                    io::TraceRow row;
                    row.step = static_cast<std::int64_t>(t);
                    row.accepted = t == 0 ? 0 : accepts[t - 1];
                    row.value = trace[t];
                    rows.push_back(row);
                }
                io::save_trace_csv(out / ("chain_" + std::to_string(c) +
                                          ".csv"),
                                   rows, bound.front().name, prov);
            }
        }
    }

    json quantities = json::array();
    for (std::size_t i = 0; i < bound.size(); ++i) {
        quantities.push_back(
            json{{"quantity", bound[i].name},
                 {"preliminary",
                  estimate_to_json(result.quantities[i].preliminary)},
                 {"rao_blackwell",
                  estimate_to_json(result.quantities[i].blackwellized)}});
    }
    json info{{"states", result.info.states},
              {"acceptance_rate", result.info.acceptance_rate},
              {"mode", rb.mode == RBMode::exact ? "exact" : "mcmc"}};
    if (rb.mode == RBMode::mcmc) {
        info["chains"] = rb.chains;
        info["chain_length"] = rb.chain_length;
    }
    if (result.info.gelman_rubin)
        info["gelman_rubin"] = *result.info.gelman_rubin;
    const json outdoc{{"schema", "rb/v1"},
                      {"provenance", provenance_json(prov)},
                      {"info", info},
                      {"quantities", quantities}};
    io::write_text_file(out / "rb.json", outdoc.dump(2) + "\n");
    return 0;
}

int run_simulate(const std::string &config_path, const std::string &out_dir,
                 std::optional<std::uint64_t> seed_flag) {
    const std::string text = io::read_text_file(config_path);
    StudyConfig cfg = parse_study_config_text(text, config_dir(config_path));
    if (seed_flag)
        cfg.seed = *seed_flag;
    if (const char *env = std::getenv("LINKTRACE_THREADS")) {
        try {
            cfg.threads = std::stoi(env);
        } catch (const std::exception &) {
            throw ConfigError("LINKTRACE_THREADS must be an integer");
        }
        if (cfg.threads < 1)
            throw ConfigError("LINKTRACE_THREADS must be at least 1");
    }
    const StudyReport report = run_study(cfg);
    const io::Provenance prov{io::fnv1a64(text), cfg.seed};
    save_study_report(report, out_dir, prov);
    return 0;
}

} // namespace

int dispatch(const std::vector<std::string> &args) {
    CLI::App app{"stratified link-tracing sampling and estimation toolkit"};
    app.require_subcommand(1);

    std::string config;
    std::string out;
    std::string format = "json";
    std::uint64_t seed = 0;
    bool seed_given = false;

    CLI::App *validate = app.add_subcommand("validate", "check input files");
    validate->add_option("--config", config)->required();

    CLI::App *synth = app.add_subcommand("synth", "write a synthetic population");
    CLI::App *sample = app.add_subcommand("sample", "draw one observed sample");
    CLI::App *estimate =
        app.add_subcommand("estimate", "preliminary estimates from a sample");
    CLI::App *rb =
        app.add_subcommand("rb", "reordering-averaged estimates from a sample");
    CLI::App *simulate = app.add_subcommand("simulate", "run a replication study");
    for (CLI::App *sub : {synth, sample, estimate, rb, simulate}) {
        sub->add_option("--config", config)->required();
        sub->add_option("--out", out)->required();
        sub->add_option("--seed", seed)
            ->each([&seed_given](const std::string &) { seed_given = true; });
        sub->add_option("--format", format)
            ->check(CLI::IsMember({"csv", "json"}));
    }

    std::vector<const char *> argv;
    argv.push_back("linktrace");
    for (const std::string &a : args)
        argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp &) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::ParseError &e) {
        emit_error("config", e.what());
        return 2;
    }

    std::optional<std::uint64_t> seed_flag;
    if (seed_given)
        seed_flag.emplace(seed);

    try {
        if (validate->parsed())
            return run_validate(config);
        if (synth->parsed())
            return run_synth(config, out, seed_flag);
        if (sample->parsed())
            return run_sample(config, out, seed_flag);
        if (estimate->parsed())
            return run_estimate(config, out, format);
        if (rb->parsed())
            return run_rb(config, out, seed_flag);
        if (simulate->parsed())
            return run_simulate(config, out, seed_flag);
        emit_error("config", "no subcommand selected");
        return 2;
    } catch (const ConfigError &e) {
        emit_error("config", e.what());
        return 2;
    } catch (const DataError &e) {
        emit_error("data", e.what());
        return 3;
    } catch (const EstimationError &e) {
        emit_error("estimation", e.what());
        return 4;
    } catch (const std::exception &e) {
        emit_error("internal", e.what());
        return 4;
    }
}

} // namespace lts
