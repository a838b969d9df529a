#include "lts/study.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>

#include "json.hpp"

#include "lts/diagnostics.hpp"
#include "lts/estimators.hpp"
#include "lts/reorder.hpp"

namespace lts {

namespace {

using nlohmann::json;

constexpr std::uint64_t kPhaseCoins = 1;
constexpr std::uint64_t kPhaseSearch = 100;
constexpr std::uint64_t kPhaseChains = 200;

// One concrete way of looking at every replication: analysis strata over
// the units, the design the analyst assumes, and units forced into the
// initial sample.
struct AnalysisSetup {
    SetupConfig cfg;
    Stratification strat;
    DesignParams params;
    std::vector<StratumMeta> meta;
    std::vector<UnitId> forced;
    std::vector<double> gamma;
};

struct QuantityPlan {
    enum class Kind { size, proportion_strata, mean };
    std::string name;
    Kind kind = Kind::size;
    int response = -1;
    MeanMode mean_mode = MeanMode::stratified;
    std::vector<int> target;
    double truth = 0.0;
};

double pooled_alpha(const DesignParams &gen, const std::vector<int> &sizes) {
    double num = 0.0;
    double den = 0.0;
    for (std::size_t k = 0; k < sizes.size(); ++k) {
        num += gen.alpha[k] * sizes[k];
        den += sizes[k];
    }
    return num / den;
}

double pooled_beta(const DesignParams &gen, const std::vector<int> &sizes) {
    double num = 0.0;
    double den = 0.0;
    for (std::size_t l = 0; l < sizes.size(); ++l) {
        for (std::size_t k = 0; k < sizes.size(); ++k) {
            const double pairs = static_cast<double>(sizes[l]) * sizes[k];
            num += gen.beta.at(static_cast<int>(l), static_cast<int>(k)) * pairs;
            den += pairs;
        }
    }
    return den > 0.0 ? num / den : 0.0;
}

// Average generative trace rate over unit pairs spanning two analysis
// strata. Used for matrix entries that mix population strata.
double average_rate(const Population &pop, const DesignParams &gen,
                    const std::vector<int> &analysis_stratum, int from, int to) {
    double num = 0.0;
    double den = 0.0;
    const int n = pop.size();
    for (int u = 1; u <= n; ++u) {
        if (analysis_stratum[u - 1] != from)
            continue;
        for (int v = 1; v <= n; ++v) {
            if (v == u || analysis_stratum[v - 1] != to)
                continue;
            num += gen.beta.at(pop.stratum_index(u), pop.stratum_index(v));
            den += 1.0;
        }
    }
    return den > 0.0 ? num / den : 0.0;
}

AnalysisSetup build_setup(const Population &pop, const DesignParams &gen,
                          const SetupConfig &sc, const RBConfig &rb) {
    AnalysisSetup s;
    s.cfg = sc;
    if (sc.strata == StrataMode::pooled) {
        s.strat.index_by_unit.assign(pop.size(), 0);
        s.strat.count = 1;
        s.params.alpha = {pooled_alpha(gen, pop.stratum_sizes())};
        s.params.beta = Grid<double>(1, pooled_beta(gen, pop.stratum_sizes()));
        s.meta.assign(1, StratumMeta{});
    } else {
        s.strat = pop.stratification();
        s.params.alpha = gen.alpha;
        s.params.beta = gen.beta;
        s.meta = pop.strata_meta();
    }
    s.forced = gen.certainty_units;

    if (sc.certainty_top_degree > 0) {
        const std::vector<UnitId> top = pop.top_degree_units(sc.certainty_top_degree);
        const int base = s.strat.count;
        for (UnitId u : top)
            s.strat.index_by_unit[u - 1] = base;
        s.strat.count = base + 1;

        Grid<double> beta(base + 1, 0.0);
        for (int l = 0; l < base; ++l) {
            for (int c = 0; c < base; ++c)
                beta.at(l, c) = s.params.beta.at(l, c);
        }
        for (int c = 0; c <= base; ++c) {
            beta.at(base, c) =
                average_rate(pop, gen, s.strat.index_by_unit, base, c);
            if (c < base)
                beta.at(c, base) =
                    average_rate(pop, gen, s.strat.index_by_unit, c, base);
        }
        s.params.beta = std::move(beta);
        s.params.alpha.push_back(1.0);
        StratumMeta cert;
        cert.certainty = true;
        s.meta.push_back(cert);
        s.forced.insert(s.forced.end(), top.begin(), top.end());
        std::sort(s.forced.begin(), s.forced.end());
        s.forced.erase(std::unique(s.forced.begin(), s.forced.end()),
                       s.forced.end());
    }

    s.gamma = rb.gamma.empty() ? default_gamma(s.strat.count) : rb.gamma;
    return s;
}

// Population mean of a response, accumulated stratum by stratum in the same
// order the stratified estimator uses. Under a census the estimator then
// reproduces this value bit for bit.
double response_mean_truth(const Population &pop, const AnalysisSetup &s,
                           int col) {
    const int k = s.strat.count;
    if (k == 1)
        return mean_of(pop.response_column(col));
    std::vector<double> sum(k, 0.0);
    std::vector<int> count(k, 0);
    for (int u = 1; u <= pop.size(); ++u) {
        const int c = s.strat.index_by_unit[u - 1];
        sum[c] += pop.response(u, col);
        ++count[c];
    }
    double total = 0.0;
    for (int c = 0; c < k; ++c)
        total += static_cast<double>(count[c]) * (sum[c] / count[c]);
    return total / pop.size();
}

std::vector<QuantityPlan> plan_quantities(const Population &pop,
                                          const AnalysisSetup &s,
                                          const QuantityConfig &q) {
    std::vector<QuantityPlan> plans;
    if (q.size) {
        QuantityPlan p;
        p.name = "size";
        p.kind = QuantityPlan::Kind::size;
        p.truth = static_cast<double>(pop.size());
        plans.push_back(std::move(p));
    }
    if (q.proportion_response) {
        const std::optional<int> col = pop.find_response(*q.proportion_response);
        if (!col)
            throw ConfigError("unknown proportion response '" +
                              *q.proportion_response + "'");
        QuantityPlan p;
        p.name = "proportion";
        p.response = *col;
        p.truth = response_mean_truth(pop, s, *col);

        const int k = s.strat.count;
        bool pure = k > 1;
        std::vector<double> lo(k, 2.0), hi(k, -1.0);
        for (int u = 1; u <= pop.size(); ++u) {
            const int c = s.strat.index_by_unit[u - 1];
            const double v = pop.response(u, *col);
            lo[c] = std::min(lo[c], v);
            hi[c] = std::max(hi[c], v);
        }
        for (int c = 0; c < k && pure; ++c) {
            if (lo[c] != hi[c] || (lo[c] != 0.0 && lo[c] != 1.0))
                pure = false;
        }
        if (pure) {
            p.kind = QuantityPlan::Kind::proportion_strata;
            for (int c = 0; c < k; ++c) {
                if (hi[c] == 1.0)
                    p.target.push_back(c);
            }
        } else {
            p.kind = QuantityPlan::Kind::mean;
            p.mean_mode = k == 1 ? MeanMode::pooled : MeanMode::stratified;
        }
        plans.push_back(std::move(p));
    }
    for (const std::string &name : q.mean_responses) {
        const std::optional<int> col = pop.find_response(name);
        if (!col)
            throw ConfigError("unknown mean response '" + name + "'");
        QuantityPlan p;
        p.name = "mean_" + name;
        p.kind = QuantityPlan::Kind::mean;
        p.response = *col;
        p.mean_mode = s.strat.count == 1 ? MeanMode::pooled : MeanMode::stratified;
        p.truth = response_mean_truth(pop, s, *col);
        plans.push_back(std::move(p));
    }
    return plans;
}

EstimateWithVariance evaluate_plan(const QuantityPlan &p, const ReducedData &dr,
                                   const RoleMask &mask, bool stabilized) {
    switch (p.kind) {
    case QuantityPlan::Kind::size:
        return size_estimate(dr, mask, stabilized);
    case QuantityPlan::Kind::proportion_strata:
        return proportion_estimate(dr, mask, p.target, stabilized);
    case QuantityPlan::Kind::mean:
        break;
    }
    return mean_estimate(dr, mask, p.response, p.mean_mode, stabilized);
}

// accumulators per (setup, quantity, estimator)
struct CellAcc {
    std::vector<double> points;
    std::vector<double> lengths;
    std::int64_t covered = 0;
};

struct SetupAcc {
    std::vector<double> initial_sizes;
    std::vector<double> final_sizes;
    std::vector<double> acceptances;
    std::vector<double> grs;
    int used = 0;
    int failed = 0;
};

ScoreRow make_score(const std::string &quantity, const std::string &setup,
                    const std::string &estimator, const QuantityPlan &plan,
                    const CellAcc &acc) {
    ScoreRow row;
    row.quantity = quantity;
    row.setup = setup;
    row.estimator = estimator;
    row.truth = plan.truth;
    row.replications_used = static_cast<int>(acc.points.size());
    if (!acc.points.empty()) {
        row.expectation = mean_of(acc.points);
        row.variance = acc.points.size() >= 2 ? sample_variance(acc.points) : 0.0;
        row.coverage = static_cast<double>(acc.covered) /
                       static_cast<double>(acc.points.size());
        row.mean_length = mean_of(acc.lengths);
    }
    return row;
}

std::string fmt_csv(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

} // namespace

DesignParams resolve_design(const DesignSpec &spec, int num_strata) {
    DesignParams params;
    if (spec.alpha.size() == 1)
        params.alpha.assign(num_strata, spec.alpha.front());
    else
        params.alpha = spec.alpha;

    params.beta = Grid<double>(num_strata, 0.0);
    if (spec.beta.size() == 1 && spec.beta.front().size() == 1) {
        for (int l = 0; l < num_strata; ++l)
            for (int c = 0; c < num_strata; ++c)
                params.beta.at(l, c) = spec.beta.front().front();
    } else {
        if (static_cast<int>(spec.beta.size()) != num_strata)
            throw ConfigError("design beta must be scalar or KxK");
        for (int l = 0; l < num_strata; ++l) {
            if (static_cast<int>(spec.beta[l].size()) != num_strata)
                throw ConfigError("design beta must be scalar or KxK");
            for (int c = 0; c < num_strata; ++c)
                params.beta.at(l, c) = spec.beta[l][c];
        }
    }
    params.certainty_units = spec.certainty_units;
    validate_design(params, num_strata);
    return params;
}

CoverageScore coverage_score(double lo, double hi, double truth) {
    if (lo > hi)
        throw ConfigError("interval lower bound exceeds upper bound");
    CoverageScore score;
    score.covered = lo <= truth && truth <= hi;
    score.length = hi - lo;
    return score;
}

std::vector<double> default_gamma(int num_strata) {
    if (num_strata <= 1)
        return {1.0};
    std::vector<double> gamma(num_strata, 0.1 / (num_strata - 1));
    gamma.front() = 0.9;
    return gamma;
}

StudyConfig parse_study_config_text(const std::string &text,
                                    const std::filesystem::path &base_dir) {
    json doc = json::parse(text, nullptr, false);
    if (doc.is_discarded())
        throw ConfigError("malformed JSON in study config");
    StudyConfig cfg;
    try {
        const json &popsrc = doc.at("population");
        if (popsrc.contains("nodes")) {
            cfg.nodes_file =
                base_dir / popsrc.at("nodes").get<std::string>();
            cfg.edges_file =
                base_dir / popsrc.at("edges").get<std::string>();
        } else if (popsrc.contains("synthetic")) {
            cfg.synthetic = io::parse_synth_spec_text(
                popsrc.at("synthetic").dump());
        } else {
            throw ConfigError("population must give nodes/edges files or a "
                              "synthetic spec");
        }

        if (doc.contains("design")) {
            const json &jd = doc.at("design");
            if (jd.contains("alpha")) {
                if (jd.at("alpha").is_number())
                    cfg.design.alpha = {jd.at("alpha").get<double>()};
                else
                    cfg.design.alpha = jd.at("alpha").get<std::vector<double>>();
            }
            if (jd.contains("beta")) {
                if (jd.at("beta").is_number())
                    cfg.design.beta = {{jd.at("beta").get<double>()}};
                else
                    cfg.design.beta =
                        jd.at("beta").get<std::vector<std::vector<double>>>();
            }
            if (jd.contains("certainty_units"))
                cfg.design.certainty_units =
                    jd.at("certainty_units").get<std::vector<UnitId>>();
        }

        for (const json &js : doc.at("setups")) {
            SetupConfig sc;
            sc.name = js.at("name").get<std::string>();
            if (js.contains("strata")) {
                const std::string mode = js.at("strata").get<std::string>();
                if (mode == "pooled")
                    sc.strata = StrataMode::pooled;
                else if (mode == "population")
                    sc.strata = StrataMode::population;
                else
                    throw ConfigError("setup strata must be 'pooled' or "
                                      "'population'");
            }
            if (js.contains("certainty_top_degree"))
                sc.certainty_top_degree =
                    js.at("certainty_top_degree").get<int>();
            if (js.contains("stabilized"))
                sc.stabilized = js.at("stabilized").get<bool>();
            cfg.setups.push_back(std::move(sc));
        }

        if (doc.contains("quantities")) {
            const json &jq = doc.at("quantities");
            if (jq.contains("size"))
                cfg.quantities.size = jq.at("size").get<bool>();
            if (jq.contains("proportion_response"))
                cfg.quantities.proportion_response =
                    jq.at("proportion_response").get<std::string>();
            if (jq.contains("mean_responses"))
                cfg.quantities.mean_responses =
                    jq.at("mean_responses").get<std::vector<std::string>>();
        }

        if (doc.contains("replications"))
            cfg.replications = doc.at("replications").get<int>();

        if (doc.contains("rb")) {
            const json &jr = doc.at("rb");
            if (jr.contains("mode")) {
                const std::string mode = jr.at("mode").get<std::string>();
                if (mode == "none")
                    cfg.rb.mode = RBMode::none;
                else if (mode == "mcmc")
                    cfg.rb.mode = RBMode::mcmc;
                else if (mode == "exact")
                    cfg.rb.mode = RBMode::exact;
                else
                    throw ConfigError("rb mode must be none, mcmc, or exact");
            }
            if (jr.contains("chain_length"))
                cfg.rb.chain_length = jr.at("chain_length").get<int>();
            if (jr.contains("chains"))
                cfg.rb.chains = jr.at("chains").get<int>();
            if (jr.contains("gamma"))
                cfg.rb.gamma = jr.at("gamma").get<std::vector<double>>();
            if (jr.contains("search_length"))
                cfg.rb.search_length = jr.at("search_length").get<int>();
            if (jr.contains("enumeration_cap"))
                cfg.rb.enumeration_cap =
                    jr.at("enumeration_cap").get<std::uint64_t>();
        }

        if (doc.contains("seed"))
            cfg.seed = doc.at("seed").get<std::uint64_t>();
        if (doc.contains("threads"))
            cfg.threads = doc.at("threads").get<int>();
        if (doc.contains("audit"))
            cfg.audit = doc.at("audit").get<bool>();
    } catch (const json::exception &e) {
        throw ConfigError(std::string("bad study config: ") + e.what());
    }

    if (cfg.replications < 1)
        throw ConfigError("replications must be at least 1");
    if (cfg.threads < 1)
        throw ConfigError("threads must be at least 1");
    if (cfg.setups.empty())
        throw ConfigError("at least one analysis setup is required");
    for (const SetupConfig &sc : cfg.setups) {
        if (sc.name.empty())
            throw ConfigError("setup names must be non-empty");
        if (sc.certainty_top_degree < 0)
            throw ConfigError("certainty_top_degree must be non-negative");
    }
    for (std::size_t i = 0; i < cfg.setups.size(); ++i) {
        for (std::size_t j = i + 1; j < cfg.setups.size(); ++j) {
            if (cfg.setups[i].name == cfg.setups[j].name)
                throw ConfigError("setup names must be unique");
        }
    }
    if (cfg.rb.mode != RBMode::none) {
        if (cfg.rb.chain_length < 1)
            throw ConfigError("rb chain_length must be positive");
        if (cfg.rb.chains < 1)
            throw ConfigError("rb chains must be positive");
        if (cfg.rb.search_length < 0)
            throw ConfigError("rb search_length must be non-negative");
    }
    return cfg;
}

StudyConfig load_study_config(const std::filesystem::path &path) {
    return parse_study_config_text(io::read_text_file(path),
                                   path.has_parent_path() ? path.parent_path()
                                                          : ".");
}

StudyReport run_study(const StudyConfig &cfg, const Population &pop) {
    const DesignParams generative = resolve_design(cfg.design, pop.num_strata());

    std::vector<AnalysisSetup> setups;
    std::vector<std::vector<QuantityPlan>> plans;
    for (const SetupConfig &sc : cfg.setups) {
        setups.push_back(build_setup(pop, generative, sc, cfg.rb));
        plans.push_back(plan_quantities(pop, setups.back(), cfg.quantities));
    }

    const bool with_rb = cfg.rb.mode != RBMode::none;
    // cells[si][qi][0] holds preliminary scores, [1] the averaged ones
    std::vector<std::vector<std::array<CellAcc, 2>>> cells(setups.size());
    for (std::size_t si = 0; si < setups.size(); ++si)
        cells[si].resize(plans[si].size());
    std::vector<SetupAcc> setup_acc(setups.size());

    StudyReport report;
    report.replications = cfg.replications;

    for (int rep = 0; rep < cfg.replications; ++rep) {
        Rng coin_rng = Rng::stream(cfg.seed, rep, kPhaseCoins);
        const SampleCoins coins = draw_coins(pop, coin_rng);

        for (std::size_t si = 0; si < setups.size(); ++si) {
            const AnalysisSetup &setup = setups[si];
            try {
                const Membership membership =
                    realize(pop, coins, pop.stratification(), generative,
                            setup.forced);
                const ObservedSample d0 = observe(pop, membership, setup.strat,
                                                  setup.params, setup.meta);
                const ReducedData dr = reduce(d0);
                const RoleMask observed = initial_mask(d0);

                std::vector<RBQuantitySpec> specs;
                specs.reserve(plans[si].size());
                double members_included = 0.0;
                for (const SampleMember &m : dr.members) {
                    if (dr.include_in_total[m.stratum])
                        members_included += 1.0;
                }
                for (const QuantityPlan &plan : plans[si]) {
                    RBQuantitySpec spec;
                    spec.estimator = [&dr, &plan, &setup](const RoleMask &mask) {
                        return evaluate_plan(plan, dr, mask,
                                             setup.cfg.stabilized);
                    };
                    spec.interval = plan.kind == QuantityPlan::Kind::size
                                        ? IntervalMethod::log_transform
                                        : IntervalMethod::clt;
                    spec.sample_size = members_included;
                    specs.push_back(std::move(spec));
                }

                std::vector<EstimateWithVariance> prelim(plans[si].size());
                std::vector<EstimateWithVariance> averaged;
                std::optional<double> gr;
                std::optional<double> acceptance;

                if (!with_rb) {
                    for (std::size_t qi = 0; qi < plans[si].size(); ++qi)
                        prelim[qi] = specs[qi].estimator(observed);
                } else {
                    const ReorderContext ctx(dr);
                    RBResult rb;
                    if (cfg.rb.mode == RBMode::exact) {
                        rb = rb_exact(ctx, d0, specs, cfg.rb.enumeration_cap);
                    } else {
                        const Reordering origin = original_reordering(ctx, d0);
                        std::vector<Reordering> seeds;
                        if (cfg.rb.chains == 1) {
                            seeds.push_back(origin);
                        } else {
                            for (int c = 0; c < cfg.rb.chains; ++c) {
                                Rng search_rng = Rng::stream(
                                    cfg.seed, rep, kPhaseSearch + si, c);
                                seeds.push_back(search_overdispersed(
                                    ctx, origin,
                                    c % 2 == 0 ? SearchDirection::lower
                                               : SearchDirection::upper,
                                    cfg.rb.search_length, setup.gamma,
                                    search_rng));
                            }
                        }
                        Rng chain_rng =
                            Rng::stream(cfg.seed, rep, kPhaseChains + si);
                        rb = rb_mcmc(ctx, d0, seeds, cfg.rb.chain_length,
                                     setup.gamma, specs, chain_rng);
                        acceptance = rb.info.acceptance_rate;
                        gr = rb.info.gelman_rubin;
                    }
                    averaged.resize(plans[si].size());
                    for (std::size_t qi = 0; qi < plans[si].size(); ++qi) {
                        prelim[qi] = rb.quantities[qi].preliminary;
                        averaged[qi] = rb.quantities[qi].blackwellized;
                    }
                }

                // commit the replication
                for (std::size_t qi = 0; qi < plans[si].size(); ++qi) {
                    const QuantityPlan &plan = plans[si][qi];
                    auto commit = [&](int which,
                                      const EstimateWithVariance &est) {
                        CellAcc &acc = cells[si][qi][which];
                        const CoverageScore cov =
                            coverage_score(est.ci_lo, est.ci_hi, plan.truth);
                        acc.points.push_back(est.point);
                        acc.lengths.push_back(cov.length);
                        if (cov.covered)
                            ++acc.covered;
                        if (cfg.audit) {
                            AuditRow row;
                            row.replication = rep;
                            row.quantity = plan.name;
                            row.setup = setup.cfg.name;
                            row.estimator =
                                which == 0 ? "preliminary" : "rao_blackwell";
                            row.point = est.point;
                            row.variance = est.variance;
                            row.ci_lo = est.ci_lo;
                            row.ci_hi = est.ci_hi;
                            row.covered = cov.covered;
                            row.length = cov.length;
                            report.audit.push_back(std::move(row));
                        }
                    };
                    commit(0, prelim[qi]);
                    if (with_rb)
                        commit(1, averaged[qi]);
                }
                SetupAcc &sa = setup_acc[si];
                sa.initial_sizes.push_back(
                    static_cast<double>(membership.initial.size()));
                sa.final_sizes.push_back(
                    static_cast<double>(d0.members.size()));
                if (acceptance)
                    sa.acceptances.push_back(*acceptance);
                if (gr)
                    sa.grs.push_back(*gr);
                ++sa.used;
            } catch (const EstimationError &e) {
                FailureRecord fail;
                fail.replication = rep;
                fail.setup = setup.cfg.name;
                fail.message = e.what();
                report.failures.push_back(std::move(fail));
                ++setup_acc[si].failed;
            }
        }
    }

    for (std::size_t si = 0; si < setups.size(); ++si) {
        for (std::size_t qi = 0; qi < plans[si].size(); ++qi) {
            report.scores.push_back(make_score(plans[si][qi].name,
                                               setups[si].cfg.name,
                                               "preliminary", plans[si][qi],
                                               cells[si][qi][0]));
            if (with_rb)
                report.scores.push_back(make_score(plans[si][qi].name,
                                                   setups[si].cfg.name,
                                                   "rao_blackwell",
                                                   plans[si][qi],
                                                   cells[si][qi][1]));
        }
        SetupAggregates agg;
        agg.setup = setups[si].cfg.name;
        const SetupAcc &sa = setup_acc[si];
        agg.used_replications = sa.used;
        agg.failed_replications = sa.failed;
        if (!sa.initial_sizes.empty()) {
            agg.mean_initial_size = mean_of(sa.initial_sizes);
            agg.mean_final_size = mean_of(sa.final_sizes);
        }
        if (!sa.acceptances.empty())
            agg.mean_acceptance = mean_of(sa.acceptances);
        if (!sa.grs.empty()) {
            agg.mean_gelman_rubin = mean_of(sa.grs);
            agg.median_gelman_rubin = median_of(sa.grs);
            agg.gelman_rubin_count = static_cast<int>(sa.grs.size());
        }
        report.setups.push_back(std::move(agg));
    }
    return report;
}

StudyReport run_study(const StudyConfig &cfg) {
    if (cfg.nodes_file) {
        const Population pop =
            io::load_population_csv(*cfg.nodes_file, *cfg.edges_file);
        return run_study(cfg, pop);
    }
    if (cfg.synthetic) {
        const SyntheticPopulation synth = generate_synthetic(*cfg.synthetic);
        return run_study(cfg, synth.population);
    }
    throw ConfigError("study config names no population source");
}

void save_study_report(const StudyReport &report,
                       const std::filesystem::path &out_dir,
                       const io::Provenance &prov) {
    std::filesystem::create_directories(out_dir);

    json scores = json::array();
    for (const ScoreRow &row : report.scores) {
        scores.push_back(json{{"quantity", row.quantity},
                              {"setup", row.setup},
                              {"estimator", row.estimator},
                              {"expectation", row.expectation},
                              {"variance", row.variance},
                              {"coverage", row.coverage},
                              {"mean_length", row.mean_length},
                              {"truth", row.truth},
                              {"replications_used", row.replications_used}});
    }
    json setups = json::array();
    for (const SetupAggregates &agg : report.setups) {
        json js{{"setup", agg.setup},
                {"mean_initial_size", agg.mean_initial_size},
                {"mean_final_size", agg.mean_final_size},
                {"used_replications", agg.used_replications},
                {"failed_replications", agg.failed_replications},
                {"gelman_rubin_count", agg.gelman_rubin_count}};
        if (agg.mean_acceptance)
            js["mean_acceptance"] = *agg.mean_acceptance;
        if (agg.mean_gelman_rubin)
            js["mean_gelman_rubin"] = *agg.mean_gelman_rubin;
        if (agg.median_gelman_rubin)
            js["median_gelman_rubin"] = *agg.median_gelman_rubin;
        setups.push_back(std::move(js));
    }
    json failures = json::array();
    for (const FailureRecord &fail : report.failures) {
        failures.push_back(json{{"replication", fail.replication},
                                {"setup", fail.setup},
                                {"message", fail.message}});
    }
    const json doc{{"schema", "study_report/v1"},
                   {"provenance",
                    json{{"config_hash", std::to_string(prov.config_hash)},
                         {"seed", std::to_string(prov.seed)}}},
                   {"replications", report.replications},
                   {"scores", scores},
                   {"setups", setups},
                   {"failures", failures},
                   {"audit_rows", report.audit.size()}};
    io::write_text_file(out_dir / "report.json", doc.dump(2) + "\n");

    std::string head = "# config_hash=" + std::to_string(prov.config_hash) +
                       " seed=" + std::to_string(prov.seed) + "\n";

    std::string csv = head;
    csv += "quantity,setup,estimator,expectation,variance,coverage,"
           "mean_length,truth,replications_used\n";
    for (const ScoreRow &row : report.scores) {
        csv += row.quantity + "," + row.setup + "," + row.estimator + "," +
               fmt_csv(row.expectation) + "," + fmt_csv(row.variance) + "," +
               fmt_csv(row.coverage) + "," + fmt_csv(row.mean_length) + "," +
               fmt_csv(row.truth) + "," + std::to_string(row.replications_used) +
               "\n";
    }
    io::write_text_file(out_dir / "scores.csv", csv);

    csv = head;
    csv += "setup,used_replications,failed_replications,mean_initial_size,"
           "mean_final_size,mean_acceptance,mean_gelman_rubin,"
           "median_gelman_rubin,gelman_rubin_count\n";
    for (const SetupAggregates &agg : report.setups) {
        csv += agg.setup + "," + std::to_string(agg.used_replications) + "," +
               std::to_string(agg.failed_replications) + "," +
               fmt_csv(agg.mean_initial_size) + "," +
               fmt_csv(agg.mean_final_size) + "," +
               (agg.mean_acceptance ? fmt_csv(*agg.mean_acceptance) : "") + "," +
               (agg.mean_gelman_rubin ? fmt_csv(*agg.mean_gelman_rubin) : "") +
               "," +
               (agg.median_gelman_rubin ? fmt_csv(*agg.median_gelman_rubin)
                                        : "") +
               "," + std::to_string(agg.gelman_rubin_count) + "\n";
    }
    io::write_text_file(out_dir / "setups.csv", csv);

    if (!report.audit.empty()) {
        csv = head;
        csv += "replication,quantity,setup,estimator,point,variance,ci_lo,"
               "ci_hi,covered,length\n";
        for (const AuditRow &row : report.audit) {
            csv += std::to_string(row.replication) + "," + row.quantity + "," +
                   row.setup + "," + row.estimator + "," + fmt_csv(row.point) +
                   "," + fmt_csv(row.variance) + "," + fmt_csv(row.ci_lo) +
                   "," + fmt_csv(row.ci_hi) + "," +
                   (row.covered ? "1" : "0") + "," + fmt_csv(row.length) +
                   "\n";
        }
        io::write_text_file(out_dir / "replications.csv", csv);
    }
}

} // namespace lts
