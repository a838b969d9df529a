#include "lts/design.hpp"

#include <algorithm>
#include <set>

namespace lts {

void validate_design(const DesignParams &params, int num_strata) {
    if (static_cast<int>(params.alpha.size()) != num_strata)
        throw ConfigError("alpha has " + std::to_string(params.alpha.size()) +
                          " entries, expected " + std::to_string(num_strata));
    for (double a : params.alpha) {
        if (!(a >= 0.0 && a <= 1.0))
            throw ConfigError("alpha entries must lie in [0, 1]");
    }
    if (params.beta.dim() != num_strata)
        throw ConfigError("beta must be a " + std::to_string(num_strata) + "x" +
                          std::to_string(num_strata) + " matrix");
    for (int l = 0; l < num_strata; ++l) {
        for (int k = 0; k < num_strata; ++k) {
            const double b = params.beta.at(l, k);
            if (!(b >= 0.0 && b <= 1.0))
                throw ConfigError("beta entries must lie in [0, 1]");
        }
    }
}

SampleCoins draw_coins(const Population &pop, Rng &rng) {
    SampleCoins coins;
    const int n = pop.size();
    coins.unit.resize(n);
    for (int i = 0; i < n; ++i)
        coins.unit[i] = rng.next_double();
    coins.link.resize(n);
    for (int i = 0; i < n; ++i) {
        const auto nbrs = pop.out_neighbors(static_cast<UnitId>(i + 1));
        coins.link[i].resize(nbrs.size());
        for (std::size_t e = 0; e < nbrs.size(); ++e)
            coins.link[i][e] = rng.next_double();
    }
    return coins;
}

Membership realize(const Population &pop, const SampleCoins &coins,
                   const Stratification &strat, const DesignParams &params,
                   std::span<const UnitId> forced) {
    validate_design(params, strat.count);
    const int n = pop.size();
    std::vector<std::uint8_t> in_initial(n, 0);
    for (int i = 0; i < n; ++i) {
        if (coins.unit[i] < params.alpha[strat.index_by_unit[i]])
            in_initial[i] = 1;
    }
    for (UnitId u : forced) {
        if (u < 1 || u > static_cast<UnitId>(n))
            throw ConfigError("certainty unit " + std::to_string(u) +
                              " is not a population unit");
        in_initial[u - 1] = 1;
    }

    std::vector<std::uint8_t> traced(n, 0);
    for (int i = 0; i < n; ++i) {
        if (!in_initial[i])
            continue;
        const int from_stratum = strat.index_by_unit[i];
        const auto nbrs = pop.out_neighbors(static_cast<UnitId>(i + 1));
        for (std::size_t e = 0; e < nbrs.size(); ++e) {
            const int j = static_cast<int>(nbrs[e]) - 1;
            if (in_initial[j])
                continue;
            const double beta = params.beta.at(from_stratum, strat.index_by_unit[j]);
            if (coins.link[i][e] < beta)
                traced[j] = 1;
        }
    }

    Membership m;
    for (int i = 0; i < n; ++i) {
        if (in_initial[i])
            m.initial.push_back(static_cast<UnitId>(i + 1));
        else if (traced[i])
            m.wave1.push_back(static_cast<UnitId>(i + 1));
    }
    return m;
}

ObservedSample observe(const Population &pop, const Membership &membership,
                       const Stratification &strat, const DesignParams &params,
                       const std::vector<StratumMeta> &meta) {
    validate_design(params, strat.count);
    const int k = strat.count;

    ObservedSample d0;
    d0.num_strata = k;
    d0.design = params;
    d0.certainty.resize(k);
    d0.include_in_total.resize(k);
    for (int s = 0; s < k; ++s) {
        const bool meta_cert = s < static_cast<int>(meta.size()) && meta[s].certainty;
        if (meta_cert && params.alpha[s] != 1.0)
            throw ConfigError("certainty stratum " + std::to_string(s + 1) +
                              " must have alpha = 1");
        d0.certainty[s] = meta_cert || params.alpha[s] == 1.0;
        d0.include_in_total[s] =
            s >= static_cast<int>(meta.size()) || meta[s].include_in_total;
    }
    d0.response_names = pop.response_names();

    std::vector<std::uint8_t> sampled(pop.size(), 0);
    for (UnitId u : membership.initial)
        sampled[u - 1] = 1;
    for (UnitId u : membership.wave1)
        sampled[u - 1] = 1;

    auto add_member = [&](UnitId u, int wave) {
        SampleMember m;
        m.unit = u;
        m.stratum = strat.stratum_of(u);
        m.wave = wave;
        m.out_nominations.assign(k, 0);
        for (UnitId j : pop.out_neighbors(u))
            ++m.out_nominations[strat.stratum_of(j)];
        for (std::size_t c = 0; c < pop.response_names().size(); ++c)
            m.responses.push_back(pop.response(u, static_cast<int>(c)));
        d0.members.push_back(std::move(m));
    };
    for (UnitId u : membership.initial)
        add_member(u, 0);
    for (UnitId u : membership.wave1)
        add_member(u, 1);
    std::sort(d0.members.begin(), d0.members.end(),
              [](const SampleMember &a, const SampleMember &b) { return a.unit < b.unit; });

    for (const SampleMember &m : d0.members) {
        for (UnitId j : pop.out_neighbors(m.unit)) {
            if (sampled[j - 1])
                d0.links.emplace_back(m.unit, j);
        }
    }
    std::sort(d0.links.begin(), d0.links.end());
    return d0;
}

ObservedSample draw_sample(const Population &pop, const DesignParams &params,
                           Rng &rng) {
    const SampleCoins coins = draw_coins(pop, rng);
    const Membership m = realize(pop, coins, pop.stratification(), params,
                                 params.certainty_units);
    return observe(pop, m, pop.stratification(), params, pop.strata_meta());
}

ReducedData reduce(const ObservedSample &d0) {
    ReducedData dr;
    dr.num_strata = d0.num_strata;
    dr.design = d0.design;
    dr.certainty = d0.certainty;
    dr.include_in_total = d0.include_in_total;
    dr.response_names = d0.response_names;
    dr.links = d0.links;
    dr.n0.assign(d0.num_strata, 0);
    dr.members.reserve(d0.members.size());
    for (const SampleMember &m : d0.members) {
        if (m.wave == 0)
            ++dr.n0[m.stratum];
        SampleMember stripped = m;
        stripped.wave = 0;
        dr.members.push_back(std::move(stripped));
    }
    return dr;
}

RoleMask initial_mask(const ObservedSample &d0) {
    RoleMask mask(d0.members.size());
    for (std::size_t i = 0; i < d0.members.size(); ++i)
        mask[i] = d0.members[i].wave == 0 ? 1 : 0;
    return mask;
}

namespace {

struct MemberIndex {
    std::vector<UnitId> units;
    std::vector<int> strata;

    int find(UnitId u) const {
        const auto it = std::lower_bound(units.begin(), units.end(), u);
        if (it == units.end() || *it != u)
            return -1;
        return static_cast<int>(it - units.begin());
    }
};

template <typename Sample>
MemberIndex check_members_and_links(const Sample &d) {
    const int k = d.num_strata;
    if (k < 1)
        throw DataError("sample has no strata");
    validate_design(d.design, k);
    if (static_cast<int>(d.certainty.size()) != k ||
        static_cast<int>(d.include_in_total.size()) != k)
        throw DataError("per-stratum flag vectors must have K entries");
    for (int s = 0; s < k; ++s) {
        if (d.certainty[s] && d.design.alpha[s] != 1.0)
            throw DataError("certainty stratum " + std::to_string(s + 1) +
                            " must have alpha = 1");
    }

    MemberIndex idx;
    for (const SampleMember &m : d.members) {
        if (!idx.units.empty() && m.unit <= idx.units.back())
            throw DataError("members must be strictly sorted by unit id");
        if (m.stratum < 0 || m.stratum >= k)
            throw DataError("member stratum out of range");
        if (static_cast<int>(m.out_nominations.size()) != k)
            throw DataError("out-nomination vector must have K entries");
        for (int c : m.out_nominations) {
            if (c < 0)
                throw DataError("negative out-nomination count");
        }
        if (m.responses.size() != d.response_names.size())
            throw DataError("member response count does not match names");
        idx.units.push_back(m.unit);
        idx.strata.push_back(m.stratum);
    }

    std::vector<std::vector<int>> in_sample_out(d.members.size());
    std::set<std::pair<UnitId, UnitId>> seen;
    for (auto [from, to] : d.links) {
        if (from == to)
            throw DataError("self-loop in sample links");
        const int fi = idx.find(from);
        const int ti = idx.find(to);
        if (fi < 0 || ti < 0)
            throw DataError("sample link endpoint is not a sampled unit");
        if (!seen.insert({from, to}).second)
            throw DataError("duplicate sample link");
        in_sample_out[fi].push_back(ti);
    }
    // y_i^{k+} must cover the in-sample nominations
    for (std::size_t i = 0; i < d.members.size(); ++i) {
        std::vector<int> counted(k, 0);
        for (int t : in_sample_out[i])
            ++counted[idx.strata[t]];
        for (int s = 0; s < k; ++s) {
            if (counted[s] > d.members[i].out_nominations[s])
                throw DataError("member " + std::to_string(d.members[i].unit) +
                                " nominates more sampled units than y^{k+} allows");
        }
    }
    return idx;
}

} // namespace

void validate(const ObservedSample &d0) {
    const MemberIndex idx = check_members_and_links(d0);
    // every wave-1 member needs a traceable in-sample nominator
    std::vector<std::vector<int>> in_nbrs(d0.members.size());
    for (auto [from, to] : d0.links)
        in_nbrs[idx.find(to)].push_back(idx.find(from));
    for (std::size_t i = 0; i < d0.members.size(); ++i) {
        const SampleMember &m = d0.members[i];
        if (m.wave != 0 && m.wave != 1)
            throw DataError("wave labels must be 0 or 1");
        if (d0.certainty[m.stratum] && m.wave != 0)
            throw DataError("certainty-stratum unit " + std::to_string(m.unit) +
                            " cannot be a wave-1 member");
        if (m.wave == 1) {
            bool ok = false;
            for (int j : in_nbrs[i]) {
                if (d0.members[j].wave == 0 &&
                    d0.design.beta.at(d0.members[j].stratum, m.stratum) > 0.0) {
                    ok = true;
                    break;
                }
            }
            if (!ok)
                throw DataError("wave-1 unit " + std::to_string(m.unit) +
                                " has no traceable initial-sample nominator");
        }
    }
}

void validate(const ReducedData &dr) {
    check_members_and_links(dr);
    if (static_cast<int>(dr.n0.size()) != dr.num_strata)
        throw DataError("n0 must have K entries");
    std::vector<int> sampled(dr.num_strata, 0);
    for (const SampleMember &m : dr.members)
        ++sampled[m.stratum];
    for (int s = 0; s < dr.num_strata; ++s) {
        if (dr.n0[s] < 0 || dr.n0[s] > sampled[s])
            throw DataError("n0 exceeds the sampled count in stratum " +
                            std::to_string(s + 1));
        if (dr.certainty[s] && dr.n0[s] != sampled[s])
            throw DataError("certainty stratum " + std::to_string(s + 1) +
                            " must have all sampled units in the initial sample");
    }
}

} // namespace lts
