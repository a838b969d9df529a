#include "lts/reorder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lts {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

int member_position(const std::vector<UnitId> &units, UnitId u) {
    auto it = std::lower_bound(units.begin(), units.end(), u);
    if (it == units.end() || *it != u)
        return -1;
    return static_cast<int>(it - units.begin());
}

} // namespace

ReorderContext::ReorderContext(const ReducedData &data)
    : num_strata_(data.num_strata), n0_(data.n0) {
    const int k = num_strata_;
    const int n = static_cast<int>(data.members.size());
    units_.reserve(n);
    stratum_.reserve(n);
    for (const SampleMember &m : data.members) {
        units_.push_back(m.unit);
        stratum_.push_back(m.stratum);
    }
    sampled_per_stratum_.assign(k, 0);
    for (int s : stratum_)
        ++sampled_per_stratum_[s];
    int n0_total = 0;
    for (int c : n0_)
        n0_total += c;
    wave1_count_ = n - n0_total;

    log1mb_ = Grid<double>(k, 0.0);
    beta_positive_ = Grid<std::uint8_t>(k, 0);
    beta_one_ = Grid<std::uint8_t>(k, 0);
    for (int l = 0; l < k; ++l) {
        for (int c = 0; c < k; ++c) {
            const double b = data.design.beta.at(l, c);
            beta_positive_.at(l, c) = b > 0.0 ? 1 : 0;
            beta_one_.at(l, c) = b == 1.0 ? 1 : 0;
            log1mb_.at(l, c) = b == 1.0 ? kNegInf : std::log1p(-b);
        }
    }

    in_pos_.assign(n, {});
    out_pos_.assign(n, {});
    for (auto [from, to] : data.links) {
        const int fp = member_position(units_, from);
        const int tp = member_position(units_, to);
        if (fp < 0 || tp < 0)
            throw DataError("sample link endpoint is not a sampled unit");
        out_pos_[fp].push_back(tp);
        in_pos_[tp].push_back(fp);
    }

    // Log factor a member contributes while holding the initial role: every
    // nomination pointing outside the final sample failed to trace.
    initial_factor_.assign(n, 0.0);
    for (int i = 0; i < n; ++i) {
        const int c = stratum_[i];
        std::vector<int> sampled_out(k, 0);
        for (int j : out_pos_[i])
            ++sampled_out[stratum_[j]];
        double f = 0.0;
        for (int l = 0; l < k; ++l) {
            const int untraced = data.members[i].out_nominations[l] - sampled_out[l];
            if (untraced < 0)
                throw DataError("member " + std::to_string(units_[i]) +
                                " nominates more sampled units than y^{k+} allows");
            if (untraced == 0)
                continue;
            if (beta_one_.at(c, l)) {
                f = kNegInf;
                break;
            }
            f += untraced * log1mb_.at(c, l);
        }
        initial_factor_[i] = f;
    }
}

double ReorderContext::log_prob(const RoleMask &mask) const {
    const int n = num_members();
    if (static_cast<int>(mask.size()) != n)
        throw DataError("role mask length does not match member count");
    std::vector<int> counts(num_strata_, 0);
    for (int i = 0; i < n; ++i) {
        if (mask[i])
            ++counts[stratum_[i]];
    }
    if (counts != n0_)
        return kNegInf;

    double lp = 0.0;
    for (int i = 0; i < n; ++i) {
        if (mask[i]) {
            if (initial_factor_[i] == kNegInf)
                return kNegInf;
            lp += initial_factor_[i];
            continue;
        }
        const int c = stratum_[i];
        double t = 0.0;
        bool certain = false;
        for (int j : in_pos_[i]) {
            if (!mask[j])
                continue;
            const int l = stratum_[j];
            if (beta_one_.at(l, c)) {
                certain = true;
                break;
            }
            t += log1mb_.at(l, c);
        }
        if (certain)
            continue;
        if (t == 0.0)
            return kNegInf; // no initial nominator could have traced it
        lp += std::log(-std::expm1(t));
    }
    return lp;
}

Reordering ReorderContext::make(RoleMask mask) const {
    Reordering r;
    r.logp = log_prob(mask);
    r.mask = std::move(mask);
    return r;
}

bool ReorderContext::consistent(const RoleMask &mask) const {
    return std::isfinite(log_prob(mask));
}

std::vector<int> ReorderContext::eligible_nominators(int position,
                                                     const RoleMask &mask) const {
    std::vector<int> out;
    const int c = stratum_[position];
    for (int j : in_pos_[position]) {
        if (mask[j] && beta_positive_.at(stratum_[j], c))
            out.push_back(j);
    }
    return out;
}

std::optional<Proposal> propose(const ReorderContext &ctx, const Reordering &cur,
                                std::span<const double> gamma, Rng &rng) {
    if (gamma.empty())
        throw ConfigError("swap-count weights must be non-empty");
    double gamma_total = 0.0;
    for (double g : gamma) {
        if (!(g >= 0.0))
            throw ConfigError("swap-count weights must be non-negative");
        gamma_total += g;
    }
    if (gamma_total <= 0.0)
        throw ConfigError("swap-count weights must not all be zero");
    std::vector<double> gn(gamma.begin(), gamma.end());
    for (double &g : gn)
        g /= gamma_total;
    const int m = 1 + rng.categorical(gn);
    const int n1 = ctx.wave1_count();
    if (m > n1)
        return std::nullopt;

    std::vector<int> wave1;
    wave1.reserve(n1);
    for (int i = 0; i < ctx.num_members(); ++i) {
        if (!cur.mask[i])
            wave1.push_back(i);
    }
    // uniform selection of m distinct wave-1 members
    for (int i = 0; i < m; ++i) {
        const int j = i + static_cast<int>(rng.next_below(wave1.size() - i));
        std::swap(wave1[i], wave1[j]);
    }

    std::vector<int> selected(wave1.begin(), wave1.begin() + m);
    std::vector<int> partners(m);
    double log_fwd_picks = 0.0;
    for (int i = 0; i < m; ++i) {
        const std::vector<int> noms = ctx.eligible_nominators(selected[i], cur.mask);
        if (noms.empty())
            return std::nullopt;
        partners[i] = noms[rng.next_below(noms.size())];
        log_fwd_picks -= std::log(static_cast<double>(noms.size()));
    }
    for (int i = 0; i < m; ++i) {
        for (int j = i + 1; j < m; ++j) {
            if (partners[i] == partners[j])
                return std::nullopt;
        }
    }

    RoleMask mask = cur.mask;
    for (int i = 0; i < m; ++i) {
        mask[selected[i]] = 1;
        mask[partners[i]] = 0;
    }

    const double log_select = std::log(gn[m - 1]) - log_choose(n1, m);

    Proposal prop;
    prop.candidate = ctx.make(std::move(mask));
    prop.log_fwd = log_select + log_fwd_picks;

    double log_rev_picks = 0.0;
    bool reversible = true;
    for (int i = 0; i < m; ++i) {
        const std::vector<int> noms =
            ctx.eligible_nominators(partners[i], prop.candidate.mask);
        if (std::find(noms.begin(), noms.end(), selected[i]) == noms.end()) {
            reversible = false;
            break;
        }
        log_rev_picks -= std::log(static_cast<double>(noms.size()));
    }
    prop.log_rev = reversible ? log_select + log_rev_picks : kNegInf;
    return prop;
}

bool mh_step(const ReorderContext &ctx, Reordering &cur,
             std::span<const double> gamma, Rng &rng) {
    std::optional<Proposal> prop = propose(ctx, cur, gamma, rng);
    if (!prop)
        return false;
    if (!std::isfinite(prop->candidate.logp) || !std::isfinite(prop->log_rev))
        return false;
    const double log_ratio =
        (prop->candidate.logp - cur.logp) + (prop->log_rev - prop->log_fwd);
    if (log_ratio >= 0.0 || rng.next_double() < std::exp(log_ratio)) {
        cur = std::move(prop->candidate);
        return true;
    }
    return false;
}

EnumeratedReorderings enumerate_reorderings(const ReorderContext &ctx,
                                            std::uint64_t cap) {
    const int k = ctx.num_strata();
    const int n = ctx.num_members();
    std::vector<std::vector<int>> by_stratum(k);
    for (int i = 0; i < n; ++i)
        by_stratum[ctx.stratum_of_member(i)].push_back(i);

    double log_candidates = 0.0;
    for (int c = 0; c < k; ++c) {
        const int avail = static_cast<int>(by_stratum[c].size());
        if (ctx.n0()[c] > avail)
            throw DataError("n0 exceeds the sampled count in stratum " +
                            std::to_string(c + 1));
        log_candidates += log_choose(avail, ctx.n0()[c]);
    }
    if (log_candidates > std::log(static_cast<double>(cap)) + 1e-9)
        throw EstimationError("candidate role assignments exceed the "
                              "enumeration cap");

    EnumeratedReorderings out;
    RoleMask mask(n, 0);

    auto emit = [&]() {
        ++out.candidates;
        Reordering r = ctx.make(mask);
        if (std::isfinite(r.logp))
            out.consistent.push_back(std::move(r));
    };

    // nested combinations, one stratum at a time
    auto fill = [&](auto &&self, int c) -> void {
        if (c == k) {
            emit();
            return;
        }
        const std::vector<int> &pool = by_stratum[c];
        const int want = ctx.n0()[c];
        std::vector<int> pick(want);
        auto choose_next = [&](auto &&inner, int start, int depth) -> void {
            if (depth == want) {
                for (int p : pick)
                    mask[p] = 1;
                self(self, c + 1);
                for (int p : pick)
                    mask[p] = 0;
                return;
            }
            for (int idx = start;
                 idx <= static_cast<int>(pool.size()) - (want - depth); ++idx) {
                pick[depth] = pool[idx];
                inner(inner, idx + 1, depth + 1);
            }
        };
        choose_next(choose_next, 0, 0);
    };
    fill(fill, 0);
    return out;
}

Reordering original_reordering(const ReorderContext &ctx,
                               const ObservedSample &d0) {
    Reordering r = ctx.make(initial_mask(d0));
    if (!std::isfinite(r.logp))
        throw DataError("the recorded waves carry zero tracing probability");
    return r;
}

} // namespace lts
