#include "lts/estimators.hpp"

#include <algorithm>
#include <cmath>

namespace lts {

namespace {

int find_member(const std::vector<SampleMember> &members, UnitId u) {
    auto it = std::lower_bound(members.begin(), members.end(), u,
                               [](const SampleMember &m, UnitId v) { return m.unit < v; });
    if (it == members.end() || it->unit != u)
        return -1;
    return static_cast<int>(it - members.begin());
}

// Link tallies plus the per-member bookkeeping needed to remove one initial
// unit from the counts in O(K).
struct Tally {
    CountStatistics stats;
    std::vector<std::int64_t> col_r;
    std::vector<std::int64_t> col_s;
    std::vector<std::vector<int>> out_to_initial; // per member, per target stratum
    std::vector<std::int64_t> in_from_initial;    // per member
    std::vector<int> deletable;                   // member positions
    int n0_total = 0;      // initial units in included strata
    int sampled_total = 0; // members in included strata
};

Tally build_tally(const ReducedData &data, const RoleMask &initial) {
    const int k = data.num_strata;
    if (initial.size() != data.members.size())
        throw DataError("role mask length does not match member count");

    Tally t;
    t.stats.n0.assign(k, 0);
    t.stats.r = Grid<std::int64_t>(k, 0);
    t.stats.s = Grid<std::int64_t>(k, 0);
    t.stats.certainty = data.certainty;
    t.stats.include_in_total = data.include_in_total;
    t.out_to_initial.assign(data.members.size(), std::vector<int>(k, 0));
    t.in_from_initial.assign(data.members.size(), 0);

    for (std::size_t i = 0; i < data.members.size(); ++i) {
        const int c = data.members[i].stratum;
        if (initial[i])
            ++t.stats.n0[c];
        if (t.stats.include_in_total[c]) {
            ++t.sampled_total;
            if (initial[i])
                ++t.n0_total;
        }
    }
    for (int c = 0; c < k; ++c) {
        if (t.stats.n0[c] != data.n0[c])
            throw DataError("initial-role counts disagree with n0 in stratum " +
                            std::to_string(c + 1));
    }

    for (auto [from, to] : data.links) {
        const int fp = find_member(data.members, from);
        const int tp = find_member(data.members, to);
        if (fp < 0 || tp < 0)
            throw DataError("sample link endpoint is not a sampled unit");
        if (!initial[fp])
            continue;
        ++t.in_from_initial[tp];
        if (initial[tp]) {
            t.stats.r.at(data.members[fp].stratum, data.members[tp].stratum) += 1;
            ++t.out_to_initial[fp][data.members[tp].stratum];
        }
    }

    for (std::size_t i = 0; i < data.members.size(); ++i) {
        if (!initial[i])
            continue;
        const SampleMember &m = data.members[i];
        for (int c = 0; c < k; ++c) {
            const int outside = m.out_nominations[c] - t.out_to_initial[i][c];
            if (outside < 0)
                throw DataError("member " + std::to_string(m.unit) +
                                " nominates more initial units than y^{k+} allows");
            t.stats.s.at(m.stratum, c) += outside;
        }
        if (t.stats.include_in_total[m.stratum] && !t.stats.certainty[m.stratum])
            t.deletable.push_back(static_cast<int>(i));
    }

    t.col_r.assign(k, 0);
    t.col_s.assign(k, 0);
    for (int l = 0; l < k; ++l) {
        for (int c = 0; c < k; ++c) {
            t.col_r[c] += t.stats.r.at(l, c);
            t.col_s[c] += t.stats.s.at(l, c);
        }
    }
    return t;
}

double ratio_estimate(double n0, double r_sum, double s_sum, int num_strata,
                      bool stabilized, bool certainty) {
    if (certainty)
        return n0;
    if (stabilized) {
        const double denom = r_sum + num_strata;
        return (n0 + 1.0) * (denom + s_sum + num_strata) / denom - 1.0;
    }
    if (r_sum <= 0.0)
        throw EstimationError("no links between initial units point into the "
                              "stratum; size ratio is undefined");
    return n0 * (r_sum + s_sum) / r_sum;
}

// Stratum estimates after removing the initial unit at member position, or
// the full-data estimates when position is negative.
std::vector<double> stratum_estimates(const Tally &t, const ReducedData &data,
                                      int position, bool stabilized) {
    const int k = t.stats.num_strata();
    std::vector<double> out(k);
    if (position < 0) {
        for (int c = 0; c < k; ++c)
            out[c] = ratio_estimate(t.stats.n0[c], static_cast<double>(t.col_r[c]),
                                    static_cast<double>(t.col_s[c]), k, stabilized,
                                    t.stats.certainty[c]);
        return out;
    }
    const SampleMember &m = data.members[position];
    const int home = m.stratum;
    for (int c = 0; c < k; ++c) {
        double n0 = t.stats.n0[c];
        double r_sum = static_cast<double>(t.col_r[c] - t.out_to_initial[position][c]);
        double s_sum = static_cast<double>(t.col_s[c]) -
                       (m.out_nominations[c] - t.out_to_initial[position][c]);
        if (c == home) {
            n0 -= 1.0;
            r_sum -= static_cast<double>(t.in_from_initial[position]);
            s_sum += static_cast<double>(t.in_from_initial[position]);
        }
        out[c] = ratio_estimate(n0, r_sum, s_sum, k, stabilized, t.stats.certainty[c]);
    }
    return out;
}

double total_of(const std::vector<double> &per_stratum,
                const std::vector<std::uint8_t> &include) {
    double total = 0.0;
    for (std::size_t c = 0; c < per_stratum.size(); ++c) {
        if (include[c])
            total += per_stratum[c];
    }
    return total;
}

void require_deletable(const Tally &t) {
    const int k = t.stats.num_strata();
    for (int c = 0; c < k; ++c) {
        if (t.stats.certainty[c] || !t.stats.include_in_total[c])
            continue;
        if (t.stats.n0[c] < 3)
            throw EstimationError("delete-one variance needs at least 3 initial "
                                  "units in stratum " + std::to_string(c + 1));
    }
}

} // namespace

CountStatistics count_statistics(const ReducedData &data, const RoleMask &initial) {
    return build_tally(data, initial).stats;
}

double stratum_size_estimate(const CountStatistics &stats, int stratum,
                             bool stabilized) {
    const int k = stats.num_strata();
    if (stratum < 0 || stratum >= k)
        throw ConfigError("stratum index out of range");
    std::int64_t r_sum = 0;
    std::int64_t s_sum = 0;
    for (int l = 0; l < k; ++l) {
        r_sum += stats.r.at(l, stratum);
        s_sum += stats.s.at(l, stratum);
    }
    return ratio_estimate(stats.n0[stratum], static_cast<double>(r_sum),
                          static_cast<double>(s_sum), k, stabilized,
                          stats.certainty[stratum]);
}

std::vector<double> stratum_size_estimates(const CountStatistics &stats,
                                           bool stabilized) {
    std::vector<double> out(stats.num_strata());
    for (int c = 0; c < stats.num_strata(); ++c)
        out[c] = stratum_size_estimate(stats, c, stabilized);
    return out;
}

double population_size_estimate(const CountStatistics &stats, bool stabilized) {
    double total = 0.0;
    for (int c = 0; c < stats.num_strata(); ++c) {
        if (stats.include_in_total[c])
            total += stratum_size_estimate(stats, c, stabilized);
    }
    return total;
}

double jackknife_combine_single(std::span<const double> loo) {
    const double n0 = static_cast<double>(loo.size());
    if (loo.size() < 3)
        throw EstimationError("delete-one variance needs at least 3 values");
    const double center = mean_of(loo);
    double spread = 0.0;
    for (double v : loo)
        spread += (v - center) * (v - center);
    return (n0 - 2.0) / (2.0 * n0) * spread;
}

double jackknife_combine_term(std::span<const double> loo, double full_estimate) {
    const double n0 = static_cast<double>(loo.size());
    if (loo.size() < 3)
        throw EstimationError("delete-one variance needs at least 3 values");
    double spread = 0.0;
    for (double v : loo)
        spread += (v - full_estimate) * (v - full_estimate);
    return (n0 - 2.0) / (2.0 * n0) * spread;
}

double jackknife_variance_size(const ReducedData &data, const RoleMask &initial,
                               bool stabilized) {
    const Tally t = build_tally(data, initial);
    if (t.deletable.empty())
        return 0.0;
    require_deletable(t);

    const int k = data.num_strata;
    if (k == 1) {
        std::vector<double> loo;
        loo.reserve(t.deletable.size());
        for (int p : t.deletable)
            loo.push_back(total_of(stratum_estimates(t, data, p, stabilized),
                                   t.stats.include_in_total));
        return jackknife_combine_single(loo);
    }

    const double full =
        total_of(stratum_estimates(t, data, -1, stabilized), t.stats.include_in_total);
    std::vector<std::vector<double>> loo_by_stratum(k);
    for (int p : t.deletable) {
        loo_by_stratum[data.members[p].stratum].push_back(
            total_of(stratum_estimates(t, data, p, stabilized),
                     t.stats.include_in_total));
    }
    double total = 0.0;
    for (int c = 0; c < k; ++c) {
        if (!loo_by_stratum[c].empty())
            total += jackknife_combine_term(loo_by_stratum[c], full);
    }
    return total;
}

Interval ci_log_transform(double point, double variance, double sample_size) {
    if (!(point > sample_size) || variance <= 0.0)
        return {point, point};
    const double excess = point - sample_size;
    const double factor =
        std::exp(1.96 * std::sqrt(std::log1p(variance / (excess * excess))));
    return {sample_size + excess / factor, sample_size + excess * factor};
}

Interval ci_clt(double point, double variance) {
    const double half = 1.96 * std::sqrt(std::max(variance, 0.0));
    return {point - half, point + half};
}

EstimateWithVariance size_estimate(const ReducedData &data,
                                   const RoleMask &initial, bool stabilized) {
    const Tally t = build_tally(data, initial);
    EstimateWithVariance est;
    est.point = total_of(stratum_estimates(t, data, -1, stabilized),
                         t.stats.include_in_total);
    est.variance = jackknife_variance_size(data, initial, stabilized);
    const Interval ci =
        ci_log_transform(est.point, est.variance, static_cast<double>(t.sampled_total));
    est.ci_lo = ci.lo;
    est.ci_hi = ci.hi;
    est.method = IntervalMethod::log_transform;
    return est;
}

EstimateWithVariance mean_estimate(const ReducedData &data,
                                   const RoleMask &initial, int response_index,
                                   MeanMode mode, bool stabilized) {
    if (response_index < 0 ||
        response_index >= static_cast<int>(data.response_names.size()))
        throw ConfigError("response index out of range");
    const Tally t = build_tally(data, initial);
    const int k = data.num_strata;
    const std::vector<double> sizes = stratum_estimates(t, data, -1, stabilized);
    const double n_hat = total_of(sizes, t.stats.include_in_total);

    EstimateWithVariance est;
    est.method = IntervalMethod::clt;

    if (mode == MeanMode::pooled) {
        std::vector<double> z;
        for (std::size_t i = 0; i < data.members.size(); ++i) {
            if (initial[i] && t.stats.include_in_total[data.members[i].stratum])
                z.push_back(data.members[i].responses[response_index]);
        }
        if (z.empty())
            throw EstimationError("mean needs at least one initial unit");
        const double n0 = static_cast<double>(z.size());
        est.point = mean_of(z);
        if (n_hat > n0) {
            if (z.size() < 2)
                throw EstimationError("mean variance needs at least 2 initial units");
            est.variance = (n_hat - n0) / n_hat * sample_variance(z) / n0;
        }
    } else {
        std::vector<std::vector<double>> z(k);
        for (std::size_t i = 0; i < data.members.size(); ++i) {
            if (initial[i])
                z[data.members[i].stratum].push_back(
                    data.members[i].responses[response_index]);
        }
        double point = 0.0;
        double variance = 0.0;
        for (int c = 0; c < k; ++c) {
            if (!t.stats.include_in_total[c])
                continue;
            if (z[c].empty())
                throw EstimationError("mean needs an initial unit in stratum " +
                                      std::to_string(c + 1));
            const double n0k = static_cast<double>(z[c].size());
            point += sizes[c] * mean_of(z[c]);
            if (sizes[c] > n0k) {
                if (z[c].size() < 2)
                    throw EstimationError("mean variance needs 2 initial units in "
                                          "stratum " + std::to_string(c + 1));
                variance += sizes[c] * sizes[c] / (n_hat * n_hat) *
                            (sizes[c] - n0k) / sizes[c] * sample_variance(z[c]) / n0k;
            }
        }
        est.point = point / n_hat;
        est.variance = variance;
    }

    const Interval ci = ci_clt(est.point, est.variance);
    est.ci_lo = ci.lo;
    est.ci_hi = ci.hi;
    return est;
}

EstimateWithVariance proportion_estimate(const ReducedData &data,
                                         const RoleMask &initial,
                                         std::span<const int> target_strata,
                                         bool stabilized) {
    const Tally t = build_tally(data, initial);
    const int k = data.num_strata;
    std::vector<std::uint8_t> in_target(k, 0);
    for (int c : target_strata) {
        if (c < 0 || c >= k)
            throw ConfigError("target stratum out of range");
        if (!t.stats.include_in_total[c])
            throw ConfigError("target stratum is excluded from the total");
        in_target[c] = 1;
    }

    auto share = [&](const std::vector<double> &sizes) {
        double num = 0.0;
        double den = 0.0;
        for (int c = 0; c < k; ++c) {
            if (!t.stats.include_in_total[c])
                continue;
            den += sizes[c];
            if (in_target[c])
                num += sizes[c];
        }
        return num / den;
    };

    EstimateWithVariance est;
    est.method = IntervalMethod::clt;
    est.point = share(stratum_estimates(t, data, -1, stabilized));

    const double n0 = static_cast<double>(t.n0_total);
    const double n_hat =
        total_of(stratum_estimates(t, data, -1, stabilized), t.stats.include_in_total);
    if (!(n_hat > n0)) {
        est.variance = 0.0;
        est.ci_lo = est.point;
        est.ci_hi = est.point;
        return est;
    }

    if (t.deletable.empty())
        throw EstimationError("proportion variance needs a deletable initial unit");
    std::vector<double> loo;
    loo.reserve(t.deletable.size());
    for (int p : t.deletable)
        loo.push_back(share(stratum_estimates(t, data, p, stabilized)));
    const double center = mean_of(loo);

    const double gap = est.point - center;
    est.variance =
        (n_hat - n0) / n0 * (n0 - 1.0) / n0 * (n0 * gap * gap);

    const Interval ci = ci_clt(est.point, est.variance);
    est.ci_lo = ci.lo;
    est.ci_hi = ci.hi;
    return est;
}

EstimateWithVariance proportion_estimate(const ReducedData &data,
                                         const RoleMask &initial, int stratum,
                                         bool stabilized) {
    const int one[] = {stratum};
    return proportion_estimate(data, initial, one, stabilized);
}

} // namespace lts
