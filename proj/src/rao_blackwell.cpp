#include "lts/rao_blackwell.hpp"

#include <algorithm>
#include <cmath>

#include "lts/diagnostics.hpp"

namespace lts {

namespace {

EstimateWithVariance finish(const RBQuantitySpec &spec, double point,
                            double mean_var, double spread) {
    EstimateWithVariance est;
    est.point = point;
    est.variance = mean_var - spread;
    if (est.variance < 0.0) {
        est.variance = mean_var;
        est.conservative = true;
    }
    est.method = spec.interval;
    Interval ci{point, point};
    switch (spec.interval) {
    case IntervalMethod::clt:
        ci = ci_clt(est.point, est.variance);
        break;
    case IntervalMethod::log_transform:
        ci = ci_log_transform(est.point, est.variance, spec.sample_size);
        break;
    case IntervalMethod::none:
        break;
    }
    est.ci_lo = ci.lo;
    est.ci_hi = ci.hi;
    return est;
}

EstimateWithVariance with_interval(const RBQuantitySpec &spec,
                                   EstimateWithVariance est) {
    est.method = spec.interval;
    Interval ci{est.point, est.point};
    switch (spec.interval) {
    case IntervalMethod::clt:
        ci = ci_clt(est.point, est.variance);
        break;
    case IntervalMethod::log_transform:
        ci = ci_log_transform(est.point, est.variance, spec.sample_size);
        break;
    case IntervalMethod::none:
        break;
    }
    est.ci_lo = ci.lo;
    est.ci_hi = ci.hi;
    return est;
}

} // namespace

std::vector<RBQuantityResult> rb_from_enumeration(
    std::span<const Reordering> reorderings, std::span<const double> weights,
    const RoleMask &observed, std::span<const RBQuantitySpec> quantities) {
    if (reorderings.empty())
        throw EstimationError("no consistent reorderings to average over");
    if (reorderings.size() != weights.size())
        throw ConfigError("one weight per reordering required");
    double total = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0) || !std::isfinite(w))
            throw ConfigError("reordering weights must be finite and non-negative");
        total += w;
    }
    if (total <= 0.0)
        throw EstimationError("reordering weights sum to zero");

    std::vector<RBQuantityResult> out;
    out.reserve(quantities.size());
    for (const RBQuantitySpec &spec : quantities) {
        std::vector<double> points(reorderings.size());
        std::vector<double> vars(reorderings.size());
        for (std::size_t i = 0; i < reorderings.size(); ++i) {
            const EstimateWithVariance e = spec.estimator(reorderings[i].mask);
            points[i] = e.point;
            vars[i] = e.variance;
        }
        double point = 0.0;
        double mean_var = 0.0;
        for (std::size_t i = 0; i < reorderings.size(); ++i) {
            point += weights[i] * points[i];
            mean_var += weights[i] * vars[i];
        }
        point /= total;
        mean_var /= total;
        double spread = 0.0;
        for (std::size_t i = 0; i < reorderings.size(); ++i)
            spread += weights[i] * (points[i] - point) * (points[i] - point);
        spread /= total;

        RBQuantityResult r;
        r.preliminary = with_interval(spec, spec.estimator(observed));
        r.blackwellized = finish(spec, point, mean_var, spread);
        out.push_back(std::move(r));
    }
    return out;
}

RBResult rb_exact(const ReorderContext &ctx, const ObservedSample &d0,
                  std::span<const RBQuantitySpec> quantities,
                  std::uint64_t cap) {
    const Reordering observed = original_reordering(ctx, d0);
    EnumeratedReorderings all = enumerate_reorderings(ctx, cap);

    double max_logp = observed.logp;
    for (const Reordering &r : all.consistent)
        max_logp = std::max(max_logp, r.logp);
    std::vector<double> weights;
    weights.reserve(all.consistent.size());
    for (const Reordering &r : all.consistent)
        weights.push_back(std::exp(r.logp - max_logp));

    RBResult result;
    result.quantities = rb_from_enumeration(all.consistent, weights,
                                            observed.mask, quantities);
    result.info.states = all.consistent.size();
    result.info.distinct_evals = all.consistent.size();
    result.info.acceptance_rate = 0.0;
    return result;
}

RBResult rb_mcmc(const ReorderContext &ctx, const ObservedSample &d0,
                 std::span<const Reordering> seeds, int chain_length,
                 std::span<const double> gamma,
                 std::span<const RBQuantitySpec> quantities, Rng &rng) {
    if (seeds.empty())
        throw ConfigError("chain average needs at least one seed");
    if (chain_length < 1)
        throw ConfigError("chain length must be positive");

    const Reordering observed = original_reordering(ctx, d0);
    const std::size_t q = quantities.size();

    RBResult result;
    result.quantities.resize(q);
    for (std::size_t j = 0; j < q; ++j)
        result.quantities[j].preliminary =
            with_interval(quantities[j], quantities[j].estimator(observed.mask));

    // per quantity: running sums over all held states, plus point traces of
    // the first quantity for the scale-reduction diagnostic
    std::vector<double> sum_point(q, 0.0);
    std::vector<double> sum_var(q, 0.0);
    std::vector<std::vector<double>> all_points(q);
    std::uint64_t accepted = 0;
    std::uint64_t states = 0;
    std::uint64_t evals = 0;

    for (const Reordering &seed : seeds) {
        Reordering cur = seed;
        std::vector<double> cur_point(q), cur_var(q);
        auto evaluate = [&]() {
            for (std::size_t j = 0; j < q; ++j) {
                const EstimateWithVariance e = quantities[j].estimator(cur.mask);
                cur_point[j] = e.point;
                cur_var[j] = e.variance;
            }
            ++evals;
        };
        evaluate();
        std::vector<double> trace;
        trace.reserve(chain_length + 1);
        std::vector<std::uint8_t> accepts;
        accepts.reserve(chain_length);
        auto record = [&]() {
            for (std::size_t j = 0; j < q; ++j) {
                sum_point[j] += cur_point[j];
                sum_var[j] += cur_var[j];
                all_points[j].push_back(cur_point[j]);
            }
            if (q > 0)
                trace.push_back(cur_point[0]);
            ++states;
        };
        record();
        for (int t = 0; t < chain_length; ++t) {
            const bool moved = mh_step(ctx, cur, gamma, rng);
            if (moved) {
                ++accepted;
                evaluate();
            }
            accepts.push_back(moved ? 1 : 0);
            record();
        }
        result.info.chain_traces.push_back(std::move(trace));
        result.info.chain_accepts.push_back(std::move(accepts));
    }

    const double n = static_cast<double>(states);
    for (std::size_t j = 0; j < q; ++j) {
        const double point = sum_point[j] / n;
        const double mean_var = sum_var[j] / n;
        double spread = 0.0;
        for (double p : all_points[j])
            spread += (p - point) * (p - point);
        spread /= n;
        result.quantities[j].blackwellized =
            finish(quantities[j], point, mean_var, spread);
    }

    result.info.states = states;
    result.info.distinct_evals = evals;
    result.info.acceptance_rate =
        static_cast<double>(accepted) /
        (static_cast<double>(seeds.size()) * static_cast<double>(chain_length));
    if (seeds.size() >= 2 && q > 0) {
        try {
            result.info.gelman_rubin = gelman_rubin(result.info.chain_traces);
        } catch (const EstimationError &) {
            result.info.gelman_rubin = std::nullopt;
        }
    }
    return result;
}

} // namespace lts
