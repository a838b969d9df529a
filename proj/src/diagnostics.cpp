#include "lts/diagnostics.hpp"

#include <cmath>

namespace lts {

Reordering search_overdispersed(const ReorderContext &ctx,
                                const Reordering &start,
                                SearchDirection direction, int steps,
                                std::span<const double> gamma, Rng &rng,
                                std::vector<double> *trace_logp) {
    if (steps < 0)
        throw ConfigError("search length must be non-negative");
    Reordering cur = start;
    for (int t = 0; t < steps; ++t) {
        std::optional<Proposal> prop = propose(ctx, cur, gamma, rng);
        if (prop && std::isfinite(prop->candidate.logp)) {
            const bool better = direction == SearchDirection::lower
                                    ? prop->candidate.logp < cur.logp
                                    : prop->candidate.logp > cur.logp;
            if (better)
                cur = std::move(prop->candidate);
        }
        if (trace_logp)
            trace_logp->push_back(cur.logp);
    }
    return cur;
}

double gelman_rubin(const std::vector<std::vector<double>> &traces) {
    if (traces.size() < 2)
        throw EstimationError("scale reduction needs at least two traces");
    const std::size_t len = traces.front().size();
    if (len < 2)
        throw EstimationError("traces must hold at least two values");
    for (const auto &t : traces) {
        if (t.size() != len)
            throw EstimationError("traces must share one length");
    }

    std::vector<double> means;
    means.reserve(traces.size());
    double within = 0.0;
    for (const auto &t : traces) {
        means.push_back(mean_of(t));
        within += sample_variance(t);
    }
    within /= static_cast<double>(traces.size());
    if (within <= 0.0)
        throw EstimationError("traces carry no within-trace variation");

    const double between_over_len = sample_variance(means);
    const double m = static_cast<double>(len);
    return std::sqrt(((m - 1.0) / m * within + between_over_len) / within);
}

} // namespace lts
