#pragma once

#include <span>
#include <vector>

#include "lts/common.hpp"
#include "lts/reorder.hpp"

namespace lts {

enum class SearchDirection { lower, upper };

// Stochastic hill walk over role assignments: propose swaps from the current
// state and move whenever the candidate is consistent and strictly less
// (lower) or more (upper) probable. Used to spread chain seeds away from the
// observed ordering. When given, trace_logp records the held log probability
// after every step.
Reordering search_overdispersed(const ReorderContext &ctx,
                                const Reordering &start,
                                SearchDirection direction, int steps,
                                std::span<const double> gamma, Rng &rng,
                                std::vector<double> *trace_logp = nullptr);

// Potential scale reduction across parallel traces of equal length. Throws
// when fewer than two traces are given, lengths disagree or are below two,
// or the within-trace variance vanishes.
double gelman_rubin(const std::vector<std::vector<double>> &traces);

} // namespace lts
