#pragma once

// Hand-built instances shared across test files. Tallies and estimates for
// these graphs were worked out by hand; the expected numbers quoted in the
// tests come from that derivation, not from the library.

#include <utility>
#include <vector>

#include "lts/design.hpp"
#include "lts/population.hpp"

namespace lts::testing {

// Four units in one stratum with a score response. Links: 1<->2, 1->3,
// 2->4, 3<->4.
inline Population four_node_population() {
    PopulationData data;
    data.stratum_by_unit = {0, 0, 0, 0};
    data.links = {{1, 2}, {1, 3}, {2, 1}, {2, 4}, {3, 4}, {4, 3}};
    data.response_names = {"score"};
    data.responses = {{1.0, 3.0, 2.0, 4.0}};
    return Population(std::move(data));
}

// Reduced data where units 1 and 2 are the whole sample, both initial.
// Tallies: r = 2 (the reciprocated pair), s = 2 (the links toward 3 and 4).
inline ReducedData four_node_reduced() {
    ReducedData d;
    d.num_strata = 1;
    d.design.alpha = {0.5};
    d.design.beta = Grid<double>::constant(1, 0.5);
    d.certainty = {0};
    d.include_in_total = {1};
    d.response_names = {"score"};
    d.members = {{1, 0, 0, {2}, {1.0}}, {2, 0, 0, {2}, {3.0}}};
    d.links = {{1, 2}, {2, 1}};
    d.n0 = {2};
    return d;
}

// Five units in two strata (1,2,3 | 4,5); every unit sampled, initial
// units 1,2,4,5. Column tallies: R = (2,2), S = (2,1).
inline ReducedData five_node_reduced() {
    ReducedData d;
    d.num_strata = 2;
    d.design.alpha = {0.5, 0.5};
    d.design.beta = Grid<double>::constant(2, 0.5);
    d.certainty = {0, 0};
    d.include_in_total = {1, 1};
    d.response_names = {"z"};
    d.members = {{1, 0, 0, {1, 1}, {2.0}},
                 {2, 0, 0, {1, 1}, {4.0}},
                 {3, 0, 0, {0, 1}, {6.0}},
                 {4, 1, 0, {1, 1}, {10.0}},
                 {5, 1, 0, {1, 0}, {8.0}}};
    d.links = {{1, 2}, {1, 4}, {2, 3}, {3, 4}, {4, 5}, {5, 1}};
    d.n0 = {2, 2};
    return d;
}

inline RoleMask five_node_initial() { return {1, 1, 0, 1, 1}; }

// Two strata crossing each other: units 1,4 in stratum one, units 2,3 in
// stratum two; links 1->3, 2->4, 3->1, 4->2. With initial {1,2} each
// traced unit has exactly one nominator, and the only other consistent
// role assignment is {3,4}. Both assignments have tracing probability
// 1/4 under beta = 0.5.
inline ObservedSample crossing_sample() {
    ObservedSample d0;
    d0.num_strata = 2;
    d0.design.alpha = {0.5, 0.5};
    d0.design.beta = Grid<double>::constant(2, 0.5);
    d0.certainty = {0, 0};
    d0.include_in_total = {1, 1};
    d0.members = {{1, 0, 0, {0, 1}, {}},
                  {2, 1, 0, {1, 0}, {}},
                  {3, 1, 1, {1, 0}, {}},
                  {4, 0, 1, {0, 1}, {}}};
    d0.links = {{1, 3}, {2, 4}, {3, 1}, {4, 2}};
    return d0;
}

// Reciprocated triangle, one stratum, tracing is certain. Every singleton
// initial set reproduces the sample, so all three role assignments have
// probability one.
inline ObservedSample triangle_sample() {
    ObservedSample d0;
    d0.num_strata = 1;
    d0.design.alpha = {0.5};
    d0.design.beta = Grid<double>::constant(1, 1.0);
    d0.certainty = {0};
    d0.include_in_total = {1};
    d0.members = {{1, 0, 0, {2}, {}}, {2, 0, 1, {2}, {}}, {3, 0, 1, {2}, {}}};
    d0.links = {{1, 2}, {1, 3}, {2, 1}, {2, 3}, {3, 1}, {3, 2}};
    return d0;
}

} // namespace lts::testing
