#include "doctest.h"

#include <algorithm>

#include "lts/population.hpp"

#include "helpers.hpp"

using namespace lts;

TEST_CASE("population exposes structure of a small graph") {
    const Population pop = testing::four_node_population();
    CHECK(pop.size() == 4);
    CHECK(pop.num_strata() == 1);
    CHECK(pop.num_links() == 6);
    CHECK(pop.stratum_sizes() == std::vector<int>{4});

    const auto out1 = pop.out_neighbors(1);
    CHECK(std::vector<UnitId>(out1.begin(), out1.end()) ==
          std::vector<UnitId>{2, 3});
    const auto in4 = pop.in_neighbors(4);
    CHECK(std::vector<UnitId>(in4.begin(), in4.end()) ==
          std::vector<UnitId>{2, 3});
    CHECK(pop.has_link(1, 2));
    CHECK(!pop.has_link(2, 3));
    CHECK(pop.response(2, 0) == 3.0);
    CHECK(pop.find_response("score") == 0);
    CHECK(!pop.find_response("missing").has_value());
}

TEST_CASE("degree counts distinct neighbours regardless of direction") {
    const Population pop = testing::four_node_population();
    CHECK(pop.degree(1) == 2); // 2 and 3
    CHECK(pop.degree(2) == 2); // 1 and 4
    CHECK(pop.degree(3) == 2); // 1 and 4
    CHECK(pop.degree(4) == 2); // 2 and 3
}

TEST_CASE("top degree units break ties by smallest id") {
    PopulationData data;
    data.stratum_by_unit = {0, 0, 0, 0};
    data.links = {{1, 2}, {1, 3}, {3, 1}, {3, 4}};
    const Population pop{std::move(data)};
    // degrees: 1 -> {2,3}, 2 -> {1}, 3 -> {1,4}, 4 -> {3}. Unit 2 beats
    // unit 4 on the tie for third place; the result is id-sorted.
    CHECK(pop.top_degree_units(2) == std::vector<UnitId>{1, 3});
    CHECK(pop.top_degree_units(3) == std::vector<UnitId>{1, 2, 3});
    CHECK(pop.top_degree_units(0).empty());
}

TEST_CASE("link counts include the notional self loops on the diagonal") {
    PopulationData data;
    data.stratum_by_unit = {0, 0, 1, 1};
    data.links = {{1, 2}, {1, 3}, {3, 1}, {3, 4}, {4, 3}};
    const Population pop{std::move(data)};
    const LinkCountMatrix counts = pop.link_counts();
    CHECK(counts.w_lk.at(0, 0) == 3); // one link plus two units
    CHECK(counts.w_lk.at(0, 1) == 1);
    CHECK(counts.w_lk.at(1, 0) == 1);
    CHECK(counts.w_lk.at(1, 1) == 4); // two links plus two units
    CHECK(counts.w == 9);
}

TEST_CASE("population construction rejects malformed data") {
    PopulationData bad;
    bad.stratum_by_unit = {0, 2}; // stratum 1 skipped
    CHECK_THROWS_AS(Population{std::move(bad)}, DataError);

    PopulationData self_loop;
    self_loop.stratum_by_unit = {0, 0};
    self_loop.links = {{1, 1}};
    CHECK_THROWS_AS(Population{std::move(self_loop)}, DataError);

    PopulationData dangling;
    dangling.stratum_by_unit = {0, 0};
    dangling.links = {{1, 5}};
    CHECK_THROWS_AS(Population{std::move(dangling)}, DataError);

    PopulationData duplicate;
    duplicate.stratum_by_unit = {0, 0};
    duplicate.links = {{1, 2}, {1, 2}};
    CHECK_THROWS_AS(Population{std::move(duplicate)}, DataError);

    PopulationData ragged;
    ragged.stratum_by_unit = {0, 0};
    ragged.response_names = {"z"};
    ragged.responses = {{1.0}};
    CHECK_THROWS_AS(Population{std::move(ragged)}, DataError);
}

TEST_CASE("synthetic populations honour the requested shape") {
    SynthSpec spec;
    spec.stratum_sizes = {12, 18};
    spec.mean_degree = 3.0;
    spec.indicator_stratum = 2;
    spec.degree_response = true;
    spec.seed = 5;
    const SyntheticPopulation syn = generate_synthetic(spec);
    const Population &pop = syn.population;

    CHECK(pop.size() == 30);
    CHECK(pop.num_strata() == 2);
    CHECK(pop.stratum_sizes() == std::vector<int>{12, 18});
    CHECK(syn.stratum_proportions[1] == doctest::Approx(18.0 / 30.0));
    CHECK(syn.mean_degree == doctest::Approx(3.0).epsilon(0.25));

    // Reciprocated by default.
    for (const auto &[from, to] : pop.link_list())
        CHECK(pop.has_link(to, from));

    const int ind = *pop.find_response("indicator");
    const int deg = *pop.find_response("degree");
    for (UnitId u = 1; u <= 30; ++u) {
        CHECK(pop.response(u, ind) == (pop.stratum_index(u) == 1 ? 1.0 : 0.0));
        CHECK(pop.response(u, deg) == static_cast<double>(pop.degree(u)));
    }
}

TEST_CASE("synthetic generation is reproducible per seed") {
    SynthSpec spec;
    spec.stratum_sizes = {15, 15};
    spec.mean_degree = 2.5;
    spec.seed = 9;
    const auto a = generate_synthetic(spec);
    const auto b = generate_synthetic(spec);
    CHECK(a.population.link_list() == b.population.link_list());

    spec.seed = 10;
    const auto c = generate_synthetic(spec);
    CHECK(a.population.link_list() != c.population.link_list());
}

TEST_CASE("synthetic generation validates its spec") {
    SynthSpec empty;
    CHECK_THROWS_AS(generate_synthetic(empty), ConfigError);

    SynthSpec bad_density;
    bad_density.stratum_sizes = {10};
    bad_density.density_within = 1.5;
    CHECK_THROWS_AS(generate_synthetic(bad_density), ConfigError);

    SynthSpec bad_indicator;
    bad_indicator.stratum_sizes = {10};
    bad_indicator.mean_degree = 2.0;
    bad_indicator.indicator_stratum = 3;
    CHECK_THROWS_AS(generate_synthetic(bad_indicator), ConfigError);
}
