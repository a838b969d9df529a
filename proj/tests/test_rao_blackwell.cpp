#include "doctest.h"

#include <cmath>
#include <vector>

#include "lts/rao_blackwell.hpp"

#include "helpers.hpp"

using namespace lts;

namespace {

// Estimator keyed off which triangle unit holds the initial role:
// points 10/20/40, individual variances as given.
RBQuantitySpec keyed_quantity(double v1, double v2, double v3) {
    RBQuantitySpec spec;
    spec.estimator = [v1, v2, v3](const RoleMask &mask) {
        EstimateWithVariance e;
        if (mask[0]) {
            e.point = 10.0;
            e.variance = v1;
        } else if (mask[1]) {
            e.point = 20.0;
            e.variance = v2;
        } else {
            e.point = 40.0;
            e.variance = v3;
        }
        e.method = IntervalMethod::clt;
        return e;
    };
    spec.interval = IntervalMethod::clt;
    return spec;
}

std::vector<Reordering> triangle_states(const ReorderContext &ctx) {
    return {ctx.make({1, 0, 0}), ctx.make({0, 1, 0}), ctx.make({0, 0, 1})};
}

} // namespace

TEST_CASE("enumeration averaging follows the weighted closed form") {
    const ReorderContext ctx(reduce(testing::triangle_sample()));
    const std::vector<Reordering> states = triangle_states(ctx);
    const RoleMask observed{1, 0, 0};
    const std::vector<double> weights{1.0, 1.0, 2.0};

    // weighted spread of the points around 27.5 is 168.75
    const std::vector<RBQuantitySpec> qs{keyed_quantity(300.0, 300.0, 300.0)};
    const auto results = rb_from_enumeration(states, weights, observed, qs);
    REQUIRE(results.size() == 1);
    CHECK(results[0].preliminary.point == doctest::Approx(10.0));
    CHECK(results[0].preliminary.variance == doctest::Approx(300.0));
    CHECK(results[0].blackwellized.point == doctest::Approx(27.5));
    CHECK(results[0].blackwellized.variance == doctest::Approx(131.25));
    CHECK(!results[0].blackwellized.conservative);
    const double half = 1.96 * std::sqrt(131.25);
    CHECK(results[0].blackwellized.ci_lo == doctest::Approx(27.5 - half));
    CHECK(results[0].blackwellized.ci_hi == doctest::Approx(27.5 + half));
}

TEST_CASE("a dominating spread falls back to the mean variance") {
    const ReorderContext ctx(reduce(testing::triangle_sample()));
    const std::vector<Reordering> states = triangle_states(ctx);
    const std::vector<double> weights{1.0, 1.0, 2.0};
    const std::vector<RBQuantitySpec> qs{keyed_quantity(3.0, 5.0, 7.0)};
    const auto results = rb_from_enumeration(states, weights, {1, 0, 0}, qs);
    CHECK(results[0].blackwellized.variance == doctest::Approx(5.5));
    CHECK(results[0].blackwellized.conservative);
}

TEST_CASE("joint weight scaling changes nothing") {
    const ReorderContext ctx(reduce(testing::triangle_sample()));
    const std::vector<Reordering> states = triangle_states(ctx);
    const std::vector<RBQuantitySpec> qs{keyed_quantity(300.0, 300.0, 300.0)};

    const std::vector<double> w1{1.0, 1.0, 2.0};
    const std::vector<double> w2{1e3, 1e3, 2e3};
    const std::vector<double> w3{1e-6, 1e-6, 2e-6};
    const auto a = rb_from_enumeration(states, w1, {1, 0, 0}, qs);
    const auto b = rb_from_enumeration(states, w2, {1, 0, 0}, qs);
    const auto c = rb_from_enumeration(states, w3, {1, 0, 0}, qs);
    CHECK(b[0].blackwellized.point ==
          doctest::Approx(a[0].blackwellized.point).epsilon(1e-13));
    CHECK(b[0].blackwellized.variance ==
          doctest::Approx(a[0].blackwellized.variance).epsilon(1e-13));
    CHECK(c[0].blackwellized.point ==
          doctest::Approx(a[0].blackwellized.point).epsilon(1e-13));
    CHECK(c[0].blackwellized.variance ==
          doctest::Approx(a[0].blackwellized.variance).epsilon(1e-13));
}

TEST_CASE("enumeration averaging validates its weights") {
    const ReorderContext ctx(reduce(testing::triangle_sample()));
    const std::vector<Reordering> states = triangle_states(ctx);
    const std::vector<RBQuantitySpec> qs{keyed_quantity(1.0, 1.0, 1.0)};
    const std::vector<double> zero{0.0, 0.0, 0.0};
    CHECK_THROWS_AS(rb_from_enumeration(states, zero, {1, 0, 0}, qs),
                    EstimationError);
    const std::vector<double> negative{1.0, -1.0, 1.0};
    CHECK_THROWS_AS(rb_from_enumeration(states, negative, {1, 0, 0}, qs),
                    ConfigError);
    const std::vector<double> short_w{1.0};
    CHECK_THROWS_AS(rb_from_enumeration(states, short_w, {1, 0, 0}, qs),
                    ConfigError);
}

TEST_CASE("exact averaging weights states by tracing probability") {
    const ObservedSample tri = testing::triangle_sample();
    const ReorderContext ctx(reduce(tri));
    const std::vector<RBQuantitySpec> qs{keyed_quantity(6.0, 6.0, 6.0)};
    const RBResult res = rb_exact(ctx, tri, qs);
    CHECK(res.info.states == 3);
    CHECK(res.quantities[0].preliminary.point == doctest::Approx(10.0));
    // equal weights: plain average of 10, 20, 40
    CHECK(res.quantities[0].blackwellized.point == doctest::Approx(70.0 / 3.0));

    const ObservedSample cross = testing::crossing_sample();
    const ReorderContext cctx(reduce(cross));
    RBQuantitySpec first_member;
    first_member.estimator = [](const RoleMask &mask) {
        EstimateWithVariance e;
        e.point = mask[0] ? 1.0 : 2.0;
        return e;
    };
    const std::vector<RBQuantitySpec> cqs{first_member};
    const RBResult cres = rb_exact(cctx, cross, cqs);
    CHECK(cres.info.states == 2);
    CHECK(cres.quantities[0].blackwellized.point == doctest::Approx(1.5));
}

TEST_CASE("chain averaging approaches the exact answer on the triangle") {
    const ObservedSample tri = testing::triangle_sample();
    const ReorderContext ctx(reduce(tri));
    const std::vector<RBQuantitySpec> qs{keyed_quantity(6.0, 6.0, 6.0)};
    const Reordering origin = original_reordering(ctx, tri);
    const std::vector<Reordering> seeds{origin, origin};
    const std::vector<double> gamma{1.0};
    Rng rng = Rng::stream(17, 1);
    const int m = 400;
    const RBResult res = rb_mcmc(ctx, tri, seeds, m, gamma, qs, rng);

    CHECK(res.info.states == 2 * (m + 1));
    CHECK(res.info.acceptance_rate == doctest::Approx(1.0)); // symmetric moves
    REQUIRE(res.info.chain_traces.size() == 2);
    CHECK(res.info.chain_traces[0].size() == m + 1);
    CHECK(res.info.chain_accepts[0].size() == m);
    CHECK(res.info.gelman_rubin.has_value());
    CHECK(res.quantities[0].blackwellized.point ==
          doctest::Approx(70.0 / 3.0).epsilon(0.08));
    CHECK(res.quantities[0].preliminary.point == doctest::Approx(10.0));
    CHECK(res.info.distinct_evals <= res.info.states);
    CHECK(res.info.distinct_evals > 0);
}

TEST_CASE("a census chain has nowhere to go") {
    const Population pop = testing::four_node_population();
    DesignParams params;
    params.alpha = {1.0};
    params.beta = Grid<double>::constant(1, 0.5);
    Rng draw_rng = Rng::stream(17, 2);
    const ObservedSample d0 = draw_sample(pop, params, draw_rng);
    const ReorderContext ctx(reduce(d0));
    REQUIRE(ctx.wave1_count() == 0);

    RBQuantitySpec count_quantity;
    count_quantity.estimator = [](const RoleMask &mask) {
        EstimateWithVariance e;
        for (std::uint8_t b : mask)
            e.point += b;
        return e;
    };
    const std::vector<RBQuantitySpec> qs{count_quantity};
    const Reordering origin = original_reordering(ctx, d0);
    const std::vector<Reordering> seeds{origin};
    const std::vector<double> gamma{1.0};
    Rng rng = Rng::stream(17, 3);
    const RBResult res = rb_mcmc(ctx, d0, seeds, 50, gamma, qs, rng);
    CHECK(res.info.acceptance_rate == 0.0);
    CHECK(!res.info.gelman_rubin.has_value()); // single chain
    CHECK(res.quantities[0].blackwellized.point ==
          doctest::Approx(res.quantities[0].preliminary.point));
    CHECK(res.quantities[0].blackwellized.variance ==
          doctest::Approx(res.quantities[0].preliminary.variance));
}

TEST_CASE("chain averaging validates its arguments") {
    const ObservedSample tri = testing::triangle_sample();
    const ReorderContext ctx(reduce(tri));
    const std::vector<RBQuantitySpec> qs{keyed_quantity(1.0, 1.0, 1.0)};
    const std::vector<double> gamma{1.0};
    Rng rng = Rng::stream(17, 4);
    const std::vector<Reordering> none;
    CHECK_THROWS_AS(rb_mcmc(ctx, tri, none, 10, gamma, qs, rng), ConfigError);
    const std::vector<Reordering> seeds{original_reordering(ctx, tri)};
    CHECK_THROWS_AS(rb_mcmc(ctx, tri, seeds, 0, gamma, qs, rng), ConfigError);
}
