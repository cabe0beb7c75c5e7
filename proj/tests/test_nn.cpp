// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "iwaqg/nn.hpp"
#include "oracles.hpp"

using namespace iwaqg;
using ad::Tape;
using ad::Var;

TEST_CASE("adam leaves a parameter with zero gradient unchanged") {
    Tensor p = Tensor::vector({0.5, -1.0, 2.0});
    nn::AdamState state;
    const std::vector<double> zero(3, 0.0);
    for (int i = 0; i < 5; ++i) {
        nn::adam_step(p, zero, state, {});
    }
    CHECK(p == Tensor::vector({0.5, -1.0, 2.0}));
}

TEST_CASE("first adam step moves each coordinate by about lr against the gradient") {
    Tensor p = Tensor::vector({0.0, 0.0, 0.0});
    nn::AdamState state;
    nn::AdamConfig config;
    config.lr = 1e-3;
    nn::adam_step(p, std::vector<double>{3.0, -0.01, 100.0}, state, config);
    CHECK(p[0] == doctest::Approx(-1e-3).epsilon(1e-4));
    CHECK(p[1] == doctest::Approx(1e-3).epsilon(1e-4));
    CHECK(p[2] == doctest::Approx(-1e-3).epsilon(1e-4));
}

TEST_CASE("weight decay shrinks parameters with zero gradient") {
    Tensor p = Tensor::vector({1.0, -2.0});
    nn::AdamState state;
    nn::AdamConfig config;
    config.weight_decay = 0.1;
    nn::adam_step(p, std::vector<double>{0.0, 0.0}, state, config);
    CHECK(std::abs(p[0]) < 1.0);
    CHECK(std::abs(p[1]) < 2.0);
    CHECK(p[0] > 0.0);
    CHECK(p[1] < 0.0);
}

TEST_CASE("adam rejects mismatched gradient size") {
    Tensor p = Tensor::vector({1.0, 2.0});
    nn::AdamState state;
    CHECK_THROWS_AS(nn::adam_step(p, std::vector<double>{1.0}, state, {}), DimensionError);
}

TEST_CASE("gradient clipping rescales to the max norm") {
    nn::ParamSet params;
    Tensor& a = params.add("a", {2}, 1);
    a.grad()[0] = 3.0;
    a.grad()[1] = 4.0;
    const double before = nn::clip_grad_norm(params, 1.0);
    CHECK(before == doctest::Approx(5.0));
    CHECK(a.grad()[0] == doctest::Approx(0.6));
    CHECK(a.grad()[1] == doctest::Approx(0.8));
    nn::clip_grad_norm(params, 10.0);
    CHECK(a.grad()[0] == doctest::Approx(0.6));
}

TEST_CASE("parameter init is seeded and bounded") {
    auto make = [](std::uint64_t seed) {
        nn::ParamSet p;
        p.add("w", {4, 9}, 9);
        Rng rng(seed);
        p.init_uniform(rng);
        return p.get("w");
    };
    CHECK(make(3) == make(3));
    CHECK_FALSE(make(3) == make(4));
    CHECK(make(3).all_finite());
}

TEST_CASE("lstm gradients match finite differences") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        nn::ParamSet params;
        const nn::LstmCell cell{"cell", 3, 4};
        cell.register_params(params);
        Rng rng(seed);
        params.init_uniform(rng);
        Tensor xs = oracle::random_tensor({5, 3}, rng);
        Tensor weights = oracle::random_tensor({4}, rng);
        auto build = [&](Tape& t) {
            const auto rows = nn::unstack_rows(t.param(xs));
            const auto fwd = nn::run_lstm(t, params, cell, rows, false);
            const auto bwd = nn::run_lstm(t, params, cell, rows, true);
            const Var w = t.constant(weights);
            return ad::add(ad::sum(ad::mul(fwd.back(), w)), ad::sum(ad::mul(bwd.front(), w)));
        };
        const auto r = oracle::check_gradients(
            {{"W", &params.get("cell.W")}, {"b", &params.get("cell.b")}, {"x", &xs}}, build);
        CHECK_MESSAGE(r.max_rel_error < 1e-5, "seed ", seed, " worst ", r.worst);
    }
}

TEST_CASE("lstm output shapes") {
    nn::ParamSet params;
    const nn::LstmCell cell{"c", 2, 3};
    cell.register_params(params);
    Rng rng(1);
    params.init_uniform(rng);
    Tape tape;
    const auto rows = nn::unstack_rows(tape.constant(Tensor::matrix(4, 2, {1, 2, 3, 4, 5, 6, 7, 8})));
    const auto states = nn::run_lstm(tape, params, cell, rows, false);
    REQUIRE(states.size() == 4);
    CHECK(states[0].shape() == Shape{3});
    for (const auto& s : states) {
        for (double v : s.value().values()) {
            CHECK(std::abs(v) < 1.0);
        }
    }
}
