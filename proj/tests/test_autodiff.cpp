// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "iwaqg/autodiff.hpp"
#include "oracles.hpp"

using namespace iwaqg;
using ad::Tape;
using ad::Var;
using oracle::check_gradients;
using oracle::random_tensor;

namespace {

Var sum_all(Var x) { return ad::sum(x); }

// Weighted sum with fixed random weights so that every output element gets a
// distinct upstream gradient.
Var probe(Tape& tape, Var x, std::uint64_t seed) {
    Rng rng(seed);
    Tensor w = random_tensor(x.shape(), rng);
    return ad::sum(ad::mul(x, tape.constant(std::move(w))));
}

}  // namespace

TEST_CASE("tensor rejects inconsistent shapes") {
    CHECK_THROWS_AS(Tensor({2, 3}, std::vector<double>(5, 0.0)), DimensionError);
    CHECK_THROWS_AS(Tensor(Shape{0, 3}), DimensionError);
    Tensor t({2, 2});
    CHECK(t.size() == 4);
    CHECK_FALSE(t.has_grad());
    CHECK(t.grad().size() == 4);
}

TEST_CASE("matmul examples") {
    Tape tape;
    Var eye = tape.constant(Tensor::matrix(2, 2, {1, 0, 0, 1}));
    Var b = tape.constant(Tensor::matrix(2, 2, {5, 6, 7, 8}));
    const Var prod = ad::matmul(eye, b);
    CHECK(prod.value() == b.value());
    Var a = tape.constant(Tensor::matrix(2, 2, {1, 2, 3, 4}));
    Var ones = tape.constant(Tensor::matrix(2, 1, {1, 1}));
    const Var r = ad::matmul(a, ones);
    CHECK(r.shape() == Shape{2, 1});
    CHECK(r.value()[0] == 3.0);
    CHECK(r.value()[1] == 7.0);
    CHECK_THROWS_AS(ad::matmul(a, tape.constant(Tensor::matrix(3, 1, {1, 1, 1}))), DimensionError);
}

TEST_CASE("matmul gradient matches finite differences") {
    Rng rng(7);
    Tensor a = random_tensor({3, 4}, rng);
    Tensor b = random_tensor({4, 2}, rng);
    const auto r = check_gradients({{"a", &a}, {"b", &b}},
                                   [&](Tape& t) { return probe(t, ad::matmul(t.param(a), t.param(b)), 3); });
    CHECK(r.max_rel_error < 1e-5);
}

TEST_CASE("elementwise examples and gradients") {
    {
        Tape tape;
        Var x = tape.variable(Tensor::scalar(0.0));
        Var y = ad::sigmoid(x);
        CHECK(y.item() == doctest::Approx(0.5));
        tape.backward(y);
        CHECK(x.grad()[0] == doctest::Approx(0.25));
    }
    {
        Tape tape;
        Var x = tape.variable(Tensor::scalar(0.0));
        Var y = ad::tanh(x);
        CHECK(y.item() == 0.0);
        tape.backward(y);
        CHECK(x.grad()[0] == doctest::Approx(1.0));
    }
    Rng rng(11);
    Tensor a = random_tensor({5}, rng);
    Tensor b = random_tensor({5}, rng);
    CHECK(check_gradients({{"a", &a}, {"b", &b}},
                          [&](Tape& t) { return probe(t, ad::add(t.param(a), t.param(b)), 1); })
              .max_rel_error < 1e-6);
    CHECK(check_gradients({{"a", &a}, {"b", &b}},
                          [&](Tape& t) { return probe(t, ad::mul(t.param(a), t.param(b)), 2); })
              .max_rel_error < 1e-6);
    CHECK(check_gradients({{"a", &a}}, [&](Tape& t) { return probe(t, ad::relu(t.param(a)), 4); }).max_rel_error <
          1e-6);
    Tensor s = Tensor::scalar(0.7);
    CHECK(check_gradients({{"a", &a}, {"s", &s}},
                          [&](Tape& t) { return probe(t, ad::mul(t.param(s), t.param(a)), 5); })
              .max_rel_error < 1e-6);
}

TEST_CASE("elementwise rejects incompatible shapes") {
    Tape tape;
    Var a = tape.constant(Tensor::vector({1, 2, 3}));
    Var b = tape.constant(Tensor::vector({1, 2}));
    CHECK_THROWS_AS(ad::add(a, b), DimensionError);
}

TEST_CASE("softmax examples") {
    Tape tape;
    const Var u = ad::softmax(tape.constant(Tensor::vector({0, 0, 0})), 0);
    for (double v : u.value().values()) {
        CHECK(v == doctest::Approx(1.0 / 3.0));
    }
    const Var big = ad::softmax(tape.constant(Tensor::vector({1000, 0})), 0);
    CHECK(big.value()[0] == doctest::Approx(1.0));
    CHECK(big.value()[1] == doctest::Approx(0.0));
    CHECK(big.value().all_finite());
    Rng rng(5);
    Tensor x = random_tensor({6}, rng, 3.0);
    CHECK(check_gradients({{"x", &x}}, [&](Tape& t) { return probe(t, ad::softmax(t.param(x), 0), 9); })
              .max_rel_error < 1e-5);
    Tensor m = random_tensor({3, 4}, rng, 3.0);
    CHECK(check_gradients({{"m", &m}}, [&](Tape& t) { return probe(t, ad::softmax(t.param(m), 1), 9); })
              .max_rel_error < 1e-5);
    CHECK(check_gradients({{"m", &m}}, [&](Tape& t) { return probe(t, ad::softmax(t.param(m), 0), 9); })
              .max_rel_error < 1e-5);
}

TEST_CASE("softmax rows sum to one") {
    Rng rng(99);
    for (int trial = 0; trial < 50; ++trial) {
        Tape tape;
        const Var s = ad::softmax(tape.constant(random_tensor({4, 7}, rng, 20.0)), 1);
        for (std::size_t r = 0; r < 4; ++r) {
            double total = 0.0;
            for (std::size_t c = 0; c < 7; ++c) {
                total += s.value().at(r, c);
            }
            CHECK(std::abs(total - 1.0) < 1e-9);
        }
    }
}

TEST_CASE("segment_max examples") {
    Tape tape;
    Var x = tape.variable(Tensor::vector({0.2, 0.9, 0.5}));
    const auto m = ad::segment_max(x, {{0, 2}});
    CHECK(m.values.value()[0] == 0.5);
    CHECK(m.argmax[0] == 2);
    tape.backward(ad::sum(m.values));
    CHECK(x.grad()[0] == 0.0);
    CHECK(x.grad()[1] == 0.0);
    CHECK(x.grad()[2] == 1.0);

    Tape t2;
    Var y = t2.constant(Tensor::vector({3, 1, 2}));
    const auto id = ad::segment_max(y, {{0}, {1}, {2}});
    CHECK(id.values.value() == y.value());

    Tape t3;
    Var z = t3.constant(Tensor::vector({1, 1, 0}));
    CHECK(ad::segment_max(z, {{0, 1}}).argmax[0] == 0);
    CHECK_THROWS(ad::segment_max(z, {{}}));
}

TEST_CASE("segment_max matches brute force and finite differences") {
    Rng rng(21);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 1 + rng.below(9);
        Tensor x = random_tensor({n}, rng, 2.0);
        std::vector<std::vector<std::size_t>> segments(1 + rng.below(n));
        for (std::size_t j = 0; j < n; ++j) {
            segments[j % segments.size()].push_back(j);
        }
        Tape tape;
        const auto m = ad::segment_max(tape.constant(x), segments);
        for (std::size_t s = 0; s < segments.size(); ++s) {
            double best = -1e300;
            for (auto j : segments[s]) {
                best = std::max(best, x[j]);
            }
            CHECK(m.values.value()[s] == best);
        }
        const auto r = check_gradients(
            {{"x", &x}}, [&](Tape& t) { return probe(t, ad::segment_max(t.param(x), segments).values, 8); });
        CHECK(r.max_rel_error < 1e-6);
    }
}

TEST_CASE("lookup examples and gradient") {
    Tape tape;
    Tensor table = Tensor::matrix(3, 2, {1, 2, 3, 4, 5, 6});
    Var tv = tape.param(table);
    const std::vector<std::size_t> ids = {0, 0, 2};
    const Var rows = ad::lookup(tv, ids);
    CHECK(rows.value().at(0, 0) == rows.value().at(1, 0));
    CHECK(rows.value().at(0, 1) == rows.value().at(1, 1));
    tape.backward(ad::sum(rows));
    CHECK(table.grad()[0] == 2.0);
    CHECK(table.grad()[1] == 2.0);
    CHECK(table.grad()[2] == 0.0);
    CHECK(table.grad()[4] == 1.0);
    const std::vector<std::size_t> bad = {3};
    CHECK_THROWS(ad::lookup(tv, bad));

    Rng rng(3);
    Tensor t4 = random_tensor({4, 3}, rng);
    const std::vector<std::size_t> pick = {1, 3, 1, 0};
    CHECK(check_gradients({{"t", &t4}}, [&](Tape& t) { return probe(t, ad::lookup(t.param(t4), pick), 6); })
              .max_rel_error < 1e-6);
}

TEST_CASE("cross_entropy examples and gradient") {
    Tape tape;
    CHECK(ad::cross_entropy(tape.constant(Tensor::vector({0, 1, 0})), 1).item() == 0.0);
    CHECK(ad::cross_entropy(tape.constant(Tensor::vector(std::vector<double>(8, 0.125))), 3).item() ==
          doctest::Approx(std::log(8.0)).epsilon(1e-12));
    CHECK(ad::cross_entropy(tape.constant(Tensor::vector({1, 0})), 1).item() ==
          doctest::Approx(-std::log(ad::kProbabilityFloor)));
    CHECK_THROWS(ad::cross_entropy(tape.constant(Tensor::vector({0.5, 0.5})), 2));

    Rng rng(17);
    Tensor logits = random_tensor({7}, rng, 2.0);
    CHECK(check_gradients({{"l", &logits}},
                          [&](Tape& t) { return ad::cross_entropy(ad::softmax(t.param(logits), 0), 4); })
              .max_rel_error < 1e-5);
}

TEST_CASE("backward contracts") {
    {
        Tape tape;
        Tensor x = Tensor::vector({1, 2, 3});
        tape.backward(sum_all(tape.param(x)));
        for (double g : x.grad()) {
            CHECK(g == 1.0);
        }
    }
    {
        Tape tape;
        Tensor x = Tensor::vector({1, 2});
        Var xv = tape.param(x);
        tape.backward(ad::sum(ad::add(ad::scale(xv, 2.0), ad::mul(xv, xv))));
        CHECK(x.grad()[0] == doctest::Approx(2.0 + 2.0));
        CHECK(x.grad()[1] == doctest::Approx(2.0 + 4.0));
    }
    {
        Tape tape;
        Tensor used = Tensor::vector({1});
        Tensor unused = Tensor::vector({1, 2});
        Var u = tape.param(used);
        tape.param(unused);
        tape.backward(ad::sum(u));
        CHECK(unused.grad()[0] == 0.0);
        CHECK(unused.grad()[1] == 0.0);
    }
    {
        Tape tape;
        CHECK_THROWS_AS(tape.backward(tape.variable(Tensor::vector({1, 2}))), DimensionError);
    }
}

TEST_CASE("structural ops gradients") {
    Rng rng(31);
    Tensor a = random_tensor({2, 3}, rng);
    Tensor b = random_tensor({2, 3}, rng);
    Tensor v = random_tensor({5}, rng);
    Tensor bias = random_tensor({3}, rng);
    CHECK(check_gradients({{"a", &a}, {"b", &b}},
                          [&](Tape& t) { return probe(t, ad::concat({t.param(a), t.param(b)}, 1), 2); })
              .max_rel_error < 1e-6);
    CHECK(check_gradients({{"a", &a}, {"b", &b}},
                          [&](Tape& t) { return probe(t, ad::concat({t.param(a), t.param(b)}, 0), 2); })
              .max_rel_error < 1e-6);
    CHECK(check_gradients({{"v", &v}}, [&](Tape& t) { return probe(t, ad::slice(t.param(v), 1, 4), 2); })
              .max_rel_error < 1e-6);
    CHECK(check_gradients({{"a", &a}}, [&](Tape& t) { return probe(t, ad::transpose(t.param(a)), 2); })
              .max_rel_error < 1e-6);
    CHECK(check_gradients({{"a", &a}, {"bias", &bias}},
                          [&](Tape& t) { return probe(t, ad::add_bias(t.param(a), t.param(bias)), 2); })
              .max_rel_error < 1e-6);
    CHECK(check_gradients({{"a", &a}}, [&](Tape& t) { return probe(t, ad::mean_rows(t.param(a), 0, 2), 2); })
              .max_rel_error < 1e-6);
    const std::vector<std::size_t> idx = {4, 0, 4, 2};
    CHECK(check_gradients({{"v", &v}}, [&](Tape& t) { return probe(t, ad::gather(t.param(v), idx), 2); })
              .max_rel_error < 1e-6);
    const std::vector<std::size_t> targets = {0, 2, 2, 1, 0};
    CHECK(check_gradients({{"v", &v}},
                          [&](Tape& t) { return probe(t, ad::scatter_sum(t.param(v), targets, 3), 2); })
              .max_rel_error < 1e-6);
    CHECK(check_gradients({{"a", &a}, {"b", &b}},
                          [&](Tape& t) {
                              const std::vector<Var> rows = {ad::row(t.param(a), 1), ad::row(t.param(b), 0)};
                              return probe(t, ad::stack_rows(rows), 2);
                          })
              .max_rel_error < 1e-6);
}

TEST_CASE("random 20-op graphs match finite differences on every leaf") {
    for (std::uint64_t seed = 1; seed <= 25; ++seed) {
        Rng rng(seed);
        Tensor x = random_tensor({4}, rng);
        Tensor y = random_tensor({4}, rng);
        Tensor w = random_tensor({4, 4}, rng);
        std::vector<int> ops(20);
        for (auto& o : ops) {
            o = static_cast<int>(rng.below(8));
        }
        auto build = [&](Tape& t) {
            std::vector<Var> pool = {t.param(x), t.param(y)};
            Var wv = t.param(w);
            for (std::size_t i = 0; i < ops.size(); ++i) {
                Var a = pool[pool.size() - 1];
                Var b = pool[(i * 7) % pool.size()];
                switch (ops[i]) {
                    case 0: pool.push_back(ad::add(a, b)); break;
                    case 1: pool.push_back(ad::mul(a, b)); break;
                    case 2: pool.push_back(ad::tanh(a)); break;
                    case 3: pool.push_back(ad::sigmoid(a)); break;
                    case 4: pool.push_back(ad::matmul(wv, a)); break;
                    case 5: pool.push_back(ad::softmax(a, 0)); break;
                    case 6: pool.push_back(ad::sub(a, ad::scale(b, 0.5))); break;
                    default: pool.push_back(ad::one_minus(a)); break;
                }
            }
            return probe(t, pool.back(), seed);
        };
        const auto r = check_gradients({{"x", &x}, {"y", &y}, {"w", &w}}, build);
        CHECK_MESSAGE(r.max_rel_error < 1e-4, "seed ", seed, " worst ", r.worst);
    }
}

TEST_CASE("identical op sequences are bit-identical") {
    auto run = [] {
        Rng rng(42);
        Tensor a = random_tensor({3, 3}, rng);
        Tape tape;
        Var v = tape.param(a);
        Var loss = ad::sum(ad::softmax(ad::matmul(v, ad::tanh(v)), 1));
        tape.backward(loss);
        std::vector<double> out(a.grad().begin(), a.grad().end());
        out.push_back(loss.item());
        return out;
    };
    CHECK(run() == run());
}
