// Copyright (c) 2026 The stssl Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <numeric>
#include <random>

#include <doctest.h>

#include "helpers.hpp"
#include "stssl/error.hpp"
#include "stssl/numerics/optim.hpp"
#include "stssl/numerics/tape.hpp"

using namespace stssl;
using namespace stssl::num;

TEST_SUITE("tensor") {

TEST_CASE("shape bookkeeping") {
    Tensor t(Shape{2, 3, 4}, 1.5);
    CHECK(t.size() == 24);
    CHECK(t.rank() == 3);
    CHECK(t.at(1, 2, 3) == 1.5);
    CHECK_THROWS_AS(Tensor(Shape{2, 0}), ShapeError);
    CHECK_THROWS_AS(Tensor(Shape{}), ShapeError);
    CHECK_THROWS_AS(Tensor(Shape{2, 2}, std::vector<double>{1, 2, 3}), ShapeError);
    CHECK_THROWS_AS(t.item(), ShapeError);
    CHECK(t.reshaped(Shape{6, 4}).shape() == Shape{6, 4});
    CHECK_THROWS_AS(t.reshaped(Shape{5, 5}), ShapeError);
}

TEST_CASE("matmul worked cases") {
    const auto eye = Tensor::matrix({{1, 0}, {0, 1}});
    const auto m = Tensor::matrix({{1, 2}, {3, 4}});
    CHECK(matmul(eye, m) == m);
    CHECK(matmul(Tensor::matrix({{1, 2}}), Tensor::matrix({{3}, {4}})) == Tensor::matrix({{11}}));
    std::mt19937_64 rng(1);
    const auto a = testing::random_tensor({3, 4}, rng);
    CHECK(matmul(a, Tensor(Shape{4, 5}, 0.0)) == Tensor(Shape{3, 5}, 0.0));
}

TEST_CASE("matmul mismatch names both shapes") {
    try {
        matmul(Tensor(Shape{2, 3}), Tensor(Shape{4, 2}));
        FAIL("expected ShapeError");
    } catch (const ShapeError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("2") != std::string::npos);
        CHECK(msg.find("4") != std::string::npos);
    }
}

TEST_CASE("tanh values and symmetry") {
    const auto y = tanh_activate(Tensor::from({0.0, 1.0, -1.0, 30.0}));
    CHECK(y[0] == 0.0);
    CHECK(y[1] == doctest::Approx(0.7615941559557649).epsilon(1e-15));
    CHECK(y[2] == -y[1]);
    CHECK(y[3] <= 1.0);
    std::mt19937_64 rng(2);
    const auto x = testing::random_tensor({50}, rng, -5.0, 5.0);
    Tensor neg = x;
    for (auto& v : neg.data()) v = -v;
    const auto a = tanh_activate(x);
    const auto b = tanh_activate(neg);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(b[i] == -a[i]);
}

TEST_CASE("masked softmax closed forms") {
    const std::vector<bool> all{true, true, true};
    const auto eq = masked_softmax(Tensor::from({5, 5, 5}), all);
    for (double v : eq.data()) CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    const auto two = masked_softmax(Tensor::from({0.0, std::log(2.0)}), {true, true});
    CHECK(two[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    CHECK(two[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
    const auto one = masked_softmax(Tensor::from({3, -7, 2}), {false, true, false});
    CHECK(one == Tensor::from({0, 1, 0}));
    CHECK_THROWS_AS(masked_softmax(Tensor::from({1, 2}), {false, false}), ContractError);
}

TEST_CASE("masked softmax stays normalized at large magnitudes") {
    std::mt19937_64 rng(3);
    std::bernoulli_distribution keep(0.6);
    for (int trial = 0; trial < 200; ++trial) {
        const auto logits = testing::random_tensor({9}, rng, -1e3, 1e3);
        std::vector<bool> mask(9);
        for (std::size_t i = 0; i < 9; ++i) mask[i] = keep(rng);
        mask[trial % 9] = true;
        const auto p = masked_softmax(logits, mask);
        double total = 0.0;
        for (std::size_t i = 0; i < 9; ++i) {
            if (!mask[i]) CHECK(p[i] == 0.0);
            CHECK(std::isfinite(p[i]));
            total += p[i];
        }
        CHECK(std::abs(total - 1.0) <= 1e-12);
    }
}

TEST_CASE("canonical sum ignores term order") {
    std::mt19937_64 rng(4);
    auto t = testing::random_tensor({101}, rng, -1e6, 1e6);
    std::vector<double> terms(t.data().begin(), t.data().end());
    const double ref = canonical_sum(terms);
    for (int k = 0; k < 20; ++k) {
        std::shuffle(terms.begin(), terms.end(), rng);
        CHECK(canonical_sum(terms) == ref);
    }
}

} // TEST_SUITE

TEST_SUITE("tape") {

TEST_CASE("gradient of a plain sum is all ones") {
    Parameter p("p", Tensor(Shape{2, 3}, 0.7));
    Tape tape;
    tape.backward(sum(tape.param(p)));
    CHECK(p.gradient == Tensor(Shape{2, 3}, 1.0));
}

TEST_CASE("square has derivative 2p") {
    Parameter p("p", Tensor::from({3.0}));
    Tape tape;
    const auto v = tape.param(p);
    tape.backward(sum(mul(v, v)));
    CHECK(p.gradient[0] == 6.0);
}

TEST_CASE("gradients accumulate across backward passes") {
    Parameter p("p", Tensor::from({1.0, -2.0}));
    Tape tape;
    const auto v = tape.param(p);
    const auto loss = sum(mul(v, v));
    tape.backward(loss);
    const Tensor once = p.gradient;
    tape.backward(loss);
    for (std::size_t i = 0; i < 2; ++i) CHECK(p.gradient[i] == 2.0 * once[i]);
    Parameter* ps[] = {&p};
    zero_gradients(ps);
    CHECK(p.gradient == Tensor(Shape{2}, 0.0));
}

TEST_CASE("backward of a sum equals the sum of backwards") {
    std::mt19937_64 rng(5);
    Parameter p("p", testing::random_tensor({3, 3}, rng));
    const auto f = [&](Tape& t) { return sum(tanh(t.param(p))); };
    const auto g = [&](Tape& t) {
        const auto v = t.param(p);
        return sum(matmul(v, v));
    };
    Tensor separate(Shape{3, 3}, 0.0);
    for (const auto& builder : {std::function<Var(Tape&)>(f), std::function<Var(Tape&)>(g)}) {
        Tape t;
        t.backward(builder(t));
        for (std::size_t i = 0; i < 9; ++i) separate[i] += p.gradient[i];
        p.zero_gradient();
    }
    Tape t;
    t.backward(add(f(t), g(t)));
    for (std::size_t i = 0; i < 9; ++i) CHECK(p.gradient[i] == doctest::Approx(separate[i]).epsilon(1e-15));
}

TEST_CASE("backward replays in exact reverse order") {
    Parameter p("p", Tensor::from({0.5}));
    Tape tape;
    const auto a = tape.param(p);
    const auto b = tanh(a);
    const auto c = mul(b, a);
    const auto d = sum(c);
    tape.backward(d);
    const auto& order = tape.last_backward_order();
    REQUIRE(!order.empty());
    for (std::size_t k = 1; k < order.size(); ++k) CHECK(order[k] < order[k - 1]);
    CHECK(order.front() == d.id);
}

TEST_CASE("backward contract violations") {
    Parameter p("p", Tensor::from({1.0, 2.0}));
    Tape tape;
    Tape other;
    const auto v = tape.param(p);
    CHECK_THROWS_AS(tape.backward(v), ContractError);  // not scalar
    const auto foreign = sum(other.param(p));
    CHECK_THROWS_AS(tape.backward(foreign), ContractError);
    CHECK_THROWS_AS(add(v, other.constant(Tensor::from({1.0, 1.0}))), ContractError);
}

TEST_CASE("grad-disabled tape leaves parameters untouched in shape") {
    Parameter p("p", Tensor::from({1.0}));
    Tape tape(false);
    const auto v = tape.param(p);
    CHECK(sum(mul(v, v)).item() == 1.0);
    CHECK(!tape.requires_grad(v));
}

TEST_CASE("masked mse and pair distance") {
    Tape tape;
    const auto pred = tape.constant(Tensor::matrix({{1, 2}, {3, 4}}));
    const auto m = masked_mse(pred, Tensor::matrix({{0, 2}, {3, 0}}), {true, true, false, true});
    CHECK(m.item() == doctest::Approx((1.0 + 0.0 + 16.0) / 3.0));
    CHECK_THROWS_AS(masked_mse(pred, Tensor(Shape{2, 2}), {false, false, false, false}), ContractError);
    const auto rows = tape.constant(Tensor::matrix({{0, 0}, {3, 4}, {0, 1}}));
    CHECK(mean_pair_distance(rows, {{0, 1}, {0, 2}}).item() == doctest::Approx((25.0 + 1.0) / 2.0));
    CHECK(mean_pair_distance(rows, {}).item() == 0.0);
}

} // TEST_SUITE

TEST_SUITE("gradient fidelity") {

struct Fixture {
    std::mt19937_64 rng{11};
    Parameter a{"a", testing::random_tensor({3, 4}, rng)};
    Parameter b{"b", testing::random_tensor({4, 2}, rng)};
    Parameter bias{"bias", testing::random_tensor({1, 2}, rng)};
};

TEST_CASE_FIXTURE(Fixture, "every primitive passes the central difference check") {
    Parameter* ab[] = {&a, &b};
    Parameter* all[] = {&a, &b, &bias};
    CHECK(finite_difference_check([&](Tape& t) { return sum(matmul(t.param(a), t.param(b))); }, ab) < 1e-6);
    CHECK(finite_difference_check(
              [&](Tape& t) { return sum(tanh(add_row_bias(matmul(t.param(a), t.param(b)), t.param(bias)))); },
              all) < 1e-6);
    CHECK(finite_difference_check(
              [&](Tape& t) {
                  const auto x = t.param(a);
                  return sum(mul(sigmoid(x), sub(x, scale(x, 0.3))));
              },
              ab) < 1e-6);
    CHECK(finite_difference_check([&](Tape& t) { return sum(mul(gram(t.param(a)), gram(t.param(a)))); }, ab) <
          1e-6);
    const std::vector<bool> mask{true, false, true, true, true, true, false, true, true};
    Parameter logits{"logits", testing::random_tensor({3, 3}, rng)};
    Parameter h{"h", testing::random_tensor({3, 2}, rng)};
    Parameter* lh[] = {&logits, &h};
    CHECK(finite_difference_check(
              [&](Tape& t) {
                  const auto w = masked_softmax_rows(t.param(logits), mask);
                  return sum(tanh(aggregate_neighbors(w, t.param(h))));
              },
              lh) < 1e-6);
    CHECK(finite_difference_check(
              [&](Tape& t) {
                  const auto rows = concat_rows({t.param(h), tanh(t.param(h))});
                  return add(mean_pair_distance(rows, {{0, 3}, {1, 5}, {2, 4}}),
                             masked_mse(rows, Tensor(Shape{6, 2}, 0.25), std::vector<bool>(12, true)));
              },
              lh) < 1e-6);
}

TEST_CASE("finite difference check on closed forms") {
    Parameter p("p", Tensor::from({3.0}));
    Parameter* ps[] = {&p};
    CHECK(finite_difference_check(
              [&](Tape& t) {
                  const auto v = t.param(p);
                  return sum(mul(v, v));
              },
              ps) < 1e-6);
    CHECK(finite_difference_check([&](Tape& t) { return sum(t.constant(Tensor::from({4.0}))); }, ps) == 0.0);
    CHECK(p.value[0] == 3.0);
    CHECK(p.gradient[0] == 0.0);
    CHECK_THROWS_AS(finite_difference_check(
                        [&](Tape& t) { return sum(scale(t.param(p), std::numeric_limits<double>::infinity())); },
                        ps),
                    NumericError);
}

} // TEST_SUITE

TEST_SUITE("sgd") {

TEST_CASE("update rule") {
    Parameter p("p", Tensor::from({1.0}));
    p.gradient[0] = 1.0;
    Parameter* ps[] = {&p};
    sgd_step(ps, 1e-4, 1e-5);
    CHECK(p.value[0] == 1.0 - 1e-4 * (1.0 + 1e-5));
    CHECK(p.value[0] == doctest::Approx(0.999899999).epsilon(1e-14));

    Parameter q("q", Tensor::from({2.5, -1.0}));
    Parameter* qs[] = {&q};
    sgd_step(qs, 0.1, 0.0);
    CHECK(q.value == Tensor::from({2.5, -1.0}));
}

TEST_CASE("two steps match one summed step only without decay") {
    const auto run = [](double wd, bool split) {
        Parameter p("p", Tensor::from({0.8}));
        Parameter* ps[] = {&p};
        if (split) {
            p.gradient[0] = 0.5;
            sgd_step(ps, 0.1, wd);
            p.gradient[0] = 0.25;
            sgd_step(ps, 0.1, wd);
        } else {
            p.gradient[0] = 0.75;
            sgd_step(ps, 0.1, wd);
        }
        return p.value[0];
    };
    CHECK(run(0.0, true) == doctest::Approx(run(0.0, false)).epsilon(1e-15));
    CHECK(run(0.1, true) != doctest::Approx(run(0.1, false)).epsilon(1e-12));
}

TEST_CASE("non-finite gradient names the parameter and leaves values alone") {
    Parameter good("good", Tensor::from({1.0}));
    Parameter bad("encoder.W_z", Tensor::from({1.0}));
    good.gradient[0] = 1.0;
    bad.gradient[0] = std::nan("");
    Parameter* ps[] = {&good, &bad};
    try {
        sgd_step(ps, 0.1, 0.0);
        FAIL("expected DivergenceError");
    } catch (const DivergenceError& e) {
        CHECK(std::string(e.what()).find("encoder.W_z") != std::string::npos);
    }
    CHECK(good.value[0] == 1.0);
    CHECK(bad.value[0] == 1.0);
}

} // TEST_SUITE
