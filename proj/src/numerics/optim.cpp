// Copyright (c) 2026 The stssl Authors
// SPDX-License-Identifier: Apache-2.0

#include "stssl/numerics/optim.hpp"

#include <algorithm>
#include <cmath>

#include "stssl/error.hpp"

namespace stssl::num {

namespace {

double evaluate(const LossBuilder& loss) {
    Tape tape(false);
    const double v = loss(tape).item();
    if (!std::isfinite(v)) throw NumericError("finite_difference_check: loss evaluated to a non-finite value");
    return v;
}

} // namespace

double finite_difference_check(const LossBuilder& loss, std::span<Parameter* const> params, double epsilon) {
    zero_gradients(params);
    {
        Tape tape;
        Var l = loss(tape);
        if (!std::isfinite(l.item())) throw NumericError("finite_difference_check: non-finite loss");
        tape.backward(l);
    }
    double worst = 0.0;
    for (Parameter* p : params) {
        for (std::size_t i = 0; i < p->value.size(); ++i) {
            const double saved = p->value[i];
            p->value[i] = saved + epsilon;
            const double up = evaluate(loss);
            p->value[i] = saved - epsilon;
            const double down = evaluate(loss);
            p->value[i] = saved;
            const double central = (up - down) / (2.0 * epsilon);
            const double analytic = p->gradient[i];
            const double rel = std::abs(analytic - central) / (std::abs(analytic) + std::abs(central) + 1e-10);
            worst = std::max(worst, rel);
        }
    }
    zero_gradients(params);
    return worst;
}

void sgd_step(std::span<Parameter* const> params, double learning_rate, double weight_decay) {
    for (const Parameter* p : params) {
        if (!p->gradient.all_finite()) throw DivergenceError("non-finite gradient in parameter '" + p->name + "'");
    }
    for (Parameter* p : params) {
        auto v = p->value.data();
        auto g = p->gradient.data();
        for (std::size_t i = 0; i < v.size(); ++i) v[i] -= learning_rate * (g[i] + weight_decay * v[i]);
    }
}

} // namespace stssl::num
