// Copyright (c) 2026 The stssl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <span>

#include "stssl/numerics/tape.hpp"

namespace stssl::num {

/// Builds a scalar loss on the supplied tape from the current parameter values.
using LossBuilder = std::function<Var(Tape&)>;

/// Largest relative disagreement between the taped gradient and a central
/// difference, |g − fd| / (|g| + |fd| + 1e-10), over every coordinate of every
/// parameter. Parameter values are restored and gradients are left zeroed.
double finite_difference_check(const LossBuilder& loss, std::span<Parameter* const> params,
                               double epsilon = 1e-5);

/// value ← value − lr·(gradient + weight_decay·value). Throws DivergenceError
/// naming the first parameter with a non-finite gradient; no parameter is
/// touched in that case.
void sgd_step(std::span<Parameter* const> params, double learning_rate = 1e-4, double weight_decay = 1e-5);

} // namespace stssl::num
