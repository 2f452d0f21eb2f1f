// Copyright (c) 2026 The stssl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <random>
#include <vector>

#include "stssl/graph/region_graph.hpp"
#include "stssl/numerics/tensor.hpp"

namespace stssl::testing {

inline num::Tensor random_tensor(num::Shape shape, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    num::Tensor t(std::move(shape));
    for (auto& v : t.data()) v = u(rng);
    return t;
}

/// Regions on a jittered lattice with the given spacing.
inline std::vector<graph::Region> lattice(std::size_t n, double spacing = 100.0) {
    std::vector<graph::Region> r;
    std::size_t cols = 1;
    while (cols * cols < n) ++cols;
    for (std::size_t k = 0; k < n; ++k) {
        r.push_back({static_cast<int>(k), static_cast<double>(k % cols) * spacing,
                     static_cast<double>(k / cols) * spacing});
    }
    return r;
}

inline std::vector<graph::Region> random_regions(std::size_t n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 500.0);
    std::vector<graph::Region> r;
    for (std::size_t k = 0; k < n; ++k) r.push_back({static_cast<int>(k), u(rng), u(rng)});
    return r;
}

} // namespace stssl::testing
