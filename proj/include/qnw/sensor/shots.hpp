// Copyright 2026 The qnw Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <vector>

#include "qnw/error.hpp"
#include "qnw/util/rng.hpp"

namespace qnw {

/// Shot-averaged estimate of each probability: the mean of `n_shots`
/// Bernoulli(p) outcomes, drawn sequentially from one mt19937_64 stream
/// seeded with `seed`. A shot is a success when a 53-bit uniform is below p.
inline std::vector<double> sample_shots(std::span<const double> probabilities, size_t n_shots, uint64_t seed) {
    if (n_shots < 1) {
        throw Error(ErrorKind::InvalidArgument, "n_shots must be >= 1");
    }
    Rng rng(seed);
    std::vector<double> out;
    out.reserve(probabilities.size());
    for (double p : probabilities) {
        p = std::clamp(p, 0.0, 1.0);
        size_t hits = 0;
        for (size_t n = 0; n < n_shots; n++) {
            hits += uniform01(rng) < p ? 1 : 0;
        }
        out.push_back(static_cast<double>(hits) / static_cast<double>(n_shots));
    }
    return out;
}

}  // namespace qnw
