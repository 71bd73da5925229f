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

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

// Random number plumbing. The standard distributions are implementation
// defined, so every draw that ends up in an artifact goes through the
// helpers here, which only rely on the raw mt19937_64 output sequence.

namespace qnw {

using Rng = std::mt19937_64;

inline constexpr const char *kRngName = "mt19937_64";
inline constexpr const char *kMixId = "splitmix64-finalizer(master + 0x9E3779B97F4A7C15 * (index + 1))";

inline constexpr uint64_t splitmix64_finalize(uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Derives an independent 64-bit seed for item `index` of a stream keyed by `master`.
inline constexpr uint64_t mix_seed(uint64_t master, uint64_t index) {
    return splitmix64_finalize(master + 0x9E3779B97F4A7C15ULL * (index + 1));
}

/// Fixed stage tags used to split one user seed into per-stage seeds.
enum class SeedStage : uint64_t {
    Dataset = 0x1001,
    Split = 0x1002,
    WeightInit = 0x1003,
    Qnn = 0x1004,
};

inline constexpr uint64_t stage_seed(uint64_t master, SeedStage stage) {
    return mix_seed(master, static_cast<uint64_t>(stage));
}

/// Uniform double in [0, 1) built from the top 53 bits of one draw.
inline double uniform01(Rng &rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(Rng &rng, double lo, double hi) {
    return lo + (hi - lo) * uniform01(rng);
}

/// Unbiased integer in [0, n) by rejection.
inline uint64_t uniform_below(Rng &rng, uint64_t n) {
    const uint64_t threshold = (0 - n) % n;
    while (true) {
        uint64_t r = rng();
        if (r >= threshold) {
            return r % n;
        }
    }
}

template <typename T>
void shuffle(std::vector<T> &v, Rng &rng) {
    for (size_t i = v.size(); i > 1; i--) {
        size_t j = static_cast<size_t>(uniform_below(rng, i));
        std::swap(v[i - 1], v[j]);
    }
}

}  // namespace qnw
