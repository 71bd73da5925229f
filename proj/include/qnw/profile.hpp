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

#include <string>
#include <vector>

#include "qnw/error.hpp"
#include "qnw/sensor/params.hpp"
#include "qnw/util/grid.hpp"

namespace qnw {

/// Named run presets. The two profiles differ only in the omega_tg grid
/// count, the repetition count and the epoch cap.
struct Profile {
    std::string name;
    Grid omega_tg;
    Grid xi;
    size_t repetitions = 0;
    size_t n_points = 101;
    size_t n_shots = 100;
    size_t max_epochs = 0;

    DatasetSpec dataset_spec(uint64_t seed) const {
        DatasetSpec s;
        s.omega_tg = omega_tg;
        s.xi = xi;
        s.repetitions = repetitions;
        s.n_points = n_points;
        s.n_shots = n_shots;
        s.master_seed = seed;
        return s;
    }
};

inline Profile paper_profile() {
    return Profile{"paper", Grid{1.0, 25.0, 241}, Grid{-0.3, 0.3, 11}, 20, 101, 100, 1000};
}

inline Profile small_profile() {
    return Profile{"small", Grid{1.0, 25.0, 61}, Grid{-0.3, 0.3, 11}, 5, 101, 100, 200};
}

inline Profile profile_by_name(const std::string &name) {
    if (name == "paper") {
        return paper_profile();
    }
    if (name == "small") {
        return small_profile();
    }
    throw Error(ErrorKind::BadConfig, "profile must be paper or small, got '" + name + "'");
}

/// Omega_tg intervals of the per-interval training table, widest first.
inline std::vector<Interval> table_intervals() {
    return {{1.0, 25.0}, {3.4, 25.0}, {8.2, 25.0}, {13.0, 25.0}, {17.8, 25.0}, {22.6, 25.0}};
}

}  // namespace qnw
