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

#include <cmath>
#include <cstdint>
#include <string>

#include "qnw/error.hpp"
#include "qnw/util/grid.hpp"

namespace qnw {

inline constexpr double kTwoPi = 2.0 * M_PI;

/// Ordinary frequency in kHz to angular frequency in rad/ms.
inline constexpr double angular(double khz) {
    return kTwoPi * khz;
}

/// Physical parameters of the dressed four-level sensor. All frequencies
/// are ordinary frequencies in kHz; conversion to rad/ms happens when the
/// Hamiltonian is built.
struct SensorParams {
    double omega_dress_khz = 20.0;
    double omega_tg_amp_khz = 1.0;
    double xi_khz = 0.0;
    double omega_b_khz = 10000.0;
    /// Second-order Zeeman asymmetry, default omega_b^2 / 12.6 GHz.
    double delta2_khz = 10000.0 * 10000.0 / 12.6e6;
    /// Reference period in ms; 0 until `reference_period` has been run.
    double t0_ms = 0.0;
    /// Keep only the co-rotating half of the target drive (preview mode).
    bool drop_counter_rotating = false;
    /// Local error target handed to the integrator.
    double integrator_tol = 1e-8;

    double omega_tg_khz() const {
        return omega_b_khz + xi_khz;
    }

    void validate() const {
        if (!(omega_dress_khz > 0)) {
            throw Error(ErrorKind::InvalidArgument, "omega_dress must be > 0");
        }
        if (!(omega_b_khz > 0)) {
            throw Error(ErrorKind::InvalidArgument, "omega_b must be > 0");
        }
        if (!(omega_tg_amp_khz >= 0)) {
            throw Error(ErrorKind::InvalidArgument, "omega_tg_amp must be >= 0");
        }
        if (!(omega_tg_khz() > 0)) {
            throw Error(ErrorKind::InvalidArgument, "target frequency omega_b + xi must be > 0");
        }
        if (!(integrator_tol > 0)) {
            throw Error(ErrorKind::InvalidArgument, "integrator_tol must be > 0");
        }
    }
};

struct DatasetSpec {
    Grid omega_tg{1.0, 25.0, 241};
    Grid xi{-0.3, 0.3, 11};
    size_t repetitions = 20;
    size_t n_points = 101;
    size_t n_shots = 100;
    /// Feature window as fractions of t0.
    double window_lo = 0.5;
    double window_hi = 1.0;
    uint64_t master_seed = 0;
    double frac_train = 0.70;
    double frac_validation = 0.15;
    double frac_test = 0.15;

    size_t rows() const {
        return omega_tg.count * xi.count * repetitions;
    }

    void validate() const {
        if (omega_tg.count < 1 || xi.count < 1 || repetitions < 1 || n_points < 1 || n_shots < 1) {
            throw Error(ErrorKind::InvalidArgument, "dataset counts must be >= 1");
        }
        if (n_points > 1000) {
            throw Error(ErrorKind::InvalidArgument, "n_points above 1000 does not fit the p_### column names");
        }
        if (!(window_lo >= 0 && window_lo <= window_hi)) {
            throw Error(ErrorKind::InvalidArgument, "feature window must satisfy 0 <= lo <= hi");
        }
        double s = frac_train + frac_validation + frac_test;
        if (std::abs(s - 1.0) > 1e-9 || frac_train < 0 || frac_validation < 0 || frac_test < 0) {
            throw Error(ErrorKind::InvalidArgument, "split fractions must be non-negative and sum to 1");
        }
        if (omega_tg.lo < 0) {
            throw Error(ErrorKind::InvalidArgument, "omega_tg grid must be non-negative");
        }
    }
};

}  // namespace qnw
