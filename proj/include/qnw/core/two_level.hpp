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

#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "qnw/core/state_vector.hpp"
#include "qnw/error.hpp"

// Two-level primitives. Conventions: sigma_z|0> = +|0>, sigma_z|1> = -|1>,
// and H = (x sigma_z - omega sigma_x) / 2. With this sign the ground state
// has non-negative amplitudes on both basis states for omega > 0.

namespace qnw {

/// f(x) = (1 + x / sqrt(1 + x^2)) / 2, evaluated without cancellation
/// for large negative x.
inline double sigmoid(double x) {
    if (std::isinf(x)) {
        return x > 0 ? 1.0 : 0.0;
    }
    double r = std::hypot(1.0, x);
    if (x >= 0) {
        return 0.5 * (1.0 + x / r);
    }
    return 0.5 / (r * (r - x));
}

/// Derivative of `sigmoid`: (1 + x^2)^(-3/2) / 2.
inline double sigmoid_derivative(double x) {
    double r = std::hypot(1.0, x);
    return 0.5 / (r * r * r);
}

inline Labels qubit_labels() {
    static const Labels labels = make_labels({"0", "1"});
    return labels;
}

inline Eigen::Matrix2cd pauli_x() {
    Eigen::Matrix2cd m;
    m << 0, 1, 1, 0;
    return m;
}

inline Eigen::Matrix2cd pauli_z() {
    Eigen::Matrix2cd m;
    m << 1, 0, 0, -1;
    return m;
}

inline Eigen::Matrix2cd two_level_hamiltonian(double x, double omega) {
    return 0.5 * (x * pauli_z() - omega * pauli_x());
}

inline StateVector plus_state() {
    CVector a(2);
    a << M_SQRT1_2, M_SQRT1_2;
    return StateVector(qubit_labels(), a);
}

struct GroundState {
    StateVector state;
    double energy;
    /// Population of |1>, f(x / omega).
    double excitation;
};

/// Ground state of (x sigma_z - omega sigma_x) / 2:
/// sqrt(1 - f)|0> + sign(omega) sqrt(f)|1> with f = f(x / |omega|).
/// For omega = 0 the state is the sigma_z eigenstate selected by sign(x).
inline GroundState ground_state_2level(double x, double omega) {
    if (omega == 0.0 && x == 0.0) {
        throw Error(ErrorKind::ZeroGap, "x = 0 and omega = 0 give a degenerate spectrum");
    }
    double f;
    if (omega == 0.0) {
        f = x > 0 ? 1.0 : 0.0;
    } else {
        f = sigmoid(x / std::abs(omega));
    }
    // 1 - f computed as f(-ratio) to keep precision in both tails.
    double g = omega == 0.0 ? 1.0 - f : sigmoid(-x / std::abs(omega));
    CVector a(2);
    a << std::sqrt(g), (omega < 0 ? -1.0 : 1.0) * std::sqrt(f);
    a /= a.norm();
    double energy = -0.5 * std::hypot(x, omega);
    return GroundState{StateVector(qubit_labels(), a), energy, f};
}

}  // namespace qnw
