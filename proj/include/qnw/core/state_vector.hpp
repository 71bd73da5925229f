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
#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "qnw/error.hpp"

namespace qnw {

using cplx = std::complex<double>;
using CVector = Eigen::VectorXcd;
using Labels = std::shared_ptr<const std::vector<std::string>>;

inline constexpr double kNormTolerance = 1e-9;

inline Labels make_labels(std::vector<std::string> names) {
    return std::make_shared<const std::vector<std::string>>(std::move(names));
}

/// Labels "0".."n-1" rendered as bit strings of the given width.
inline Labels computational_labels(int qubits) {
    std::vector<std::string> names;
    names.reserve(size_t{1} << qubits);
    for (size_t k = 0; k < (size_t{1} << qubits); k++) {
        std::string s(static_cast<size_t>(qubits), '0');
        for (int q = 0; q < qubits; q++) {
            if ((k >> q) & 1) {
                s[static_cast<size_t>(qubits - 1 - q)] = '1';
            }
        }
        names.push_back(std::move(s));
    }
    return make_labels(std::move(names));
}

/// A pure state over a named basis. Normalization is checked on
/// construction; states produced by the integrator go through `trusted`
/// so that accumulated drift is reported instead of rejected.
class StateVector {
   public:
    StateVector(Labels labels, CVector amps) : labels_(std::move(labels)), amps_(std::move(amps)) {
        check_shape();
        double n2 = amps_.squaredNorm();
        if (!(std::abs(n2 - 1.0) <= kNormTolerance)) {
            throw Error(ErrorKind::InvalidArgument, "state is not normalized (norm^2 = " + std::to_string(n2) + ")");
        }
    }

    static StateVector trusted(Labels labels, CVector amps) {
        StateVector s;
        s.labels_ = std::move(labels);
        s.amps_ = std::move(amps);
        s.check_shape();
        return s;
    }

    static StateVector basis(Labels labels, Eigen::Index index) {
        CVector a = CVector::Zero(static_cast<Eigen::Index>(labels ? labels->size() : 0));
        if (index < 0 || index >= a.size()) {
            throw Error(ErrorKind::DimensionMismatch, "basis index out of range");
        }
        a[index] = 1.0;
        return StateVector(std::move(labels), std::move(a));
    }

    Eigen::Index dim() const {
        return amps_.size();
    }
    const std::vector<std::string> &labels() const {
        return *labels_;
    }
    const Labels &shared_labels() const {
        return labels_;
    }
    const CVector &amps() const {
        return amps_;
    }
    cplx amplitude(Eigen::Index i) const {
        return amps_[i];
    }
    double probability(Eigen::Index i) const {
        return std::norm(amps_[i]);
    }
    double norm_squared() const {
        return amps_.squaredNorm();
    }

   private:
    StateVector() = default;

    void check_shape() const {
        if (!labels_ || amps_.size() < 2 || static_cast<size_t>(amps_.size()) != labels_->size()) {
            throw Error(ErrorKind::DimensionMismatch, "state needs dimension >= 2 matching its label count");
        }
    }

    Labels labels_;
    CVector amps_;
};

inline bool same_basis(const StateVector &a, const StateVector &b) {
    return a.dim() == b.dim() && (a.shared_labels() == b.shared_labels() || a.labels() == b.labels());
}

/// |<b|a>|^2.
inline double fidelity(const StateVector &a, const StateVector &b) {
    if (!same_basis(a, b)) {
        throw Error(ErrorKind::DimensionMismatch, "fidelity between states on different bases");
    }
    double f = std::norm(b.amps().dot(a.amps()));
    return std::clamp(f, 0.0, 1.0);
}

}  // namespace qnw
