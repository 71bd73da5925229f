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
#include <Eigen/SparseCore>
#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "qnw/core/state_vector.hpp"
#include "qnw/error.hpp"

namespace qnw {

using SparseCMatrix = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;
using Envelope = std::function<double(double)>;

inline constexpr double kHermitianTolerance = 1e-12;

inline double hermitian_defect(const SparseCMatrix &m) {
    SparseCMatrix d = m - SparseCMatrix(m.adjoint());
    double worst = 0;
    for (int k = 0; k < d.outerSize(); k++) {
        for (SparseCMatrix::InnerIterator it(d, k); it; ++it) {
            worst = std::max(worst, std::abs(it.value()));
        }
    }
    return worst;
}

inline SparseCMatrix to_sparse(const Eigen::MatrixXcd &m) {
    return m.sparseView(0.0, 0.0);
}

/// H(t) = sum_k envelope_k(t) * M_k with each M_k Hermitian. Units are
/// rad/ms for the matrices and ms for the envelope argument.
class TimeDependentHamiltonian {
   public:
    struct Term {
        SparseCMatrix matrix;
        Envelope envelope;  // empty means constant 1
    };

    explicit TimeDependentHamiltonian(Eigen::Index dim) : dim_(dim) {
        if (dim < 2) {
            throw Error(ErrorKind::DimensionMismatch, "Hamiltonian dimension must be >= 2");
        }
    }

    TimeDependentHamiltonian &add_term(SparseCMatrix matrix, Envelope envelope = {}) {
        if (matrix.rows() != dim_ || matrix.cols() != dim_) {
            throw Error(ErrorKind::DimensionMismatch, "term shape does not match Hamiltonian dimension");
        }
        double defect = hermitian_defect(matrix);
        if (defect > kHermitianTolerance) {
            throw Error(ErrorKind::NonHermitianTerm, "max |H - H^dagger| = " + std::to_string(defect));
        }
        matrix.makeCompressed();
        terms_.push_back(Term{std::move(matrix), std::move(envelope)});
        return *this;
    }

    TimeDependentHamiltonian &add_term(const Eigen::MatrixXcd &matrix, Envelope envelope = {}) {
        return add_term(to_sparse(matrix), std::move(envelope));
    }

    Eigen::Index dim() const {
        return dim_;
    }
    const std::vector<Term> &terms() const {
        return terms_;
    }

    /// out = -i H(t) psi.
    void derivative(double t, const CVector &psi, CVector &out) const {
        out.setZero(dim_);
        for (const auto &term : terms_) {
            double e = term.envelope ? term.envelope(t) : 1.0;
            if (e == 0.0) {
                continue;
            }
            out.noalias() += cplx(0.0, -e) * (term.matrix * psi);
        }
    }

    Eigen::MatrixXcd dense_at(double t) const {
        Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim_, dim_);
        for (const auto &term : terms_) {
            double e = term.envelope ? term.envelope(t) : 1.0;
            h += e * Eigen::MatrixXcd(term.matrix);
        }
        return h;
    }

   private:
    Eigen::Index dim_;
    std::vector<Term> terms_;
};

}  // namespace qnw
