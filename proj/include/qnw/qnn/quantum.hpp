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

#include <Eigen/SparseCore>
#include <sstream>
#include <string>
#include <vector>

#include "qnw/core/evolve.hpp"
#include "qnw/core/hamiltonian.hpp"
#include "qnw/perceptron/sta.hpp"
#include "qnw/qnn/surrogate.hpp"
#include "qnw/util/io.hpp"
#include "qnw/util/parallel.hpp"

namespace qnw {

struct QuantumPass {
    /// P(|1>) of every neuron qubit after the full pass, by layer (input
    /// layer excluded).
    std::vector<Eigen::VectorXd> populations;
    /// Scalar potential each neuron's pulse was designed for.
    std::vector<Eigen::VectorXd> design_x;
    double norm_drift = 0;
    size_t qubits = 0;

    const Eigen::VectorXd &output() const {
        return populations.back();
    }
};

namespace detail {

/// sigma^z eigenvalue of qubit q in basis index k (|0> -> +1).
inline double z_value(size_t k, size_t q) {
    return ((k >> q) & 1) ? -1.0 : 1.0;
}

}  // namespace detail

/// Basis-input forward pass on the joint register. Qubit q is bit q of the
/// basis index: inputs first, then neurons layer by layer. Each neuron starts
/// in |+> and is driven, in network order, by
///   H = (sum_i w_ji Z_i Z_j - b_j Z_j - Omega(t) X_j) / 2
/// over the previous layer's qubits i. Its pulse is designed for one scalar
/// potential: the exact one for the first layer, whose inputs are basis
/// states, and the surrogate's mean-field value deeper in.
inline QuantumPass quantum_forward(const QnnSpec &spec, const std::vector<int> &bits) {
    spec.validate();
    if (bits.size() != spec.inputs()) {
        throw Error(ErrorKind::ShapeMismatch, "expected " + std::to_string(spec.inputs()) + " input bits");
    }
    for (int b : bits) {
        if (b != 0 && b != 1) {
            throw Error(ErrorKind::InvalidArgument, "input bits must be 0 or 1");
        }
    }
    const size_t n = spec.qubits();
    if (n > spec.max_qubits) {
        throw Error(ErrorKind::RegisterTooLarge, std::to_string(n) + " qubits exceed the limit of " +
                                                     std::to_string(spec.max_qubits));
    }
    const size_t dim = size_t{1} << n;
    std::vector<size_t> first(spec.sizes.size());
    for (size_t l = 1; l < spec.sizes.size(); l++) {
        first[l] = first[l - 1] + spec.sizes[l - 1];
    }

    // |bits> on the inputs, |+> on every neuron.
    size_t input_index = 0;
    for (size_t q = 0; q < bits.size(); q++) {
        input_index |= static_cast<size_t>(bits[q]) << q;
    }
    const size_t input_mask = (size_t{1} << spec.inputs()) - 1;
    const double amp = std::pow(0.5, 0.5 * static_cast<double>(n - spec.inputs()));
    CVector psi = CVector::Zero(static_cast<Eigen::Index>(dim));
    for (size_t k = 0; k < dim; k++) {
        if ((k & input_mask) == input_index) {
            psi[static_cast<Eigen::Index>(k)] = amp;
        }
    }
    auto labels = computational_labels(static_cast<int>(n));
    StateVector state(labels, psi);

    Eigen::MatrixXd s(static_cast<Eigen::Index>(spec.inputs()), 1);
    for (size_t q = 0; q < bits.size(); q++) {
        s(static_cast<Eigen::Index>(q), 0) = bits[q] ? -1.0 : 1.0;
    }
    const auto mean_field = surrogate_forward(spec, s);

    QuantumPass out;
    out.qubits = n;
    for (size_t l = 0; l < spec.weights.size(); l++) {
        Eigen::VectorXd xs(spec.weights[l].rows());
        for (Eigen::Index j = 0; j < spec.weights[l].rows(); j++) {
            const size_t qj = first[l + 1] + static_cast<size_t>(j);
            const double x = mean_field.z[l](j, 0) * spec.gate.omegaf;
            xs[j] = x;
            auto design = design_sta_pulse(spec.gate.spec(x), spec.gate.sta);
            if (design.identity) {
                continue;
            }
            std::vector<Eigen::Triplet<cplx>> diag, flip;
            for (size_t k = 0; k < dim; k++) {
                double pot = -spec.biases[l][j];
                for (Eigen::Index i = 0; i < spec.weights[l].cols(); i++) {
                    pot += spec.weights[l](j, i) * detail::z_value(k, first[l] + static_cast<size_t>(i));
                }
                const auto row = static_cast<int>(k);
                diag.emplace_back(row, row, 0.5 * pot * detail::z_value(k, qj));
                flip.emplace_back(row, static_cast<int>(k ^ (size_t{1} << qj)), -0.5);
            }
            SparseCMatrix hd(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim)),
                hx(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
            hd.setFromTriplets(diag.begin(), diag.end());
            hx.setFromTriplets(flip.begin(), flip.end());
            TimeDependentHamiltonian h(static_cast<Eigen::Index>(dim));
            h.add_term(std::move(hd));
            const PulseProfile pulse = design.pulse;
            h.add_term(std::move(hx), [pulse](double t) { return pulse(t); });
            EvolveOptions eo;
            eo.tol = spec.gate.gate.tol;
            eo.max_norm_drift = 1.0;
            const double times[2] = {0.0, spec.gate.tf};
            auto r = evolve(h, state, times, eo);
            const double bound = std::max(kGateNormDrift, eo.tol * static_cast<double>(r.steps));
            out.norm_drift = std::max(out.norm_drift, r.norm_drift);
            if (r.norm_drift > bound) {
                throw Error(ErrorKind::NormDriftExceeded, "joint register drift " + std::to_string(r.norm_drift));
            }
            state = r.final_state();
        }
        out.design_x.push_back(std::move(xs));
    }

    for (size_t l = 1; l < spec.sizes.size(); l++) {
        Eigen::VectorXd p = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(spec.sizes[l]));
        for (size_t j = 0; j < spec.sizes[l]; j++) {
            const size_t q = first[l] + j;
            for (size_t k = 0; k < dim; k++) {
                if ((k >> q) & 1) {
                    p[static_cast<Eigen::Index>(j)] += state.probability(static_cast<Eigen::Index>(k));
                }
            }
        }
        out.populations.push_back(std::move(p));
    }
    return out;
}

struct ConsistencyRow {
    std::string input_pattern;
    size_t output = 0;
    double p_quantum = 0;
    double f_surrogate = 0;

    double delta() const {
        return p_quantum - f_surrogate;
    }
};

/// Input pattern as written in reports: bit 0 first.
inline std::string bit_pattern(const std::vector<int> &bits) {
    std::string s;
    for (int b : bits) {
        s += b ? '1' : '0';
    }
    return s;
}

inline std::vector<int> bits_of(size_t k, size_t n) {
    std::vector<int> b(n);
    for (size_t q = 0; q < n; q++) {
        b[q] = static_cast<int>((k >> q) & 1);
    }
    return b;
}

/// Quantum output populations against the surrogate for every basis input.
inline std::vector<ConsistencyRow> consistency_check(const QnnSpec &spec, size_t workers = default_workers()) {
    spec.validate();
    if (spec.qubits() > spec.max_qubits) {
        throw Error(ErrorKind::RegisterTooLarge, std::to_string(spec.qubits()) + " qubits exceed the limit of " +
                                                     std::to_string(spec.max_qubits));
    }
    const size_t patterns = size_t{1} << spec.inputs();
    std::vector<std::vector<ConsistencyRow>> per(patterns);
    parallel_for(patterns, workers, [&](size_t k) {
        auto bits = bits_of(k, spec.inputs());
        Eigen::MatrixXd s(static_cast<Eigen::Index>(spec.inputs()), 1);
        for (size_t q = 0; q < bits.size(); q++) {
            s(static_cast<Eigen::Index>(q), 0) = bits[q] ? -1.0 : 1.0;
        }
        auto sur = surrogate_forward(spec, s);
        auto qp = quantum_forward(spec, bits);
        for (size_t o = 0; o < spec.outputs(); o++) {
            per[k].push_back(ConsistencyRow{bit_pattern(bits), o, qp.output()[static_cast<Eigen::Index>(o)],
                                            sur.output()(static_cast<Eigen::Index>(o), 0)});
        }
    });
    std::vector<ConsistencyRow> rows;
    for (auto &v : per) {
        rows.insert(rows.end(), v.begin(), v.end());
    }
    return rows;
}

/// `input_pattern,p_quantum,f_surrogate,delta`; with several outputs the
/// pattern carries a `/k` output suffix.
inline std::string consistency_to_csv(const std::vector<ConsistencyRow> &rows, size_t outputs) {
    std::ostringstream os;
    os << "input_pattern,p_quantum,f_surrogate,delta\n";
    for (const auto &r : rows) {
        os << r.input_pattern;
        if (outputs > 1) {
            os << '/' << r.output;
        }
        os << ',' << fmt17(r.p_quantum) << ',' << fmt17(r.f_surrogate) << ',' << fmt17(r.delta()) << '\n';
    }
    return os.str();
}

}  // namespace qnw
