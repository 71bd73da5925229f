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

#include <Eigen/Eigenvalues>
#include <cmath>
#include <vector>

#include "gtest/gtest.h"
#include "qnw/core/evolve.hpp"
#include "qnw/core/two_level.hpp"
#include "qnw/util/grid.hpp"
#include "qnw/util/rng.hpp"

using namespace qnw;

namespace {

// exp(-i H t) psi for constant Hermitian H, via eigendecomposition.
CVector expm_oracle(const Eigen::MatrixXcd &h, const CVector &psi, double t) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
    CVector phases = (es.eigenvalues().cast<cplx>() * cplx(0, -t)).array().exp();
    return es.eigenvectors() * (phases.asDiagonal() * (es.eigenvectors().adjoint() * psi));
}

Eigen::MatrixXcd random_hermitian(int n, Rng &rng) {
    Eigen::MatrixXcd a(n, n);
    for (int i = 0; i < n; i++) {
        for (int j = 0; j < n; j++) {
            a(i, j) = cplx(uniform(rng, -1, 1), uniform(rng, -1, 1));
        }
    }
    return 0.5 * (a + a.adjoint());
}

StateVector random_state(int n, Rng &rng) {
    CVector a(n);
    for (int i = 0; i < n; i++) {
        a[i] = cplx(uniform(rng, -1, 1), uniform(rng, -1, 1));
    }
    a.normalize();
    std::vector<std::string> names;
    for (int i = 0; i < n; i++) {
        names.push_back("s" + std::to_string(i));
    }
    return StateVector(make_labels(names), a);
}

}  // namespace

TEST(state_vector, rejects_unnormalized) {
    CVector a(2);
    a << 1, 1;
    EXPECT_THROW(StateVector(qubit_labels(), a), Error);
    a /= std::sqrt(2.0);
    EXPECT_NO_THROW(StateVector(qubit_labels(), a));
}

TEST(state_vector, rejects_bad_dimension) {
    CVector a(3);
    a << 1, 0, 0;
    try {
        StateVector s(qubit_labels(), a);
        FAIL();
    } catch (const Error &e) {
        EXPECT_EQ(e.kind(), ErrorKind::DimensionMismatch);
    }
    CVector one(1);
    one << 1;
    EXPECT_THROW(StateVector(make_labels({"a"}), one), Error);
}

TEST(fidelity, examples) {
    auto zero = StateVector::basis(qubit_labels(), 0);
    auto one = StateVector::basis(qubit_labels(), 1);
    auto plus = plus_state();
    EXPECT_NEAR(fidelity(plus, plus), 1.0, 1e-15);
    EXPECT_NEAR(fidelity(zero, one), 0.0, 1e-15);
    EXPECT_NEAR(fidelity(plus, zero), 0.5, 1e-15);
}

TEST(fidelity, dimension_mismatch) {
    Rng rng(3);
    auto a = random_state(3, rng);
    try {
        fidelity(a, plus_state());
        FAIL();
    } catch (const Error &e) {
        EXPECT_EQ(e.kind(), ErrorKind::DimensionMismatch);
    }
}

TEST(hamiltonian, rejects_non_hermitian) {
    TimeDependentHamiltonian h(2);
    Eigen::MatrixXcd m(2, 2);
    m << 0, 1, 0, 0;
    try {
        h.add_term(m);
        FAIL();
    } catch (const Error &e) {
        EXPECT_EQ(e.kind(), ErrorKind::NonHermitianTerm);
    }
    Eigen::MatrixXcd big = Eigen::MatrixXcd::Identity(3, 3);
    try {
        h.add_term(big);
        FAIL();
    } catch (const Error &e) {
        EXPECT_EQ(e.kind(), ErrorKind::DimensionMismatch);
    }
}

TEST(evolve, rabi_half_period) {
    const double omega = 2 * M_PI;
    TimeDependentHamiltonian h(2);
    h.add_term(Eigen::MatrixXcd(0.5 * omega * pauli_x()));
    std::vector<double> times{0.0, 0.5};
    auto r = evolve(h, StateVector::basis(qubit_labels(), 0), times, 1e-10);
    EXPECT_NEAR(r.final_state().probability(1), 1.0, 1e-8);
}

TEST(evolve, zero_hamiltonian_is_identity) {
    Rng rng(5);
    auto psi = random_state(3, rng);
    TimeDependentHamiltonian h(3);
    auto times = linspace(0, 2, 7);
    auto r = evolve(h, psi, times, 1e-10);
    for (const auto &s : r.states) {
        EXPECT_LT((s.amps() - psi.amps()).norm(), 1e-15);
    }
}

TEST(evolve, sigma_z_phase_returns_to_plus) {
    const double x = 2 * M_PI;
    TimeDependentHamiltonian h(2);
    h.add_term(Eigen::MatrixXcd(0.5 * x * pauli_z()));
    auto times = linspace(0, 1, 11);
    auto r = evolve(h, plus_state(), times, 1e-11);
    for (size_t k = 0; k < times.size(); k++) {
        const auto &s = r.states[k];
        EXPECT_NEAR(s.probability(0), 0.5, 1e-9);
        // <1|psi>* <0|psi> = e^{-i x t} / 2.
        cplx rel = std::conj(s.amplitude(1)) * s.amplitude(0);
        cplx expect = 0.5 * std::exp(cplx(0, -x * times[k]));
        EXPECT_LT(std::abs(rel - expect), 1e-8);
    }
    EXPECT_NEAR(fidelity(r.final_state(), plus_state()), 1.0, 1e-9);
}

TEST(evolve, dense_output_matches_matrix_exponential) {
    Rng rng(11);
    for (int trial = 0; trial < 5; trial++) {
        int n = 2 + trial;
        auto hm = random_hermitian(n, rng);
        auto psi = random_state(n, rng);
        TimeDependentHamiltonian h(n);
        h.add_term(hm);
        auto times = linspace(0, 3, 37);
        auto r = evolve(h, psi, times, 1e-11);
        ASSERT_EQ(r.states.size(), times.size());
        for (size_t k = 0; k < times.size(); k++) {
            CVector expect = expm_oracle(hm, psi.amps(), times[k]);
            EXPECT_LT((r.states[k].amps() - expect).norm(), 1e-8) << "n=" << n << " t=" << times[k];
        }
    }
}

TEST(evolve, time_dependent_commuting_envelope) {
    // H(t) = cos(w t) * M commutes with itself, so psi(t) = exp(-i M sin(w t)/w) psi0.
    Rng rng(17);
    auto hm = random_hermitian(3, rng);
    auto psi = random_state(3, rng);
    const double w = 7.0;
    TimeDependentHamiltonian h(3);
    h.add_term(hm, [w](double t) { return std::cos(w * t); });
    auto times = linspace(0, 2, 21);
    for (auto stepper : {Stepper::DormandPrince45, Stepper::FixedRk4}) {
        EvolveOptions opt;
        opt.stepper = stepper;
        opt.tol = 1e-11;
        opt.max_step = stepper == Stepper::FixedRk4 ? 1e-3 : opt.max_step;
        auto r = evolve(h, psi, times, opt);
        for (size_t k = 0; k < times.size(); k++) {
            CVector expect = expm_oracle(hm, psi.amps(), std::sin(w * times[k]) / w);
            EXPECT_LT((r.states[k].amps() - expect).norm(), 1e-8);
        }
    }
}

TEST(evolve, rk4_is_fourth_order) {
    Rng rng(23);
    auto hm = random_hermitian(2, rng);
    auto psi = random_state(2, rng);
    TimeDependentHamiltonian h(2);
    h.add_term(hm, [](double t) { return 1.0 + 0.5 * std::sin(3 * t); });
    std::vector<double> times{0.0, 2.0};
    // Oracle: F(t) = t + (1 - cos 3t) / 6.
    CVector exact = expm_oracle(hm, psi.amps(), 2.0 + (1 - std::cos(6.0)) / 6.0);
    double prev = -1;
    for (double step : {0.1, 0.05, 0.025}) {
        EvolveOptions opt;
        opt.stepper = Stepper::FixedRk4;
        opt.max_step = step;
        opt.max_norm_drift = 1.0;
        double e = (evolve(h, psi, times, opt).final_state().amps() - exact).norm();
        if (prev > 0) {
            // Observed order log2(e(h) / e(h/2)); the ratio tends to 16 from below here.
            EXPECT_GE(std::log2(prev / e), 3.95) << "step " << step;
        }
        prev = e;
    }
}

TEST(evolve, drift_is_monitored_not_corrected) {
    Rng rng(29);
    auto hm = random_hermitian(3, rng) * 20.0;
    auto psi = random_state(3, rng);
    TimeDependentHamiltonian h(3);
    h.add_term(hm);
    std::vector<double> times{0.0, 1.0};
    EvolveOptions opt;
    opt.stepper = Stepper::FixedRk4;
    opt.max_step = 0.05;
    try {
        evolve(h, psi, times, opt);
        FAIL();
    } catch (const Error &e) {
        EXPECT_EQ(e.kind(), ErrorKind::NormDriftExceeded);
    }
    opt.max_norm_drift = 1e300;
    auto r = evolve(h, psi, times, opt);
    EXPECT_GT(std::abs(r.final_state().norm_squared() - 1.0), 1e-6);
}

TEST(evolve, unitarity_bound_property) {
    Rng rng(31);
    for (int trial = 0; trial < 10; trial++) {
        int n = 2 + trial % 4;
        auto psi = random_state(n, rng);
        TimeDependentHamiltonian h(n);
        double w = uniform(rng, 1, 10);
        h.add_term(random_hermitian(n, rng));
        h.add_term(random_hermitian(n, rng), [w](double t) { return std::sin(w * t); });
        auto times = linspace(0, uniform(rng, 0.5, 5), 5);
        double tol = 1e-9;
        auto r = evolve(h, psi, times, tol);
        EXPECT_LE(r.norm_drift, tol * static_cast<double>(r.steps));
    }
}

TEST(evolve, input_validation) {
    TimeDependentHamiltonian h(2);
    std::vector<double> bad{0.0, 1.0, 1.0};
    EXPECT_THROW(evolve(h, plus_state(), bad, 1e-9), Error);
    std::vector<double> ok{0.0, 1.0};
    EXPECT_THROW(evolve(h, plus_state(), ok, 0.0), Error);
    TimeDependentHamiltonian h3(3);
    try {
        evolve(h3, plus_state(), ok, 1e-9);
        FAIL();
    } catch (const Error &e) {
        EXPECT_EQ(e.kind(), ErrorKind::DimensionMismatch);
    }
}

TEST(two_level, sigmoid_examples) {
    EXPECT_DOUBLE_EQ(sigmoid(0), 0.5);
    EXPECT_NEAR(sigmoid(1), (1 + M_SQRT1_2) / 2, 1e-15);
    EXPECT_NEAR(sigmoid(1), 0.8535534, 1e-7);
    EXPECT_LT(sigmoid(-1e8), 1e-15);
    EXPECT_GT(sigmoid(-1e8), 0.0);
}

TEST(two_level, sigmoid_properties) {
    Rng rng(37);
    double prev = -1;
    for (double x : linspace(-50, 50, 2001)) {
        double f = sigmoid(x);
        EXPECT_GT(f, prev);
        prev = f;
        EXPECT_NEAR(sigmoid(-x) + f, 1.0, 1e-15);
    }
    for (int k = 0; k < 100; k++) {
        double x = uniform(rng, -5, 5);
        double fd = (sigmoid(x + 1e-6) - sigmoid(x - 1e-6)) / 2e-6;
        EXPECT_NEAR(sigmoid_derivative(x), fd, 1e-8);
    }
}

TEST(two_level, ground_state_examples) {
    auto g0 = ground_state_2level(0, 1);
    EXPECT_NEAR(g0.state.amplitude(0).real(), M_SQRT1_2, 1e-15);
    EXPECT_NEAR(g0.state.amplitude(1).real(), M_SQRT1_2, 1e-15);
    EXPECT_DOUBLE_EQ(g0.excitation, 0.5);

    auto gbig = ground_state_2level(1e6, 1);
    EXPECT_NEAR(gbig.state.probability(1), 1.0, 1e-12);

    auto g1 = ground_state_2level(1, 1);
    EXPECT_NEAR(g1.excitation, 0.8535533, 1e-7);
    EXPECT_NEAR(g1.state.probability(1), (1 + M_SQRT1_2) / 2, 1e-15);
}

TEST(two_level, zero_gap) {
    try {
        ground_state_2level(0, 0);
        FAIL();
    } catch (const Error &e) {
        EXPECT_EQ(e.kind(), ErrorKind::ZeroGap);
    }
    EXPECT_NEAR(ground_state_2level(2, 0).state.probability(1), 1.0, 0);
    EXPECT_NEAR(ground_state_2level(-2, 0).state.probability(0), 1.0, 0);
}

TEST(two_level, eigen_consistency_property) {
    for (double omega : {0.3, 1.0, 2.5}) {
        for (double ratio : linspace(-5, 5, 101)) {
            double x = ratio * omega;
            auto g = ground_state_2level(x, omega);
            Eigen::Matrix2cd h = two_level_hamiltonian(x, omega);
            double resid = (h * g.state.amps() - g.energy * g.state.amps()).norm();
            EXPECT_LE(resid, 1e-12);
            EXPECT_NEAR(g.state.probability(1), sigmoid(ratio), 1e-12);

            Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(h);
            double half_gap = 0.5 * std::hypot(x, omega);
            EXPECT_NEAR(es.eigenvalues()[0], -half_gap, 1e-12);
            EXPECT_NEAR(es.eigenvalues()[1], half_gap, 1e-12);
        }
    }
}
