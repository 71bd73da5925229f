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

#include <cmath>
#include <limits>

#include "gtest/gtest.h"
#include "qnw/qnn/quantum.hpp"
#include "qnw/qnn/surrogate.hpp"

using namespace qnw;

namespace {

Eigen::MatrixXd column(std::initializer_list<double> v) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(v.size()), 1);
    Eigen::Index i = 0;
    for (double x : v) {
        m(i++, 0) = x;
    }
    return m;
}

}  // namespace

TEST(surrogate_forward, zero_network_is_one_half) {
    auto s = QnnSpec::zeros({3, 4, 2});
    auto p = surrogate_forward(s, column({1, -1, 1}));
    for (size_t l = 1; l < p.f.size(); l++) {
        EXPECT_TRUE(p.f[l].isConstant(0.5));
    }
}

TEST(surrogate_forward, single_neuron_value) {
    auto s = QnnSpec::zeros({1, 1});
    s.weights[0](0, 0) = 1.0;
    EXPECT_NEAR(surrogate_forward(s, column({1})).output()(0, 0), 0.8535534, 5e-8);
    // cos^2(pi / 8).
    EXPECT_NEAR(surrogate_forward(s, column({1})).output()(0, 0), std::pow(std::cos(M_PI / 8), 2), 1e-15);
    s.gate.omegaf = 2.0;
    EXPECT_NEAR(surrogate_forward(s, column({1})).output()(0, 0), sigmoid(0.5), 1e-15);
}

TEST(surrogate_forward, negating_inputs_and_biases_mirrors_first_layer) {
    auto s = QnnSpec::random({3, 4, 2}, 11);
    Eigen::MatrixXd in = column({1, -1, 1});
    auto a = surrogate_forward(s, in);
    auto neg = s;
    neg.biases[0] = -s.biases[0];
    auto b = surrogate_forward(neg, -in);
    EXPECT_LE((a.f[1] + b.f[1] - Eigen::MatrixXd::Ones(4, 1)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(surrogate_forward, shape_mismatch) {
    auto s = QnnSpec::zeros({2, 1});
    EXPECT_THROW(surrogate_forward(s, column({1, 1, 1})), Error);
    s.weights[0].resize(1, 3);
    EXPECT_THROW(s.validate(), Error);
}

TEST(surrogate_forward, later_wiring_does_not_change_earlier_layers) {
    auto s = QnnSpec::random({2, 3, 2}, 12);
    auto t = s;
    t.weights[1].row(0).swap(t.weights[1].row(1));
    t.biases[1][0] = s.biases[1][1];
    t.biases[1][1] = s.biases[1][0];
    auto a = surrogate_forward(s, column({1, -1}));
    auto b = surrogate_forward(t, column({1, -1}));
    EXPECT_EQ(a.f[1], b.f[1]);
    EXPECT_EQ(a.f[2](0, 0), b.f[2](1, 0));
}

TEST(surrogate_train, gradient_matches_central_differences) {
    auto s = QnnSpec::random({2, 3, 2}, 21);
    Eigen::MatrixXd x = Eigen::MatrixXd::Random(2, 7);
    Eigen::MatrixXd y = (Eigen::MatrixXd::Random(2, 7).array() * 0.5 + 0.5).matrix();
    auto g = surrogate_gradient(s, x, y);
    const double h = 1e-6;
    for (size_t l = 0; l < s.weights.size(); l++) {
        for (Eigen::Index i = 0; i < s.weights[l].rows(); i++) {
            for (Eigen::Index j = 0; j <= s.weights[l].cols(); j++) {
                auto plus = s, minus = s;
                double *pp = j < s.weights[l].cols() ? &plus.weights[l](i, j) : &plus.biases[l][i];
                double *pm = j < s.weights[l].cols() ? &minus.weights[l](i, j) : &minus.biases[l][i];
                *pp += h;
                *pm -= h;
                const double fd = (surrogate_mse(plus, x, y) - surrogate_mse(minus, x, y)) / (2 * h);
                const double an = j < s.weights[l].cols() ? g.weights[l](i, j) : g.biases[l][i];
                EXPECT_NEAR(fd, an, 1e-6 * std::max(1.0, std::abs(an))) << l << ' ' << i << ' ' << j;
            }
        }
    }
}

TEST(surrogate_train, constant_half_is_optimal_at_zero) {
    auto s = QnnSpec::zeros({1, 4, 1});
    Eigen::MatrixXd x = Eigen::MatrixXd::Random(1, 10), y = Eigen::MatrixXd::Constant(1, 10, 0.5);
    auto fit = surrogate_train(s, x, y, GradientDescentConfig{0.5, 10, 0, 0, 0});
    EXPECT_EQ(fit.initial_mse, 0.0);
    EXPECT_EQ(fit.mse, 0.0);
    EXPECT_EQ(fit.epochs, 0u);
}

TEST(surrogate_train, infinite_rate_diverges) {
    auto s = QnnSpec::random({1, 4, 1}, 3);
    auto [x, y] = sine_demo_samples(16);
    GradientDescentConfig cfg;
    cfg.learning_rate = std::numeric_limits<double>::infinity();
    cfg.epochs = 5;
    try {
        surrogate_train(s, x, y, cfg);
        FAIL() << "expected divergence";
    } catch (const Error &e) {
        EXPECT_EQ(e.kind(), ErrorKind::Diverged);
    }
}

TEST(surrogate_train, sine_demo) {
    auto [x, y] = sine_demo_samples();
    GradientDescentConfig cfg;
    auto fit = surrogate_train(QnnSpec::random({1, 8, 1}, 5), x, y, cfg);
    EXPECT_LE(fit.mse, 1e-3);
    EXPECT_LT(fit.mse, fit.initial_mse);
    RecordProperty("mse", std::to_string(fit.mse));
}

TEST(qnn_spec, json_round_trip) {
    auto s = QnnSpec::random({2, 3, 1}, 31);
    s.gate.tf = 4;
    auto back = qnn_spec_from_json(nlohmann::ordered_json::parse(qnn_spec_json(s).dump()));
    EXPECT_EQ(back.sizes, s.sizes);
    EXPECT_EQ(back.weights[1], s.weights[1]);
    EXPECT_EQ(back.biases[0], s.biases[0]);
    EXPECT_EQ(back.gate.tf, 4.0);
    EXPECT_THROW(qnn_spec_from_json(nlohmann::ordered_json::parse(R"({"layer_sizes":[2,1]})")), Error);
}

TEST(quantum_forward, single_neuron_matches_surrogate) {
    auto s = QnnSpec::zeros({1, 1});
    s.weights[0](0, 0) = 1.0;
    for (int bit : {0, 1}) {
        auto q = quantum_forward(s, {bit});
        auto f = surrogate_forward(s, column({bit ? -1.0 : 1.0})).output()(0, 0);
        EXPECT_NEAR(q.output()[0], f, 1e-3) << bit;
        EXPECT_EQ(q.qubits, 2u);
    }
}

TEST(quantum_forward, two_input_basis_consistency) {
    auto s = QnnSpec::zeros({2, 1});
    s.weights[0] << 0.8, -1.3;
    s.biases[0] << 0.4;
    auto rows = consistency_check(s, 1);
    ASSERT_EQ(rows.size(), 4u);
    for (const auto &r : rows) {
        EXPECT_LE(std::abs(r.delta()), 1e-3) << r.input_pattern;
    }
    auto csv = consistency_to_csv(rows, 1);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "input_pattern,p_quantum,f_surrogate,delta");
}

TEST(quantum_forward, zero_network_is_one_half) {
    auto s = QnnSpec::zeros({2, 1});
    for (int k = 0; k < 4; k++) {
        auto q = quantum_forward(s, bits_of(static_cast<size_t>(k), 2));
        EXPECT_NEAR(q.output()[0], 0.5, 1e-3);
    }
}

TEST(quantum_forward, multi_output_layer_and_locality) {
    auto s = QnnSpec::random({3, 2}, 41);
    for (const auto &r : consistency_check(s, 1)) {
        EXPECT_LE(std::abs(r.delta()), 1e-3) << r.input_pattern << '/' << r.output;
    }
    // Adding a later layer leaves the first layer's populations unchanged.
    auto deeper = QnnSpec::random({3, 2, 1}, 42);
    deeper.weights[0] = s.weights[0];
    deeper.biases[0] = s.biases[0];
    auto a = quantum_forward(s, {1, 0, 1});
    auto b = quantum_forward(deeper, {1, 0, 1});
    EXPECT_LE((a.populations[0] - b.populations[0]).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LE(b.norm_drift, 1e-6);
}

TEST(quantum_forward, register_limit) {
    auto s = QnnSpec::zeros({8, 4, 1});
    try {
        quantum_forward(s, std::vector<int>(8, 0));
        FAIL();
    } catch (const Error &e) {
        EXPECT_EQ(e.kind(), ErrorKind::RegisterTooLarge);
    }
    EXPECT_THROW(quantum_forward(QnnSpec::zeros({2, 1}), {0, 2}), Error);
}
