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

#include "gtest/gtest.h"
#include "qnw/mlp/metrics.hpp"
#include "qnw/mlp/network.hpp"
#include "qnw/mlp/pipeline.hpp"
#include "qnw/mlp/train.hpp"

using namespace qnw;

namespace {

Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, uint64_t seed, double lo = -1, double hi = 1) {
    Rng rng(seed);
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index j = 0; j < cols; j++) {
        for (Eigen::Index i = 0; i < rows; i++) {
            m(i, j) = uniform(rng, lo, hi);
        }
    }
    return m;
}

/// Linear data a = W x + b + noise for a {n_in, n_out} network.
TrainingSet linear_problem(Eigen::Index n_in, Eigen::Index n_out, Eigen::Index n, uint64_t seed) {
    TrainingSet d;
    d.x = random_matrix(n_in, n, seed);
    Eigen::MatrixXd w = random_matrix(n_out, n_in, seed + 1);
    Eigen::VectorXd b = random_matrix(n_out, 1, seed + 2);
    d.a = w * d.x;
    d.a.colwise() += b;
    d.a += 0.05 * random_matrix(n_out, n, seed + 3);
    return d;
}

/// Closed-form least-squares parameters (per output row: weights, then bias)
/// in the network's flattening order.
Eigen::VectorXd least_squares_parameters(const TrainingSet &d) {
    const Eigen::Index n_in = d.x.rows(), n_out = d.a.rows();
    Eigen::MatrixXd design(d.x.cols(), n_in + 1);
    design.leftCols(n_in) = d.x.transpose();
    design.col(n_in).setOnes();
    Eigen::VectorXd p(n_out * n_in + n_out);
    for (Eigen::Index k = 0; k < n_out; k++) {
        Eigen::VectorXd coef =
            (design.transpose() * design).ldlt().solve(design.transpose() * d.a.row(k).transpose());
        p.segment(k * n_in, n_in) = coef.head(n_in);
        p[n_out * n_in + k] = coef[n_in];
    }
    return p;
}

}  // namespace

TEST(network, default_shape) {
    auto n = Network::xavier(default_layer_sizes(), 1);
    EXPECT_EQ(n.parameter_count(), 5259u);
    EXPECT_EQ(n.inputs(), 101u);
    EXPECT_EQ(n.outputs(), 2u);
    EXPECT_NO_THROW(n.validate());
    for (const auto &b : n.biases) {
        EXPECT_EQ(b.norm(), 0.0);
    }
    const double lim = std::sqrt(6.0 / (101 + 40));
    EXPECT_LE(n.weights[0].cwiseAbs().maxCoeff(), lim);
}

TEST(network, parameter_round_trip) {
    auto n = Network::xavier({3, 4, 2}, 5);
    Eigen::VectorXd p = n.parameters();
    auto m = Network::zeros({3, 4, 2});
    m.set_parameters(p);
    EXPECT_EQ(m.parameters(), p);
    EXPECT_EQ(m.weights[0](1, 2), p[1 * 3 + 2]);
    EXPECT_EQ(m.biases[0][3], p[12 + 3]);
    EXPECT_THROW(m.set_parameters(Eigen::VectorXd::Zero(3)), Error);
}

TEST(network, zero_network_outputs_denormalized_biases) {
    Model m;
    m.net = Network::zeros({3, 5, 2});
    m.features = AffineMap{{0, 0, 0}, {1, 1, 1}};
    m.targets = AffineMap{{1.0, -0.3}, {25.0, 0.3}};
    Eigen::MatrixXd rows = random_matrix(4, 3, 3);
    Eigen::MatrixXd y = m.predict(rows);
    for (Eigen::Index s = 0; s < 4; s++) {
        EXPECT_DOUBLE_EQ(y(s, 0), 13.0);
        EXPECT_NEAR(y(s, 1), 0.0, 1e-15);
    }
}

TEST(network, identity_linear_net) {
    auto n = Network::zeros({2, 2});
    n.weights[0].setIdentity();
    Eigen::MatrixXd x = random_matrix(2, 7, 4);
    EXPECT_EQ(n.forward(x), x);
}

TEST(network, shape_mismatch) {
    auto n = Network::zeros({3, 2});
    EXPECT_THROW(n.forward(Eigen::MatrixXd::Zero(4, 1)), Error);
    try {
        n.forward(Eigen::MatrixXd::Zero(4, 1));
    } catch (const Error &e) {
        EXPECT_EQ(e.kind(), ErrorKind::ShapeMismatch);
    }
    EXPECT_THROW(Network::zeros({3}), Error);
}

TEST(network, jacobian_matches_central_differences) {
    const std::vector<std::vector<size_t>> shapes{{1, 2, 1}, {2, 2, 1}, {1, 1, 1, 1}, {2, 1, 2}, {1, 3, 1}};
    for (size_t trial = 0; trial < shapes.size(); trial++) {
        auto net = Network::xavier(shapes[trial], 100 + trial);
        ASSERT_LE(net.parameter_count(), 10u);
        Eigen::VectorXd p = random_matrix(static_cast<Eigen::Index>(net.parameter_count()), 1, 200 + trial);
        net.set_parameters(p);
        Eigen::MatrixXd x = random_matrix(static_cast<Eigen::Index>(net.inputs()), 3, 300 + trial);
        Eigen::MatrixXd jt, y;
        jacobian_block(net, x, jt, y);
        EXPECT_LT((y - net.forward(x)).norm(), 1e-14);
        const double h = 1e-6;
        const auto n_out = static_cast<Eigen::Index>(net.outputs());
        for (Eigen::Index k = 0; k < p.size(); k++) {
            Network plus = net, minus = net;
            Eigen::VectorXd pp = p, pm = p;
            pp[k] += h;
            pm[k] -= h;
            plus.set_parameters(pp);
            minus.set_parameters(pm);
            Eigen::MatrixXd fd = (plus.forward(x) - minus.forward(x)) / (2 * h);
            for (Eigen::Index s = 0; s < x.cols(); s++) {
                for (Eigen::Index o = 0; o < n_out; o++) {
                    const double an = jt(k, s * n_out + o);
                    EXPECT_NEAR(fd(o, s), an, 1e-6 * std::max(1.0, std::abs(an)))
                        << "shape " << trial << " param " << k;
                }
            }
        }
    }
}

TEST(affine_map, round_trip_and_range) {
    Eigen::MatrixXd rows = random_matrix(50, 4, 9, -30, 40);
    rows.col(3).setConstant(2.5);
    std::vector<size_t> all(50);
    for (size_t i = 0; i < all.size(); i++) {
        all[i] = i;
    }
    auto m = AffineMap::fit(rows, all);
    Eigen::MatrixXd u = m.columns(rows, all);
    EXPECT_NEAR(u.topRows(3).maxCoeff(), 1.0, 1e-15);
    EXPECT_NEAR(u.topRows(3).minCoeff(), -1.0, 1e-15);
    Eigen::MatrixXd back = m.rows_from_unit(u);
    EXPECT_LE((back - rows).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(evaluate, perfect_prediction) {
    Eigen::MatrixXd a = random_matrix(40, 2, 11, 1, 5);
    auto m = evaluate(a, a, {0.1, 0.1});
    for (const auto &o : m.outputs) {
        ASSERT_TRUE(o.r && o.alpha && o.b_fit);
        EXPECT_NEAR(*o.r, 1.0, 1e-15);
        EXPECT_NEAR(*o.alpha, 1.0, 1e-14);
        EXPECT_NEAR(*o.b_fit, 0.0, 1e-13);
        EXPECT_EQ(o.f_raw, 1.0);
        EXPECT_EQ(o.f_guarded, 1.0);
    }
    EXPECT_EQ(m.mse, 0.0);
}

TEST(evaluate, affine_relation) {
    Eigen::MatrixXd a = random_matrix(40, 2, 12, 1, 5);
    Eigen::MatrixXd y = (2.0 * a.array() + 1.0).matrix();
    auto m = evaluate(y, a, {0.1, 0.1});
    for (const auto &o : m.outputs) {
        EXPECT_NEAR(*o.r, 1.0, 1e-14);
        EXPECT_NEAR(*o.alpha, 2.0, 1e-13);
        EXPECT_NEAR(*o.b_fit, 1.0, 1e-12);
    }
}

TEST(evaluate, constant_targets_leave_r_absent) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Constant(10, 1, 3.0);
    Eigen::MatrixXd y = random_matrix(10, 1, 13);
    auto m = evaluate(y, a, {0.0});
    EXPECT_FALSE(m.outputs[0].r.has_value());
    EXPECT_FALSE(m.outputs[0].alpha.has_value());
    EXPECT_TRUE(std::isfinite(m.outputs[0].f_raw));
    EXPECT_THROW(evaluate(y, Eigen::MatrixXd::Zero(0, 1), {0.0}), Error);
}

TEST(evaluate, guarded_accuracy_near_zero_targets) {
    Eigen::MatrixXd a(3, 1), y(3, 1);
    a << -0.06, 0.0, 0.06;
    y << -0.05, 0.01, 0.07;
    auto m = evaluate(y, a, {0.03});
    EXPECT_FALSE(std::isfinite(m.outputs[0].f_raw));
    // Relative errors 1/6, 1/3, 1/6.
    EXPECT_NEAR(m.outputs[0].f_guarded, 1.0 - (1.0 / 6 + 1.0 / 3 + 1.0 / 6) / 3, 1e-12);
    EXPECT_NEAR(half_grid_spacing({-0.06, 0.0, 0.06, 0.0}), 0.03, 1e-15);
}

TEST(train_lm, linear_net_reaches_least_squares_solution) {
    auto d = linear_problem(3, 2, 200, 21);
    Eigen::VectorXd oracle = least_squares_parameters(d);
    TrainConfig cfg;
    cfg.max_epochs = 3;
    cfg.min_gradient = 0;
    auto r = train_lm(Network::zeros({3, 2}), d, {}, cfg);
    EXPECT_LE(r.report.epochs.size(), 3u);
    EXPECT_LE((r.net.parameters() - oracle).norm(), 1e-8);
}

TEST(train_lm, constant_target_any_damping) {
    TrainingSet d;
    d.x = random_matrix(2, 60, 31);
    d.a = Eigen::MatrixXd::Constant(1, 60, 0.3);
    for (double mu0 : {1e-3, 1.0, 100.0}) {
        TrainConfig cfg;
        cfg.mu0 = mu0;
        cfg.max_epochs = 200;
        auto start = Network::xavier({2, 1}, 32);
        auto r = train_lm(start, d, {}, cfg);
        EXPECT_NEAR(r.net.biases[0][0], 0.3, 1e-6) << mu0;
        EXPECT_LE(r.net.weights[0].norm(), 1e-6) << mu0;
    }
}

TEST(train_lm, huge_damping_is_gradient_descent) {
    auto net = Network::xavier({3, 4, 2}, 41);
    TrainingSet d{random_matrix(3, 30, 42), random_matrix(2, 30, 43)};
    auto ne = accumulate_normal_equations(net, d, 7);
    auto delta = damped_step(ne, 1e8);
    ASSERT_TRUE(delta.has_value());
    Eigen::VectorXd descent = -ne.mse_gradient();
    const double cosine = delta->dot(descent) / (delta->norm() * descent.norm());
    EXPECT_GE(cosine, 0.999);
}

TEST(train_lm, block_size_does_not_change_normal_equations) {
    auto net = Network::xavier({3, 4, 2}, 44);
    TrainingSet d{random_matrix(3, 30, 45), random_matrix(2, 30, 46)};
    auto a = accumulate_normal_equations(net, d, 1);
    auto b = accumulate_normal_equations(net, d, 128);
    Eigen::MatrixXd la = a.jtj.triangularView<Eigen::Lower>(), lb = b.jtj.triangularView<Eigen::Lower>();
    EXPECT_LE((la - lb).norm(), 1e-12 * la.norm());
    EXPECT_LE((a.jtr - b.jtr).norm(), 1e-12 * a.jtr.norm());
    EXPECT_NEAR(a.sse / static_cast<double>(a.residuals), mse(net, d), 1e-14);
}

TEST(train_lm, accepted_steps_decrease_mse_and_best_weights_return) {
    Rng rng(51);
    TrainingSet t, v;
    t.x = random_matrix(1, 80, 52);
    t.a = (2.0 * t.x.array().sin()).matrix() + 0.2 * random_matrix(1, 80, 53);
    v.x = random_matrix(1, 40, 54);
    v.a = (2.0 * v.x.array().sin()).matrix() + 0.2 * random_matrix(1, 40, 55);
    TrainConfig cfg;
    cfg.max_epochs = 300;
    auto r = train_lm(Network::xavier({1, 12, 1}, 56), t, v, cfg);
    const auto &e = r.report.epochs;
    ASSERT_FALSE(e.empty());
    EXPECT_LT(e.front().mse_train, r.report.initial_mse);
    for (size_t i = 1; i < e.size(); i++) {
        EXPECT_LT(e[i].mse_train, e[i - 1].mse_train);
    }
    EXPECT_DOUBLE_EQ(mse(r.net, v), r.report.best_validation_mse);
    if (r.report.stop_reason == "validation") {
        EXPECT_EQ(e.size(), r.report.best_epoch + cfg.max_validation_failures);
    }
}

TEST(train_lm, deterministic) {
    TrainingSet t{random_matrix(4, 100, 61), random_matrix(2, 100, 62)};
    TrainConfig cfg;
    cfg.max_epochs = 15;
    auto a = train_lm(Network::xavier({4, 6, 2}, 63), t, {}, cfg);
    auto b = train_lm(Network::xavier({4, 6, 2}, 63), t, {}, cfg);
    EXPECT_EQ(a.net.parameters(), b.net.parameters());
    ASSERT_EQ(a.report.epochs.size(), b.report.epochs.size());
    for (size_t i = 0; i < a.report.epochs.size(); i++) {
        EXPECT_EQ(a.report.epochs[i].mse_train, b.report.epochs[i].mse_train);
        EXPECT_EQ(a.report.epochs[i].mu, b.report.epochs[i].mu);
    }
    EXPECT_EQ(a.report.stop_reason, b.report.stop_reason);
}

TEST(train_lm, rejects_bad_config) {
    TrainingSet t{random_matrix(1, 5, 1), random_matrix(1, 5, 2)};
    TrainConfig cfg;
    cfg.mu_down = 2;
    EXPECT_THROW(train_lm(Network::zeros({1, 1}), t, {}, cfg), Error);
    EXPECT_THROW(train_lm(Network::zeros({2, 1}), t, {}, TrainConfig{}), Error);
}

TEST(train_lm, toy_doubling_net_generalizes) {
    TrainingSet t, held;
    t.x = random_matrix(1, 60, 71);
    t.a = 2.0 * t.x;
    held.x = random_matrix(1, 40, 72);
    held.a = 2.0 * held.x;
    TrainConfig cfg;
    cfg.max_epochs = 100;
    auto r = train_lm(Network::xavier({1, 3, 1}, 73), t, {}, cfg);
    auto m = evaluate(r.net.forward(held.x).transpose(), held.a.transpose(), {0.0});
    ASSERT_TRUE(m.outputs[0].r.has_value());
    EXPECT_GE(*m.outputs[0].r, 0.999);
}

namespace {

/// Synthetic stand-in for a sensor dataset: features are smooth functions of
/// (omega_tg, xi) so that a small net can learn them.
Dataset synthetic_dataset(size_t n_points) {
    Dataset d;
    std::vector<double> om = linspace(1.0, 25.0, 25), xi = linspace(-0.3, 0.3, 5);
    Rng rng(81);
    for (double o : om) {
        for (double x : xi) {
            for (uint32_t r = 0; r < 2; r++) {
                d.omega_tg_khz.push_back(o);
                d.xi_khz.push_back(x);
                d.rep.push_back(r);
                d.seed.push_back(0);
            }
        }
    }
    d.features.resize(static_cast<Eigen::Index>(d.rows()), static_cast<Eigen::Index>(n_points));
    for (size_t i = 0; i < d.rows(); i++) {
        for (size_t k = 0; k < n_points; k++) {
            const double t = 0.5 + 0.5 * static_cast<double>(k) / static_cast<double>(n_points - 1);
            d.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
                std::tanh(0.08 * d.omega_tg_khz[i] * t) + d.xi_khz[i] * (1.5 - t) + 0.01 * uniform(rng, -1, 1);
        }
    }
    return d;
}

}  // namespace

TEST(pipeline, interval_training_and_checkpoint_round_trip) {
    auto d = synthetic_dataset(6);
    auto split = split_indices(d.rows(), 0.7, 0.15, 0.15, 5);
    TrainConfig cfg;
    cfg.seed = 7;
    cfg.max_epochs = 40;
    auto run = train_interval(d, split, Interval{8.0, 25.0}, cfg, {6, 8, 2});
    EXPECT_GT(run.n_train, 0u);
    for (size_t i : filter_interval(d, split.test, run.interval)) {
        EXPECT_GE(d.omega_tg_khz[i], 8.0);
    }
    EXPECT_EQ(run.model.features.size(), 6u);
    ASSERT_TRUE(run.test.outputs[0].r.has_value());
    EXPECT_GT(*run.test.outputs[0].r, 0.9);

    auto ck = checkpoint_json(run);
    auto text = ck.dump();
    auto back = model_from_checkpoint(nlohmann::ordered_json::parse(text));
    EXPECT_EQ(back.net.parameters(), run.model.net.parameters());
    EXPECT_EQ(back.predict(d.features), run.model.predict(d.features));

    auto again = train_interval(d, split, Interval{8.0, 25.0}, cfg, {6, 8, 2});
    EXPECT_EQ(train_report_json(again).dump(), train_report_json(run).dump());
    EXPECT_EQ(checkpoint_json(again).dump(), text);
}

TEST(pipeline, empty_interval_is_rejected) {
    auto d = synthetic_dataset(4);
    auto split = split_indices(d.rows(), 0.7, 0.15, 0.15, 5);
    EXPECT_THROW(train_interval(d, split, Interval{30.0, 40.0}, TrainConfig{}, {4, 2}), Error);
    EXPECT_THROW(model_from_checkpoint(nlohmann::ordered_json::parse("{}")), Error);
}
