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

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <chrono>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qnw/mlp/network.hpp"

namespace qnw {

struct TrainConfig {
    /// Initial Levenberg-Marquardt damping.
    double mu0 = 5e-3;
    double mu_up = 10.0;
    double mu_down = 0.1;
    double mu_max = 1e10;
    size_t max_epochs = 1000;
    size_t max_validation_failures = 6;
    double min_gradient = 1e-7;
    uint64_t seed = 0;
    /// Samples per Jacobian block in the streaming accumulation.
    size_t block = 128;

    void validate() const {
        if (!(mu0 > 0) || !(mu_max > mu0)) {
            throw Error(ErrorKind::BadConfig, "need 0 < mu0 < mu_max");
        }
        if (!(mu_up > 1) || !(mu_down > 0 && mu_down < 1)) {
            throw Error(ErrorKind::BadConfig, "need mu_up > 1 and 0 < mu_down < 1");
        }
        if (block == 0) {
            throw Error(ErrorKind::BadConfig, "block must be positive");
        }
        if (!(min_gradient >= 0)) {
            throw Error(ErrorKind::BadConfig, "min_gradient must be non-negative");
        }
    }
};

/// Normalized samples: inputs x N and outputs x N.
struct TrainingSet {
    Eigen::MatrixXd x;
    Eigen::MatrixXd a;

    size_t size() const {
        return static_cast<size_t>(x.cols());
    }
};

/// Mean of squared residuals over samples and outputs.
inline double mse(const Network &net, const TrainingSet &d) {
    if (d.size() == 0) {
        return std::nan("");
    }
    return (d.a - net.forward(d.x)).squaredNorm() / static_cast<double>(d.a.size());
}

/// Gauss-Newton pieces: the lower triangle of J^T J, J^T r with r = a - y,
/// and the squared error. J is only ever held one block at a time, and the
/// blocks are added in sample order.
struct NormalEquations {
    Eigen::MatrixXd jtj;
    Eigen::VectorXd jtr;
    double sse = 0;
    size_t residuals = 0;

    /// Gradient of the mse with respect to the parameters.
    Eigen::VectorXd mse_gradient() const {
        return -2.0 / static_cast<double>(residuals) * jtr;
    }
};

inline NormalEquations accumulate_normal_equations(const Network &net, const TrainingSet &d, size_t block = 128) {
    const auto p = static_cast<Eigen::Index>(net.parameter_count());
    NormalEquations ne;
    ne.jtj = Eigen::MatrixXd::Zero(p, p);
    ne.jtr = Eigen::VectorXd::Zero(p);
    Eigen::MatrixXd jt, y;
    const auto n = static_cast<Eigen::Index>(d.size());
    for (Eigen::Index s0 = 0; s0 < n; s0 += static_cast<Eigen::Index>(block)) {
        const Eigen::Index b = std::min<Eigen::Index>(static_cast<Eigen::Index>(block), n - s0);
        jacobian_block(net, d.x.middleCols(s0, b), jt, y);
        Eigen::MatrixXd r = d.a.middleCols(s0, b) - y;
        // Column s * n_out + k of J^T pairs with residual (k, s): r's
        // column-major storage has that order.
        Eigen::Map<const Eigen::VectorXd> rv(r.data(), r.size());
        ne.jtj.selfadjointView<Eigen::Lower>().rankUpdate(jt);
        ne.jtr.noalias() += jt * rv;
        ne.sse += rv.squaredNorm();
    }
    ne.residuals = static_cast<size_t>(d.a.size());
    return ne;
}

/// Solves (J^T J + mu I) delta = J^T r. Returns nullopt when the damped
/// matrix is not numerically positive definite.
inline std::optional<Eigen::VectorXd> damped_step(const NormalEquations &ne, double mu) {
    Eigen::MatrixXd m = ne.jtj;
    m.diagonal().array() += mu;
    Eigen::LLT<Eigen::Ref<Eigen::MatrixXd>, Eigen::Lower> llt(m);
    if (llt.info() != Eigen::Success) {
        return std::nullopt;
    }
    Eigen::VectorXd delta = llt.solve(ne.jtr);
    if (!delta.allFinite()) {
        return std::nullopt;
    }
    return delta;
}

struct EpochRecord {
    size_t epoch = 0;
    double mse_train = 0;
    /// NaN when there is no validation set.
    double mse_validation = 0;
    double mu = 0;
    double gradient_norm = 0;
    size_t rejected = 0;
};

struct TrainReport {
    std::vector<EpochRecord> epochs;
    std::string stop_reason;
    double initial_mse = 0;
    double best_validation_mse = 0;
    size_t best_epoch = 0;
    double wall_seconds = 0;
};

struct TrainResult {
    Network net;
    TrainReport report;
};

using EpochCallback = std::function<void(const EpochRecord &)>;

/// Levenberg-Marquardt on the mse of `train`. A step is kept only if it
/// lowers the training mse. With a validation set, training stops after
/// `max_validation_failures` consecutive epochs without a new best
/// validation mse, and the best-validation weights are returned on every
/// stop. Deterministic for a given input: all reductions run in sample order.
inline TrainResult train_lm(Network net, const TrainingSet &train, const TrainingSet &validation,
                            const TrainConfig &cfg, const EpochCallback &on_epoch = {}) {
    cfg.validate();
    net.validate();
    if (train.size() == 0) {
        throw Error(ErrorKind::InvalidArgument, "empty training set");
    }
    if (static_cast<size_t>(train.x.rows()) != net.inputs() || static_cast<size_t>(train.a.rows()) != net.outputs()) {
        throw Error(ErrorKind::ShapeMismatch, "training set does not match the network shape");
    }
    const auto t_start = std::chrono::steady_clock::now();
    const bool has_val = validation.size() > 0;

    TrainResult out;
    TrainReport &rep = out.report;
    Eigen::VectorXd w = net.parameters();
    double mu = cfg.mu0;
    double current = mse(net, train);
    rep.initial_mse = current;
    Network best = net;
    double best_val = has_val ? mse(net, validation) : std::nan("");
    rep.best_validation_mse = best_val;
    size_t failures = 0;

    for (size_t epoch = 1;; epoch++) {
        if (epoch > cfg.max_epochs) {
            rep.stop_reason = "max_epochs";
            break;
        }
        if (current == 0.0) {
            rep.stop_reason = "zero_error";
            break;
        }
        auto ne = accumulate_normal_equations(net, train, cfg.block);
        const double grad = ne.mse_gradient().norm();
        if (grad <= cfg.min_gradient) {
            rep.stop_reason = "min_gradient";
            break;
        }
        EpochRecord rec;
        rec.epoch = epoch;
        bool accepted = false;
        bool singular = false;
        while (mu <= cfg.mu_max) {
            auto delta = damped_step(ne, mu);
            if (!delta) {
                singular = true;
                mu *= cfg.mu_up;
                rec.rejected++;
                continue;
            }
            singular = false;
            Eigen::VectorXd trial = w + *delta;
            net.set_parameters(trial);
            const double m = mse(net, train);
            if (m < current) {
                w = std::move(trial);
                current = m;
                mu *= cfg.mu_down;
                accepted = true;
                break;
            }
            net.set_parameters(w);
            mu *= cfg.mu_up;
            rec.rejected++;
        }
        if (!accepted) {
            net.set_parameters(w);
            if (singular) {
                throw Error(ErrorKind::SingularNormalMatrix,
                            "damped normal matrix stayed singular up to mu = " + std::to_string(cfg.mu_max));
            }
            rep.stop_reason = "mu_max";
            break;
        }
        rec.mse_train = current;
        rec.mu = mu;
        rec.gradient_norm = grad;
        rec.mse_validation = has_val ? mse(net, validation) : std::nan("");
        rep.epochs.push_back(rec);
        if (on_epoch) {
            on_epoch(rec);
        }
        if (has_val) {
            if (rec.mse_validation < best_val) {
                best_val = rec.mse_validation;
                best = net;
                rep.best_epoch = epoch;
                failures = 0;
            } else if (++failures >= cfg.max_validation_failures) {
                rep.stop_reason = "validation";
                break;
            }
        }
    }
    if (has_val) {
        net = best;
        rep.best_validation_mse = best_val;
    } else {
        rep.best_epoch = rep.epochs.size();
    }
    rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    out.net = std::move(net);
    return out;
}

}  // namespace qnw
