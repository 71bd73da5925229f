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
#include <string>
#include <vector>

#include "json.hpp"
#include "qnw/core/two_level.hpp"
#include "qnw/error.hpp"
#include "qnw/perceptron/protocols.hpp"
#include "qnw/util/rng.hpp"

namespace qnw {

/// Feed-forward network of perceptron qubits. Neuron j of layer l + 1 sees
/// the potential x_j = sum_i w_ji s_i - b_j, where s_i is the sigma^z value
/// of neuron i in layer l: the input value itself for the input layer and
/// <sigma^z> = 1 - 2 f_i for hidden neurons, with |0> the +1 eigenstate.
struct QnnSpec {
    std::vector<size_t> sizes;
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;
    GateSettings gate;
    size_t max_qubits = 12;

    static QnnSpec zeros(std::vector<size_t> sizes) {
        if (sizes.size() < 2) {
            throw Error(ErrorKind::ShapeMismatch, "a network needs an input and an output layer");
        }
        QnnSpec s;
        for (size_t n : sizes) {
            if (n == 0) {
                throw Error(ErrorKind::ShapeMismatch, "layer sizes must be positive");
            }
        }
        s.sizes = std::move(sizes);
        for (size_t l = 1; l < s.sizes.size(); l++) {
            s.weights.push_back(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(s.sizes[l]),
                                                      static_cast<Eigen::Index>(s.sizes[l - 1])));
            s.biases.push_back(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(s.sizes[l])));
        }
        return s;
    }

    /// Weights and biases uniform in [-scale, scale].
    static QnnSpec random(std::vector<size_t> sizes, uint64_t seed, double scale = 1.0) {
        QnnSpec s = zeros(std::move(sizes));
        Rng rng(seed);
        for (size_t l = 0; l < s.weights.size(); l++) {
            for (Eigen::Index i = 0; i < s.weights[l].rows(); i++) {
                for (Eigen::Index j = 0; j < s.weights[l].cols(); j++) {
                    s.weights[l](i, j) = uniform(rng, -scale, scale);
                }
                s.biases[l][i] = uniform(rng, -scale, scale);
            }
        }
        return s;
    }

    size_t inputs() const {
        return sizes.front();
    }
    size_t outputs() const {
        return sizes.back();
    }
    size_t qubits() const {
        size_t n = 0;
        for (size_t s : sizes) {
            n += s;
        }
        return n;
    }

    void validate() const {
        if (sizes.size() < 2 || weights.size() != sizes.size() - 1 || biases.size() != weights.size()) {
            throw Error(ErrorKind::ShapeMismatch, "layer count does not match the size list");
        }
        for (size_t l = 0; l < weights.size(); l++) {
            if (static_cast<size_t>(weights[l].rows()) != sizes[l + 1] ||
                static_cast<size_t>(weights[l].cols()) != sizes[l] ||
                static_cast<size_t>(biases[l].size()) != sizes[l + 1]) {
                throw Error(ErrorKind::ShapeMismatch, "layer " + std::to_string(l + 1) + " has the wrong shape");
            }
        }
        if (!(gate.omegaf > 0) || !(gate.tf > 0)) {
            throw Error(ErrorKind::BadConfig, "gate needs omegaf > 0 and tf > 0");
        }
    }
};

/// Activations of every layer for a batch of inputs (inputs x samples).
/// Entry 0 is the input batch; later entries hold the excitation
/// probabilities f of each layer.
struct SurrogatePass {
    std::vector<Eigen::MatrixXd> f;
    /// Potentials divided by omegaf, per non-input layer.
    std::vector<Eigen::MatrixXd> z;

    const Eigen::MatrixXd &output() const {
        return f.back();
    }
};

inline Eigen::MatrixXd sigma_z_signal(const Eigen::MatrixXd &f) {
    return (1.0 - 2.0 * f.array()).matrix();
}

inline SurrogatePass surrogate_forward(const QnnSpec &spec, const Eigen::MatrixXd &inputs) {
    spec.validate();
    if (static_cast<size_t>(inputs.rows()) != spec.inputs()) {
        throw Error(ErrorKind::ShapeMismatch, "expected " + std::to_string(spec.inputs()) + " inputs, got " +
                                                  std::to_string(inputs.rows()));
    }
    SurrogatePass p;
    p.f.push_back(inputs);
    Eigen::MatrixXd s = inputs;
    for (size_t l = 0; l < spec.weights.size(); l++) {
        Eigen::MatrixXd x = spec.weights[l] * s;
        x.colwise() -= spec.biases[l];
        x /= spec.gate.omegaf;
        p.f.push_back(x.unaryExpr([](double v) { return sigmoid(v); }));
        p.z.push_back(std::move(x));
        s = sigma_z_signal(p.f.back());
    }
    return p;
}

inline double surrogate_mse(const QnnSpec &spec, const Eigen::MatrixXd &inputs, const Eigen::MatrixXd &targets) {
    return (surrogate_forward(spec, inputs).output() - targets).squaredNorm() / static_cast<double>(targets.size());
}

/// Gradient of the mse with respect to weights and biases, same shapes as
/// the network.
struct SurrogateGradient {
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;
    double mse = 0;
};

inline SurrogateGradient surrogate_gradient(const QnnSpec &spec, const Eigen::MatrixXd &inputs,
                                            const Eigen::MatrixXd &targets) {
    auto pass = surrogate_forward(spec, inputs);
    if (targets.rows() != pass.output().rows() || targets.cols() != pass.output().cols()) {
        throw Error(ErrorKind::ShapeMismatch, "targets do not match the network output");
    }
    const size_t L = spec.weights.size();
    SurrogateGradient g;
    g.weights.resize(L);
    g.biases.resize(L);
    Eigen::MatrixXd diff = pass.output() - targets;
    g.mse = diff.squaredNorm() / static_cast<double>(targets.size());
    // d mse / d f of the current layer.
    Eigen::MatrixXd df = 2.0 / static_cast<double>(targets.size()) * diff;
    for (size_t l = L; l-- > 0;) {
        Eigen::MatrixXd dx =
            (df.array() * pass.z[l].unaryExpr([](double v) { return sigmoid_derivative(v); }).array()).matrix() /
            spec.gate.omegaf;
        const Eigen::MatrixXd s = l == 0 ? pass.f[0] : sigma_z_signal(pass.f[l]);
        g.weights[l] = dx * s.transpose();
        g.biases[l] = -dx.rowwise().sum();
        if (l > 0) {
            df = -2.0 * (spec.weights[l].transpose() * dx);
        }
    }
    return g;
}

struct GradientDescentConfig {
    double learning_rate = 0.5;
    size_t epochs = 20000;
    /// Stop early once the mse falls below this value.
    double target_mse = 0;
    uint64_t seed = 0;
    /// Uniform range of the initial weights and biases.
    double init_scale = 1.0;

    void validate() const {
        if (!(learning_rate > 0)) {
            throw Error(ErrorKind::BadConfig, "learning rate must be positive");
        }
        if (!(init_scale >= 0)) {
            throw Error(ErrorKind::BadConfig, "init scale must be non-negative");
        }
    }
};

struct SurrogateFit {
    QnnSpec spec;
    double initial_mse = 0;
    double mse = 0;
    size_t epochs = 0;
};

/// Full-batch gradient descent on the mse.
inline SurrogateFit surrogate_train(QnnSpec spec, const Eigen::MatrixXd &inputs, const Eigen::MatrixXd &targets,
                                    const GradientDescentConfig &cfg) {
    cfg.validate();
    SurrogateFit fit;
    fit.initial_mse = surrogate_mse(spec, inputs, targets);
    fit.mse = fit.initial_mse;
    for (size_t e = 0; e < cfg.epochs; e++) {
        if (fit.mse <= cfg.target_mse) {
            break;
        }
        auto g = surrogate_gradient(spec, inputs, targets);
        for (size_t l = 0; l < spec.weights.size(); l++) {
            spec.weights[l] -= cfg.learning_rate * g.weights[l];
            spec.biases[l] -= cfg.learning_rate * g.biases[l];
        }
        fit.mse = surrogate_mse(spec, inputs, targets);
        fit.epochs = e + 1;
        if (!std::isfinite(fit.mse)) {
            throw Error(ErrorKind::Diverged, "mse became non-finite at epoch " + std::to_string(e + 1));
        }
    }
    fit.spec = std::move(spec);
    return fit;
}

/// Samples of sin on [-pi, pi] mapped onto [0.1, 0.9].
inline std::pair<Eigen::MatrixXd, Eigen::MatrixXd> sine_demo_samples(size_t n = 64) {
    Eigen::MatrixXd x(1, static_cast<Eigen::Index>(n)), y(1, static_cast<Eigen::Index>(n));
    auto grid = linspace(-M_PI, M_PI, n);
    for (size_t i = 0; i < n; i++) {
        x(0, static_cast<Eigen::Index>(i)) = grid[i];
        y(0, static_cast<Eigen::Index>(i)) = 0.5 + 0.4 * std::sin(grid[i]);
    }
    return {x, y};
}

inline nlohmann::ordered_json qnn_spec_json(const QnnSpec &s) {
    nlohmann::ordered_json w = nlohmann::ordered_json::array(), b = nlohmann::ordered_json::array();
    for (size_t l = 0; l < s.weights.size(); l++) {
        std::vector<double> flat;
        for (Eigen::Index i = 0; i < s.weights[l].rows(); i++) {
            for (Eigen::Index j = 0; j < s.weights[l].cols(); j++) {
                flat.push_back(s.weights[l](i, j));
            }
        }
        w.push_back(flat);
        b.push_back(std::vector<double>(s.biases[l].data(), s.biases[l].data() + s.biases[l].size()));
    }
    return {{"kind", "qnw_qnn_spec"},
            {"layer_sizes", s.sizes},
            {"weights_row_major", w},
            {"biases", b},
            {"gate", {{"omega0", s.gate.omega0}, {"omegaf", s.gate.omegaf}, {"tf", s.gate.tf}}},
            {"max_qubits", s.max_qubits}};
}

inline QnnSpec qnn_spec_from_json(const nlohmann::ordered_json &j) {
    try {
        QnnSpec s = QnnSpec::zeros(j.at("layer_sizes").get<std::vector<size_t>>());
        const auto &w = j.at("weights_row_major");
        const auto &b = j.at("biases");
        if (w.size() != s.weights.size() || b.size() != s.weights.size()) {
            throw Error(ErrorKind::ShapeMismatch, "spec layer count does not match layer_sizes");
        }
        for (size_t l = 0; l < s.weights.size(); l++) {
            auto flat = w[l].get<std::vector<double>>();
            auto bias = b[l].get<std::vector<double>>();
            auto &W = s.weights[l];
            if (flat.size() != static_cast<size_t>(W.size()) || bias.size() != static_cast<size_t>(W.rows())) {
                throw Error(ErrorKind::ShapeMismatch, "spec layer " + std::to_string(l + 1) + " has the wrong size");
            }
            for (Eigen::Index i = 0; i < W.rows(); i++) {
                for (Eigen::Index k = 0; k < W.cols(); k++) {
                    W(i, k) = flat[static_cast<size_t>(i * W.cols() + k)];
                }
                s.biases[l][i] = bias[static_cast<size_t>(i)];
            }
        }
        if (j.contains("gate")) {
            const auto &g = j.at("gate");
            s.gate.omega0 = g.value("omega0", s.gate.omega0);
            s.gate.omegaf = g.value("omegaf", s.gate.omegaf);
            s.gate.tf = g.value("tf", s.gate.tf);
        }
        s.max_qubits = j.value("max_qubits", s.max_qubits);
        s.validate();
        return s;
    } catch (const nlohmann::ordered_json::exception &e) {
        throw Error(ErrorKind::IoError, std::string("malformed network spec: ") + e.what());
    }
}

}  // namespace qnw
