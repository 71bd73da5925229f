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

#include <string>
#include <vector>

#include "json.hpp"
#include "qnw/mlp/metrics.hpp"
#include "qnw/mlp/network.hpp"
#include "qnw/mlp/train.hpp"
#include "qnw/sensor/dataset.hpp"
#include "qnw/util/grid.hpp"
#include "qnw/version.hpp"

namespace qnw {

inline const std::vector<std::string> &target_names() {
    static const std::vector<std::string> names{"omega_tg", "xi"};
    return names;
}

/// Rows of `index` whose omega_tg lies in the closed interval.
inline std::vector<size_t> filter_interval(const Dataset &d, const std::vector<size_t> &index, const Interval &iv) {
    std::vector<size_t> out;
    for (size_t i : index) {
        if (i >= d.rows()) {
            throw Error(ErrorKind::ShapeMismatch, "split index " + std::to_string(i) + " is past the dataset end");
        }
        if (iv.contains(d.omega_tg_khz[i])) {
            out.push_back(i);
        }
    }
    return out;
}

struct NnRun {
    Interval interval;
    Model model;
    TrainConfig config;
    TrainReport report;
    Metrics test;
    size_t n_train = 0;
    size_t n_validation = 0;
    size_t n_test = 0;
};

/// Accuracy guards: half the grid spacing of each target in the dataset.
inline std::vector<double> accuracy_guards(const Dataset &d) {
    return {half_grid_spacing(d.omega_tg_khz), half_grid_spacing(d.xi_khz)};
}

inline Metrics evaluate_model(const Model &m, const Dataset &d, const std::vector<size_t> &rows) {
    if (rows.empty()) {
        throw Error(ErrorKind::InvalidArgument, "no rows to evaluate");
    }
    Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), d.features.cols());
    Eigen::MatrixXd a(static_cast<Eigen::Index>(rows.size()), 2);
    const Eigen::MatrixXd all = d.targets();
    for (size_t k = 0; k < rows.size(); k++) {
        x.row(static_cast<Eigen::Index>(k)) = d.features.row(static_cast<Eigen::Index>(rows[k]));
        a.row(static_cast<Eigen::Index>(k)) = all.row(static_cast<Eigen::Index>(rows[k]));
    }
    return evaluate(m.predict(x), a, accuracy_guards(d));
}

/// Trains one fresh network on the rows of `split` inside `interval`.
/// Feature and target maps come from the training rows only; weights are
/// seeded from the WeightInit stage of cfg.seed.
inline NnRun train_interval(const Dataset &d, const Split &split, const Interval &interval, const TrainConfig &cfg,
                            std::vector<size_t> sizes = default_layer_sizes(), const EpochCallback &on_epoch = {}) {
    NnRun run;
    run.interval = interval;
    run.config = cfg;
    const auto train = filter_interval(d, split.train, interval);
    const auto val = filter_interval(d, split.validation, interval);
    const auto test = filter_interval(d, split.test, interval);
    if (train.empty() || test.empty()) {
        throw Error(ErrorKind::InvalidArgument, "interval leaves no training or test rows");
    }
    if (sizes.front() != d.n_points() || sizes.back() != 2) {
        throw Error(ErrorKind::ShapeMismatch, "network needs " + std::to_string(d.n_points()) + " inputs and 2 outputs");
    }
    run.n_train = train.size();
    run.n_validation = val.size();
    run.n_test = test.size();
    const Eigen::MatrixXd targets = d.targets();
    run.model.features = AffineMap::fit(d.features, train);
    run.model.targets = AffineMap::fit(targets, train);
    TrainingSet ts{run.model.features.columns(d.features, train), run.model.targets.columns(targets, train)};
    TrainingSet vs;
    if (!val.empty()) {
        vs = {run.model.features.columns(d.features, val), run.model.targets.columns(targets, val)};
    }
    auto net = Network::xavier(std::move(sizes), stage_seed(cfg.seed, SeedStage::WeightInit));
    auto result = train_lm(std::move(net), ts, vs, cfg, on_epoch);
    run.model.net = std::move(result.net);
    run.report = std::move(result.report);
    run.test = evaluate_model(run.model, d, test);
    return run;
}

inline nlohmann::ordered_json train_config_json(const TrainConfig &c) {
    return {{"mu0", c.mu0},
            {"mu0_meaning", "initial Levenberg-Marquardt damping (the learning-rate slot)"},
            {"mu_up", c.mu_up},
            {"mu_down", c.mu_down},
            {"mu_max", c.mu_max},
            {"max_epochs", c.max_epochs},
            {"max_validation_failures", c.max_validation_failures},
            {"min_gradient", c.min_gradient},
            {"seed", c.seed},
            {"block", c.block}};
}

inline nlohmann::ordered_json affine_json(const AffineMap &m) {
    return {{"lo", m.lo}, {"hi", m.hi}};
}

inline AffineMap affine_from_json(const nlohmann::ordered_json &j) {
    AffineMap m{j.at("lo").get<std::vector<double>>(), j.at("hi").get<std::vector<double>>()};
    if (m.lo.size() != m.hi.size()) {
        throw Error(ErrorKind::ShapeMismatch, "normalization lo/hi lengths differ");
    }
    return m;
}

inline nlohmann::ordered_json metrics_json(const Metrics &m) {
    nlohmann::ordered_json outs = nlohmann::ordered_json::array();
    for (size_t k = 0; k < m.outputs.size(); k++) {
        const auto &o = m.outputs[k];
        auto opt = [](const std::optional<double> &v) {
            return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
        };
        auto num = [](double v) {
            return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr);
        };
        outs.push_back({{"output", k < target_names().size() ? target_names()[k] : std::to_string(k)},
                        {"R", opt(o.r)},
                        {"alpha", opt(o.alpha)},
                        {"b_fit", opt(o.b_fit)},
                        {"F_raw", num(o.f_raw)},
                        {"F_guarded", num(o.f_guarded)},
                        {"eps_a", o.eps_a},
                        {"mse", o.mse}});
    }
    return {{"samples", m.samples}, {"mse", m.mse}, {"outputs", outs}};
}

/// Checkpoint: sizes, row-major weights, biases, maps, config, seed, version.
inline nlohmann::ordered_json checkpoint_json(const NnRun &run) {
    const Network &n = run.model.net;
    nlohmann::ordered_json w = nlohmann::ordered_json::array(), b = nlohmann::ordered_json::array();
    for (size_t l = 0; l < n.layers(); l++) {
        std::vector<double> flat;
        for (Eigen::Index i = 0; i < n.weights[l].rows(); i++) {
            for (Eigen::Index j = 0; j < n.weights[l].cols(); j++) {
                flat.push_back(n.weights[l](i, j));
            }
        }
        w.push_back(flat);
        b.push_back(std::vector<double>(n.biases[l].data(), n.biases[l].data() + n.biases[l].size()));
    }
    return {{"kind", "qnw_mlp_checkpoint"},
            {"code_version", kVersion},
            {"layer_sizes", n.sizes},
            {"hidden_activation", "tanh"},
            {"output_activation", "identity"},
            {"weights_row_major", w},
            {"biases", b},
            {"feature_map", affine_json(run.model.features)},
            {"target_map", affine_json(run.model.targets)},
            {"interval", {run.interval.lo, run.interval.hi}},
            {"config", train_config_json(run.config)},
            {"seed", run.config.seed},
            {"weight_init_seed", stage_seed(run.config.seed, SeedStage::WeightInit)}};
}

inline Model model_from_checkpoint(const nlohmann::ordered_json &j) {
    try {
        Model m;
        m.net = Network::zeros(j.at("layer_sizes").get<std::vector<size_t>>());
        const auto &w = j.at("weights_row_major");
        const auto &b = j.at("biases");
        if (w.size() != m.net.layers() || b.size() != m.net.layers()) {
            throw Error(ErrorKind::ShapeMismatch, "checkpoint layer count does not match layer_sizes");
        }
        for (size_t l = 0; l < m.net.layers(); l++) {
            auto flat = w[l].get<std::vector<double>>();
            auto bias = b[l].get<std::vector<double>>();
            auto &W = m.net.weights[l];
            if (flat.size() != static_cast<size_t>(W.size()) || bias.size() != static_cast<size_t>(W.rows())) {
                throw Error(ErrorKind::ShapeMismatch, "checkpoint layer " + std::to_string(l + 1) + " has the wrong size");
            }
            for (Eigen::Index i = 0; i < W.rows(); i++) {
                for (Eigen::Index k = 0; k < W.cols(); k++) {
                    W(i, k) = flat[static_cast<size_t>(i * W.cols() + k)];
                }
                m.net.biases[l][i] = bias[static_cast<size_t>(i)];
            }
        }
        m.features = affine_from_json(j.at("feature_map"));
        m.targets = affine_from_json(j.at("target_map"));
        if (m.features.size() != m.net.inputs() || m.targets.size() != m.net.outputs()) {
            throw Error(ErrorKind::ShapeMismatch, "checkpoint normalization does not match the network");
        }
        return m;
    } catch (const nlohmann::ordered_json::exception &e) {
        throw Error(ErrorKind::IoError, std::string("malformed checkpoint: ") + e.what());
    }
}

/// Training report without wall time, so it is reproducible byte for byte.
inline nlohmann::ordered_json train_report_json(const NnRun &run) {
    nlohmann::ordered_json epochs = nlohmann::ordered_json::array();
    auto num = [](double v) { return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr); };
    for (const auto &e : run.report.epochs) {
        epochs.push_back({{"epoch", e.epoch},
                          {"mse_train", e.mse_train},
                          {"mse_validation", num(e.mse_validation)},
                          {"mu", e.mu},
                          {"gradient_norm", e.gradient_norm},
                          {"rejected_steps", e.rejected}});
    }
    return {{"kind", "qnw_train_report"},
            {"interval", {run.interval.lo, run.interval.hi}},
            {"rows", {{"train", run.n_train}, {"validation", run.n_validation}, {"test", run.n_test}}},
            {"config", train_config_json(run.config)},
            {"initial_mse", run.report.initial_mse},
            {"stop_reason", run.report.stop_reason},
            {"best_epoch", run.report.best_epoch},
            {"best_validation_mse", num(run.report.best_validation_mse)},
            {"epochs", epochs},
            {"test_metrics", metrics_json(run.test)}};
}

}  // namespace qnw
