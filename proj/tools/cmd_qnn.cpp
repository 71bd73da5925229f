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

#include <memory>
#include <sstream>

#include "cli.hpp"
#include "qnw/qnn/quantum.hpp"
#include "qnw/qnn/surrogate.hpp"

namespace qnw::cli {

namespace {

struct TrainArgs {
    size_t hidden = 8;
    size_t samples = 64;
    GradientDescentConfig gd;
    std::string out;
};

void run_train(const TrainArgs &a) {
    if (a.hidden == 0 || a.samples < 2) {
        throw Error(ErrorKind::BadConfig, "--hidden must be positive and --samples at least 2");
    }
    auto [x, y] = sine_demo_samples(a.samples);
    const uint64_t init_seed = stage_seed(a.gd.seed, SeedStage::Qnn);
    auto init = QnnSpec::random({1, a.hidden, 1}, init_seed, a.gd.init_scale);
    progress("gradient descent on the sine demo, " + std::to_string(a.gd.epochs) + " epochs");
    auto fit = surrogate_train(init, x, y, a.gd);
    auto pass = surrogate_forward(fit.spec, x);
    std::ostringstream os;
    os << "x,target,prediction\n";
    for (Eigen::Index i = 0; i < x.cols(); i++) {
        os << fmt17(x(0, i)) << ',' << fmt17(y(0, i)) << ',' << fmt17(pass.output()(0, i)) << '\n';
    }
    RunDir dir(a.out);
    dir.write_json("qnn_spec.json", qnn_spec_json(fit.spec));
    dir.write_json("fit.json", {{"kind", "qnn_surrogate_fit"},
                                {"task", "sine demo: 0.5 + 0.4 sin(x) on [-pi, pi]"},
                                {"initial_mse", fit.initial_mse},
                                {"mse", fit.mse},
                                {"epochs", fit.epochs}});
    dir.write("fit.csv", os.str());
    dir.finish("qnn train",
               {{"hidden", a.hidden},
                {"samples", a.samples},
                {"learning_rate", a.gd.learning_rate},
                {"epochs", a.gd.epochs},
                {"target_mse", a.gd.target_mse},
                {"init_scale", a.gd.init_scale},
                {"seed", a.gd.seed}},
               {{"qnn_init_seed", init_seed}});
    std::cout << "mse " << fmt17(fit.initial_mse) << " -> " << fmt17(fit.mse) << " after " << fit.epochs
              << " epochs\n";
}

struct VerifyArgs {
    std::string spec;
    std::string layers;
    uint64_t seed = 0;
    double scale = 1.0;
    size_t max_qubits = 12;
    std::string out;
};

void run_verify(const VerifyArgs &a) {
    QnnSpec spec;
    json cfg;
    if (!a.spec.empty()) {
        const std::string text = read_file(a.spec);
        try {
            spec = qnn_spec_from_json(json::parse(text));
        } catch (const json::exception &e) {
            throw Error(ErrorKind::IoError, a.spec + ": " + e.what());
        }
        cfg["spec"] = a.spec;
        cfg["spec_fnv1a64"] = hex64(fnv1a64(text));
    } else if (!a.layers.empty()) {
        spec = QnnSpec::random(parse_sizes(a.layers, "--layers"), stage_seed(a.seed, SeedStage::Qnn), a.scale);
        cfg["layers"] = parse_sizes(a.layers, "--layers");
        cfg["seed"] = a.seed;
        cfg["scale"] = a.scale;
    } else {
        throw Error(ErrorKind::BadConfig, "give --spec or --layers");
    }
    spec.max_qubits = a.max_qubits;
    cfg["max_qubits"] = a.max_qubits;
    auto rows = consistency_check(spec);
    double worst = 0;
    for (const auto &r : rows) {
        worst = std::max(worst, std::abs(r.delta()));
    }
    RunDir dir(a.out);
    dir.write("consistency.csv", consistency_to_csv(rows, spec.outputs()));
    dir.write_json("verify.json", {{"kind", "qnn_consistency"},
                                   {"qubits", spec.qubits()},
                                   {"patterns", size_t{1} << spec.inputs()},
                                   {"rows", rows.size()},
                                   {"max_abs_delta", worst},
                                   {"spec", qnn_spec_json(spec)}});
    dir.finish("qnn verify", cfg);
    std::cout << rows.size() << " rows on " << spec.qubits() << " qubits, max |p_quantum - f_surrogate| = "
              << fmt17(worst) << '\n';
}

}  // namespace

void add_qnn_commands(CLI::App &app) {
    auto *qnn = app.add_subcommand("qnn", "Feed-forward network of quantum perceptrons");
    qnn->require_subcommand(1);

    auto tr = std::make_shared<TrainArgs>();
    auto *c = qnn->add_subcommand("train", "Surrogate gradient descent on the sine demo");
    c->add_option("--hidden", tr->hidden, "Hidden neurons")->capture_default_str();
    c->add_option("--samples", tr->samples, "Training samples")->capture_default_str();
    c->add_option("--lr", tr->gd.learning_rate, "Learning rate")->capture_default_str();
    c->add_option("--epochs", tr->gd.epochs, "Epochs")->capture_default_str();
    c->add_option("--target-mse", tr->gd.target_mse, "Stop once the mse reaches this value")->capture_default_str();
    c->add_option("--seed", tr->gd.seed, "Master seed")->capture_default_str();
    c->add_option("--init-scale", tr->gd.init_scale, "Uniform init range")->capture_default_str();
    c->add_option("--out", tr->out, "Output directory")->required();
    c->callback([tr] { run_train(*tr); });

    auto ve = std::make_shared<VerifyArgs>();
    c = qnn->add_subcommand("verify", "Quantum register against the surrogate on every basis input");
    c->add_option("--spec", ve->spec, "qnn_spec.json");
    c->add_option("--layers", ve->layers, "Random network layer sizes, e.g. 2,2,1");
    c->add_option("--seed", ve->seed, "Master seed for a random network")->capture_default_str();
    c->add_option("--scale", ve->scale, "Uniform range of random weights")->capture_default_str();
    c->add_option("--max-qubits", ve->max_qubits, "Register size limit")->capture_default_str();
    c->add_option("--out", ve->out, "Output directory")->required();
    c->callback([ve] { run_verify(*ve); });
}

}  // namespace qnw::cli
