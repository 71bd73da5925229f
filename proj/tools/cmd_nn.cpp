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

#include <cstdio>
#include <memory>
#include <sstream>

#include "cli.hpp"
#include "qnw/mlp/pipeline.hpp"
#include "qnw/profile.hpp"

namespace qnw::cli {

namespace {

std::string interval_tag(const Interval &iv) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "nn_%g_%g", iv.lo, iv.hi);
    return buf;
}

Split load_split(const fs::path &dataset) {
    const fs::path sp = split_path_for(dataset);
    if (!fs::exists(sp)) {
        throw Error(ErrorKind::MissingRun, "no split.json next to " + dataset.string() + "; run `qnw sensor split`");
    }
    return split_from_json(read_json(sp));
}

struct TrainArgs {
    std::string dataset;
    std::string interval = "8.2:25";
    std::string profile = "paper";
    TrainConfig cfg;
    std::string hidden = "40,20,12,6,3";
    std::string out;
    CLI::Option *max_epochs = nullptr;
};

void run_train(TrainArgs a) {
    const Profile prof = profile_by_name(a.profile);
    if (a.max_epochs->count() == 0) {
        a.cfg.max_epochs = prof.max_epochs;
    }
    const Interval iv = parse_interval(a.interval);
    const fs::path ds(a.dataset);
    auto d = load_dataset(ds);
    auto split = load_split(ds);
    const auto hidden = parse_sizes(a.hidden, "--hidden");
    std::vector<size_t> sizes{d.n_points()};
    sizes.insert(sizes.end(), hidden.begin(), hidden.end());
    sizes.push_back(2);
    const fs::path out = a.out.empty() ? ds.parent_path() / interval_tag(iv) : fs::path(a.out);
    progress("training [" + fmt17(iv.lo) + ", " + fmt17(iv.hi) + "] kHz, " + std::to_string(sizes.size() - 2) +
             " hidden layers, up to " + std::to_string(a.cfg.max_epochs) + " epochs");
    auto run = train_interval(d, split, iv, a.cfg, sizes, [](const EpochRecord &e) {
        char buf[160];
        std::snprintf(buf, sizeof(buf), "  epoch %4zu  mse %.4e  val %.4e  mu %.1e", e.epoch, e.mse_train,
                      e.mse_validation, e.mu);
        progress(buf);
    });
    RunDir dir(out);
    dir.write_json("checkpoint.json", checkpoint_json(run));
    dir.write_json("train_report.json", train_report_json(run));
    dir.write("metrics.csv", metrics_csv_header() + metrics_csv_rows(iv.lo, iv.hi, run.test, target_names()));
    // Wall time lives in its own file so the other outputs stay reproducible.
    write_file(dir.path() / "timing.json",
               json{{"wall_seconds", run.report.wall_seconds}, {"epochs", run.report.epochs.size()}}.dump(2) + "\n");
    json cfg = train_config_json(a.cfg);
    cfg["dataset"] = a.dataset;
    cfg["dataset_fnv1a64"] = hex64(fnv1a64(read_file(ds)));
    cfg["interval"] = {iv.lo, iv.hi};
    cfg["profile"] = prof.name;
    cfg["layer_sizes"] = sizes;
    dir.finish("nn train", cfg,
               {{"weight_init_seed", stage_seed(a.cfg.seed, SeedStage::WeightInit)},
                {"stop_reason", run.report.stop_reason},
                {"excluded_from_hashing", "timing.json"}});
    const auto &o = run.test.outputs[0];
    std::cout << "test R(omega_tg) = " << (o.r ? fmt17(*o.r) : "absent") << ", F(omega_tg) = " << fmt17(o.f_guarded)
              << ", stop: " << run.report.stop_reason << " -> " << out.string() << '\n';
}

struct EvalArgs {
    std::string checkpoint;
    std::string dataset;
    std::string rows = "test";
    std::string interval;
    std::string out;
};

void run_eval(const EvalArgs &a) {
    const json ck = read_json(a.checkpoint);
    const Model m = model_from_checkpoint(ck);
    const fs::path ds(a.dataset);
    auto d = load_dataset(ds);
    std::vector<size_t> rows;
    if (a.rows == "all") {
        rows.resize(d.rows());
        for (size_t i = 0; i < rows.size(); i++) {
            rows[i] = i;
        }
    } else {
        auto s = load_split(ds);
        if (a.rows == "test") {
            rows = s.test;
        } else if (a.rows == "validation") {
            rows = s.validation;
        } else if (a.rows == "train") {
            rows = s.train;
        } else {
            throw Error(ErrorKind::BadConfig, "--rows must be test, validation, train or all");
        }
    }
    Interval iv{-1e300, 1e300};
    if (!a.interval.empty()) {
        iv = parse_interval(a.interval);
    } else if (ck.contains("interval")) {
        iv = Interval{ck["interval"][0].get<double>(), ck["interval"][1].get<double>()};
    }
    rows = filter_interval(d, rows, iv);
    auto metrics = evaluate_model(m, d, rows);

    Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), d.features.cols());
    for (size_t k = 0; k < rows.size(); k++) {
        x.row(static_cast<Eigen::Index>(k)) = d.features.row(static_cast<Eigen::Index>(rows[k]));
    }
    const Eigen::MatrixXd y = m.predict(x);
    std::ostringstream os;
    os << "row,omega_tg_khz,xi_khz,pred_omega_tg_khz,pred_xi_khz\n";
    for (size_t k = 0; k < rows.size(); k++) {
        const auto i = static_cast<Eigen::Index>(k);
        os << rows[k] << ',' << fmt17(d.omega_tg_khz[rows[k]]) << ',' << fmt17(d.xi_khz[rows[k]]) << ','
           << fmt17(y(i, 0)) << ',' << fmt17(y(i, 1)) << '\n';
    }
    RunDir dir(a.out);
    dir.write("metrics.csv", metrics_csv_header() + metrics_csv_rows(iv.lo, iv.hi, metrics, target_names()));
    dir.write("predictions.csv", os.str());
    dir.write_json("metrics.json", metrics_json(metrics));
    dir.finish("nn eval", {{"checkpoint", a.checkpoint},
                           {"checkpoint_fnv1a64", hex64(fnv1a64(read_file(a.checkpoint)))},
                           {"dataset", a.dataset},
                           {"rows", a.rows},
                           {"interval", {iv.lo, iv.hi}}});
    const auto &o = metrics.outputs[0];
    std::cout << rows.size() << " rows, R(omega_tg) = " << (o.r ? fmt17(*o.r) : "absent")
              << ", F(omega_tg) = " << fmt17(o.f_guarded) << '\n';
}

}  // namespace

void add_nn_commands(CLI::App &app) {
    auto *nn = app.add_subcommand("nn", "Neural-network estimator of (omega_tg, xi)");
    nn->require_subcommand(1);

    auto tr = std::make_shared<TrainArgs>();
    auto *c = nn->add_subcommand("train", "Levenberg-Marquardt training on one omega_tg interval");
    c->add_option("--dataset", tr->dataset, "Dataset CSV (split.json must sit next to it)")->required();
    c->add_option("--interval", tr->interval, "omega_tg interval lo:hi in kHz")->capture_default_str();
    c->add_option("--seed", tr->cfg.seed, "Master seed for weight init")->capture_default_str();
    c->add_option("--profile", tr->profile, "paper or small; sets the epoch cap")->capture_default_str();
    tr->max_epochs = c->add_option("--max-epochs", tr->cfg.max_epochs, "Epoch cap (default from the profile)");
    c->add_option("--mu0", tr->cfg.mu0, "Initial damping")->capture_default_str();
    c->add_option("--mu-up", tr->cfg.mu_up, "Damping increase factor")->capture_default_str();
    c->add_option("--mu-down", tr->cfg.mu_down, "Damping decrease factor")->capture_default_str();
    c->add_option("--mu-max", tr->cfg.mu_max, "Damping ceiling")->capture_default_str();
    c->add_option("--max-fail", tr->cfg.max_validation_failures, "Validation failures before stopping")
        ->capture_default_str();
    c->add_option("--min-grad", tr->cfg.min_gradient, "Gradient-norm stop")->capture_default_str();
    c->add_option("--block", tr->cfg.block, "Samples per Jacobian block")->capture_default_str();
    c->add_option("--hidden", tr->hidden, "Hidden layer sizes")->capture_default_str();
    c->add_option("--out", tr->out, "Output directory (default: next to the dataset)");
    c->callback([tr] { run_train(*tr); });

    auto ev = std::make_shared<EvalArgs>();
    c = nn->add_subcommand("eval", "Metrics of a checkpoint on dataset rows");
    c->add_option("--checkpoint", ev->checkpoint, "checkpoint.json")->required();
    c->add_option("--dataset", ev->dataset, "Dataset CSV")->required();
    c->add_option("--rows", ev->rows, "test, validation, train or all")->capture_default_str();
    c->add_option("--interval", ev->interval, "omega_tg interval lo:hi (default: the checkpoint's)");
    c->add_option("--out", ev->out, "Output directory")->required();
    c->callback([ev] { run_eval(*ev); });
}

}  // namespace qnw::cli
