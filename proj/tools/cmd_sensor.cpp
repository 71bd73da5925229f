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
#include "qnw/profile.hpp"
#include "qnw/sensor/dataset.hpp"
#include "qnw/sensor/model.hpp"
#include "qnw/util/grid.hpp"
#include "qnw/util/parallel.hpp"

namespace qnw::cli {

namespace {

/// Fits t0 unless the user supplied one.
void ensure_t0(SensorParams &p) {
    if (p.t0_ms > 0) {
        return;
    }
    progress("fitting reference period");
    p.t0_ms = reference_period(p);
    progress("t0 = " + fmt17(p.t0_ms) + " ms");
}

struct SimulateArgs {
    SensorParams p;
    double omega_tg = 1.0;
    double xi = 0.0;
    double t_max = 0;
    size_t points = 401;
    std::string out;
};

void run_simulate(SimulateArgs a) {
    a.p.omega_tg_amp_khz = a.omega_tg;
    a.p.xi_khz = a.xi;
    a.p.validate();
    if (a.points < 2) {
        throw Error(ErrorKind::BadConfig, "--points must be at least 2");
    }
    if (!(a.t_max > 0)) {
        ensure_t0(a.p);
        a.t_max = a.p.t0_ms;
    }
    auto times = linspace(0.0, a.t_max, a.points);
    auto trace = simulate_response(a.p, times);
    std::ostringstream os;
    os << "t_ms,p_d,p_d_rwa\n";
    double worst = 0;
    for (size_t i = 0; i < times.size(); i++) {
        const double rwa = effective_pd(a.omega_tg, a.xi, times[i]);
        worst = std::max(worst, std::abs(trace.pd[i] - rwa));
        os << fmt17(times[i]) << ',' << fmt17(trace.pd[i]) << ',' << fmt17(rwa) << '\n';
    }
    RunDir dir(a.out);
    dir.write("trace.csv", os.str());
    json cfg = sensor_json(a.p);
    cfg["omega_tg_amp_khz"] = a.omega_tg;
    cfg["xi_khz"] = a.xi;
    cfg["t_max_ms"] = a.t_max;
    cfg["points"] = a.points;
    dir.finish("sensor simulate", cfg,
               {{"max_abs_deviation_from_rwa", worst}, {"norm_drift", trace.norm_drift}, {"steps", trace.steps}});
    std::cout << "trace: " << times.size() << " points, max |P_D - P_D^rwa| = " << fmt17(worst) << '\n';
}

struct DatasetArgs {
    SensorParams p;
    std::string profile = "paper";
    uint64_t seed = 0;
    std::string omega_grid, xi_grid;
    size_t reps = 0, points = 0, shots = 0;
    std::vector<double> fractions{0.70, 0.15, 0.15};
    size_t workers = default_workers();
    std::string out;
};

Split write_split(const fs::path &dataset, size_t rows, const std::vector<double> &f, uint64_t seed, RunDir *dir) {
    if (f.size() != 3) {
        throw Error(ErrorKind::BadConfig, "--fractions takes three values: train,validation,test");
    }
    const uint64_t split_seed = stage_seed(seed, SeedStage::Split);
    auto s = split_indices(rows, f[0], f[1], f[2], split_seed);
    const std::string text = split_json(s, split_seed).dump() + "\n";
    if (dir) {
        dir->write("split.json", text);
    } else {
        write_file(split_path_for(dataset), text);
    }
    return s;
}

void run_dataset(DatasetArgs a) {
    const Profile prof = profile_by_name(a.profile);
    DatasetSpec spec = prof.dataset_spec(a.seed);
    if (!a.omega_grid.empty()) {
        spec.omega_tg = parse_grid(a.omega_grid);
    }
    if (!a.xi_grid.empty()) {
        spec.xi = parse_grid(a.xi_grid);
    }
    if (a.reps) {
        spec.repetitions = a.reps;
    }
    if (a.points) {
        spec.n_points = a.points;
    }
    if (a.shots) {
        spec.n_shots = a.shots;
    }
    if (a.fractions.size() == 3) {
        spec.frac_train = a.fractions[0];
        spec.frac_validation = a.fractions[1];
        spec.frac_test = a.fractions[2];
    }
    spec.validate();
    a.p.validate();
    ensure_t0(a.p);
    progress("generating " + std::to_string(spec.rows()) + " rows (" + std::to_string(spec.omega_tg.count) + " x " +
             std::to_string(spec.xi.count) + " x " + std::to_string(spec.repetitions) + ")");
    size_t last = 0;
    auto d = generate_dataset(spec, a.p, a.workers, [&](size_t done, size_t total) {
        if (done * 10 / total != last) {
            last = done * 10 / total;
            progress("  " + std::to_string(done) + "/" + std::to_string(total) + " grid points");
        }
    });
    const std::string csv = dataset_to_csv(d);
    RunDir dir(a.out);
    dir.write("data.csv", csv);
    auto s = write_split(dir.path() / "data.csv", d.rows(), a.fractions, a.seed, &dir);
    json cfg = dataset_manifest(spec, a.p, csv);
    cfg["profile"] = prof.name;
    cfg["seed"] = a.seed;
    cfg["workers_note"] = "output is independent of the worker count";
    dir.finish("sensor dataset", cfg,
               {{"split", {{"seed", stage_seed(a.seed, SeedStage::Split)},
                           {"sizes", {s.train.size(), s.validation.size(), s.test.size()}}}}});
    std::cout << "dataset: " << d.rows() << " rows -> " << (dir.path() / "data.csv").string() << '\n';
}

struct SplitArgs {
    std::string dataset;
    std::vector<double> fractions{0.70, 0.15, 0.15};
    std::optional<uint64_t> seed;
};

void run_split(const SplitArgs &a) {
    const fs::path ds(a.dataset);
    if (!fs::exists(ds)) {
        throw Error(ErrorKind::IoError, "dataset not found: " + a.dataset);
    }
    const fs::path manifest_path = ds.parent_path() / "manifest.json";
    json manifest = fs::exists(manifest_path) ? read_json(manifest_path) : json::object();
    uint64_t seed = a.seed.value_or(0);
    if (!a.seed && manifest.contains("config") && manifest["config"].contains("seed")) {
        seed = manifest["config"]["seed"].get<uint64_t>();
    }
    auto d = load_dataset(ds);
    auto s = write_split(ds, d.rows(), a.fractions, seed, nullptr);
    const std::string text = read_file(split_path_for(ds));
    manifest["split"] = {{"seed", stage_seed(seed, SeedStage::Split)},
                         {"master_seed", seed},
                         {"fractions", a.fractions},
                         {"sizes", {s.train.size(), s.validation.size(), s.test.size()}},
                         {"fnv1a64", hex64(fnv1a64(text))}};
    write_file(manifest_path, manifest.dump(2) + "\n");
    std::cout << "split: " << s.train.size() << " / " << s.validation.size() << " / " << s.test.size() << '\n';
}

}  // namespace

void add_sensor_commands(CLI::App &app) {
    auto *sensor = app.add_subcommand("sensor", "Dressed-state sensor simulation and datasets");
    sensor->require_subcommand(1);

    auto sim = std::make_shared<SimulateArgs>();
    auto *c = sensor->add_subcommand("simulate", "Noiseless P_D(t) trace with the RWA oracle alongside");
    add_sensor_options(c, sim->p);
    c->add_option("--omega-tg", sim->omega_tg, "Target field amplitude (kHz)")->capture_default_str();
    c->add_option("--xi", sim->xi, "Detuning xi (kHz)")->capture_default_str();
    c->add_option("--t-max", sim->t_max, "End time in ms (default: t0)");
    c->add_option("--points", sim->points, "Time samples")->capture_default_str();
    c->add_option("--out", sim->out, "Output directory")->required();
    c->callback([sim] { run_simulate(*sim); });

    auto ds = std::make_shared<DatasetArgs>();
    c = sensor->add_subcommand("dataset", "Shot-noise dataset over the (omega_tg, xi) grid");
    add_sensor_options(c, ds->p);
    c->add_option("--profile", ds->profile, "paper (241x11x20) or small (61x11x5)")->capture_default_str();
    c->add_option("--seed", ds->seed, "Master seed")->capture_default_str();
    c->add_option("--omega-tg-grid", ds->omega_grid, "omega_tg grid lo:hi:count in kHz (overrides the profile)");
    c->add_option("--xi-grid", ds->xi_grid, "xi grid lo:hi:count in kHz (overrides the profile)");
    c->add_option("--reps", ds->reps, "Repetitions per grid point (overrides the profile)");
    c->add_option("--points", ds->points, "Feature count N_p (overrides the profile)");
    c->add_option("--shots", ds->shots, "Shots per feature N_m (overrides the profile)");
    c->add_option("--fractions", ds->fractions, "train,validation,test")->delimiter(',')->expected(3);
    c->add_option("--workers", ds->workers, "Worker threads")->capture_default_str();
    c->add_option("--out", ds->out, "Output directory")->required();
    c->callback([ds] { run_dataset(*ds); });

    auto sp = std::make_shared<SplitArgs>();
    c = sensor->add_subcommand("split", "Re-split a dataset; writes split.json next to it");
    c->add_option("--dataset", sp->dataset, "Dataset CSV")->required();
    c->add_option("--fractions", sp->fractions, "train,validation,test")->delimiter(',')->expected(3);
    c->add_option("--seed", sp->seed, "Master seed (default: the dataset's)");
    c->callback([sp] { run_split(*sp); });
}

}  // namespace qnw::cli
