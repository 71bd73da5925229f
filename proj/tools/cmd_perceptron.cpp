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

#include "cli.hpp"
#include "qnw/util/grid.hpp"
#include "qnw/util/parallel.hpp"

namespace qnw::cli {

namespace {

json result_json(const ProtocolResult &r) {
    return {{"fidelity", r.fidelity},         {"p1", r.p1},
            {"target", r.target},             {"population_error", r.population_error},
            {"pulse_energy", r.pulse_energy}, {"norm_drift", r.norm_drift},
            {"steps", r.steps}};
}

struct DesignArgs {
    GateArgs g;
    double x = 1.0;
    std::string out;
};

void run_design(const DesignArgs &a) {
    const GateSettings s = gate_settings(a.g);
    auto d = design_sta_pulse(s.spec(a.x), s.sta);
    RunDir dir(a.out);
    dir.write("pulse.csv", pulse_to_csv(d));
    dir.write_json("pulse.json", pulse_sidecar(d, s.sta));
    json cfg = gate_json(s);
    cfg["x"] = a.x;
    dir.finish("perceptron design", cfg);
    std::cout << "pulse: " << d.pulse.times.size() << " samples, Omega " << fmt17(d.pulse.omega_start) << " -> "
              << fmt17(d.pulse.omega_end) << ", |beta(tf)| = " << fmt17(std::abs(d.beta_end)) << '\n';
}

struct EvolveArgs {
    GateArgs g;
    double x = 1.0;
    std::string protocol = "sta";
    std::string pulse;
    double duration = 0;
    std::string out;
};

void run_evolve(const EvolveArgs &a) {
    const GateSettings s = gate_settings(a.g);
    const Protocol protocol = parse_protocol(a.protocol);
    const double duration = a.duration > 0 ? a.duration : s.tf;
    ProtocolResult r;
    json cfg = gate_json(s);
    cfg["x"] = a.x;
    cfg["protocol"] = protocol_name(protocol);
    cfg["duration"] = duration;
    if (!a.pulse.empty()) {
        const std::string text = read_file(a.pulse);
        r = evolve_gate(pulse_from_csv(text), a.x, duration, s.gate);
        cfg["pulse"] = a.pulse;
        cfg["pulse_fnv1a64"] = hex64(fnv1a64(text));
    } else if (protocol == Protocol::Adiabatic) {
        r = evolve_gate(adiabatic_pulse(s.adiabatic_start(a.x), s.omegaf, s.tf), a.x, duration, s.gate);
        cfg["adiabatic_omega0_used"] = s.adiabatic_start(a.x);
    } else if (duration == s.tf) {
        r = run_protocol(protocol, a.x, s);
    } else {
        auto d = design_sta_pulse(s.spec(a.x), s.sta);
        r = evolve_gate(d.pulse, a.x, duration, s.gate);
    }
    RunDir dir(a.out);
    dir.write_json("result.json", result_json(r));
    dir.finish("perceptron evolve", cfg);
    std::cout << "fidelity = " << fmt17(r.fidelity) << ", P1 = " << fmt17(r.p1) << ", target = " << fmt17(r.target)
              << '\n';
}

struct CurveArgs {
    GateArgs g;
    std::string xs = "-5:5:41";
    std::string protocol = "sta";
    size_t workers = default_workers();
    std::string out;
};

void run_curve(const CurveArgs &a) {
    const GateSettings s = gate_settings(a.g);
    const Protocol protocol = parse_protocol(a.protocol);
    const Grid grid = parse_grid(a.xs);
    const auto xs = grid.points();
    auto curve = activation_curve(xs, protocol, s, a.workers);
    double worst = 0, min_fid = 1;
    size_t failures = 0;
    for (const auto &c : curve) {
        if (!c.error.empty()) {
            failures++;
            continue;
        }
        worst = std::max(worst, std::abs(c.p1 - c.target));
        min_fid = std::min(min_fid, c.fidelity);
    }
    RunDir dir(a.out);
    dir.write("curve.csv", curve_to_csv(curve));
    dir.write_json("curve.json", {{"kind", "activation_curve"},
                                  {"protocol", protocol_name(protocol)},
                                  {"points", curve.size()},
                                  {"failures", failures},
                                  {"max_abs_p1_minus_target", worst},
                                  {"min_fidelity", min_fid}});
    json cfg = gate_json(s);
    cfg["xs"] = {grid.lo, grid.hi, grid.count};
    cfg["protocol"] = protocol_name(protocol);
    dir.finish("perceptron curve", cfg);
    std::cout << "curve: " << curve.size() << " points, max |P1 - f| = " << fmt17(worst)
              << ", min fidelity = " << fmt17(min_fid) << ", failures = " << failures << '\n';
}

struct ScanArgs {
    GateArgs g;
    double x = 1.0;
    std::string eps = "-0.05:0.05:11";
    std::string dx = "-0.2:0.2:11";
    size_t workers = default_workers();
    std::string out = "scan";
};

void run_scan(const ScanArgs &a) {
    const GateSettings s = gate_settings(a.g);
    const auto eps = parse_grid(a.eps).points();
    const auto dx = parse_grid(a.dx).points();
    auto scan = robustness_scan(a.x, s, eps, dx, a.workers);
    RunDir dir(a.out);
    dir.write("scan.csv", scan_to_csv(scan));
    dir.write_json("scan.json", scan_metadata(scan));
    json cfg = gate_json(s);
    cfg["x"] = a.x;
    cfg["eps"] = a.eps;
    cfg["dx"] = a.dx;
    dir.finish("perceptron scan", cfg);
    std::cout << "scan: " << eps.size() << " x " << dx.size() << ", mean fidelity sta "
              << fmt17(RobustnessScan::mean(scan.sta)) << ", adiabatic " << fmt17(RobustnessScan::mean(scan.adiabatic))
              << '\n';
}

}  // namespace

void add_perceptron_commands(CLI::App &app) {
    auto *pc = app.add_subcommand("perceptron", "Single quantum perceptron gate");
    pc->require_subcommand(1);

    auto de = std::make_shared<DesignArgs>();
    auto *c = pc->add_subcommand("design", "Design the shortcut pulse for one input");
    add_gate_options(c, de->g);
    c->add_option("--x", de->x, "Input field x")->capture_default_str();
    c->add_option("--out", de->out, "Output directory")->required();
    c->callback([de] { run_design(*de); });

    auto ev = std::make_shared<EvolveArgs>();
    c = pc->add_subcommand("evolve", "Run one gate and score it against the ground state");
    add_gate_options(c, ev->g);
    c->add_option("--x", ev->x, "Input field x")->capture_default_str();
    c->add_option("--protocol", ev->protocol, "sta or adiabatic")->capture_default_str();
    c->add_option("--pulse", ev->pulse, "Pulse CSV with t and omega columns (overrides the protocol)");
    c->add_option("--duration", ev->duration, "Evolution time (default tf)");
    c->add_option("--out", ev->out, "Output directory")->required();
    c->callback([ev] { run_evolve(*ev); });

    auto cu = std::make_shared<CurveArgs>();
    c = pc->add_subcommand("curve", "Activation curve P1(x) against the sigmoid");
    add_gate_options(c, cu->g);
    c->add_option("--xs", cu->xs, "Input grid lo:hi:count")->capture_default_str();
    c->add_option("--protocol", cu->protocol, "sta or adiabatic")->capture_default_str();
    c->add_option("--workers", cu->workers, "Worker threads")->capture_default_str();
    c->add_option("--out", cu->out, "Output directory")->required();
    c->callback([cu] { run_curve(*cu); });

    auto sc = std::make_shared<ScanArgs>();
    c = pc->add_subcommand("scan", "Fidelity under timing errors and input shifts");
    add_gate_options(c, sc->g);
    c->add_option("--x", sc->x, "Nominal input x")->capture_default_str();
    c->add_option("--eps", sc->eps, "Relative timing error grid lo:hi:count")->capture_default_str();
    c->add_option("--dx", sc->dx, "Input shift grid lo:hi:count")->capture_default_str();
    c->add_option("--workers", sc->workers, "Worker threads")->capture_default_str();
    c->add_option("--out", sc->out, "Output directory")->capture_default_str();
    c->callback([sc] { run_scan(*sc); });
}

}  // namespace qnw::cli
