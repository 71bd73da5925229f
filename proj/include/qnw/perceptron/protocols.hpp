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

#include <cmath>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "qnw/perceptron/sta.hpp"
#include "qnw/util/io.hpp"
#include "qnw/util/parallel.hpp"

namespace qnw {

enum class RampShape {
    Linear,
};

/// Default starting field of the adiabatic reference: 10 max(|x|, omegaf).
inline double default_adiabatic_omega0(double x, double omegaf) {
    return 10.0 * std::max(std::abs(x), omegaf);
}

inline PulseProfile adiabatic_pulse(double omega0, double omegaf, double tf, RampShape shape = RampShape::Linear,
                                    size_t samples = 601) {
    if (!(tf > 0) || !(omegaf > 0) || !(omega0 > 0)) {
        throw Error(ErrorKind::InvalidArgument, "adiabatic ramp needs positive omega0, omegaf and tf");
    }
    (void)shape;
    PulseProfile p;
    p.tf = tf;
    p.omega_start = omega0;
    p.omega_end = omegaf;
    p.shape = [omega0, omegaf, tf](double t) { return omega0 + (omegaf - omega0) * (t / tf); };
    p.times = linspace(0.0, tf, std::max<size_t>(samples, 2));
    for (double t : p.times) {
        p.omega.push_back(p.shape(t));
    }
    return p;
}

/// |+> is prepared at the boosted field omega0, which is then ramped to
/// omegaf over tf.
inline ProtocolResult adiabatic_reference(double x, double omega0, double omegaf, double tf,
                                          RampShape shape = RampShape::Linear, const GateOptions &opt = {}) {
    auto pulse = adiabatic_pulse(omega0, omegaf, tf, shape);
    return evolve_gate(pulse, x, tf, opt);
}

enum class Protocol {
    Sta,
    Adiabatic,
};

inline std::string protocol_name(Protocol p) {
    return p == Protocol::Sta ? "sta" : "adiabatic";
}

inline Protocol parse_protocol(const std::string &s) {
    if (s == "sta") {
        return Protocol::Sta;
    }
    if (s == "adiabatic") {
        return Protocol::Adiabatic;
    }
    throw Error(ErrorKind::BadConfig, "protocol must be sta or adiabatic, got '" + s + "'");
}

/// Shared gate settings for curves and scans. A missing adiabatic omega0
/// falls back to default_adiabatic_omega0.
struct GateSettings {
    double omega0 = 1.0;
    double omegaf = 1.0;
    double tf = 3.0;
    std::optional<double> adiabatic_omega0;
    StaOptions sta;
    GateOptions gate;

    double adiabatic_start(double x) const {
        return adiabatic_omega0.value_or(default_adiabatic_omega0(x, omegaf));
    }
    PerceptronSpec spec(double x) const {
        return PerceptronSpec{x, omega0, omegaf, tf};
    }
};

/// Designs (for STA) and runs one gate at input x.
inline ProtocolResult run_protocol(Protocol protocol, double x, const GateSettings &s) {
    if (protocol == Protocol::Adiabatic) {
        return adiabatic_reference(x, s.adiabatic_start(x), s.omegaf, s.tf, RampShape::Linear, s.gate);
    }
    auto design = design_sta_pulse(s.spec(x), s.sta);
    if (design.identity) {
        ProtocolResult r = score_gate(plus_state(), x, s.omegaf);
        r.pulse_energy = design.pulse.energy();
        return r;
    }
    return evolve_gate(design.pulse, x, s.tf, s.gate);
}

struct CurvePoint {
    double x = 0;
    double p1 = 0;
    double target = 0;
    double fidelity = 0;
    /// Empty on success, otherwise the error of this point.
    std::string error;
};

inline std::vector<CurvePoint> activation_curve(std::span<const double> xs, Protocol protocol, const GateSettings &s,
                                                size_t workers = default_workers()) {
    std::vector<CurvePoint> out(xs.size());
    parallel_for(xs.size(), workers, [&](size_t i) {
        CurvePoint &c = out[i];
        c.x = xs[i];
        c.target = sigmoid(xs[i] / s.omegaf);
        try {
            auto r = run_protocol(protocol, xs[i], s);
            c.p1 = r.p1;
            c.fidelity = r.fidelity;
        } catch (const Error &e) {
            c.p1 = std::nan("");
            c.fidelity = std::nan("");
            c.error = std::string(error_kind_name(e.kind())) + ": " + e.what();
        }
    });
    return out;
}

inline std::string curve_to_csv(const std::vector<CurvePoint> &curve) {
    std::ostringstream os;
    os << "x,p1,target,fidelity,error\n";
    for (const auto &c : curve) {
        os << fmt17(c.x) << ',' << fmt17(c.p1) << ',' << fmt17(c.target) << ',' << fmt17(c.fidelity) << ','
           << c.error << '\n';
    }
    return os.str();
}

/// Fidelity matrices indexed [eps][dx].
struct RobustnessScan {
    std::vector<double> eps;
    std::vector<double> dx;
    std::vector<std::vector<double>> sta;
    std::vector<std::vector<double>> adiabatic;
    double x = 0;
    GateSettings settings;

    static double mean(const std::vector<std::vector<double>> &m) {
        double acc = 0;
        size_t n = 0;
        for (const auto &row : m) {
            for (double v : row) {
                acc += v;
                n++;
            }
        }
        return n ? acc / static_cast<double>(n) : std::nan("");
    }
};

/// Each nominal pulse (designed for x) is run for tf (1 + eps) under the
/// shifted input x + dx, holding its final value omegaf past tf, and is
/// scored against the target of x + dx.
inline RobustnessScan robustness_scan(double x, const GateSettings &s, std::span<const double> eps,
                                      std::span<const double> dx, size_t workers = default_workers()) {
    for (double e : eps) {
        if (!(1.0 + e > 0)) {
            throw Error(ErrorKind::InvalidArgument, "timing error must keep tf (1 + eps) positive");
        }
    }
    RobustnessScan scan;
    scan.x = x;
    scan.settings = s;
    scan.eps.assign(eps.begin(), eps.end());
    scan.dx.assign(dx.begin(), dx.end());
    auto design = design_sta_pulse(s.spec(x), s.sta);
    auto ramp = adiabatic_pulse(s.adiabatic_start(x), s.omegaf, s.tf);
    const size_t ne = eps.size(), nd = dx.size();
    scan.sta.assign(ne, std::vector<double>(nd));
    scan.adiabatic.assign(ne, std::vector<double>(nd));
    parallel_for(ne * nd, workers, [&](size_t k) {
        const size_t i = k / nd, j = k % nd;
        const double duration = s.tf * (1.0 + eps[i]);
        const double xa = x + dx[j];
        scan.sta[i][j] = evolve_gate(design.pulse, xa, duration, s.gate).fidelity;
        scan.adiabatic[i][j] = evolve_gate(ramp, xa, duration, s.gate).fidelity;
    });
    return scan;
}

inline std::string scan_to_csv(const RobustnessScan &scan) {
    std::ostringstream os;
    os << "eps,dx,fidelity_sta,fidelity_adiabatic\n";
    for (size_t i = 0; i < scan.eps.size(); i++) {
        for (size_t j = 0; j < scan.dx.size(); j++) {
            os << fmt17(scan.eps[i]) << ',' << fmt17(scan.dx[j]) << ',' << fmt17(scan.sta[i][j]) << ','
               << fmt17(scan.adiabatic[i][j]) << '\n';
        }
    }
    return os.str();
}

inline nlohmann::ordered_json perceptron_spec_json(const PerceptronSpec &s) {
    return {{"x", s.x}, {"omega0", s.omega0}, {"omegaf", s.omegaf}, {"tf", s.tf}};
}

inline nlohmann::ordered_json scan_metadata(const RobustnessScan &scan) {
    const auto &s = scan.settings;
    return {
        {"kind", "robustness_scan"},
        {"spec", perceptron_spec_json(s.spec(scan.x))},
        {"adiabatic_omega0", s.adiabatic_start(scan.x)},
        {"adiabatic_ramp", "linear"},
        {"timing_error", "pulse truncated or extended to tf*(1+eps); omega held at omegaf past tf"},
        {"input_shift", "evolved under x+dx, scored against the target of x+dx"},
        {"mean_fidelity_sta", RobustnessScan::mean(scan.sta)},
        {"mean_fidelity_adiabatic", RobustnessScan::mean(scan.adiabatic)},
    };
}

/// Pulse file: `t,theta,beta,omega` on the design grid.
inline std::string pulse_to_csv(const StaDesign &d) {
    std::ostringstream os;
    os << "t,theta,beta,omega\n";
    const auto &tr = d.trajectory;
    for (size_t i = 0; i < tr.times.size(); i++) {
        os << fmt17(tr.times[i]) << ',' << fmt17(tr.theta[i]) << ',' << fmt17(tr.beta[i]) << ','
           << fmt17(d.pulse.omega[i]) << '\n';
    }
    return os.str();
}

inline nlohmann::ordered_json pulse_sidecar(const StaDesign &d, const StaOptions &opt = {}) {
    nlohmann::ordered_json j;
    j["kind"] = "sta_pulse";
    j["spec"] = perceptron_spec_json(d.spec);
    j["identity_gate"] = d.identity;
    j["omega_start"] = d.pulse.omega_start;
    j["omega_end"] = d.pulse.omega_end;
    j["theta_start"] = d.trajectory.theta.front();
    j["theta_end"] = d.trajectory.theta.back();
    j["theta_target"] = d.theta_target;
    j["theta_end_error"] = d.theta_end_error;
    j["beta_end_residual"] = d.beta_end;
    j["beta_tol"] = opt.beta_tol;
    j["closure"] = "h = -tan(beta) polynomial with int h fixed by theta(tf); no shooting parameter";
    j["samples"] = d.trajectory.times.size();
    if (d.ansatz) {
        j["ansatz_order"] = d.ansatz->coefficients.size();
        j["ansatz_legendre_coefficients"] = d.ansatz->coefficients;
    }
    j["pulse_energy"] = d.pulse.energy();
    return j;
}

/// Reads the `t,...,omega` columns of a pulse CSV back into a sampled pulse.
inline PulseProfile pulse_from_csv(const std::string &text) {
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line)) {
        throw Error(ErrorKind::IoError, "empty pulse file");
    }
    auto header = split_fields(line, ',');
    long it = -1, iw = -1;
    for (size_t k = 0; k < header.size(); k++) {
        if (header[k] == "t") {
            it = static_cast<long>(k);
        } else if (header[k] == "omega") {
            iw = static_cast<long>(k);
        }
    }
    if (it < 0 || iw < 0) {
        throw Error(ErrorKind::IoError, "pulse file needs t and omega columns");
    }
    std::vector<double> t, w;
    while (std::getline(is, line)) {
        if (line.empty()) {
            continue;
        }
        auto f = split_fields(line, ',');
        if (f.size() != header.size()) {
            throw Error(ErrorKind::IoError, "ragged pulse row: " + line);
        }
        try {
            t.push_back(std::stod(std::string(f[static_cast<size_t>(it)])));
            w.push_back(std::stod(std::string(f[static_cast<size_t>(iw)])));
        } catch (const std::exception &) {
            throw Error(ErrorKind::IoError, "bad number in pulse row: " + line);
        }
    }
    return PulseProfile::from_samples(std::move(t), std::move(w));
}

}  // namespace qnw
