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

#include <algorithm>
#include <cmath>
#include <vector>

#include "gtest/gtest.h"
#include "qnw/perceptron/protocols.hpp"

using namespace qnw;

namespace {

EvolutionResult evolve_on_grid(const StaDesign &d, double tol = 1e-12) {
    auto h = gate_hamiltonian(d.spec.x, d.pulse);
    EvolveOptions opt;
    opt.tol = tol;
    return evolve(h, plus_state(), d.trajectory.times, opt);
}

PerceptronSpec spec_for(double x) {
    PerceptronSpec s;
    s.x = x;
    return s;
}

}  // namespace

TEST(perceptron_spec, validation) {
    PerceptronSpec s;
    EXPECT_NO_THROW(s.validate());
    s.tf = 0;
    EXPECT_THROW(s.validate(), Error);
    s = PerceptronSpec{};
    s.omegaf = -1;
    EXPECT_THROW(s.validate(), Error);
}

TEST(sta_design, target_angle_example) {
    EXPECT_NEAR(target_theta(1.0, 1.0), 3 * M_PI / 4, 1e-15);
    EXPECT_NEAR(target_theta(0.0, 1.0), M_PI / 2, 1e-15);
    EXPECT_NEAR(target_theta(-1.0, 1.0), M_PI / 4, 1e-15);
    auto d = design_sta_pulse(spec_for(1.0));
    EXPECT_NEAR(d.trajectory.theta.back(), 3 * M_PI / 4, 1e-10);
}

TEST(sta_design, zero_input_is_identity) {
    auto d = design_sta_pulse(spec_for(0.0));
    EXPECT_TRUE(d.identity);
    EXPECT_FALSE(d.ansatz);
    for (size_t i = 0; i < d.trajectory.times.size(); i++) {
        EXPECT_EQ(d.trajectory.theta[i], M_PI / 2);
        EXPECT_EQ(d.trajectory.beta[i], 0.0);
        EXPECT_EQ(d.pulse.omega[i], 1.0);
    }
    GateSettings s;
    auto r = run_protocol(Protocol::Sta, 0.0, s);
    EXPECT_EQ(r.fidelity, 1.0);
    EXPECT_EQ(r.steps, 0u);
}

TEST(sta_design, ansatz_meets_boundary_conditions) {
    for (double x : {0.5, 1.0, 2.0, -2.0}) {
        auto d = design_sta_pulse(spec_for(x));
        auto r = d.ansatz->residuals();
        for (double v : {r.h0, r.dh0, r.d2h0, r.h1, r.dh1, r.area}) {
            EXPECT_LE(std::abs(v), 1e-12) << "x=" << x;
        }
        // h''' at 0 carries (2x^3 - x)tf^3, which is ~200 at x = 2.
        EXPECT_LE(std::abs(r.d3h0), 1e-12 * 1e3) << "x=" << x;
        EXPECT_EQ(d.trajectory.beta.front(), 0.0);
        EXPECT_EQ(d.trajectory.theta.front(), M_PI / 2);
        EXPECT_LE(std::abs(d.beta_end), 1e-12);
        EXPECT_EQ(d.pulse.omega.front(), 1.0);
        EXPECT_NEAR(d.pulse.omega.back(), 1.0, 1e-12);
    }
}

TEST(sta_design, angles_stay_inside_open_interval) {
    for (double x : {-5.0, -1.0, 0.5, 5.0}) {
        auto d = design_sta_pulse(spec_for(x));
        for (double th : d.trajectory.theta) {
            EXPECT_GT(th, 0.0);
            EXPECT_LT(th, M_PI);
        }
        for (double w : d.pulse.omega) {
            EXPECT_TRUE(std::isfinite(w));
        }
    }
}

TEST(sta_design, evolved_angles_match_design) {
    for (double x : {2.0, 1.0, 0.5, -0.5, -1.0, -2.0}) {
        auto d = design_sta_pulse(spec_for(x));
        auto ev = evolve_on_grid(d);
        double worst = 0;
        for (size_t i = 0; i < ev.states.size(); i++) {
            auto a = bloch_angles(ev.states[i]);
            worst = std::max(worst, std::abs(a.theta - d.trajectory.theta[i]));
            worst = std::max(worst, std::abs(a.beta - d.trajectory.beta[i]));
        }
        EXPECT_LE(worst, 1e-6) << "x=" << x;
    }
}

TEST(sta_design, endpoint_limit_of_omega) {
    auto d = design_sta_pulse(spec_for(1.0));
    const auto &a = *d.ansatz;
    double prev = std::abs(a.omega(1e-3) - 1.0);
    for (double t : {1e-4, 1e-5, 1e-6, 1e-7, 1e-8, 1e-9}) {
        double err = std::abs(a.omega(t) - 1.0);
        EXPECT_LT(err, prev);
        prev = err;
    }
    EXPECT_LE(prev, 1e-6);
    // theta' / sin(beta) from central differences of the closed-form angles.
    const double t = 1e-4, h = 1e-7;
    double th_dot = (a.phi(t + h) - a.phi(t - h)) / (2 * h);
    double ratio = th_dot / -std::sin(a.beta(t));
    EXPECT_NEAR(ratio, a.omega(t), 1e-5 * a.omega(t));
}

TEST(sta_design, initial_beta_slope_is_minus_x) {
    for (double x : {1.0, -0.5, 2.0}) {
        auto s = spec_for(x);
        auto d = design_sta_pulse(s);
        // beta of the integrated state at delta and delta / 2, Richardson-combined.
        const double delta = 1e-3;
        const double ts[3] = {0.0, delta / 2, delta};
        auto h = gate_hamiltonian(x, d.pulse);
        auto ev = evolve(h, plus_state(), ts, 1e-13);
        double s1 = bloch_angles(ev.states[2]).beta / delta;
        double s2 = bloch_angles(ev.states[1]).beta / (delta / 2);
        double slope = (4 * s2 - s1) / 3;
        EXPECT_NEAR(slope, -x, 1e-6 * std::abs(x)) << "x=" << x;
    }
}

TEST(sta_design, theta_out_of_range_for_aggressive_tf) {
    PerceptronSpec s{1.0, 1.0, 1.0, 0.3};
    try {
        design_sta_pulse(s);
        FAIL() << "expected ThetaOutOfRange";
    } catch (const Error &e) {
        EXPECT_EQ(e.kind(), ErrorKind::ThetaOutOfRange);
    }
}

TEST(sta_design, pulse_continuity_under_refinement) {
    auto jump = [](size_t n) {
        StaOptions o;
        o.samples = n;
        auto d = design_sta_pulse(spec_for(1.0), o);
        double m = 0;
        for (size_t i = 1; i < d.pulse.omega.size(); i++) {
            m = std::max(m, std::abs(d.pulse.omega[i] - d.pulse.omega[i - 1]));
        }
        return m;
    };
    double a = jump(301), b = jump(601), c = jump(1201);
    EXPECT_LT(b, 0.55 * a);
    EXPECT_LT(c, 0.55 * b);
}

TEST(evolve_gate, sta_fidelity_examples) {
    for (double x : {2.0, 1.0, 0.5, -0.5, -1.0, -2.0}) {
        auto d = design_sta_pulse(spec_for(x));
        auto r = evolve_gate(d.pulse, x, 3.0);
        EXPECT_GE(r.fidelity, 0.999) << "x=" << x;
        EXPECT_LE(r.population_error, 1e-3);
        EXPECT_NEAR(r.target, sigmoid(x), 1e-15);
        EXPECT_GT(r.pulse_energy, 0.0);
    }
}

TEST(evolve_gate, constant_field_at_zero_input_keeps_plus) {
    auto pulse = PulseProfile::constant(1.0, 5.0);
    auto r = evolve_gate(pulse, 0.0, 5.0);
    EXPECT_NEAR(r.fidelity, 1.0, 1e-9);
    EXPECT_NEAR(r.pulse_energy, 5.0, 1e-9);
}

TEST(evolve_gate, time_reversed_pulse_recovers_plus) {
    auto d = design_sta_pulse(spec_for(1.0));
    auto fwd = evolve_gate(d.pulse, 1.0, 3.0);
    auto target = ground_state_2level(1.0, 1.0).state;
    auto back = evolve_pulse(d.pulse.reversed(), 1.0, 3.0, target, GateOptions{1e-12});
    double f_back = fidelity(back.final_state(), plus_state());
    EXPECT_NEAR(f_back, fwd.fidelity, 1e-9);
    EXPECT_GE(f_back, 0.999);
}

TEST(evolve_gate, sampled_pulse_round_trip) {
    auto d = design_sta_pulse(spec_for(1.0));
    auto pulse = pulse_from_csv(pulse_to_csv(d));
    ASSERT_EQ(pulse.times.size(), d.trajectory.times.size());
    EXPECT_EQ(pulse.omega_end, d.pulse.omega_end);
    for (double t : {0.01, 0.5, 1.234, 2.9}) {
        EXPECT_NEAR(pulse(t), d.pulse(t), 1e-6);
    }
    auto r = evolve_gate(pulse, 1.0, 3.0);
    EXPECT_GE(r.fidelity, 0.999999);
}

TEST(adiabatic_reference, zero_input_any_time) {
    for (double tf : {0.1, 3.0, 50.0}) {
        auto r = adiabatic_reference(0.0, 10.0, 1.0, tf);
        EXPECT_NEAR(r.fidelity, 1.0, 1e-8);
    }
}

TEST(adiabatic_reference, slow_ramp_reaches_boost_overlap_limit) {
    // |+> is not the ground state at omega0 = 10; in the adiabatic limit the
    // final fidelity tends to the ground-state weight of |+> at the boost.
    auto g0 = ground_state_2level(1.0, 10.0).state;
    double overlap = fidelity(g0, plus_state());
    auto r = adiabatic_reference(1.0, 10.0, 1.0, 200.0);
    EXPECT_NEAR(r.fidelity, overlap, 5e-4);
    auto quick = adiabatic_reference(1.0, 10.0, 1.0, 20.0);
    EXPECT_LT(std::abs(r.fidelity - overlap), std::abs(quick.fidelity - overlap));
}

TEST(adiabatic_reference, sta_is_better_at_short_time) {
    auto d = design_sta_pulse(spec_for(1.0));
    double sta = evolve_gate(d.pulse, 1.0, 3.0).fidelity;
    double adi = adiabatic_reference(1.0, 10.0, 1.0, 3.0).fidelity;
    EXPECT_LT(adi, sta);
}

TEST(activation_curve, sta_matches_sigmoid) {
    auto xs = linspace(-5.0, 5.0, 41);
    GateSettings s;
    auto curve = activation_curve(xs, Protocol::Sta, s, 2);
    ASSERT_EQ(curve.size(), 41u);
    double worst = 0, min_fid = 1;
    for (const auto &c : curve) {
        ASSERT_TRUE(c.error.empty()) << c.error;
        worst = std::max(worst, std::abs(c.p1 - c.target));
        min_fid = std::min(min_fid, c.fidelity);
    }
    EXPECT_LE(worst, 1e-3);
    EXPECT_NEAR(curve[20].p1, 0.5, 1e-3);
    for (size_t i = 0; i < 41; i++) {
        EXPECT_NEAR(curve[i].p1, 1.0 - curve[40 - i].p1, 2 * (1 - min_fid) + 1e-12);
    }
    ASSERT_GE(min_fid, 0.999);
    for (size_t i = 1; i < 41; i++) {
        EXPECT_GE(curve[i].p1, curve[i - 1].p1);
    }
}

TEST(activation_curve, failures_are_recorded_per_point) {
    GateSettings s;
    s.tf = 0.3;
    const double xs[3] = {-1.0, 0.0, 1.0};
    auto curve = activation_curve(xs, Protocol::Sta, s, 1);
    EXPECT_FALSE(curve[0].error.empty());
    EXPECT_TRUE(curve[1].error.empty());
    EXPECT_EQ(curve[1].fidelity, 1.0);
    EXPECT_NE(curve[2].error.find("ThetaOutOfRange"), std::string::npos);
}

TEST(robustness_scan, examples) {
    GateSettings s;
    auto eps = linspace(-0.05, 0.05, 5);
    auto dx = linspace(-0.2, 0.2, 5);
    auto scan = robustness_scan(1.0, s, eps, dx, 2);
    auto d = design_sta_pulse(spec_for(1.0));
    EXPECT_NEAR(scan.sta[2][2], evolve_gate(d.pulse, 1.0, 3.0).fidelity, 1e-12);
    EXPECT_GE(scan.sta[0][2], 0.99);
    EXPECT_GE(scan.sta[4][2], 0.99);
    EXPECT_GE(RobustnessScan::mean(scan.sta), RobustnessScan::mean(scan.adiabatic));
    auto csv = scan_to_csv(scan);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "eps,dx,fidelity_sta,fidelity_adiabatic");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 26);
}

TEST(robustness_scan, schedule_independent) {
    GateSettings s;
    auto eps = linspace(-0.05, 0.05, 3);
    auto dx = linspace(-0.1, 0.1, 3);
    auto a = robustness_scan(0.5, s, eps, dx, 1);
    auto b = robustness_scan(0.5, s, eps, dx, 3);
    EXPECT_EQ(a.sta, b.sta);
    EXPECT_EQ(a.adiabatic, b.adiabatic);
}

TEST(pulse_file, sidecar_fields) {
    auto d = design_sta_pulse(spec_for(1.0));
    auto j = pulse_sidecar(d);
    EXPECT_EQ(j["spec"]["x"], 1.0);
    EXPECT_LE(std::abs(j["beta_end_residual"].get<double>()), 1e-6);
    EXPECT_EQ(j["omega_start"], 1.0);
    auto csv = pulse_to_csv(d);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "t,theta,beta,omega");
}
