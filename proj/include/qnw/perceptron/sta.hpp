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
#include <memory>
#include <string>
#include <vector>

#include "qnw/perceptron/pulse.hpp"
#include "qnw/util/poly.hpp"

// Inverse engineering of the gate pulse.
//
// With |psi> = cos(theta/2) e^{i beta/2}|0> + sin(theta/2) e^{-i beta/2}|1>
// and H = (x sigma_z - Omega sigma_x) / 2 the Bloch angles obey
//
//   theta' = -Omega sin(beta),   beta' = theta' cot(theta) cot(beta) - x.
//
// Eliminating Omega gives d/dt ln sin(theta) = (beta' + x) tan(beta), which
// integrates in closed form once h = -tan(beta) is chosen:
//
//   ln sin(theta(t)) = ln sqrt(1 + h^2) - x int_0^t h.
//
// The design therefore interpolates h(t) with a polynomial (the ansatz), reads
// theta from the identity above and Omega from
//
//   Omega = (x + beta') / (tan(phi) cos(beta)),   theta = pi/2 + phi.
//
// For x > 0, the boundary data are h(0) = 0, h'(0) = x, h''(0) = 0 and
// h'''(0) = 2x^3 - x Omega0^2 (these fix beta(0) = 0, beta'(0) = -x and
// Omega(0) = Omega0), h(tf) = h'(tf) = 0 (beta(tf) = 0 and Omega(tf) = Omega_f
// follow), and int_0^tf h = ln(1 + (x/Omega_f)^2) / (2x) which places theta(tf)
// on the target. Among polynomials meeting these linear conditions the one
// with the least integral of h''^2 is taken. Negative x mirrors the x > 0
// solution: theta -> pi - theta, beta -> -beta, same Omega.

namespace qnw {

struct StaOptions {
    /// Number of Legendre modes for h'' (h has degree order + 1).
    size_t order = 10;
    /// Samples of the design grid on [0, tf].
    size_t samples = 601;
    /// Largest accepted |beta(tf)|.
    double beta_tol = 1e-6;
    /// Below this |x| / omegaf the gate is the identity.
    double zero_input = 1e-12;
    /// Resolution of the interior range check on theta.
    size_t range_checks = 20001;
};

/// Polynomial ansatz for h = -tan(beta) of the |x| design, in the variable
/// u = 2 t / tf - 1.
struct ThetaAnsatz {
    double x_abs = 0;
    double tf = 0;
    double omega0 = 0;
    double omegaf = 0;
    /// Required value of int_0^tf h dt.
    double area = 0;
    /// Legendre coefficients of d^2h / d tau^2, tau = t / tf (orthonormal on [0, 1]).
    std::vector<double> coefficients;
    Poly h;
    Poly dh;
    Poly d2h;
    Poly d3h;
    Poly h_area;

    /// Taylor coefficients of h in tau = t / tf; the first four are the
    /// exact boundary data, the rest come from `h`.
    std::vector<double> mono;
    /// Below this tau the monomial form is used, which keeps relative
    /// precision in the O(t^4) quantities that vanish at t = 0.
    double tau_switch = 0.25;

    double u_of(double t) const {
        return 2.0 * t / tf - 1.0;
    }
    double value(double t) const {
        const double tau = t / tf;
        if (tau < tau_switch) {
            return x_abs * t + tail(tau, 0);
        }
        return h(u_of(t));
    }
    /// dh/dt.
    double rate(double t) const {
        const double tau = t / tf;
        if (tau < tau_switch) {
            return x_abs + tail(tau, 1) / tf;
        }
        return 2.0 * dh(u_of(t)) / tf;
    }
    /// int_0^t h dt'.
    double integral(double t) const {
        const double tau = t / tf;
        if (tau < tau_switch) {
            return 0.5 * x_abs * t * t + tf * tail(tau, -1);
        }
        return 0.5 * tf * h_area(u_of(t));
    }
    /// ln sin(theta(t)).
    double log_sin_theta(double t) const {
        const double tau = t / tf;
        if (tau < tau_switch) {
            // h = x t + q: ln sqrt(1 + h^2) - x int h
            //   = (log1p(h^2) - h^2) / 2 + q (x t + q / 2) - x tf int q dtau.
            const double q = tail(tau, 0);
            const double v = x_abs * t + q;
            return 0.5 * log1p_minus(v * v) + q * (x_abs * t + 0.5 * q) - x_abs * tf * tail(tau, -1);
        }
        const double v = h(u_of(t));
        return 0.5 * std::log1p(v * v) - x_abs * integral(t);
    }
    /// phi = theta - pi/2 of the |x| design.
    double phi(double t) const {
        const double l = std::min(log_sin_theta(t), 0.0);
        return 2.0 * std::asin(std::sqrt(std::max(0.0, -std::expm1(l)) / 2.0));
    }
    /// beta of the |x| design.
    double beta(double t) const {
        return -std::atan(value(t));
    }
    double beta_rate(double t) const {
        const double v = value(t);
        return -rate(t) / (1.0 + v * v);
    }
    /// Omega(t) on [0, tf]; Omega(0) = omega0 is the limit of the ratio.
    double omega(double t) const {
        if (t <= 0.0) {
            return omega0;
        }
        const double v = value(t);
        const double b = -std::atan(v);
        double num;
        if (t / tf < tau_switch) {
            // x + beta' = (x h^2 - q') / (1 + h^2) with q' = h' - x.
            num = (x_abs * v * v - tail(t / tf, 1) / tf) / (1.0 + v * v);
        } else {
            num = x_abs + beta_rate(t);
        }
        return num / (std::tan(phi(t)) * std::cos(b));
    }

    /// log1p(y) - y without cancellation for small y.
    static double log1p_minus(double y) {
        if (std::abs(y) > 1e-2) {
            return std::log1p(y) - y;
        }
        double term = -y * y / 2.0, acc = 0, p = y * y;
        for (int k = 2; k < 40 && std::abs(term) > 1e-20 * std::abs(acc); k++) {
            term = (k % 2 == 0 ? -1.0 : 1.0) * p / k;
            acc += term;
            p *= y;
        }
        return acc;
    }

    /// sum_{k>=3} mono[k] tau^k (order 0), its tau-derivative (order 1) or its
    /// tau-integral from 0 (order -1).
    double tail(double tau, int order) const {
        double acc = 0;
        for (size_t k = mono.size(); k-- > 3;) {
            double c = mono[k];
            if (order == 1) {
                c *= static_cast<double>(k);
            } else if (order == -1) {
                c /= static_cast<double>(k + 1);
            }
            acc = acc * tau + c;
        }
        // Horner above produced sum c_k tau^(k-3); restore the power.
        const int shift = order == 1 ? 2 : (order == -1 ? 4 : 3);
        return acc * std::pow(tau, shift);
    }

    struct Residuals {
        double h0, dh0, d2h0, d3h0, h1, dh1, area;
    };

    /// Each boundary condition evaluated minus its target, in tau units.
    Residuals residuals() const {
        const double t3 = tf * tf * tf;
        return Residuals{
            h(-1.0),
            2.0 * dh(-1.0) - x_abs * tf,
            4.0 * d2h(-1.0),
            8.0 * d3h(-1.0) - (2.0 * x_abs * x_abs * x_abs - x_abs * omega0 * omega0) * t3,
            h(1.0),
            2.0 * dh(1.0),
            integral(tf) - area,
        };
    }
};

struct AngleTrajectory {
    std::vector<double> times;
    std::vector<double> theta;
    std::vector<double> beta;
};

struct StaDesign {
    PerceptronSpec spec;
    /// Absent for the identity gate (x = 0).
    std::shared_ptr<const ThetaAnsatz> ansatz;
    AngleTrajectory trajectory;
    PulseProfile pulse;
    double theta_target = M_PI / 2;
    double beta_end = 0;
    double theta_end_error = 0;
    bool identity = false;
};

namespace detail {

inline ThetaAnsatz solve_ansatz(double x_abs, const PerceptronSpec &spec, size_t order) {
    if (order < 5) {
        throw Error(ErrorKind::InvalidArgument, "ansatz order must be >= 5");
    }
    ThetaAnsatz a;
    a.x_abs = x_abs;
    a.tf = spec.tf;
    a.omega0 = spec.omega0;
    a.omegaf = spec.omegaf;
    const double r = x_abs / spec.omegaf;
    a.area = std::log1p(r * r) / (2.0 * x_abs);

    const double tf = spec.tf;
    const double a1 = x_abs * tf;
    const double a3 = (2.0 * x_abs * x_abs * x_abs - x_abs * spec.omega0 * spec.omega0) * tf * tf * tf;

    // Mode k contributes B_k(tau) = int_0^tau int_0^s g_k to h; with
    // d/dtau = 2 d/du, one tau-integral is half a u-integral from u = -1.
    std::vector<Poly> g(order), b(order);
    Eigen::MatrixXd m(5, static_cast<Eigen::Index>(order));
    for (size_t k = 0; k < order; k++) {
        g[k] = legendre(k) * std::sqrt(2.0 * static_cast<double>(k) + 1.0);
        b[k] = g[k].integral().integral() * 0.25;
        const auto c = static_cast<Eigen::Index>(k);
        m(0, c) = g[k](-1.0);
        m(1, c) = 2.0 * g[k].derivative()(-1.0);
        m(2, c) = b[k](1.0);
        m(3, c) = 2.0 * b[k].derivative()(1.0);
        m(4, c) = 0.5 * b[k].integral()(1.0);
    }
    Eigen::VectorXd d(5);
    d << 0.0, a3, -a1, -a1, a.area / tf - 0.5 * a1;
    Eigen::MatrixXd gram = m * m.transpose();
    Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
    if (ldlt.info() != Eigen::Success) {
        throw Error(ErrorKind::DesignFailed, "ansatz constraint system is singular");
    }
    Eigen::VectorXd coef = m.transpose() * ldlt.solve(d);

    a.coefficients.assign(coef.data(), coef.data() + coef.size());
    a.h = Poly{{0.5 * a1, 0.5 * a1}};
    for (size_t k = 0; k < order; k++) {
        a.h += b[k] * coef[static_cast<Eigen::Index>(k)];
    }
    a.dh = a.h.derivative();
    a.d2h = a.dh.derivative();
    a.d3h = a.d2h.derivative();
    a.h_area = a.h.integral();

    // Re-expand in tau = (u + 1) / 2 and pin the orders fixed by the
    // boundary data at t = 0.
    const size_t n = a.h.c.size();
    a.mono.assign(std::max<size_t>(n, 4), 0.0);
    for (size_t i = 0; i < n; i++) {
        double binom = 1.0;
        for (size_t k = 0; k <= i; k++) {
            const double sign = ((i - k) % 2 == 0) ? 1.0 : -1.0;
            a.mono[k] += a.h.c[i] * binom * std::ldexp(1.0, static_cast<int>(k)) * sign;
            binom = binom * static_cast<double>(i - k) / static_cast<double>(k + 1);
        }
    }
    a.mono[0] = 0.0;
    a.mono[1] = a1;
    a.mono[2] = 0.0;
    a.mono[3] = a3 / 6.0;
    return a;
}

}  // namespace detail

inline StaDesign design_sta_pulse(const PerceptronSpec &spec, const StaOptions &opt = {}) {
    spec.validate();
    if (opt.samples < 2) {
        throw Error(ErrorKind::InvalidArgument, "design grid needs >= 2 samples");
    }
    StaDesign out;
    out.spec = spec;
    out.theta_target = target_theta(spec.x, spec.omegaf);
    auto times = linspace(0.0, spec.tf, opt.samples);
    out.trajectory.times = times;

    if (std::abs(spec.x) <= opt.zero_input * spec.omegaf) {
        out.identity = true;
        out.trajectory.theta.assign(times.size(), M_PI / 2);
        out.trajectory.beta.assign(times.size(), 0.0);
        out.pulse = PulseProfile::constant(spec.omega0, spec.tf, opt.samples);
        return out;
    }

    const double sgn = spec.x > 0 ? 1.0 : -1.0;
    auto ansatz = std::make_shared<ThetaAnsatz>(detail::solve_ansatz(std::abs(spec.x), spec, opt.order));
    const ThetaAnsatz &a = *ansatz;

    auto res = a.residuals();
    const double scale = 1.0 + a.x_abs * spec.tf + std::abs(a.area) +
                         std::abs((2.0 * a.x_abs * a.x_abs - spec.omega0 * spec.omega0) * a.x_abs) * std::pow(spec.tf, 3);
    for (double v : {res.h0, res.dh0, res.d2h0, res.d3h0, res.h1, res.dh1, res.area}) {
        if (!(std::abs(v) <= 1e-10 * scale)) {
            throw Error(ErrorKind::DesignFailed, "ansatz misses a boundary condition by " + std::to_string(v));
        }
    }

    // theta must stay strictly off pi/2 inside (0, tf]: a return to pi/2
    // would need an unbounded Omega.
    for (size_t i = 1; i < opt.range_checks; i++) {
        double t = spec.tf * static_cast<double>(i) / static_cast<double>(opt.range_checks - 1);
        double l = a.log_sin_theta(t);
        if (!(l < 0.0)) {
            throw Error(ErrorKind::ThetaOutOfRange,
                        "theta returns to pi/2 at t = " + std::to_string(t) + "; tf too short for x = " +
                            std::to_string(spec.x));
        }
    }

    const double omegaf = spec.omegaf;
    auto shape = [ansatz, omegaf](double t) {
        if (t >= ansatz->tf) {
            return omegaf;
        }
        return ansatz->omega(t);
    };

    out.trajectory.theta.reserve(times.size());
    out.trajectory.beta.reserve(times.size());
    std::vector<double> omega;
    omega.reserve(times.size());
    for (double t : times) {
        out.trajectory.theta.push_back(M_PI / 2 + sgn * a.phi(t));
        out.trajectory.beta.push_back(sgn * a.beta(t));
        double w = shape(t);
        if (!std::isfinite(w)) {
            throw Error(ErrorKind::DesignFailed, "pulse is not finite at t = " + std::to_string(t));
        }
        omega.push_back(w);
    }
    out.beta_end = out.trajectory.beta.back();
    out.theta_end_error = out.trajectory.theta.back() - out.theta_target;
    if (!(std::abs(out.beta_end) <= opt.beta_tol)) {
        throw Error(ErrorKind::DesignFailed, "beta(tf) = " + std::to_string(out.beta_end) + " exceeds tolerance");
    }
    if (!(std::abs(out.theta_end_error) <= 1e-8)) {
        throw Error(ErrorKind::DesignFailed, "theta(tf) misses the target by " + std::to_string(out.theta_end_error));
    }

    out.pulse.times = times;
    out.pulse.omega = std::move(omega);
    out.pulse.tf = spec.tf;
    out.pulse.omega_start = spec.omega0;
    out.pulse.omega_end = omegaf;
    out.pulse.shape = shape;
    out.ansatz = std::move(ansatz);
    return out;
}

}  // namespace qnw
