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

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qnw/core/evolve.hpp"
#include "qnw/core/two_level.hpp"
#include "qnw/error.hpp"
#include "qnw/util/grid.hpp"

namespace qnw {

/// Gate request. All quantities are in units where omegaf sets the scale
/// (omegaf = 1 by default, so tf is in units of 1 / omegaf).
struct PerceptronSpec {
    double x = 1.0;
    double omega0 = 1.0;
    double omegaf = 1.0;
    double tf = 3.0;

    void validate() const {
        if (!std::isfinite(x)) {
            throw Error(ErrorKind::InvalidArgument, "x must be finite");
        }
        if (!(tf > 0) || !std::isfinite(tf)) {
            throw Error(ErrorKind::InvalidArgument, "tf must be positive");
        }
        if (!(omegaf > 0) || !std::isfinite(omegaf)) {
            throw Error(ErrorKind::InvalidArgument, "omegaf must be positive");
        }
        if (!(omega0 > 0) || !std::isfinite(omega0)) {
            throw Error(ErrorKind::InvalidArgument, "omega0 must be positive");
        }
    }
};

/// Polar angle of the gate target: cos(theta_f) = 1 - 2 f(x / omegaf).
inline double target_theta(double x, double omegaf) {
    const double r = x / omegaf;
    return std::acos(-r / std::hypot(1.0, r));
}

/// Transverse field Omega(t). Inside [0, tf] it is `shape` when present and
/// the sampled values otherwise (cubic Hermite interpolation); outside it is
/// held at the endpoint values.
struct PulseProfile {
    std::vector<double> times;
    std::vector<double> omega;
    double tf = 0;
    double omega_start = 0;
    double omega_end = 0;
    std::function<double(double)> shape;

    double operator()(double t) const {
        if (t <= 0) {
            return omega_start;
        }
        if (t >= tf) {
            return omega_end;
        }
        if (shape) {
            return shape(t);
        }
        return interpolate(t);
    }

    /// Pulse built from samples only; times must start at 0 and increase.
    static PulseProfile from_samples(std::vector<double> times, std::vector<double> omega) {
        if (times.size() < 2 || times.size() != omega.size()) {
            throw Error(ErrorKind::ShapeMismatch, "pulse needs >= 2 samples with matching columns");
        }
        if (times.front() != 0.0) {
            throw Error(ErrorKind::InvalidArgument, "pulse samples must start at t = 0");
        }
        for (size_t i = 1; i < times.size(); i++) {
            if (!(times[i] > times[i - 1])) {
                throw Error(ErrorKind::InvalidArgument, "pulse sample times must increase");
            }
        }
        for (double w : omega) {
            if (!std::isfinite(w)) {
                throw Error(ErrorKind::InvalidArgument, "pulse sample is not finite");
            }
        }
        PulseProfile p;
        p.tf = times.back();
        p.omega_start = omega.front();
        p.omega_end = omega.back();
        p.times = std::move(times);
        p.omega = std::move(omega);
        return p;
    }

    static PulseProfile constant(double value, double tf, size_t samples = 2) {
        PulseProfile p;
        p.tf = tf;
        p.omega_start = p.omega_end = value;
        p.times = linspace(0.0, tf, std::max<size_t>(samples, 2));
        p.omega.assign(p.times.size(), value);
        p.shape = [value](double) { return value; };
        return p;
    }

    /// Omega_r(t) = Omega(tf - t).
    PulseProfile reversed() const {
        PulseProfile r;
        r.tf = tf;
        r.omega_start = omega_end;
        r.omega_end = omega_start;
        r.times.reserve(times.size());
        r.omega.reserve(omega.size());
        for (size_t i = times.size(); i-- > 0;) {
            r.times.push_back(tf - times[i]);
            r.omega.push_back(omega[i]);
        }
        if (!r.times.empty()) {
            r.times.front() = 0.0;
            r.times.back() = tf;
        }
        PulseProfile fwd = *this;
        r.shape = [fwd](double t) { return fwd(fwd.tf - t); };
        return r;
    }

    /// Integral of Omega^2 over [0, duration] by composite Simpson.
    double energy(std::optional<double> duration = std::nullopt, size_t intervals = 4000) const {
        const double T = duration.value_or(tf);
        if (!(T > 0)) {
            return 0.0;
        }
        intervals += intervals % 2;
        const double h = T / static_cast<double>(intervals);
        double acc = 0;
        for (size_t i = 0; i <= intervals; i++) {
            double w = (*this)(static_cast<double>(i) * h);
            double c = (i == 0 || i == intervals) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
            acc += c * w * w;
        }
        return acc * h / 3.0;
    }

   private:
    double interpolate(double t) const {
        auto it = std::upper_bound(times.begin(), times.end(), t);
        size_t k = static_cast<size_t>(it - times.begin());
        k = std::clamp<size_t>(k, 1, times.size() - 1) - 1;
        const double h = times[k + 1] - times[k];
        const double s = (t - times[k]) / h;
        auto slope = [&](size_t i) {
            if (times.size() == 2) {
                return (omega[1] - omega[0]) / (times[1] - times[0]);
            }
            if (i == 0) {
                return (omega[1] - omega[0]) / (times[1] - times[0]);
            }
            if (i + 1 == times.size()) {
                return (omega[i] - omega[i - 1]) / (times[i] - times[i - 1]);
            }
            return (omega[i + 1] - omega[i - 1]) / (times[i + 1] - times[i - 1]);
        };
        const double m0 = slope(k) * h;
        const double m1 = slope(k + 1) * h;
        const double s2 = s * s;
        const double s3 = s2 * s;
        return (2 * s3 - 3 * s2 + 1) * omega[k] + (s3 - 2 * s2 + s) * m0 + (-2 * s3 + 3 * s2) * omega[k + 1] +
               (s3 - s2) * m1;
    }
};

/// H(t) = (x sigma_z - Omega(t) sigma_x) / 2.
inline TimeDependentHamiltonian gate_hamiltonian(double x, const PulseProfile &pulse) {
    TimeDependentHamiltonian h(2);
    if (x != 0.0) {
        h.add_term(Eigen::MatrixXcd(0.5 * x * pauli_z()));
    }
    h.add_term(Eigen::MatrixXcd(-0.5 * pauli_x()), [pulse](double t) { return pulse(t); });
    return h;
}

inline constexpr double kGateNormDrift = 1e-8;

struct GateOptions {
    double tol = 1e-11;
};

struct ProtocolResult {
    StateVector final_state = plus_state();
    double fidelity = 0;
    /// Population of |1>.
    double p1 = 0;
    /// Target excitation f(x / omegaf).
    double target = 0;
    double population_error = 0;
    /// Integral of Omega^2 over the evolution (diagnostic).
    double pulse_energy = 0;
    double norm_drift = 0;
    size_t steps = 0;
};

/// Evolves `psi0` under gate_hamiltonian(x, pulse) over [0, duration].
inline EvolutionResult evolve_pulse(const PulseProfile &pulse, double x, double duration, const StateVector &psi0,
                                    const GateOptions &opt = {}) {
    if (!(duration > 0) || !std::isfinite(duration)) {
        throw Error(ErrorKind::InvalidArgument, "evolution time must be positive");
    }
    auto h = gate_hamiltonian(x, pulse);
    const double span[2] = {0.0, duration};
    EvolveOptions eo;
    eo.tol = opt.tol;
    eo.max_norm_drift = 1.0;
    auto r = evolve(h, psi0, span, eo);
    // Local errors add up over long ramps, so the bound scales with the steps.
    const double bound = std::max(kGateNormDrift, opt.tol * static_cast<double>(r.steps));
    if (!(r.norm_drift <= bound)) {
        throw Error(ErrorKind::NormDriftExceeded, "gate norm drift " + std::to_string(r.norm_drift) + " over " +
                                                      std::to_string(r.steps) + " steps");
    }
    return r;
}

/// Builds a ProtocolResult for an evolved state against the ground state of
/// (x sigma_z - omegaf sigma_x) / 2.
inline ProtocolResult score_gate(const StateVector &final_state, double x, double omegaf) {
    auto target = ground_state_2level(x, omegaf);
    ProtocolResult r;
    r.final_state = final_state;
    r.fidelity = fidelity(final_state, target.state);
    r.p1 = final_state.probability(1);
    r.target = target.excitation;
    r.population_error = std::abs(r.p1 - r.target);
    return r;
}

/// Evolves |+> under the pulse for `duration` and scores it against the
/// ground state for (x, pulse.omega_end).
inline ProtocolResult evolve_gate(const PulseProfile &pulse, double x, double duration, const GateOptions &opt = {}) {
    auto ev = evolve_pulse(pulse, x, duration, plus_state(), opt);
    ProtocolResult r = score_gate(ev.final_state(), x, pulse.omega_end);
    r.pulse_energy = pulse.energy(duration);
    r.norm_drift = ev.norm_drift;
    r.steps = ev.steps;
    return r;
}

/// Bloch angles of a qubit state written as
/// cos(theta/2) e^{i beta/2}|0> + sin(theta/2) e^{-i beta/2}|1> (global phase free).
struct BlochAngles {
    double theta;
    double beta;
};

inline BlochAngles bloch_angles(const StateVector &s) {
    if (s.dim() != 2) {
        throw Error(ErrorKind::DimensionMismatch, "bloch_angles needs a qubit state");
    }
    const cplx a0 = s.amplitude(0);
    const cplx a1 = s.amplitude(1);
    const double z = std::norm(a0) - std::norm(a1);
    const double r = 2.0 * std::abs(a0) * std::abs(a1);
    return BlochAngles{std::atan2(r, z), std::arg(a0 * std::conj(a1))};
}

}  // namespace qnw
