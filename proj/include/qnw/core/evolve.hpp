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
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "qnw/core/hamiltonian.hpp"
#include "qnw/core/state_vector.hpp"
#include "qnw/error.hpp"

namespace qnw {

enum class Stepper {
    DormandPrince45,
    FixedRk4,
};

struct EvolveOptions {
    /// Local error target per step (absolute and relative).
    double tol = 1e-10;
    Stepper stepper = Stepper::DormandPrince45;
    /// Upper bound on the step; for FixedRk4 every interval is cut into
    /// equal substeps no longer than this.
    double max_step = std::numeric_limits<double>::infinity();
    /// Largest acceptable |<psi|psi> - 1| over the run.
    double max_norm_drift = 1e-8;
    size_t max_steps = 200'000'000;
};

struct EvolutionResult {
    std::vector<double> times;
    std::vector<StateVector> states;
    double norm_drift = 0;
    size_t steps = 0;
    size_t rejected = 0;

    const StateVector &final_state() const {
        return states.back();
    }
};

namespace detail {

struct Dp45 {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                            a65 = -5103.0 / 18656;
    static constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                            a76 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                            e6 = 22.0 / 525, e7 = -1.0 / 40;
    // Continuous extension of order 4.
    static constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                            d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                            d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;
};

inline double scaled_error(const CVector &err, const CVector &y0, const CVector &y1, double tol) {
    double acc = 0;
    for (Eigen::Index i = 0; i < err.size(); i++) {
        double sk = tol * (1.0 + std::max(std::abs(y0[i]), std::abs(y1[i])));
        double r = std::abs(err[i]) / sk;
        acc += r * r;
    }
    return std::sqrt(acc / static_cast<double>(err.size()));
}

inline void check_grid(std::span<const double> times) {
    if (times.empty()) {
        throw Error(ErrorKind::InvalidArgument, "time grid is empty");
    }
    for (size_t i = 1; i < times.size(); i++) {
        if (!(times[i] > times[i - 1])) {
            throw Error(ErrorKind::InvalidArgument, "time grid must be strictly increasing");
        }
    }
}

inline void finish(EvolutionResult &r, const EvolveOptions &opt) {
    if (!(r.norm_drift <= opt.max_norm_drift)) {
        throw Error(ErrorKind::NormDriftExceeded,
                    "norm drift " + std::to_string(r.norm_drift) + " exceeds " + std::to_string(opt.max_norm_drift) +
                        " after " + std::to_string(r.steps) + " steps");
    }
}

inline EvolutionResult evolve_rk4(const TimeDependentHamiltonian &h, const StateVector &psi0,
                                  std::span<const double> times, const EvolveOptions &opt) {
    if (!(opt.max_step > 0) || !std::isfinite(opt.max_step)) {
        throw Error(ErrorKind::InvalidArgument, "fixed-step RK4 needs a finite max_step");
    }
    EvolutionResult r;
    r.times.assign(times.begin(), times.end());
    r.states.reserve(times.size());
    r.states.push_back(psi0);
    const Eigen::Index n = h.dim();
    CVector y = psi0.amps(), k1(n), k2(n), k3(n), k4(n), tmp(n);
    for (size_t seg = 1; seg < times.size(); seg++) {
        double t0 = times[seg - 1];
        double span = times[seg] - t0;
        auto m = static_cast<size_t>(std::ceil(span / opt.max_step - 1e-12));
        m = std::max<size_t>(m, 1);
        double dt = span / static_cast<double>(m);
        for (size_t j = 0; j < m; j++) {
            double t = t0 + dt * static_cast<double>(j);
            h.derivative(t, y, k1);
            tmp = y + (0.5 * dt) * k1;
            h.derivative(t + 0.5 * dt, tmp, k2);
            tmp = y + (0.5 * dt) * k2;
            h.derivative(t + 0.5 * dt, tmp, k3);
            tmp = y + dt * k3;
            h.derivative(t + dt, tmp, k4);
            y += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            r.steps++;
            r.norm_drift = std::max(r.norm_drift, std::abs(y.squaredNorm() - 1.0));
            if (r.steps > opt.max_steps) {
                throw Error(ErrorKind::NormDriftExceeded, "step budget exhausted");
            }
        }
        r.states.push_back(StateVector::trusted(psi0.shared_labels(), y));
    }
    finish(r, opt);
    return r;
}

inline EvolutionResult evolve_dp45(const TimeDependentHamiltonian &h, const StateVector &psi0,
                                   std::span<const double> times, const EvolveOptions &opt) {
    using C = Dp45;
    EvolutionResult r;
    r.times.assign(times.begin(), times.end());
    r.states.reserve(times.size());
    r.states.push_back(psi0);
    if (times.size() == 1) {
        return r;
    }
    const Eigen::Index n = h.dim();
    const double tol = opt.tol;
    const double t_end = times.back();
    CVector y = psi0.amps(), y1(n), k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), tmp(n), err(n);
    CVector r1(n), r2(n), r3(n), r4(n), r5(n);

    double t = times.front();
    h.derivative(t, y, k1);

    // Initial step guess.
    double hstep;
    {
        double d0 = 0, d1 = 0;
        for (Eigen::Index i = 0; i < n; i++) {
            double sk = tol * (1.0 + std::abs(y[i]));
            d0 += std::norm(y[i]) / (sk * sk);
            d1 += std::norm(k1[i]) / (sk * sk);
        }
        d0 = std::sqrt(d0 / n);
        d1 = std::sqrt(d1 / n);
        double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
        h0 = std::min(h0, t_end - t);
        tmp = y + h0 * k1;
        h.derivative(t + h0, tmp, k2);
        double d2 = 0;
        for (Eigen::Index i = 0; i < n; i++) {
            double sk = tol * (1.0 + std::abs(y[i]));
            d2 += std::norm(k2[i] - k1[i]) / (sk * sk);
        }
        d2 = std::sqrt(d2 / n) / h0;
        double dm = std::max(d1, d2);
        double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 0.2);
        hstep = std::min({100 * h0, h1, opt.max_step, t_end - t});
    }

    size_t next_out = 1;
    bool last_rejected = false;
    while (next_out < times.size()) {
        if (r.steps + r.rejected > opt.max_steps) {
            throw Error(ErrorKind::NormDriftExceeded, "step budget exhausted at t = " + std::to_string(t));
        }
        bool final_step = false;
        if (t + hstep >= t_end || t_end - (t + hstep) < 1e-12 * std::abs(t_end)) {
            hstep = t_end - t;
            final_step = true;
        }
        const double hs = hstep;
        tmp = y + hs * (C::a21 * k1);
        h.derivative(t + C::c2 * hs, tmp, k2);
        tmp = y + hs * (C::a31 * k1 + C::a32 * k2);
        h.derivative(t + C::c3 * hs, tmp, k3);
        tmp = y + hs * (C::a41 * k1 + C::a42 * k2 + C::a43 * k3);
        h.derivative(t + C::c4 * hs, tmp, k4);
        tmp = y + hs * (C::a51 * k1 + C::a52 * k2 + C::a53 * k3 + C::a54 * k4);
        h.derivative(t + C::c5 * hs, tmp, k5);
        tmp = y + hs * (C::a61 * k1 + C::a62 * k2 + C::a63 * k3 + C::a64 * k4 + C::a65 * k5);
        h.derivative(t + hs, tmp, k6);
        y1 = y + hs * (C::a71 * k1 + C::a73 * k3 + C::a74 * k4 + C::a75 * k5 + C::a76 * k6);
        h.derivative(t + hs, y1, k7);
        err = hs * (C::e1 * k1 + C::e3 * k3 + C::e4 * k4 + C::e5 * k5 + C::e6 * k6 + C::e7 * k7);
        double en = scaled_error(err, y, y1, tol);

        if (!(en <= 1.0)) {
            if (!std::isfinite(en)) {
                en = 1e10;
            }
            hstep = hs * std::max(0.2, 0.9 * std::pow(en, -0.2));
            last_rejected = true;
            r.rejected++;
            if (hstep < 1e-14 * std::max(1.0, std::abs(t))) {
                throw Error(ErrorKind::NormDriftExceeded, "step size underflow at t = " + std::to_string(t));
            }
            continue;
        }

        const double t_new = final_step ? t_end : t + hs;
        bool dense_ready = false;
        while (next_out < times.size() && times[next_out] < t_new) {
            if (!dense_ready) {
                r1 = y;
                r2 = y1 - y;
                r3 = hs * k1 - r2;
                r4 = r2 - hs * k7 - r3;
                r5 = hs * (C::d1 * k1 + C::d3 * k3 + C::d4 * k4 + C::d5 * k5 + C::d6 * k6 + C::d7 * k7);
                dense_ready = true;
            }
            double th = (times[next_out] - t) / hs;
            double th1 = 1.0 - th;
            tmp = r1 + th * (r2 + th1 * (r3 + th * (r4 + th1 * r5)));
            r.states.push_back(StateVector::trusted(psi0.shared_labels(), tmp));
            r.norm_drift = std::max(r.norm_drift, std::abs(tmp.squaredNorm() - 1.0));
            next_out++;
        }

        y.swap(y1);
        k1.swap(k7);
        t = t_new;
        r.steps++;
        r.norm_drift = std::max(r.norm_drift, std::abs(y.squaredNorm() - 1.0));
        while (next_out < times.size() && times[next_out] <= t) {
            r.states.push_back(StateVector::trusted(psi0.shared_labels(), y));
            next_out++;
        }

        double fac = en == 0.0 ? 5.0 : std::min(5.0, std::max(0.2, 0.9 * std::pow(en, -0.2)));
        if (last_rejected) {
            fac = std::min(fac, 1.0);
        }
        last_rejected = false;
        hstep = std::min(hs * fac, opt.max_step);
    }
    finish(r, opt);
    return r;
}

}  // namespace detail

/// Integrates i dpsi/dt = H(t) psi (hbar = 1) and returns the state at every
/// requested time. The first time is the start time and maps to psi0.
/// The norm is monitored, never corrected.
inline EvolutionResult evolve(const TimeDependentHamiltonian &h, const StateVector &psi0,
                              std::span<const double> times, const EvolveOptions &opt = {}) {
    if (psi0.dim() != h.dim()) {
        throw Error(ErrorKind::DimensionMismatch, "state dimension " + std::to_string(psi0.dim()) +
                                                      " vs Hamiltonian dimension " + std::to_string(h.dim()));
    }
    if (!(opt.tol > 0)) {
        throw Error(ErrorKind::InvalidArgument, "tolerance must be positive");
    }
    if (!(std::abs(psi0.norm_squared() - 1.0) <= kNormTolerance)) {
        throw Error(ErrorKind::InvalidArgument, "initial state is not normalized");
    }
    detail::check_grid(times);
    if (opt.stepper == Stepper::FixedRk4) {
        return detail::evolve_rk4(h, psi0, times, opt);
    }
    return detail::evolve_dp45(h, psi0, times, opt);
}

inline EvolutionResult evolve(const TimeDependentHamiltonian &h, const StateVector &psi0,
                              std::span<const double> times, double tol) {
    EvolveOptions opt;
    opt.tol = tol;
    return evolve(h, psi0, times, opt);
}

}  // namespace qnw
