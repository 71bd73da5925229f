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
#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "qnw/core/evolve.hpp"
#include "qnw/sensor/params.hpp"
#include "qnw/util/grid.hpp"

// Four-level sensor: the 0 / +1 / -1 levels of one hyperfine manifold are
// dressed by two microwave drives of Rabi frequency omega_dress (taken in
// their rotating frame), and the weak target field couples 0' to +1 and -1.
// The frame rotates at the bare transition frequencies, so the target term
// keeps its full oscillation at omega_tg = omega_b + xi.
//
//   H(t) = (W/2)(|+1><0| + |-1><0| + h.c.)
//        + A cos(w_tg t) [e^{i w_p t}|+1><0'| + e^{-i w_m t}|-1><0'| + h.c.]
//
// with w_p = omega_b and w_m = omega_b - 2 delta2. The resonant part of the
// |+1><0'| term has matrix element A/2, hence |<D|H|0'>| = A / (2 sqrt 2).

namespace qnw {

namespace sensor_level {
inline constexpr Eigen::Index zero = 0;
inline constexpr Eigen::Index zero_prime = 1;
inline constexpr Eigen::Index plus_one = 2;
inline constexpr Eigen::Index minus_one = 3;
}  // namespace sensor_level

inline Labels sensor_labels() {
    static const Labels labels = make_labels({"0", "0'", "+1", "-1"});
    return labels;
}

/// Dark state |D> = (|-1> - |+1>) / sqrt 2.
inline StateVector dark_state() {
    CVector a = CVector::Zero(4);
    a[sensor_level::minus_one] = M_SQRT1_2;
    a[sensor_level::plus_one] = -M_SQRT1_2;
    return StateVector(sensor_labels(), a);
}

namespace detail {

inline SparseCMatrix coupling(Eigen::Index a, Eigen::Index b, cplx value) {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(4, 4);
    m(a, b) = value;
    m(b, a) = std::conj(value);
    return to_sparse(m);
}

}  // namespace detail

inline TimeDependentHamiltonian sensor_hamiltonian(const SensorParams &p) {
    p.validate();
    using namespace sensor_level;
    TimeDependentHamiltonian h(4);
    const double w = angular(p.omega_dress_khz);
    SparseCMatrix dress = detail::coupling(plus_one, zero, 0.5 * w) + detail::coupling(minus_one, zero, 0.5 * w);
    h.add_term(dress);

    const double amp = angular(p.omega_tg_amp_khz);
    if (amp == 0.0) {
        return h;
    }
    const double w_tg = angular(p.omega_tg_khz());
    const double w_p = angular(p.omega_b_khz);
    const double w_m = angular(p.omega_b_khz - 2.0 * p.delta2_khz);
    SparseCMatrix xp = detail::coupling(plus_one, zero_prime, amp);
    SparseCMatrix yp = detail::coupling(plus_one, zero_prime, cplx(0, amp));
    SparseCMatrix xm = detail::coupling(minus_one, zero_prime, amp);
    SparseCMatrix ym = detail::coupling(minus_one, zero_prime, cplx(0, amp));

    if (p.drop_counter_rotating) {
        const double dp = w_p - w_tg;
        const double dm = w_m - w_tg;
        h.add_term(xp, [dp](double t) { return 0.5 * std::cos(dp * t); });
        h.add_term(yp, [dp](double t) { return 0.5 * std::sin(dp * t); });
        h.add_term(xm, [dm](double t) { return 0.5 * std::cos(dm * t); });
        h.add_term(ym, [dm](double t) { return -0.5 * std::sin(dm * t); });
    } else {
        h.add_term(xp, [w_tg, w_p](double t) { return std::cos(w_tg * t) * std::cos(w_p * t); });
        h.add_term(yp, [w_tg, w_p](double t) { return std::cos(w_tg * t) * std::sin(w_p * t); });
        h.add_term(xm, [w_tg, w_m](double t) { return std::cos(w_tg * t) * std::cos(w_m * t); });
        h.add_term(ym, [w_tg, w_m](double t) { return -std::cos(w_tg * t) * std::sin(w_m * t); });
    }
    return h;
}

struct ResponseTrace {
    std::vector<double> times;
    std::vector<double> pd;
    double norm_drift = 0;
    size_t steps = 0;
};

inline constexpr double kProbabilitySlack = 1e-9;

/// P_D(t) = |<D|psi(t)>|^2 starting from |D> at t = 0.
inline ResponseTrace simulate_response(const SensorParams &p, std::span<const double> times) {
    if (times.empty() || times.front() != 0.0) {
        throw Error(ErrorKind::InvalidArgument, "response time grid must start at 0");
    }
    auto h = sensor_hamiltonian(p);
    auto dark = dark_state();
    EvolveOptions opt;
    opt.tol = p.integrator_tol;
    // The bound tol * steps from the unitarity contract, with the step count
    // of a run being unknown up front; the run is checked against it below.
    opt.max_norm_drift = 1.0;
    auto r = evolve(h, dark, times, opt);
    if (r.norm_drift > p.integrator_tol * static_cast<double>(std::max<size_t>(r.steps, 1))) {
        throw Error(ErrorKind::NormDriftExceeded, "sensor norm drift " + std::to_string(r.norm_drift) + " over " +
                                                      std::to_string(r.steps) + " steps");
    }
    ResponseTrace trace;
    trace.times.assign(times.begin(), times.end());
    trace.pd.reserve(times.size());
    for (const auto &s : r.states) {
        double v = fidelity(s, dark);
        trace.pd.push_back(v);
    }
    trace.norm_drift = r.norm_drift;
    trace.steps = r.steps;
    return trace;
}

/// Two-level Rabi response of the |D> <-> |0'> pair, coupling
/// g = 2 pi A / (2 sqrt 2) and detuning 2 pi xi. Arguments in kHz and ms.
inline double effective_pd(double omega_tg_amp_khz, double xi_khz, double t_ms) {
    const double g = angular(omega_tg_amp_khz) / (2.0 * M_SQRT2);
    const double d = 0.5 * angular(xi_khz);
    const double r2 = g * g + d * d;
    if (r2 == 0.0) {
        return 1.0;
    }
    const double s = std::sin(std::sqrt(r2) * t_ms);
    return 1.0 - g * g / r2 * s * s;
}

/// Period of the resonant response predicted by `effective_pd`.
inline double analytic_period(double omega_tg_amp_khz) {
    return M_PI / (angular(omega_tg_amp_khz) / (2.0 * M_SQRT2));
}

inline constexpr double kReferenceAmplitudeKhz = 1.0;

struct PeriodFit {
    double t0 = 0;
    double analytic = 0;
    ResponseTrace trace;
};

/// Locates the first return of P_D to its maximum for the reference drive
/// (amplitude `reference_khz`, xi = 0) by a quadratic least-squares fit
/// around the largest sample after the first minimum.
inline PeriodFit fit_reference_period(const SensorParams &p, double reference_khz = kReferenceAmplitudeKhz,
                                      size_t samples = 1601, double horizon_factor = 1.6) {
    SensorParams q = p;
    q.omega_tg_amp_khz = reference_khz;
    q.xi_khz = 0.0;
    q.validate();
    if (!(reference_khz > 0)) {
        throw Error(ErrorKind::FitFailed, "reference amplitude must be positive");
    }
    PeriodFit fit;
    fit.analytic = analytic_period(reference_khz);
    const double horizon = horizon_factor * fit.analytic;
    auto times = linspace(0.0, horizon, samples);
    fit.trace = simulate_response(q, times);
    const auto &pd = fit.trace.pd;

    // Bracket the first returning peak: the trace falls below the midline
    // between its extremes, rises above it again, and peaks before falling
    // below it a second time.
    const double lo = *std::min_element(pd.begin(), pd.end());
    const double mid = 0.5 * (1.0 + lo);
    size_t i = 0;
    while (i < pd.size() && pd[i] >= mid) {
        i++;
    }
    const size_t imin = i;
    while (i < pd.size() && pd[i] < mid) {
        i++;
    }
    const size_t rise = i;
    while (i < pd.size() && pd[i] >= mid) {
        i++;
    }
    if (1.0 - lo < 0.5 || rise >= pd.size() || i >= pd.size()) {
        throw Error(ErrorKind::FitFailed, "no return to maximum within " + std::to_string(horizon) + " ms");
    }
    const size_t imax = static_cast<size_t>(
        std::max_element(pd.begin() + static_cast<std::ptrdiff_t>(rise), pd.begin() + static_cast<std::ptrdiff_t>(i)) -
        pd.begin());
    // Quadratic fit over a window of +-5% of the analytic period.
    const double half = 0.05 * fit.analytic;
    Eigen::Matrix3d ata = Eigen::Matrix3d::Zero();
    Eigen::Vector3d atb = Eigen::Vector3d::Zero();
    const double tc = times[imax];
    size_t used = 0;
    for (size_t i = imin; i < pd.size(); i++) {
        double u = times[i] - tc;
        if (std::abs(u) > half) {
            continue;
        }
        Eigen::Vector3d row(1.0, u, u * u);
        ata += row * row.transpose();
        atb += row * pd[i];
        used++;
    }
    if (used < 5) {
        throw Error(ErrorKind::FitFailed, "too few samples around the returning maximum");
    }
    Eigen::Vector3d c = ata.ldlt().solve(atb);
    if (!(c[2] < 0)) {
        throw Error(ErrorKind::FitFailed, "returning extremum is not a maximum");
    }
    double shift = -c[1] / (2.0 * c[2]);
    if (std::abs(shift) > half) {
        throw Error(ErrorKind::FitFailed, "fitted maximum outside the fit window");
    }
    fit.t0 = tc + shift;
    return fit;
}

/// t0 for the parameters `p` at the reference point (1 kHz, xi = 0).
inline double reference_period(const SensorParams &p) {
    return fit_reference_period(p).t0;
}

}  // namespace qnw
