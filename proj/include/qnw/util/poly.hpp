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
#include <vector>

namespace qnw {

/// Dense polynomial sum_i c[i] u^i, meant for u in [-1, 1].
struct Poly {
    std::vector<double> c;

    static Poly constant(double v) {
        return Poly{{v}};
    }

    double operator()(double u) const {
        double acc = 0;
        for (size_t i = c.size(); i-- > 0;) {
            acc = acc * u + c[i];
        }
        return acc;
    }

    Poly derivative() const {
        if (c.size() <= 1) {
            return Poly{{0.0}};
        }
        Poly d;
        d.c.resize(c.size() - 1);
        for (size_t i = 1; i < c.size(); i++) {
            d.c[i - 1] = c[i] * static_cast<double>(i);
        }
        return d;
    }

    /// Antiderivative that vanishes at u = lo.
    Poly integral(double lo = -1.0) const {
        Poly p;
        p.c.assign(c.size() + 1, 0.0);
        for (size_t i = 0; i < c.size(); i++) {
            p.c[i + 1] = c[i] / static_cast<double>(i + 1);
        }
        p.c[0] = -p(lo);
        return p;
    }

    Poly &operator+=(const Poly &o) {
        c.resize(std::max(c.size(), o.c.size()), 0.0);
        for (size_t i = 0; i < o.c.size(); i++) {
            c[i] += o.c[i];
        }
        return *this;
    }

    Poly operator*(double s) const {
        Poly p = *this;
        for (double &v : p.c) {
            v *= s;
        }
        return p;
    }
};

/// Legendre polynomial P_n on [-1, 1] via the three-term recurrence.
inline Poly legendre(size_t n) {
    Poly p0{{1.0}};
    if (n == 0) {
        return p0;
    }
    Poly p1{{0.0, 1.0}};
    for (size_t k = 1; k < n; k++) {
        // (k+1) P_{k+1} = (2k+1) u P_k - k P_{k-1}
        Poly next;
        next.c.assign(k + 2, 0.0);
        for (size_t i = 0; i < p1.c.size(); i++) {
            next.c[i + 1] += static_cast<double>(2 * k + 1) * p1.c[i];
        }
        for (size_t i = 0; i < p0.c.size(); i++) {
            next.c[i] -= static_cast<double>(k) * p0.c[i];
        }
        for (double &v : next.c) {
            v /= static_cast<double>(k + 1);
        }
        p0 = std::move(p1);
        p1 = std::move(next);
    }
    return p1;
}

}  // namespace qnw
