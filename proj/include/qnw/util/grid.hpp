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

#include <charconv>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "qnw/error.hpp"

namespace qnw {

/// `n` points from lo to hi inclusive. The last point is exactly `hi`.
inline std::vector<double> linspace(double lo, double hi, size_t n) {
    std::vector<double> out(n);
    if (n == 1) {
        out[0] = lo;
        return out;
    }
    for (size_t i = 0; i < n; i++) {
        out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    out[n - 1] = hi;
    return out;
}

struct Interval {
    double lo = 0;
    double hi = 0;
    bool contains(double v) const {
        return v >= lo && v <= hi;
    }
};

struct Grid {
    double lo = 0;
    double hi = 0;
    size_t count = 1;
    std::vector<double> points() const {
        return linspace(lo, hi, count);
    }
    /// Grid spacing, or 0 for a single point.
    double spacing() const {
        return count > 1 ? (hi - lo) / static_cast<double>(count - 1) : 0.0;
    }
};

namespace detail {

inline std::vector<std::string_view> split_colon(std::string_view s) {
    std::vector<std::string_view> parts;
    size_t start = 0;
    while (true) {
        size_t k = s.find(':', start);
        parts.push_back(s.substr(start, k == std::string_view::npos ? std::string_view::npos : k - start));
        if (k == std::string_view::npos) {
            return parts;
        }
        start = k + 1;
    }
}

inline double parse_double(std::string_view s, std::string_view whole) {
    std::string tmp(s);
    size_t used = 0;
    double v = 0;
    try {
        v = std::stod(tmp, &used);
    } catch (const std::exception &) {
        used = 0;
    }
    if (used == 0 || used != tmp.size()) {
        throw Error(ErrorKind::BadConfig, "cannot parse number '" + tmp + "' in '" + std::string(whole) + "'");
    }
    return v;
}

}  // namespace detail

/// Parses `lo:hi`.
inline Interval parse_interval(std::string_view s) {
    auto parts = detail::split_colon(s);
    if (parts.size() != 2) {
        throw Error(ErrorKind::BadConfig, "expected interval lo:hi, got '" + std::string(s) + "'");
    }
    Interval r{detail::parse_double(parts[0], s), detail::parse_double(parts[1], s)};
    if (!(r.lo <= r.hi)) {
        throw Error(ErrorKind::BadConfig, "interval lower bound exceeds upper bound in '" + std::string(s) + "'");
    }
    return r;
}

/// Parses `lo:hi:count`.
inline Grid parse_grid(std::string_view s) {
    auto parts = detail::split_colon(s);
    if (parts.size() != 3) {
        throw Error(ErrorKind::BadConfig, "expected grid lo:hi:count, got '" + std::string(s) + "'");
    }
    Grid g;
    g.lo = detail::parse_double(parts[0], s);
    g.hi = detail::parse_double(parts[1], s);
    size_t count = 0;
    auto res = std::from_chars(parts[2].data(), parts[2].data() + parts[2].size(), count);
    if (res.ec != std::errc() || res.ptr != parts[2].data() + parts[2].size() || count == 0) {
        throw Error(ErrorKind::BadConfig, "grid count must be a positive integer in '" + std::string(s) + "'");
    }
    if (!(g.lo <= g.hi)) {
        throw Error(ErrorKind::BadConfig, "grid lower bound exceeds upper bound in '" + std::string(s) + "'");
    }
    g.count = count;
    return g;
}

}  // namespace qnw
