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
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "qnw/error.hpp"
#include "qnw/util/io.hpp"

namespace qnw {

struct OutputMetrics {
    /// Pearson correlation; absent when either side has zero variance.
    std::optional<double> r;
    /// Least-squares fit y = alpha a + b_fit; absent when the targets are constant.
    std::optional<double> alpha;
    std::optional<double> b_fit;
    /// 1 - mean |y - a| / |a|. Non-finite when a target is 0.
    double f_raw = 0;
    /// 1 - mean |y - a| / max(|a|, eps_a).
    double f_guarded = 0;
    double eps_a = 0;
    double mse = 0;
};

struct Metrics {
    std::vector<OutputMetrics> outputs;
    double mse = 0;
    size_t samples = 0;
};

/// Scores predictions `y` against targets `a` (both samples x outputs, in
/// physical units). `eps_a` holds the accuracy guard of each output.
inline Metrics evaluate(const Eigen::MatrixXd &y, const Eigen::MatrixXd &a, const std::vector<double> &eps_a) {
    if (y.rows() != a.rows() || y.cols() != a.cols()) {
        throw Error(ErrorKind::ShapeMismatch, "prediction and target shapes differ");
    }
    if (a.rows() == 0) {
        throw Error(ErrorKind::InvalidArgument, "cannot evaluate an empty set");
    }
    if (eps_a.size() != static_cast<size_t>(a.cols())) {
        throw Error(ErrorKind::ShapeMismatch, "need one accuracy guard per output");
    }
    Metrics m;
    m.samples = static_cast<size_t>(a.rows());
    const double n = static_cast<double>(a.rows());
    m.mse = (y - a).squaredNorm() / static_cast<double>(a.size());
    for (Eigen::Index k = 0; k < a.cols(); k++) {
        OutputMetrics o;
        const Eigen::ArrayXd av = a.col(k).array(), yv = y.col(k).array();
        const double ma = av.mean(), my = yv.mean();
        const Eigen::ArrayXd da = av - ma, dy = yv - my;
        const double saa = da.square().sum(), syy = dy.square().sum(), say = (da * dy).sum();
        if (saa > 0) {
            o.alpha = say / saa;
            o.b_fit = my - *o.alpha * ma;
            if (syy > 0) {
                o.r = std::clamp(say / std::sqrt(saa * syy), -1.0, 1.0);
            }
        }
        const Eigen::ArrayXd err = (yv - av).abs();
        o.eps_a = eps_a[static_cast<size_t>(k)];
        o.f_raw = 1.0 - (err / av.abs()).sum() / n;
        o.f_guarded = 1.0 - (err / av.abs().max(o.eps_a)).sum() / n;
        o.mse = (yv - av).square().mean();
        m.outputs.push_back(o);
    }
    return m;
}

/// Half of the smallest positive gap between distinct values, or 0.
inline double half_grid_spacing(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    double gap = 0;
    for (size_t i = 1; i < v.size(); i++) {
        double d = v[i] - v[i - 1];
        if (d > 1e-12 && (gap == 0 || d < gap)) {
            gap = d;
        }
    }
    return 0.5 * gap;
}

inline std::string opt_str(const std::optional<double> &v) {
    return v ? fmt17(*v) : std::string();
}

inline std::string metrics_csv_header() {
    return "interval_lo,interval_hi,output,R,alpha,b_fit,F_raw,F_guarded,mse\n";
}

/// Metrics CSV rows for one interval. Absent values are empty fields.
inline std::string metrics_csv_rows(double lo, double hi, const Metrics &m, const std::vector<std::string> &names) {
    std::ostringstream os;
    for (size_t k = 0; k < m.outputs.size(); k++) {
        const auto &o = m.outputs[k];
        os << fmt17(lo) << ',' << fmt17(hi) << ',' << (k < names.size() ? names[k] : std::to_string(k)) << ','
           << opt_str(o.r) << ',' << opt_str(o.alpha) << ',' << opt_str(o.b_fit) << ',' << fmt17(o.f_raw) << ','
           << fmt17(o.f_guarded) << ',' << fmt17(o.mse) << '\n';
    }
    return os.str();
}

}  // namespace qnw
