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
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "qnw/error.hpp"
#include "qnw/util/rng.hpp"

namespace qnw {

/// Input layer 101, hidden 40 20 12 6 3, output 2.
inline const std::vector<size_t> &default_layer_sizes() {
    static const std::vector<size_t> sizes{101, 40, 20, 12, 6, 3, 2};
    return sizes;
}

/// Fully connected feed-forward net: tanh on hidden layers, identity on the
/// output. Samples are columns.
struct Network {
    std::vector<size_t> sizes;
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;

    static Network zeros(std::vector<size_t> sizes) {
        if (sizes.size() < 2) {
            throw Error(ErrorKind::ShapeMismatch, "a network needs at least an input and an output layer");
        }
        Network n;
        for (size_t s : sizes) {
            if (s == 0) {
                throw Error(ErrorKind::ShapeMismatch, "layer sizes must be positive");
            }
        }
        n.sizes = std::move(sizes);
        for (size_t l = 1; l < n.sizes.size(); l++) {
            n.weights.push_back(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n.sizes[l]),
                                                      static_cast<Eigen::Index>(n.sizes[l - 1])));
            n.biases.push_back(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n.sizes[l])));
        }
        return n;
    }

    /// Uniform weights in +-sqrt(6 / (fan_in + fan_out)), zero biases. Draws
    /// run layer by layer over W in row-major order.
    static Network xavier(std::vector<size_t> sizes, uint64_t seed) {
        Network n = zeros(std::move(sizes));
        Rng rng(seed);
        for (auto &w : n.weights) {
            const double lim = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
            for (Eigen::Index i = 0; i < w.rows(); i++) {
                for (Eigen::Index j = 0; j < w.cols(); j++) {
                    w(i, j) = uniform(rng, -lim, lim);
                }
            }
        }
        return n;
    }

    size_t inputs() const {
        return sizes.front();
    }
    size_t outputs() const {
        return sizes.back();
    }
    size_t layers() const {
        return weights.size();
    }

    size_t parameter_count() const {
        size_t p = 0;
        for (size_t l = 1; l < sizes.size(); l++) {
            p += sizes[l] * (sizes[l - 1] + 1);
        }
        return p;
    }

    void validate() const {
        if (sizes.size() < 2 || weights.size() != sizes.size() - 1 || biases.size() != weights.size()) {
            throw Error(ErrorKind::ShapeMismatch, "layer count does not match the size list");
        }
        for (size_t l = 0; l < weights.size(); l++) {
            if (static_cast<size_t>(weights[l].rows()) != sizes[l + 1] ||
                static_cast<size_t>(weights[l].cols()) != sizes[l] ||
                static_cast<size_t>(biases[l].size()) != sizes[l + 1]) {
                throw Error(ErrorKind::ShapeMismatch, "layer " + std::to_string(l + 1) + " has the wrong shape");
            }
        }
    }

    /// Flattened parameters: per layer, W row-major, then b.
    Eigen::VectorXd parameters() const {
        Eigen::VectorXd p(static_cast<Eigen::Index>(parameter_count()));
        Eigen::Index k = 0;
        for (size_t l = 0; l < weights.size(); l++) {
            for (Eigen::Index i = 0; i < weights[l].rows(); i++) {
                for (Eigen::Index j = 0; j < weights[l].cols(); j++) {
                    p[k++] = weights[l](i, j);
                }
            }
            for (Eigen::Index i = 0; i < biases[l].size(); i++) {
                p[k++] = biases[l][i];
            }
        }
        return p;
    }

    void set_parameters(const Eigen::VectorXd &p) {
        if (static_cast<size_t>(p.size()) != parameter_count()) {
            throw Error(ErrorKind::ShapeMismatch, "parameter vector has length " + std::to_string(p.size()) +
                                                      ", expected " + std::to_string(parameter_count()));
        }
        Eigen::Index k = 0;
        for (size_t l = 0; l < weights.size(); l++) {
            for (Eigen::Index i = 0; i < weights[l].rows(); i++) {
                for (Eigen::Index j = 0; j < weights[l].cols(); j++) {
                    weights[l](i, j) = p[k++];
                }
            }
            for (Eigen::Index i = 0; i < biases[l].size(); i++) {
                biases[l][i] = p[k++];
            }
        }
    }

    /// Outputs for the columns of `x` (inputs x samples).
    Eigen::MatrixXd forward(const Eigen::MatrixXd &x) const {
        if (static_cast<size_t>(x.rows()) != inputs()) {
            throw Error(ErrorKind::ShapeMismatch, "expected " + std::to_string(inputs()) + " features, got " +
                                                      std::to_string(x.rows()));
        }
        Eigen::MatrixXd a = x;
        for (size_t l = 0; l < weights.size(); l++) {
            Eigen::MatrixXd z = weights[l] * a;
            z.colwise() += biases[l];
            if (l + 1 < weights.size()) {
                a = z.array().tanh().matrix();
            } else {
                a = std::move(z);
            }
        }
        return a;
    }
};

/// Per-component affine map onto [-1, 1] from a [lo, hi] range. A component
/// with hi == lo is shifted by lo only, which keeps the map invertible.
struct AffineMap {
    std::vector<double> lo;
    std::vector<double> hi;

    size_t size() const {
        return lo.size();
    }

    /// Range of each column of `rows` (samples x components) over `index`.
    static AffineMap fit(const Eigen::MatrixXd &rows, std::span<const size_t> index) {
        if (index.empty()) {
            throw Error(ErrorKind::InvalidArgument, "normalization needs at least one sample");
        }
        AffineMap m;
        const auto d = static_cast<size_t>(rows.cols());
        m.lo.assign(d, std::numeric_limits<double>::infinity());
        m.hi.assign(d, -std::numeric_limits<double>::infinity());
        for (size_t i : index) {
            for (size_t c = 0; c < d; c++) {
                double v = rows(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c));
                m.lo[c] = std::min(m.lo[c], v);
                m.hi[c] = std::max(m.hi[c], v);
            }
        }
        return m;
    }

    double to_unit(size_t c, double v) const {
        const double w = hi[c] - lo[c];
        return w > 0 ? 2.0 * (v - lo[c]) / w - 1.0 : v - lo[c];
    }
    double from_unit(size_t c, double u) const {
        const double w = hi[c] - lo[c];
        return w > 0 ? lo[c] + 0.5 * (u + 1.0) * w : u + lo[c];
    }

    /// Normalized columns (components x samples) for the selected rows.
    Eigen::MatrixXd columns(const Eigen::MatrixXd &rows, std::span<const size_t> index) const {
        if (static_cast<size_t>(rows.cols()) != size()) {
            throw Error(ErrorKind::ShapeMismatch, "normalization expects " + std::to_string(size()) + " components");
        }
        Eigen::MatrixXd out(static_cast<Eigen::Index>(size()), static_cast<Eigen::Index>(index.size()));
        for (size_t s = 0; s < index.size(); s++) {
            for (size_t c = 0; c < size(); c++) {
                out(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(s)) =
                    to_unit(c, rows(static_cast<Eigen::Index>(index[s]), static_cast<Eigen::Index>(c)));
            }
        }
        return out;
    }

    /// Inverse of `columns`, returned as rows (samples x components).
    Eigen::MatrixXd rows_from_unit(const Eigen::MatrixXd &cols) const {
        Eigen::MatrixXd out(cols.cols(), cols.rows());
        for (Eigen::Index s = 0; s < cols.cols(); s++) {
            for (Eigen::Index c = 0; c < cols.rows(); c++) {
                out(s, c) = from_unit(static_cast<size_t>(c), cols(c, s));
            }
        }
        return out;
    }
};

/// A trained estimator: network plus the feature and target maps.
struct Model {
    Network net;
    AffineMap features;
    AffineMap targets;

    /// Physical-unit predictions for raw feature rows (samples x features).
    Eigen::MatrixXd predict(const Eigen::MatrixXd &rows) const {
        std::vector<size_t> all(static_cast<size_t>(rows.rows()));
        for (size_t i = 0; i < all.size(); i++) {
            all[i] = i;
        }
        return targets.rows_from_unit(net.forward(features.columns(rows, all)));
    }
};

/// Transposed Jacobian of the outputs with respect to the flattened
/// parameters for a block of samples (columns of `x`): column s * n_out + k
/// holds d y_k(x_s) / d params. Also returns the outputs in `y`.
inline void jacobian_block(const Network &net, const Eigen::MatrixXd &x, Eigen::MatrixXd &jt, Eigen::MatrixXd &y) {
    const size_t L = net.layers();
    const Eigen::Index b = x.cols();
    const auto n_out = static_cast<Eigen::Index>(net.outputs());
    std::vector<Eigen::MatrixXd> acts(L + 1);
    acts[0] = x;
    for (size_t l = 0; l < L; l++) {
        Eigen::MatrixXd z = net.weights[l] * acts[l];
        z.colwise() += net.biases[l];
        acts[l + 1] = (l + 1 < L) ? Eigen::MatrixXd(z.array().tanh().matrix()) : z;
    }
    y = acts[L];

    std::vector<Eigen::Index> offset(L);
    Eigen::Index p = 0;
    for (size_t l = 0; l < L; l++) {
        offset[l] = p;
        p += net.weights[l].size() + net.biases[l].size();
    }
    jt.resize(p, b * n_out);

    for (Eigen::Index k = 0; k < n_out; k++) {
        Eigen::MatrixXd delta = Eigen::MatrixXd::Zero(n_out, b);
        delta.row(k).setOnes();
        for (size_t l = L; l-- > 0;) {
            const Eigen::MatrixXd &a = acts[l];
            const Eigen::Index rows = net.weights[l].rows(), cols = net.weights[l].cols();
            for (Eigen::Index s = 0; s < b; s++) {
                double *col = jt.col(s * n_out + k).data() + offset[l];
                for (Eigen::Index i = 0; i < rows; i++) {
                    Eigen::Map<Eigen::VectorXd>(col + i * cols, cols) = delta(i, s) * a.col(s);
                }
                col += rows * cols;
                for (Eigen::Index i = 0; i < rows; i++) {
                    col[i] = delta(i, s);
                }
            }
            if (l > 0) {
                Eigen::MatrixXd back = net.weights[l].transpose() * delta;
                delta = (back.array() * (1.0 - a.array().square())).matrix();
            }
        }
    }
}

}  // namespace qnw
