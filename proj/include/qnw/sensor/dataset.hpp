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
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "qnw/sensor/model.hpp"
#include "qnw/sensor/params.hpp"
#include "qnw/sensor/shots.hpp"
#include "qnw/util/io.hpp"
#include "qnw/util/parallel.hpp"
#include "qnw/util/rng.hpp"
#include "qnw/version.hpp"

namespace qnw {

using json = nlohmann::ordered_json;

/// Rows are ordered (omega_tg index, xi index, repetition) with the
/// repetition varying fastest; the row number is the example index.
struct Dataset {
    std::vector<double> omega_tg_khz;
    std::vector<double> xi_khz;
    std::vector<uint32_t> rep;
    std::vector<uint64_t> seed;
    Eigen::MatrixXd features;

    size_t rows() const {
        return omega_tg_khz.size();
    }
    size_t n_points() const {
        return static_cast<size_t>(features.cols());
    }
    /// rows x 2 matrix of (omega_tg, xi) in kHz.
    Eigen::MatrixXd targets() const {
        Eigen::MatrixXd a(static_cast<Eigen::Index>(rows()), 2);
        for (size_t i = 0; i < rows(); i++) {
            a(static_cast<Eigen::Index>(i), 0) = omega_tg_khz[i];
            a(static_cast<Eigen::Index>(i), 1) = xi_khz[i];
        }
        return a;
    }
};

inline std::vector<double> feature_times(const DatasetSpec &spec, double t0_ms) {
    return linspace(spec.window_lo * t0_ms, spec.window_hi * t0_ms, spec.n_points);
}

using ProgressFn = std::function<void(size_t done, size_t total)>;

/// Simulates one noiseless trace per grid point and draws `repetitions`
/// shot-noise samples from it. Output is independent of `workers`.
inline Dataset generate_dataset(const DatasetSpec &spec, const SensorParams &p, size_t workers = 1,
                                const ProgressFn &progress = {}) {
    spec.validate();
    p.validate();
    if (!(p.t0_ms > 0)) {
        throw Error(ErrorKind::InvalidArgument, "t0 must be computed before generating a dataset");
    }
    const auto omegas = spec.omega_tg.points();
    const auto xis = spec.xi.points();
    const auto tfeat = feature_times(spec, p.t0_ms);
    std::vector<double> tsim;
    if (tfeat.front() > 0) {
        tsim.push_back(0.0);
    }
    tsim.insert(tsim.end(), tfeat.begin(), tfeat.end());
    const size_t offset = tsim.size() - tfeat.size();

    const size_t points = omegas.size() * xis.size();
    const size_t reps = spec.repetitions;
    Dataset d;
    const size_t n = points * reps;
    d.omega_tg_khz.resize(n);
    d.xi_khz.resize(n);
    d.rep.resize(n);
    d.seed.resize(n);
    d.features.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(spec.n_points));

    std::atomic<size_t> done{0};
    parallel_for(points, workers, [&](size_t g) {
        size_t io = g / xis.size();
        size_t ix = g % xis.size();
        SensorParams q = p;
        q.omega_tg_amp_khz = omegas[io];
        q.xi_khz = xis[ix];
        ResponseTrace trace;
        try {
            trace = simulate_response(q, tsim);
        } catch (const Error &e) {
            char buf[128];
            std::snprintf(buf, sizeof(buf), "grid point omega_tg=%.17g kHz, xi=%.17g kHz: ", omegas[io], xis[ix]);
            throw Error(e.kind(), buf + std::string(e.what()));
        }
        std::span<const double> pd(trace.pd.data() + offset, tfeat.size());
        for (size_t r = 0; r < reps; r++) {
            size_t row = g * reps + r;
            uint64_t s = mix_seed(spec.master_seed, row);
            auto shots = sample_shots(pd, spec.n_shots, s);
            d.omega_tg_khz[row] = omegas[io];
            d.xi_khz[row] = xis[ix];
            d.rep[row] = static_cast<uint32_t>(r);
            d.seed[row] = s;
            for (size_t k = 0; k < shots.size(); k++) {
                d.features(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(k)) = shots[k];
            }
        }
        size_t now = ++done;
        if (progress) {
            progress(now, points);
        }
    });
    return d;
}

inline std::string feature_column(size_t k) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "p_%03zu", k);
    return buf;
}

inline std::string dataset_to_csv(const Dataset &d) {
    std::string out = "omega_tg_khz,xi_khz,rep,seed";
    for (size_t k = 0; k < d.n_points(); k++) {
        out += ',';
        out += feature_column(k);
    }
    out += '\n';
    for (size_t i = 0; i < d.rows(); i++) {
        out += fmt17(d.omega_tg_khz[i]);
        out += ',';
        out += fmt17(d.xi_khz[i]);
        out += ',';
        out += std::to_string(d.rep[i]);
        out += ',';
        out += std::to_string(d.seed[i]);
        for (size_t k = 0; k < d.n_points(); k++) {
            out += ',';
            out += fmt17(d.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)));
        }
        out += '\n';
    }
    return out;
}

inline Dataset parse_dataset_csv(std::string_view text) {
    Dataset d;
    size_t pos = 0;
    size_t line_no = 0;
    size_t n_points = 0;
    std::vector<double> feats;
    while (pos < text.size()) {
        size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) {
            end = text.size();
        }
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        if (line.empty()) {
            continue;
        }
        auto fields = split_fields(line);
        if (line_no++ == 0) {
            if (fields.size() < 5 || fields[0] != "omega_tg_khz" || fields[1] != "xi_khz" || fields[2] != "rep" ||
                fields[3] != "seed") {
                throw Error(ErrorKind::IoError, "unexpected dataset header");
            }
            n_points = fields.size() - 4;
            continue;
        }
        if (fields.size() != n_points + 4) {
            throw Error(ErrorKind::IoError, "dataset row " + std::to_string(line_no) + " has " +
                                                std::to_string(fields.size()) + " fields");
        }
        bool ok = true;
        auto num = [&](std::string_view f) {
            double v = 0;
            auto res = std::from_chars(f.data(), f.data() + f.size(), v);
            ok = ok && res.ec == std::errc() && res.ptr == f.data() + f.size();
            return v;
        };
        auto uint = [&](std::string_view f) {
            uint64_t v = 0;
            auto res = std::from_chars(f.data(), f.data() + f.size(), v);
            ok = ok && res.ec == std::errc() && res.ptr == f.data() + f.size();
            return v;
        };
        d.omega_tg_khz.push_back(num(fields[0]));
        d.xi_khz.push_back(num(fields[1]));
        d.rep.push_back(static_cast<uint32_t>(uint(fields[2])));
        d.seed.push_back(uint(fields[3]));
        for (size_t k = 0; k < n_points; k++) {
            feats.push_back(num(fields[4 + k]));
        }
        if (!ok) {
            throw Error(ErrorKind::IoError, "malformed number in dataset row " + std::to_string(line_no));
        }
    }
    if (line_no == 0) {
        throw Error(ErrorKind::IoError, "dataset file is empty");
    }
    d.features = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        feats.data(), static_cast<Eigen::Index>(d.rows()), static_cast<Eigen::Index>(n_points));
    return d;
}

inline Dataset load_dataset(const std::filesystem::path &path) {
    return parse_dataset_csv(read_file(path));
}

inline json sensor_params_json(const SensorParams &p) {
    return json{
        {"omega_dress_khz", p.omega_dress_khz},
        {"omega_tg_amp_khz", p.omega_tg_amp_khz},
        {"xi_khz", p.xi_khz},
        {"omega_b_khz", p.omega_b_khz},
        {"delta2_khz", p.delta2_khz},
        {"t0_ms", p.t0_ms},
        {"drop_counter_rotating", p.drop_counter_rotating},
        {"integrator_tol", p.integrator_tol},
    };
}

inline json grid_json(const Grid &g) {
    return json{{"lo", g.lo}, {"hi", g.hi}, {"count", g.count}};
}

inline json dataset_spec_json(const DatasetSpec &s) {
    return json{
        {"omega_tg_khz", grid_json(s.omega_tg)},
        {"xi_khz", grid_json(s.xi)},
        {"repetitions", s.repetitions},
        {"n_points", s.n_points},
        {"n_shots", s.n_shots},
        {"window_t0_fraction", {s.window_lo, s.window_hi}},
        {"master_seed", s.master_seed},
        {"split", {s.frac_train, s.frac_validation, s.frac_test}},
    };
}

inline json dataset_manifest(const DatasetSpec &spec, const SensorParams &p, const std::string &csv) {
    return json{
        {"kind", "dataset"},
        {"code_version", kVersion},
        {"sensor_params", sensor_params_json(p)},
        {"dataset_spec", dataset_spec_json(spec)},
        {"rows", spec.rows()},
        {"prng", kRngName},
        {"seed_mix", kMixId},
        {"shot_rule", "success iff ((next() >> 11) * 2^-53) < p; shots drawn in feature order"},
        {"row_order", "omega_tg index, xi index, repetition (fastest); example_index = row number"},
        {"feature_times_ms", feature_times(spec, p.t0_ms)},
        {"csv_fnv1a64", hex64(fnv1a64(csv))},
    };
}

struct Split {
    std::vector<size_t> train;
    std::vector<size_t> validation;
    std::vector<size_t> test;
};

/// floor(v) that treats values within 1e-9 below an integer as that integer,
/// so 0.15 * 53020 counts as 7953.
inline size_t floor_count(double v) {
    return static_cast<size_t>(std::floor(v + 1e-9));
}

/// Shuffled partition: validation and test get floor(f * n) rows, train
/// gets the remainder. Index lists are returned sorted.
inline Split split_indices(size_t n, double f_train, double f_val, double f_test, uint64_t seed) {
    if (std::abs(f_train + f_val + f_test - 1.0) > 1e-9 || f_train < 0 || f_val < 0 || f_test < 0) {
        throw Error(ErrorKind::InvalidArgument, "split fractions must be non-negative and sum to 1");
    }
    std::vector<size_t> perm(n);
    for (size_t i = 0; i < n; i++) {
        perm[i] = i;
    }
    Rng rng(seed);
    shuffle(perm, rng);
    size_t n_val = floor_count(f_val * static_cast<double>(n));
    size_t n_test = floor_count(f_test * static_cast<double>(n));
    size_t n_train = n - n_val - n_test;
    Split s;
    s.train.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
    s.validation.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train),
                        perm.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
    s.test.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), perm.end());
    std::sort(s.train.begin(), s.train.end());
    std::sort(s.validation.begin(), s.validation.end());
    std::sort(s.test.begin(), s.test.end());
    return s;
}

inline json split_json(const Split &s, uint64_t seed) {
    return json{{"seed", seed}, {"train", s.train}, {"validation", s.validation}, {"test", s.test}};
}

inline Split split_from_json(const json &j) {
    try {
        Split s;
        s.train = j.at("train").get<std::vector<size_t>>();
        s.validation = j.at("validation").get<std::vector<size_t>>();
        s.test = j.at("test").get<std::vector<size_t>>();
        return s;
    } catch (const json::exception &e) {
        throw Error(ErrorKind::IoError, std::string("malformed split file: ") + e.what());
    }
}

inline std::filesystem::path split_path_for(const std::filesystem::path &dataset) {
    return dataset.parent_path() / "split.json";
}

/// Splits the rows of a dataset file and writes `split.json` next to it.
inline Split split_dataset(const std::filesystem::path &dataset, double f_train, double f_val, double f_test,
                           uint64_t seed) {
    auto d = load_dataset(dataset);
    auto s = split_indices(d.rows(), f_train, f_val, f_test, seed);
    write_file(split_path_for(dataset), split_json(s, seed).dump() + "\n");
    return s;
}

}  // namespace qnw
