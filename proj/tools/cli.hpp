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
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "qnw/perceptron/protocols.hpp"
#include "qnw/sensor/params.hpp"
#include "qnw/util/io.hpp"
#include "qnw/util/rng.hpp"
#include "qnw/version.hpp"

namespace qnw::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

/// Output directory of one command. Every file written through `write` is
/// listed with its size and hash in the manifest.
class RunDir {
   public:
    explicit RunDir(fs::path dir) : dir_(std::move(dir)) {
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec) {
            throw Error(ErrorKind::IoError, "cannot create " + dir_.string() + ": " + ec.message());
        }
    }

    const fs::path &path() const {
        return dir_;
    }

    void write(const std::string &name, const std::string &content) {
        write_file(dir_ / name, content);
        outputs_.push_back({{"file", name}, {"bytes", content.size()}, {"fnv1a64", hex64(fnv1a64(content))}});
    }

    void write_json(const std::string &name, const json &j) {
        write(name, j.dump(2) + "\n");
    }

    /// Writes manifest.json. `extra` keys are merged in after the standard ones.
    void finish(const std::string &command, const json &config, const json &extra = json::object()) {
        json m;
        m["kind"] = "run_manifest";
        m["command"] = command;
        m["code_version"] = kVersion;
        m["prng"] = kRngName;
        m["seed_mix"] = kMixId;
        m["config"] = config;
        for (const auto &[k, v] : extra.items()) {
            m[k] = v;
        }
        m["outputs"] = outputs_;
        write_file(dir_ / "manifest.json", m.dump(2) + "\n");
    }

   private:
    fs::path dir_;
    json outputs_ = json::array();
};

inline void progress(const std::string &line) {
    std::cerr << line << '\n';
}

inline void add_sensor_options(CLI::App *app, SensorParams &p) {
    app->add_option("--omega-dress", p.omega_dress_khz, "Dressing Rabi frequency (kHz)")->capture_default_str();
    app->add_option("--omega-b", p.omega_b_khz, "Zeeman splitting omega_B (kHz)")->capture_default_str();
    app->add_option("--delta2", p.delta2_khz, "Second-order Zeeman asymmetry (kHz)")->capture_default_str();
    app->add_option("--integrator-tol", p.integrator_tol, "Integrator local error target")->capture_default_str();
    app->add_flag("--drop-counter-rotating", p.drop_counter_rotating, "Keep only the co-rotating target drive");
    app->add_option("--t0", p.t0_ms, "Reference period in ms (0 = fit it)")->capture_default_str();
}

struct GateArgs {
    GateSettings s;
    std::optional<double> adiabatic_omega0;
};

inline void add_gate_options(CLI::App *app, GateArgs &g) {
    app->add_option("--omega0", g.s.omega0, "Omega(0) in units of omega_f")->capture_default_str();
    app->add_option("--omegaf", g.s.omegaf, "Omega(t_f), sets the activation scale")->capture_default_str();
    app->add_option("--tf", g.s.tf, "Gate time in units of 1/omega_f")->capture_default_str();
    app->add_option("--order", g.s.sta.order, "Ansatz order (Legendre modes)")->capture_default_str();
    app->add_option("--samples", g.s.sta.samples, "Pulse samples on [0, tf]")->capture_default_str();
    app->add_option("--beta-tol", g.s.sta.beta_tol, "Allowed |beta(tf)| in rad")->capture_default_str();
    app->add_option("--tol", g.s.gate.tol, "Integrator local error target")->capture_default_str();
    app->add_option("--adiabatic-omega0", g.adiabatic_omega0,
                    "Starting field of the adiabatic ramp (default 10 max(|x|, omegaf))");
}

inline GateSettings gate_settings(const GateArgs &g) {
    GateSettings s = g.s;
    s.adiabatic_omega0 = g.adiabatic_omega0;
    return s;
}

inline json gate_json(const GateSettings &s) {
    json j{{"omega0", s.omega0},   {"omegaf", s.omegaf},       {"tf", s.tf},
           {"order", s.sta.order}, {"samples", s.sta.samples}, {"beta_tol", s.sta.beta_tol},
           {"tol", s.gate.tol}};
    j["adiabatic_omega0"] = s.adiabatic_omega0 ? json(*s.adiabatic_omega0) : json("default 10*max(|x|,omegaf)");
    return j;
}

inline json sensor_json(const SensorParams &p) {
    return {{"omega_dress_khz", p.omega_dress_khz}, {"omega_b_khz", p.omega_b_khz},
            {"delta2_khz", p.delta2_khz},           {"integrator_tol", p.integrator_tol},
            {"drop_counter_rotating", p.drop_counter_rotating}, {"t0_ms", p.t0_ms}};
}

/// Comma-separated positive sizes such as `40,20,12`.
inline std::vector<size_t> parse_sizes(const std::string &text, const std::string &flag) {
    std::vector<size_t> out;
    for (auto f : split_fields(text, ',')) {
        size_t v = 0;
        auto [end, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
        if (ec != std::errc() || end != f.data() + f.size() || v == 0) {
            throw Error(ErrorKind::BadConfig, flag + " expects comma-separated positive integers, got '" + text + "'");
        }
        out.push_back(v);
    }
    return out;
}

/// Parses a JSON file, mapping failures to IoError.
inline json read_json(const fs::path &path) {
    try {
        return json::parse(read_file(path));
    } catch (const json::exception &e) {
        throw Error(ErrorKind::IoError, path.string() + ": " + e.what());
    }
}

void add_sensor_commands(CLI::App &app);
void add_nn_commands(CLI::App &app);
void add_perceptron_commands(CLI::App &app);
void add_qnn_commands(CLI::App &app);
void add_report_command(CLI::App &app);

/// Splices `--key value` pairs from a TOML-style config file into the
/// argument list, ahead of the user's own flags so that flags win.
std::vector<std::string> expand_config(CLI::App &app, std::vector<std::string> args);

}  // namespace qnw::cli
