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

#include <algorithm>
#include <iostream>
#include <sstream>

#include "cli.hpp"

namespace qnw::cli {

namespace {

std::string trim(const std::string &s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return "";
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string unquote(std::string v) {
    if (v.size() >= 2 && ((v.front() == '"' && v.back() == '"') || (v.front() == '\'' && v.back() == '\''))) {
        return v.substr(1, v.size() - 2);
    }
    if (v.size() >= 2 && v.front() == '[' && v.back() == ']') {
        std::string inner = v.substr(1, v.size() - 2), out;
        std::istringstream is(inner);
        std::string item;
        while (std::getline(is, item, ',')) {
            if (!out.empty()) {
                out += ',';
            }
            out += unquote(trim(item));
        }
        return out;
    }
    return v;
}

/// Subcommand addressed by a dotted section name such as `nn.train`.
CLI::App *find_section(CLI::App &app, const std::string &section) {
    CLI::App *cur = &app;
    std::istringstream is(section);
    std::string part;
    while (std::getline(is, part, '.')) {
        cur = cur->get_subcommand_no_throw(trim(part));
        if (!cur) {
            return nullptr;
        }
    }
    return cur;
}

bool any_leaf_has(CLI::App *app, const std::string &name) {
    if (app->get_option_no_throw(name)) {
        return true;
    }
    for (auto *sub : app->get_subcommands([](CLI::App *) { return true; })) {
        if (any_leaf_has(sub, name)) {
            return true;
        }
    }
    return false;
}

}  // namespace

std::vector<std::string> expand_config(CLI::App &app, std::vector<std::string> args) {
    std::optional<std::string> config;
    for (size_t i = 0; i < args.size(); i++) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            config = args[i + 1];
            args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i + 2));
            break;
        }
        if (args[i].rfind("--config=", 0) == 0) {
            config = args[i].substr(9);
            args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
            break;
        }
    }

    // Walk the leading subcommand names.
    CLI::App *cur = &app;
    size_t depth = 0;
    std::string chain;
    while (depth < args.size()) {
        CLI::App *next = cur->get_subcommand_no_throw(args[depth]);
        if (!next) {
            break;
        }
        chain += (chain.empty() ? "" : ".") + args[depth];
        cur = next;
        depth++;
    }
    const bool wants_help = std::any_of(args.begin(), args.end(), [](const std::string &a) {
        return a == "-h" || a == "--help" || a == "--help-all" || a == "--version";
    });
    if (!wants_help && !cur->get_subcommands([](CLI::App *) { return true; }).empty()) {
        if (depth < args.size() && !args[depth].empty() && args[depth][0] != '-') {
            throw Error(ErrorKind::UnknownCommand, "unknown command '" + args[depth] + "'" +
                                                       (chain.empty() ? "" : " under '" + chain + "'"));
        }
        throw Error(ErrorKind::UnknownCommand, chain.empty() ? "missing command" : "'" + chain + "' needs a subcommand");
    }
    if (!config) {
        return args;
    }

    std::vector<std::string> injected;
    std::istringstream is(read_file(*config));
    std::string line, section;
    size_t line_no = 0;
    while (std::getline(is, line)) {
        line_no++;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const std::string where = *config + ":" + std::to_string(line_no);
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw Error(ErrorKind::BadConfig, where + ": malformed section header");
            }
            section = trim(line.substr(1, line.size() - 2));
            if (!find_section(app, section)) {
                throw Error(ErrorKind::BadConfig, where + ": unknown section [" + section + "]");
            }
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw Error(ErrorKind::BadConfig, where + ": expected key = value");
        }
        std::string key = trim(line.substr(0, eq));
        std::replace(key.begin(), key.end(), '_', '-');
        const std::string value = unquote(trim(line.substr(eq + 1)));
        const std::string name = "--" + key;
        CLI::App *target = section.empty() ? nullptr : find_section(app, section);
        if (target) {
            if (!target->get_option_no_throw(name)) {
                throw Error(ErrorKind::BadConfig, where + ": [" + section + "] has no key '" + key + "'");
            }
            if (target != cur) {
                continue;
            }
        } else if (!any_leaf_has(&app, name)) {
            throw Error(ErrorKind::BadConfig, where + ": unknown key '" + key + "'");
        } else if (!cur->get_option_no_throw(name)) {
            continue;
        }
        injected.push_back(name + "=" + value);
    }
    std::vector<std::string> out(args.begin(), args.begin() + static_cast<std::ptrdiff_t>(depth));
    out.insert(out.end(), injected.begin(), injected.end());
    out.insert(out.end(), args.begin() + static_cast<std::ptrdiff_t>(depth), args.end());
    return out;
}

}  // namespace qnw::cli

int main(int argc, char **argv) {
    using namespace qnw;
    CLI::App app{"Quantum perceptron, sensor simulation and neural-network estimation toolkit", "qnw"};
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.set_version_flag("--version", kVersion);
    app.add_option("--config", "TOML-style `key = value` file with optional [command.subcommand] sections; flags win");
    app.require_subcommand(1);
    cli::add_sensor_commands(app);
    cli::add_nn_commands(app);
    cli::add_perceptron_commands(app);
    cli::add_qnn_commands(app);
    cli::add_report_command(app);

    try {
        std::vector<std::string> args(argv + 1, argv + argc);
        args = cli::expand_config(app, std::move(args));
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp &e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        std::cerr << "BadConfig: " << e.what() << '\n';
        return 1;
    } catch (const Error &e) {
        std::cerr << e.what() << '\n';
        return is_validation_error(e.kind()) ? 1 : 2;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
