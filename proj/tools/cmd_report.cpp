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
#include <map>
#include <memory>
#include <sstream>

#include "cli.hpp"
#include "qnw/util/grid.hpp"

namespace qnw::cli {

namespace {

struct ReportArgs {
    std::vector<std::string> runs;
    std::string root;
    std::string out;
};

struct MetricsRow {
    double lo = 0, hi = 0;
    std::string output;
    std::vector<std::string> fields;
};

std::vector<MetricsRow> read_metrics(const fs::path &file) {
    std::istringstream is(read_file(file));
    std::string line;
    std::getline(is, line);
    std::vector<MetricsRow> rows;
    while (std::getline(is, line)) {
        if (line.empty()) {
            continue;
        }
        auto f = split_fields(line, ',');
        if (f.size() != 9) {
            throw Error(ErrorKind::IoError, file.string() + ": expected 9 fields, got: " + line);
        }
        MetricsRow r;
        r.lo = detail::parse_double(f[0], line);
        r.hi = detail::parse_double(f[1], line);
        r.output = std::string(f[2]);
        for (auto v : f) {
            r.fields.emplace_back(v);
        }
        rows.push_back(std::move(r));
    }
    return rows;
}

std::vector<fs::path> collect_runs(const ReportArgs &a) {
    std::vector<fs::path> runs;
    for (const auto &r : a.runs) {
        if (!fs::exists(fs::path(r) / "manifest.json")) {
            throw Error(ErrorKind::MissingRun, "no manifest.json in " + r);
        }
        runs.emplace_back(r);
    }
    if (!a.root.empty()) {
        if (!fs::is_directory(a.root)) {
            throw Error(ErrorKind::MissingRun, "no such directory: " + a.root);
        }
        for (const auto &e : fs::recursive_directory_iterator(a.root)) {
            if (e.is_regular_file() && e.path().filename() == "manifest.json") {
                runs.push_back(e.path().parent_path());
            }
        }
    }
    std::sort(runs.begin(), runs.end());
    runs.erase(std::unique(runs.begin(), runs.end()), runs.end());
    return runs;
}

void run_report(const ReportArgs &a) {
    const auto all = collect_runs(a);
    std::vector<MetricsRow> metrics;
    std::vector<std::pair<std::string, fs::path>> plots;
    json sources = json::array();
    size_t skipped = 0;
    for (const auto &dir : all) {
        if (!a.out.empty() && fs::exists(a.out) && fs::equivalent(dir, a.out)) {
            continue;
        }
        const json m = read_json(dir / "manifest.json");
        const std::string cmd = m.value("command", "");
        std::string used;
        if (cmd == "report") {
            continue;
        }
        if (cmd == "nn train") {
            for (auto &r : read_metrics(dir / "metrics.csv")) {
                metrics.push_back(std::move(r));
            }
            used = "metrics.csv";
        } else if (cmd == "perceptron curve") {
            plots.emplace_back("curve", dir / "curve.csv");
            used = "curve.csv";
        } else if (cmd == "perceptron scan") {
            plots.emplace_back("scan", dir / "scan.csv");
            used = "scan.csv";
        } else {
            skipped++;
            continue;
        }
        sources.push_back({{"run", dir.generic_string()},
                           {"command", cmd},
                           {"file", used},
                           {"fnv1a64", hex64(fnv1a64(read_file(dir / used)))}});
    }
    if (metrics.empty() && plots.empty()) {
        throw Error(ErrorKind::MissingRun, "no completed nn train, perceptron curve or perceptron scan runs found");
    }
    std::stable_sort(metrics.begin(), metrics.end(), [](const MetricsRow &x, const MetricsRow &y) {
        if (x.lo != y.lo) {
            return x.lo < y.lo;
        }
        if (x.hi != y.hi) {
            return x.hi < y.hi;
        }
        return x.output < y.output;
    });

    std::ostringstream table, all_rows;
    table << "interval_lo,interval_hi,R,one_minus_alpha,b_fit,F\n";
    all_rows << "interval_lo,interval_hi,output,R,alpha,b_fit,F_raw,F_guarded,mse\n";
    size_t table_rows = 0;
    for (const auto &r : metrics) {
        for (size_t k = 0; k < r.fields.size(); k++) {
            all_rows << (k ? "," : "") << r.fields[k];
        }
        all_rows << '\n';
        if (r.output != "omega_tg") {
            continue;
        }
        const std::string &alpha = r.fields[4];
        const std::string one_minus = alpha.empty() ? "" : fmt17(1.0 - detail::parse_double(alpha, alpha));
        table << r.fields[0] << ',' << r.fields[1] << ',' << r.fields[3] << ',' << one_minus << ',' << r.fields[5]
              << ',' << r.fields[7] << '\n';
        table_rows++;
    }

    RunDir out(a.out);
    if (table_rows) {
        out.write("interval_table.csv", table.str());
        out.write("metrics.csv", all_rows.str());
    }
    std::map<std::string, size_t> counter;
    json plot_files = json::array();
    for (const auto &[kind, src] : plots) {
        char name[64];
        std::snprintf(name, sizeof(name), "plot_%s_%02zu.csv", kind.c_str(), counter[kind]++);
        out.write(name, read_file(src));
        plot_files.push_back({{"file", name}, {"source", src.generic_string()}});
    }
    out.write_json("report.json", {{"kind", "qnw_report"},
                                   {"table_rows", table_rows},
                                   {"table_columns", "R, 1 - alpha, b_fit and guarded accuracy F of omega_tg"},
                                   {"sources", sources},
                                   {"plots", plot_files},
                                   {"skipped_runs", skipped}});
    out.finish("report", {{"runs", a.runs}, {"root", a.root}});
    std::cout << "report: " << table_rows << " table rows, " << plots.size() << " plot files -> " << a.out << '\n';
}

}  // namespace

void add_report_command(CLI::App &app) {
    auto ra = std::make_shared<ReportArgs>();
    auto *c = app.add_subcommand("report", "Consolidate run directories into the interval table and plot data");
    c->add_option("--runs", ra->runs, "Run directories")->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
    c->add_option("--root", ra->root, "Directory searched recursively for run manifests");
    c->add_option("--out", ra->out, "Output directory")->required();
    c->callback([ra] { run_report(*ra); });
}

}  // namespace qnw::cli
