/* Copyright 2026 The idnsim Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// idn: validate, run, compare, oracle-place and sweep scenarios.
//
// Exit status: 0 success, 1 validation failure, 2 runtime failure.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "idn/digest.h"
#include "idn/engine.h"
#include "idn/scenario.h"
#include "idn/serialize.h"

namespace fs = std::filesystem;

namespace {

constexpr int kOk = 0;
constexpr int kInvalid = 1;
constexpr int kRuntime = 2;

struct Loaded {
  std::string text;
  idn::Scenario scenario;
};

bool is_validation(idn::ErrorCode c) {
  return c == idn::ErrorCode::kScenarioInvalid || c == idn::ErrorCode::kParseError;
}

// Parses, decodes and validates; prints every violation and returns nullopt
// when the scenario may not run.
std::optional<Loaded> load_valid(const std::string& path) {
  Loaded out;
  out.text = idn::read_file(path);
  out.scenario = idn::scenario_from_json(idn::parse_json_text(out.text));
  const auto violations = idn::validate_scenario(out.scenario);
  if (violations.empty()) return out;
  for (const auto& v : violations) std::cerr << v.path << ": " << v.message << "\n";
  std::cerr << violations.size() << " violation(s) in " << path << "\n";
  return std::nullopt;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  f << text;
  f.close();
  if (!f) throw std::runtime_error("cannot write " + path.string());
}

std::string dump(const idn::Json& j) { return j.dump(2) + "\n"; }

std::string summary_line(const idn::MetricsFrame& m) {
  const auto& t = m.totals;
  std::ostringstream s;
  s << "requests=" << t.arrivals << " served=" << t.served << " rejected=" << t.rejected
    << " completion_rate=" << idn::format_fixed(t.completion_rate)
    << " p95_ttft_us=" << t.ttft.p95 << " prefix_hit_ratio=" << idn::format_fixed(t.prefix_hit_ratio)
    << " core_bytes=" << m.core_bytes;
  return s.str();
}

struct RunArgs {
  std::string scenario;
  std::optional<std::uint64_t> seed;
  std::optional<idn::Micros> duration;
};

idn::RunOptions options_of(const RunArgs& a) {
  idn::RunOptions o;
  o.seed = a.seed;
  o.duration = a.duration;
  return o;
}

int cmd_validate(const std::string& path) {
  if (!load_valid(path)) return kInvalid;
  std::cout << "ok " << path << "\n";
  return kOk;
}

int cmd_run(const RunArgs& a, const std::string& out_dir, bool trace) {
  auto loaded = load_valid(a.scenario);
  if (!loaded) return kInvalid;
  auto opts = options_of(a);
  opts.trace = trace;
  const auto result = idn::run(loaded->scenario, opts);

  const fs::path dir(out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());

  write_text(dir / "metrics.json", dump(idn::metrics_to_json(result.metrics)));
  write_text(dir / "receipts.jsonl", result.receipts.to_jsonl());
  idn::Json files = {"metrics.json", "receipts.jsonl"};
  if (trace) {
    std::ostringstream csv;
    idn::write_trace_csv(csv, result.trace);
    write_text(dir / "trace.csv", csv.str());
    files.push_back("trace.csv");
  }
  idn::Json overrides = idn::Json::object();
  if (a.seed) overrides["seed"] = *a.seed;
  if (a.duration) overrides["duration"] = *a.duration;
  const idn::Json manifest = {
      {"schema", "idn.manifest/1"},
      {"tool", "idn"},
      {"version", IDN_VERSION},
      {"scenario", loaded->scenario.name},
      {"scenario_digest", idn::sha256_hex(loaded->text)},
      {"seed", result.seed},
      {"duration", result.duration},
      {"overrides", overrides},
      {"trace", trace},
      {"files", files},
  };
  write_text(dir / "manifest.json", dump(manifest));
  std::cout << summary_line(result.metrics) << "\n";
  return kOk;
}

idn::Json compare_side(const idn::MetricsFrame& m) {
  const auto& t = m.totals;
  return {{"arrivals", t.arrivals},
          {"served", t.served},
          {"completion_rate", idn::format_fixed(t.completion_rate)},
          {"latency_p50", t.latency.p50},
          {"latency_p95", t.latency.p95},
          {"ttft_p50", t.ttft.p50},
          {"ttft_p95", t.ttft.p95},
          {"mean_ttft", idn::format_fixed(t.mean_ttft)},
          {"prefix_hit_ratio", idn::format_fixed(t.prefix_hit_ratio)},
          {"core_bytes", m.core_bytes}};
}

int cmd_compare(const RunArgs& a, const std::string& baseline, const std::string& out_file) {
  if (baseline != "cloud-only") {
    std::cerr << "unknown baseline '" << baseline << "'; expected cloud-only\n";
    return kInvalid;
  }
  auto loaded = load_valid(a.scenario);
  if (!loaded) return kInvalid;
  auto opts = options_of(a);
  const auto hier = idn::run(loaded->scenario, opts);
  opts.cloud_only = true;
  const auto cloud = idn::run(loaded->scenario, opts);

  const auto& h = hier.metrics;
  const auto& c = cloud.metrics;
  const idn::Json doc = {
      {"schema", "idn.compare/1"},
      {"baseline", baseline},
      {"seed", hier.seed},
      {"duration", hier.duration},
      {"hierarchical", compare_side(h)},
      {"cloud_only", compare_side(c)},
      {"delta",
       {{"latency_p95", h.totals.latency.p95 - c.totals.latency.p95},
        {"ttft_p95", h.totals.ttft.p95 - c.totals.ttft.p95},
        {"core_bytes", h.core_bytes - c.core_bytes},
        {"prefix_hit_ratio",
         idn::format_fixed(h.totals.prefix_hit_ratio - c.totals.prefix_hit_ratio)}}},
  };
  if (!out_file.empty()) write_text(out_file, dump(doc));
  std::cout << dump(doc);
  return kOk;
}

idn::Json placement_json(const idn::Placement& p) {
  idn::Json arr = idn::Json::array();
  for (const auto& [rid, node] : p) arr.push_back({{"realization_id", rid}, {"node_id", node}});
  return arr;
}

int cmd_oracle_place(const RunArgs& a, idn::Micros at) {
  auto loaded = load_valid(a.scenario);
  if (!loaded) return kInvalid;
  const auto r = idn::oracle_place(loaded->scenario, at, options_of(a));
  const idn::Json doc = {
      {"schema", "idn.oracle/1"},
      {"at", at},
      {"realizations", r.problem.realizations.size()},
      {"nodes", r.problem.nodes.size()},
      {"demand_cells", r.problem.cells.size()},
      {"placement", placement_json(r.exact)},
      {"objective", idn::format_fixed(r.exact_objective)},
      {"heuristic_placement", placement_json(r.heuristic)},
      {"heuristic_objective", idn::format_fixed(r.heuristic_objective)},
  };
  std::cout << dump(doc);
  return kOk;
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// Applies one sweep point to a copy of the scenario and run options.
void apply_point(const std::string& param, const std::string& value, idn::Scenario& s,
                 idn::RunOptions& o) {
  if (param == "seed") {
    o.seed = std::stoull(value);
  } else if (param == "rate_scale") {
    const double k = std::stod(value);
    if (!(k >= 0.0)) throw idn::IdnError(idn::ErrorCode::kScenarioInvalid, "rate_scale >= 0");
    for (auto& r : s.workload.regions) r.rate *= k;
  } else if (param == "admission_cap") {
    s.routing.admission_cap = std::stoi(value);
  } else if (param == "load_penalty") {
    s.routing.load_penalty = std::stod(value);
  } else if (param == "cache") {
    if (value != "on" && value != "off") {
      throw idn::IdnError(idn::ErrorCode::kScenarioInvalid, "cache takes on|off");
    }
    o.cache_enabled = value == "on";
  } else if (param == "baseline") {
    if (value != "hierarchical" && value != "cloud-only") {
      throw idn::IdnError(idn::ErrorCode::kScenarioInvalid,
                          "baseline takes hierarchical|cloud-only");
    }
    o.cloud_only = value == "cloud-only";
  } else {
    throw idn::IdnError(idn::ErrorCode::kScenarioInvalid, "unknown sweep parameter '" + param + "'");
  }
}

int cmd_sweep(const RunArgs& a, const std::string& param, const std::string& values,
              const std::string& out_file) {
  auto loaded = load_valid(a.scenario);
  if (!loaded) return kInvalid;
  const auto points = split_csv(values);
  if (points.empty()) {
    std::cerr << "--values needs at least one value\n";
    return kInvalid;
  }
  std::ostringstream csv;
  csv << "param,value,seed,arrivals,served,rejected,completion_rate,ttft_p95,mean_ttft,"
         "prefix_hit_ratio,core_bytes\n";
  for (const auto& v : points) {
    auto s = loaded->scenario;
    auto o = options_of(a);
    try {
      apply_point(param, v, s, o);
    } catch (const std::invalid_argument&) {
      throw idn::IdnError(idn::ErrorCode::kScenarioInvalid, "bad value '" + v + "' for " + param);
    }
    if (const auto violations = idn::validate_scenario(s); !violations.empty()) {
      for (const auto& x : violations) std::cerr << x.path << ": " << x.message << "\n";
      return kInvalid;
    }
    const auto r = idn::run(s, o);
    const auto& t = r.metrics.totals;
    csv << param << ',' << v << ',' << r.seed << ',' << t.arrivals << ',' << t.served << ','
        << t.rejected << ',' << idn::format_fixed(t.completion_rate) << ',' << t.ttft.p95 << ','
        << idn::format_fixed(t.mean_ttft) << ',' << idn::format_fixed(t.prefix_hit_ratio) << ','
        << r.metrics.core_bytes << '\n';
  }
  if (out_file.empty()) {
    std::cout << csv.str();
  } else {
    write_text(out_file, csv.str());
  }
  return kOk;
}

void add_run_args(CLI::App* cmd, RunArgs& a) {
  cmd->add_option("scenario", a.scenario, "Scenario JSON file")->required();
  cmd->add_option("--seed", a.seed, "Override the scenario seed");
  cmd->add_option("--duration", a.duration, "Override the horizon, in microseconds")
      ->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scenario runner for the intelligence delivery network simulator"};
  app.set_version_flag("--version", std::string("idn ") + IDN_VERSION);
  app.require_subcommand(1);

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "Parse and validate a scenario");
  validate->add_option("scenario", validate_path, "Scenario JSON file")->required();

  RunArgs run_args;
  std::string out_dir;
  std::string trace = "off";
  auto* run = app.add_subcommand("run", "Simulate a scenario and write its outputs");
  add_run_args(run, run_args);
  run->add_option("--out", out_dir, "Output directory")->required();
  run->add_option("--trace", trace, "Write the event trace")
      ->check(CLI::IsMember({"on", "off"}));

  RunArgs cmp_args;
  std::string baseline = "cloud-only";
  std::string cmp_out;
  auto* compare = app.add_subcommand("compare", "Run as configured and against a baseline");
  add_run_args(compare, cmp_args);
  compare->add_option("--baseline", baseline, "Baseline to compare against")
      ->capture_default_str();
  compare->add_option("--out", cmp_out, "Also write the comparison to this file");

  RunArgs oracle_args;
  idn::Micros at = 0;
  auto* oracle = app.add_subcommand("oracle-place", "Exact placement for observed demand");
  add_run_args(oracle, oracle_args);
  oracle->add_option("--at", at, "Demand observed up to this time, in microseconds")
      ->check(CLI::NonNegativeNumber);

  RunArgs sweep_args;
  std::string param;
  std::string values;
  std::string sweep_out;
  auto* sweep = app.add_subcommand("sweep", "Run once per parameter value, one CSV row each");
  add_run_args(sweep, sweep_args);
  sweep->add_option("--param", param,
                    "seed | rate_scale | admission_cap | load_penalty | cache | baseline")
      ->required();
  sweep->add_option("--values", values, "Comma-separated values")->required();
  sweep->add_option("--out", sweep_out, "CSV output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kInvalid;
  }

  try {
    if (*validate) return cmd_validate(validate_path);
    if (*run) return cmd_run(run_args, out_dir, trace == "on");
    if (*compare) return cmd_compare(cmp_args, baseline, cmp_out);
    if (*oracle) return cmd_oracle_place(oracle_args, at);
    if (*sweep) return cmd_sweep(sweep_args, param, values, sweep_out);
  } catch (const idn::IdnError& e) {
    std::cerr << e.what() << "\n";
    return is_validation(e.code()) ? kInvalid : kRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntime;
  }
  return kRuntime;
}
