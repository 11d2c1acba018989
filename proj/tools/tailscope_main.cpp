// Copyright 2026 The tailscope Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tailscope/acceptance.hpp"
#include "tailscope/config.hpp"
#include "tailscope/error.hpp"
#include "tailscope/experiments.hpp"
#include "tailscope/numfmt.hpp"

namespace ts = tailscope;

namespace {

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
  bool strict = false;
  bool allow_refusals = false;
  bool list = false;
  std::vector<int> criteria;
};

ts::ExperimentConfig load(const Flags& f) {
  ts::ExperimentConfig c = ts::load_config(f.config);
  if (f.seed) c.seed = *f.seed;
  if (f.workers) c.workers = *f.workers;
  if (f.allow_refusals) c.allow_refusals = true;
  if (const auto tol = ts::env_tolerance()) {
    c.tol = *tol;
    std::cerr << "# TAILSCOPE_TOL=" << ts::format_double(*tol) << "\n";
  }
  return c;
}

int finish(const ts::ExperimentConfig& c, const ts::CommandResult& r) {
  const std::string csv = ts::emit_outputs(c, r.rows);
  if (c.csv_path.empty()) std::cout << csv;
  for (const auto& n : r.notes) std::cerr << n << "\n";
  for (const auto& row : r.rows) {
    if (!row.alpha) {
      std::cerr << "refused: " << row.schedule << " " << row.route << " at "
                << ts::format_double(row.value) << " (" << row.refusal << ")\n";
    }
  }
  return r.exit_code;
}

int validate(const Flags& f) {
  const auto& all = ts::acceptance_criteria();
  if (f.list) {
    for (const auto& c : all) std::cout << c.id << " " << c.name << ": " << c.summary << "\n";
    return ts::kExitOk;
  }
  ts::AcceptanceOptions o;
  if (f.seed) o.seed = *f.seed;
  if (f.workers) o.workers = *f.workers;
  if (const auto tol = ts::env_tolerance()) {
    o.tol = *tol;
    o.tol_from_env = true;
  }
  std::cout << ts::provenance_header(o) << std::flush;
  std::vector<int> ids = f.criteria;
  if (ids.empty()) {
    for (const auto& c : all) ids.push_back(c.id);
  }
  bool ok = true;
  for (int id : ids) {
    const ts::CriterionResult r = ts::run_criterion(id, o);
    std::cout << ts::format_criterion_line(r) << "\n" << std::flush;
    ok = ok && r.passed;
  }
  return ok ? ts::kExitOk : ts::kExitValidation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tail index of SGD iterates under stepsize schedules"};
  app.require_subcommand(1);
  Flags f;

  auto common = [&f](CLI::App* sub, bool needs_config) {
    auto* opt = sub->add_option("--config", f.config, "experiment config file");
    if (needs_config) opt->required();
    sub->add_option("--seed", f.seed, "master seed (overrides the config)");
    sub->add_option("--workers", f.workers, "worker threads")->check(CLI::PositiveNumber);
    sub->add_flag("--strict", f.strict, "treat regime warnings as failures");
    sub->add_flag("--allow-refusals", f.allow_refusals,
                  "exit 0 even when some root is refused");
  };
  auto* tail = app.add_subcommand("tail-index", "tail index by every configured route");
  auto* sweep = app.add_subcommand("sweep", "tail index over one swept parameter");
  auto* sim = app.add_subcommand("simulate", "SGD ensembles and block estimates");
  auto* est = app.add_subcommand("estimate", "block estimate of a stored ensemble");
  auto* val = app.add_subcommand("validate", "run the acceptance criteria");
  for (auto* s : {tail, sweep, sim, est}) common(s, true);
  common(val, false);
  val->add_flag("--list", f.list, "list criteria without running them");
  val->add_option("--criterion", f.criteria, "run only these criteria");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : ts::kExitConfig;
  }

  try {
    if (val->parsed()) return validate(f);
    const ts::ExperimentConfig c = load(f);
    if (tail->parsed()) return finish(c, ts::cmd_tail_index(c));
    if (sweep->parsed()) return finish(c, ts::cmd_sweep(c));
    if (sim->parsed()) return finish(c, ts::cmd_simulate(c, f.strict));
    return finish(c, ts::cmd_estimate(c));
  } catch (const ts::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    switch (e.code()) {
      case ts::ErrorCode::kRefusal:
      case ts::ErrorCode::kRootAboveCap:
        return ts::kExitRefusal;
      default:
        return ts::kExitConfig;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
