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

#include "tailscope/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>

#include "tailscope/ensemble_io.hpp"
#include "tailscope/error.hpp"
#include "tailscope/estimate.hpp"
#include "tailscope/numfmt.hpp"
#include "tailscope/parallel.hpp"
#include "tailscope/tailindex.hpp"

namespace tailscope {

namespace {

using Clock = std::chrono::steady_clock;

constexpr std::uint64_t kRegenStream = 0x7265676e;

double elapsed_ms(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

bool is_refusal(ErrorCode code) {
  switch (code) {
    case ErrorCode::kRefusal:
    case ErrorCode::kRootAboveCap:
    case ErrorCode::kDivergence:
    case ErrorCode::kNonReturn:
    case ErrorCode::kDegenerate:
    case ErrorCode::kSize:
      return true;
    default:
      return false;
  }
}

bool route_applies(const Schedule& s, std::string_view route) {
  if (route == "linear_system" || route == "regen_mc") return s.is_chain();
  return true;
}

KernelOptions kernel_options(const ExperimentConfig& c) {
  KernelOptions o;
  o.method = c.kernel_method;
  o.n_samples = c.n_samples;
  o.seed = c.require_seed();
  return o;
}

RootOptions root_options(const ExperimentConfig& c) {
  RootOptions o;
  o.tol = c.tol;
  o.s_max = c.s_max;
  return o;
}

// Kernel contexts keyed by model so cells of a sweep share panels.
class ContextCache {
 public:
  explicit ContextCache(KernelOptions options) : options_(options) {}

  std::shared_ptr<const KernelContext> get(const GaussianDataModel& m) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto& slot = cache_[{m.sigma, m.batch, m.dim}];
    if (!slot) slot = std::make_shared<const KernelContext>(m, options_);
    return slot;
  }

 private:
  KernelOptions options_;
  std::mutex mutex_;
  std::map<std::tuple<double, int, int>, std::shared_ptr<const KernelContext>>
      cache_;
};

ResultRow kernel_row(const ExperimentConfig& c, std::string_view variant,
                     std::string_view route, double value,
                     const KernelContext& ctx) {
  const auto t0 = Clock::now();
  const Schedule schedule = c.make_schedule(variant);
  ResultRow row;
  row.schedule = std::string(variant);
  row.value = value;
  row.route = std::string(route);
  row.c_value = threshold_report(schedule, ctx.model()).c_value;

  std::optional<ScheduleKernel> kernel;
  if (route == "kernel") {
    kernel.emplace(kernel_for(schedule, ctx));
  } else if (route == "linear_system") {
    kernel.emplace(kernel_markov_linear_system(schedule, ctx));
  } else {
    kernel.emplace(kernel_markov_regen_mc(
        schedule, ctx, c.n_paths, splitmix64(c.require_seed() ^ kRegenStream)));
  }
  try {
    const TailIndexResult r = find_tail_index(*kernel, root_options(c));
    row.alpha = r.alpha;
    row.std_error = r.alpha_std_error;
    row.rho = r.rho;
  } catch (const Error& e) {
    if (!is_refusal(e.code())) throw;
    row.refusal = std::string(error_code_name(e.code()));
    row.rho = kernel->rho().value;
  }
  if (c.record_timings) row.runtime_ms = elapsed_ms(t0);
  return row;
}

ResultRow estimate_row(const EnsembleMatrix& ens, std::string schedule,
                       double value, std::optional<double> c_value) {
  ResultRow row;
  row.schedule = std::move(schedule);
  row.value = value;
  row.route = "simulation";
  row.c_value = c_value;
  row.censored = ens.censored_count;
  try {
    const ProjectionReport rep = project_and_estimate(ens);
    row.alpha = rep.pooled_alpha;
    // Spread of the per-direction estimates around their pooled value.
    const std::size_t n = rep.per_direction.size();
    if (n > 1) {
      double mean = 0.0;
      for (const auto& e : rep.per_direction) mean += e.alpha;
      mean /= static_cast<double>(n);
      double ss = 0.0;
      for (const auto& e : rep.per_direction) ss += (e.alpha - mean) * (e.alpha - mean);
      row.std_error = std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));
    }
  } catch (const Error& e) {
    if (!is_refusal(e.code())) throw;
    row.alpha.reset();
    row.refusal = std::string(error_code_name(e.code()));
  }
  return row;
}

RegressionProblem make_problem(const ExperimentConfig& c) {
  return RegressionProblem::make(c.dim, c.sigma, c.sigma_x, c.sigma_y,
                                 c.require_seed());
}

SGDRunConfig run_config(const ExperimentConfig& c, const Schedule& s) {
  SGDRunConfig rc;
  rc.batch = c.batch;
  rc.schedule = s;
  rc.n_iters = c.n_iters;
  rc.tail_window = c.tail_window;
  rc.seed = c.require_seed();
  return rc;
}

std::vector<ResultRow> evaluate_cell_with(const ExperimentConfig& c,
                                          double value, ContextCache& cache,
                                          unsigned sim_workers,
                                          std::vector<std::string>* notes) {
  std::vector<std::string> sim_variants;
  if (std::find(c.routes.begin(), c.routes.end(), "simulation") != c.routes.end()) {
    sim_variants = c.variants;
  }
  std::map<std::string, ResultRow> sim_rows;
  if (!sim_variants.empty()) {
    const auto t0 = Clock::now();
    const RegressionProblem problem = make_problem(c);
    std::vector<SGDRunConfig> configs;
    for (const auto& v : sim_variants) configs.push_back(run_config(c, c.make_schedule(v)));
    const auto ensembles = run_ensembles(problem, configs, c.n_runs, sim_workers);
    const double ms = elapsed_ms(t0);
    for (std::size_t i = 0; i < sim_variants.size(); ++i) {
      const Schedule s = c.make_schedule(sim_variants[i]);
      ResultRow row = estimate_row(ensembles[i], sim_variants[i], value,
                                   threshold_report(s, c.kernel_model()).c_value);
      if (c.record_timings) row.runtime_ms = ms;
      if (ensembles[i].regime_warning && notes) {
        notes->push_back("regime warning: " + sim_variants[i] + " at value " +
                         format_double(value) + " censored " +
                         std::to_string(ensembles[i].censored_count) + " runs");
      }
      sim_rows.emplace(sim_variants[i], std::move(row));
    }
  }

  std::vector<ResultRow> rows;
  std::shared_ptr<const KernelContext> ctx;
  for (const auto& v : c.variants) {
    const Schedule s = c.make_schedule(v);
    for (const auto& route : c.routes) {
      if (route == "simulation") {
        rows.push_back(sim_rows.at(v));
        continue;
      }
      if (!route_applies(s, route)) {
        if (notes) notes->push_back("route " + route + " skipped for " + v);
        continue;
      }
      if (!ctx) ctx = cache.get(c.kernel_model());
      rows.push_back(kernel_row(c, v, route, value, *ctx));
    }
  }
  return rows;
}

int exit_for(const ExperimentConfig& c, const std::vector<ResultRow>& rows) {
  if (c.allow_refusals) return kExitOk;
  for (const auto& r : rows) {
    if (!r.alpha) return kExitRefusal;
  }
  return kExitOk;
}

void check_path(const std::string& path) {
  if (path.empty()) return;
  namespace fs = std::filesystem;
  const fs::path p(path);
  const fs::path parent = p.has_parent_path() ? p.parent_path() : fs::path(".");
  std::error_code ec;
  if (!fs::is_directory(parent, ec)) {
    throw Error(ErrorCode::kConfig,
                "output directory does not exist: " + parent.string());
  }
  const bool existed = fs::exists(p, ec);
  {
    std::ofstream probe(path, std::ios::app | std::ios::binary);
    if (!probe) throw Error(ErrorCode::kConfig, "output path not writable: " + path);
  }
  if (!existed) fs::remove(p, ec);
}

std::string with_variant_suffix(const std::string& path, const std::string& variant) {
  const std::filesystem::path p(path);
  std::filesystem::path out = p;
  out.replace_filename(p.stem().string() + "." + variant + p.extension().string());
  return out.string();
}

bool ends_with_csv(const std::string& path) {
  return path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0;
}

}  // namespace

void check_output_paths(const ExperimentConfig& config) {
  check_path(config.csv_path);
  check_path(config.svg_path);
  check_path(config.binary_path);
}

std::vector<ResultRow> evaluate_cell(const ExperimentConfig& config,
                                     double value,
                                     std::vector<std::string>* notes) {
  ContextCache cache(kernel_options(config));
  return evaluate_cell_with(config, value, cache, config.workers, notes);
}

CommandResult cmd_tail_index(const ExperimentConfig& config) {
  config.require_seed();
  check_output_paths(config);
  CommandResult out;
  out.rows = evaluate_cell(config, config.eta_hat, &out.notes);
  out.exit_code = exit_for(config, out.rows);
  return out;
}

CommandResult cmd_sweep(const ExperimentConfig& config) {
  config.require_seed();
  if (config.sweep_parameter.empty() || config.sweep_values.empty()) {
    throw Error(ErrorCode::kConfig,
                "sweep needs [sweep] parameter and a non-empty values list");
  }
  check_output_paths(config);
  const std::size_t n = config.sweep_values.size();
  std::vector<ExperimentConfig> cells;
  cells.reserve(n);
  for (double v : config.sweep_values) {
    cells.push_back(config.with_parameter(config.sweep_parameter, v));
  }
  ContextCache cache(kernel_options(config));
  std::vector<std::vector<ResultRow>> rows(n);
  std::vector<std::vector<std::string>> notes(n);
  const unsigned outer = static_cast<unsigned>(
      std::min<std::size_t>(std::max(1u, config.workers), n));
  const unsigned inner = std::max(1u, config.workers / outer);
  parallel_for(n, outer, [&](std::size_t i) {
    rows[i] = evaluate_cell_with(cells[i], config.sweep_values[i], cache, inner,
                                 &notes[i]);
  });
  CommandResult out;
  for (std::size_t i = 0; i < n; ++i) {
    out.rows.insert(out.rows.end(), rows[i].begin(), rows[i].end());
    out.notes.insert(out.notes.end(), notes[i].begin(), notes[i].end());
  }
  out.exit_code = exit_for(config, out.rows);
  return out;
}

CommandResult cmd_simulate(const ExperimentConfig& config, bool strict) {
  config.require_seed();
  check_output_paths(config);
  const RegressionProblem problem = make_problem(config);
  std::vector<SGDRunConfig> configs;
  for (const auto& v : config.variants) {
    configs.push_back(run_config(config, config.make_schedule(v)));
  }
  const auto t0 = Clock::now();
  auto ensembles = run_ensembles(problem, configs, config.n_runs, config.workers);
  const double ms = elapsed_ms(t0);

  CommandResult out;
  bool warned = false;
  for (std::size_t i = 0; i < ensembles.size(); ++i) {
    const std::string& v = config.variants[i];
    if (!config.binary_path.empty()) {
      const std::string path = config.variants.size() == 1
                                   ? config.binary_path
                                   : with_variant_suffix(config.binary_path, v);
      if (ends_with_csv(path)) {
        write_ensemble_csv(ensembles[i], path);
      } else {
        write_ensemble_binary(ensembles[i], path);
      }
    }
    ResultRow row = estimate_row(
        ensembles[i], v, config.eta_hat,
        threshold_report(config.make_schedule(v), config.kernel_model()).c_value);
    if (config.record_timings) row.runtime_ms = ms;
    out.rows.push_back(std::move(row));
    if (ensembles[i].regime_warning) {
      warned = true;
      out.notes.push_back("regime warning: " + v + " censored " +
                          std::to_string(ensembles[i].censored_count) + " of " +
                          std::to_string(ensembles[i].n_runs) + " runs");
    }
  }
  out.exit_code = exit_for(config, out.rows);
  if (strict && warned) out.exit_code = kExitRefusal;
  return out;
}

CommandResult cmd_estimate(const ExperimentConfig& config) {
  if (config.ensemble_path.empty()) {
    throw Error(ErrorCode::kConfig, "estimate needs [input] ensemble");
  }
  check_output_paths(config);
  const EnsembleMatrix ens = read_ensemble(config.ensemble_path);
  CommandResult out;
  out.rows.push_back(estimate_row(ens, "ensemble", config.eta_hat, std::nullopt));
  out.exit_code = exit_for(config, out.rows);
  return out;
}

std::string emit_outputs(const ExperimentConfig& config,
                         const std::vector<ResultRow>& rows) {
  const std::string csv = format_csv(rows);
  if (!config.csv_path.empty()) write_text_file(config.csv_path, csv);
  if (!config.svg_path.empty()) {
    write_text_file(config.svg_path,
                    svg_from_csv(csv, config.sweep_parameter.empty()
                                          ? std::string_view("value")
                                          : std::string_view(config.sweep_parameter)));
  }
  return csv;
}

}  // namespace tailscope
