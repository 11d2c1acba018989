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

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tailscope/kernel.hpp"
#include "tailscope/schedule.hpp"
#include "tailscope/sgdsim.hpp"

namespace tailscope {

// Everything one CLI invocation needs. Parsed from a line-oriented
// key = value file with [section] headers; '#' and ';' start comments.
struct ExperimentConfig {
  // [model]
  double sigma = 1.0;  // prior scale of the true weights (simulation)
  double sigma_x = 1.0;
  double sigma_y = 1.0;
  int batch = 10;
  int dim = 10;

  // [schedule]
  std::vector<std::string> variants = {"constant"};
  double eta_hat = 0.1;
  double range = 0.0;
  int points = 2;
  double p = 1.0;

  // [sweep]
  std::string sweep_parameter;
  std::vector<double> sweep_values;

  // [compute]
  std::optional<std::uint64_t> seed;
  std::size_t n_samples = 200000;
  std::size_t n_paths = 100000;
  int n_runs = 1000;
  int n_iters = 1000;
  int tail_window = 500;
  double tol = 1e-3;
  unsigned workers = 1;
  std::vector<std::string> routes = {"kernel"};
  KernelMethod kernel_method = KernelMethod::kQuadrature;
  double s_max = 64.0;
  bool record_timings = false;
  bool allow_refusals = false;

  // [output]
  std::string csv_path;
  std::string svg_path;
  std::string binary_path;

  // [input]
  std::string ensemble_path;

  GaussianDataModel kernel_model() const;
  // Schedule for a variant name at the current parameters.
  Schedule make_schedule(std::string_view variant) const;
  // Copy with the sweep parameter set to v.
  ExperimentConfig with_parameter(std::string_view name, double v) const;
  std::uint64_t require_seed() const;
};

inline const std::vector<std::string_view> kVariantNames = {
    "constant", "iid", "uniform", "cyclic", "markov", "two_state"};
inline const std::vector<std::string_view> kRouteNames = {
    "kernel", "regen_mc", "linear_system", "simulation"};
inline const std::vector<std::string_view> kSweepParameters = {
    "eta_hat", "R", "K", "p", "b", "d"};

// Throws Error(kConfig) with "source:line: message" on malformed input.
ExperimentConfig parse_config(std::string_view text,
                              std::string_view source = "<config>");
ExperimentConfig load_config(const std::string& path);

// TAILSCOPE_TOL, when set: replaces the root tolerance (default 1e-3).
std::optional<double> env_tolerance();

}  // namespace tailscope
