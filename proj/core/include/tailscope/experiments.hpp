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

#include <string>
#include <vector>

#include "tailscope/config.hpp"
#include "tailscope/report.hpp"

namespace tailscope {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitRefusal = 3,
  kExitValidation = 4,
};

struct CommandResult {
  std::vector<ResultRow> rows;
  int exit_code = kExitOk;
  // Human-readable notes for stderr (skipped routes, warnings).
  std::vector<std::string> notes;
};

// Rows for every (variant, route) pair that applies at the configured
// parameters; `value` is the swept value, or eta_hat outside a sweep.
// Routes: kernel (the schedule's own kernel), linear_system and regen_mc
// (chain schedules only), simulation (SGD ensemble + block estimator).
std::vector<ResultRow> evaluate_cell(const ExperimentConfig& config,
                                     double value,
                                     std::vector<std::string>* notes = nullptr);

CommandResult cmd_tail_index(const ExperimentConfig& config);
CommandResult cmd_sweep(const ExperimentConfig& config);

// Runs one ensemble per variant, writes it to output.binary (".csv" suffix
// selects the text format; several variants get ".<variant>" inserted
// before the extension) and reports the pooled block estimate.
CommandResult cmd_simulate(const ExperimentConfig& config, bool strict);

// Block estimate of the ensemble named by input.ensemble.
CommandResult cmd_estimate(const ExperimentConfig& config);

// Writes result rows to output.csv (or returns them for stdout) and the SVG
// if output.svg is set. Returns the CSV text.
std::string emit_outputs(const ExperimentConfig& config,
                         const std::vector<ResultRow>& rows);

// Fails with kConfig unless every configured output path can be created.
void check_output_paths(const ExperimentConfig& config);

}  // namespace tailscope
