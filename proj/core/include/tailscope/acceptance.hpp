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
#include <vector>

namespace tailscope {

inline constexpr std::uint64_t kAcceptanceSeed = 20260101;

struct AcceptanceOptions {
  std::uint64_t seed = kAcceptanceSeed;
  unsigned workers = 1;
  // Root tolerance on |h(alpha) - 1|; TAILSCOPE_TOL overrides it.
  double tol = 1e-3;
  bool tol_from_env = false;
};

struct CriterionInfo {
  int id = 0;
  std::string name;
  std::string summary;
};

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  double seconds = 0.0;
  // Measured values and every failed check, '; ' separated.
  std::string detail;
};

const std::vector<CriterionInfo>& acceptance_criteria();

// Runs criterion `id` (1-based). Unexpected errors count as failures.
CriterionResult run_criterion(int id, const AcceptanceOptions& options);

// "criterion=<id> name=<name> status=pass|fail seconds=<s> detail=<...>"
std::string format_criterion_line(const CriterionResult& result);

// Leading '#' lines: seed, worker count, tolerance and where it came from.
std::string provenance_header(const AcceptanceOptions& options);

}  // namespace tailscope
