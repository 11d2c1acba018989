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


// Runs every acceptance criterion at the pinned seed and tolerance. Optional
// arguments select criteria by id.

#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "tailscope/acceptance.hpp"
#include "tailscope/config.hpp"
#include "tailscope/error.hpp"
#include "tailscope/experiments.hpp"

int main(int argc, char** argv) {
  using namespace tailscope;
  AcceptanceOptions opts;
  try {
    if (const auto tol = env_tolerance()) {
      opts.tol = *tol;
      opts.tol_from_env = true;
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  }

  std::vector<int> ids;
  for (int i = 1; i < argc; ++i) ids.push_back(std::atoi(argv[i]));
  if (ids.empty()) {
    for (const auto& c : acceptance_criteria()) ids.push_back(c.id);
  }

  std::fputs(provenance_header(opts).c_str(), stdout);
  int failed = 0;
  for (int id : ids) {
    const CriterionResult r = run_criterion(id, opts);
    std::printf("%s\n", format_criterion_line(r).c_str());
    std::fflush(stdout);
    if (!r.passed) ++failed;
  }
  std::printf("# %d of %zu criteria passed\n",
              static_cast<int>(ids.size()) - failed, ids.size());
  return failed == 0 ? kExitOk : kExitValidation;
}
