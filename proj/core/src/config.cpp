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

#include "tailscope/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "tailscope/error.hpp"
#include "tailscope/numfmt.hpp"

namespace tailscope {

GaussianDataModel ExperimentConfig::kernel_model() const {
  return GaussianDataModel{sigma_x, batch, dim};
}

Schedule ExperimentConfig::make_schedule(std::string_view variant) const {
  const StepsizeGrid grid{eta_hat, range, points};
  if (variant == "constant") return Schedule::constant(eta_hat);
  if (variant == "iid") return Schedule::iid_grid(grid);
  if (variant == "uniform") return Schedule::iid_uniform(eta_hat, range);
  if (variant == "cyclic") return Schedule::cyclic(grid);
  if (variant == "markov") return Schedule::markov_folded(grid, p);
  if (variant == "two_state") {
    return Schedule::markov_two_state(eta_hat - range, eta_hat + range, p);
  }
  throw Error(ErrorCode::kConfig,
              "unknown schedule variant '" + std::string(variant) + "'");
}

ExperimentConfig ExperimentConfig::with_parameter(std::string_view name,
                                                  double v) const {
  ExperimentConfig c = *this;
  auto as_int = [&](double x) {
    if (x != std::floor(x)) {
      throw Error(ErrorCode::kConfig, "sweep parameter " + std::string(name) +
                                          " needs integer values");
    }
    return static_cast<int>(x);
  };
  if (name == "eta_hat") {
    c.eta_hat = v;
  } else if (name == "R") {
    c.range = v;
  } else if (name == "K") {
    c.points = as_int(v);
  } else if (name == "p") {
    c.p = v;
  } else if (name == "b") {
    c.batch = as_int(v);
  } else if (name == "d") {
    c.dim = as_int(v);
  } else {
    throw Error(ErrorCode::kConfig,
                "unknown sweep parameter '" + std::string(name) + "'");
  }
  return c;
}

std::uint64_t ExperimentConfig::require_seed() const {
  if (!seed) {
    throw Error(ErrorCode::kConfig, "[compute] seed is required");
  }
  return *seed;
}

namespace {

std::string_view trim(std::string_view s) {
  const auto ws = [](char c) { return c == ' ' || c == '\t' || c == '\r'; };
  while (!s.empty() && ws(s.front())) s.remove_prefix(1);
  while (!s.empty() && ws(s.back())) s.remove_suffix(1);
  return s;
}

std::vector<std::string> split_list(std::string_view v) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= v.size()) {
    const std::size_t next = v.find(',', pos);
    const std::string_view tok = trim(v.substr(
        pos, next == std::string_view::npos ? std::string_view::npos
                                            : next - pos));
    if (!tok.empty()) out.emplace_back(tok);
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

bool parse_bool(std::string_view v) {
  if (v == "true" || v == "yes" || v == "1" || v == "on") return true;
  if (v == "false" || v == "no" || v == "0" || v == "off") return false;
  throw Error(ErrorCode::kConfig, "expected a boolean, got '" +
                                      std::string(v) + "'");
}

}  // namespace

ExperimentConfig parse_config(std::string_view text, std::string_view source) {
  ExperimentConfig cfg;
  std::string section;
  std::set<std::string> seen;
  int lineno = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = text.find('\n', pos);
    std::string_view line = text.substr(
        pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++lineno;

    auto fail = [&](const std::string& msg) -> Error {
      return Error(ErrorCode::kConfig, std::string(source) + ":" +
                                           std::to_string(lineno) + ": " + msg);
    };

    const std::size_t hash = line.find_first_of("#;");
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') throw fail("unterminated section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      static const std::set<std::string> sections = {
          "model", "schedule", "sweep", "compute", "output", "input"};
      if (!sections.count(section)) {
        throw fail("unknown section [" + section + "]");
      }
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) throw fail("expected key = value");
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view val = trim(line.substr(eq + 1));
    if (section.empty()) throw fail("key outside of a section");
    const std::string full = section + "." + key;
    if (!seen.insert(full).second) throw fail("duplicate key " + full);

    try {
      auto num = [&] { return parse_double(val); };
      auto integer = [&](long long lo) {
        const long long v = parse_int(val);
        if (v < lo) {
          throw Error(ErrorCode::kConfig,
                      key + " must be >= " + std::to_string(lo));
        }
        return v;
      };
      if (full == "model.sigma") {
        cfg.sigma = num();
      } else if (full == "model.sigma_x") {
        cfg.sigma_x = num();
      } else if (full == "model.sigma_y") {
        cfg.sigma_y = num();
      } else if (full == "model.batch") {
        cfg.batch = static_cast<int>(integer(1));
      } else if (full == "model.dim") {
        cfg.dim = static_cast<int>(integer(1));
      } else if (full == "schedule.variants" || full == "schedule.variant") {
        cfg.variants = split_list(val);
        for (const auto& v : cfg.variants) {
          if (std::find(kVariantNames.begin(), kVariantNames.end(), v) ==
              kVariantNames.end()) {
            throw Error(ErrorCode::kConfig, "unknown schedule variant '" + v +
                                                "'");
          }
        }
        if (cfg.variants.empty()) {
          throw Error(ErrorCode::kConfig, "no schedule variants given");
        }
      } else if (full == "schedule.eta_hat") {
        cfg.eta_hat = num();
      } else if (full == "schedule.range") {
        cfg.range = num();
      } else if (full == "schedule.points") {
        cfg.points = static_cast<int>(integer(2));
      } else if (full == "schedule.p") {
        cfg.p = num();
        if (!(cfg.p >= 0.0 && cfg.p <= 1.0)) {
          throw Error(ErrorCode::kConfig, "p must lie in [0, 1]");
        }
      } else if (full == "sweep.parameter") {
        cfg.sweep_parameter = std::string(val);
        if (std::find(kSweepParameters.begin(), kSweepParameters.end(),
                      cfg.sweep_parameter) == kSweepParameters.end()) {
          throw Error(ErrorCode::kConfig,
                      "sweep parameter must be one of eta_hat, R, K, p, b, d");
        }
      } else if (full == "sweep.values") {
        cfg.sweep_values.clear();
        for (const auto& t : split_list(val)) {
          cfg.sweep_values.push_back(parse_double(t));
        }
      } else if (full == "compute.seed") {
        const long long s = parse_int(val);
        if (s < 0) throw Error(ErrorCode::kConfig, "seed must be >= 0");
        cfg.seed = static_cast<std::uint64_t>(s);
      } else if (full == "compute.n_samples") {
        cfg.n_samples = static_cast<std::size_t>(integer(1));
      } else if (full == "compute.n_paths") {
        cfg.n_paths = static_cast<std::size_t>(integer(1));
      } else if (full == "compute.n_runs") {
        cfg.n_runs = static_cast<int>(integer(1));
      } else if (full == "compute.n_iters") {
        cfg.n_iters = static_cast<int>(integer(1));
      } else if (full == "compute.tail_window") {
        cfg.tail_window = static_cast<int>(integer(1));
      } else if (full == "compute.tol") {
        cfg.tol = num();
        if (!(cfg.tol > 0.0)) throw Error(ErrorCode::kConfig, "tol must be > 0");
      } else if (full == "compute.workers") {
        cfg.workers = static_cast<unsigned>(integer(1));
      } else if (full == "compute.routes") {
        cfg.routes = split_list(val);
        for (const auto& r : cfg.routes) {
          if (std::find(kRouteNames.begin(), kRouteNames.end(), r) ==
              kRouteNames.end()) {
            throw Error(ErrorCode::kConfig, "unknown route '" + r + "'");
          }
        }
      } else if (full == "compute.kernel_method") {
        if (val == "quadrature") {
          cfg.kernel_method = KernelMethod::kQuadrature;
        } else if (val == "monte_carlo") {
          cfg.kernel_method = KernelMethod::kMonteCarlo;
        } else {
          throw Error(ErrorCode::kConfig,
                      "kernel_method must be quadrature or monte_carlo");
        }
      } else if (full == "compute.s_max") {
        cfg.s_max = num();
      } else if (full == "compute.record_timings") {
        cfg.record_timings = parse_bool(val);
      } else if (full == "compute.allow_refusals") {
        cfg.allow_refusals = parse_bool(val);
      } else if (full == "output.csv") {
        cfg.csv_path = std::string(val);
      } else if (full == "output.svg") {
        cfg.svg_path = std::string(val);
      } else if (full == "output.binary") {
        cfg.binary_path = std::string(val);
      } else if (full == "input.ensemble") {
        cfg.ensemble_path = std::string(val);
      } else {
        throw Error(ErrorCode::kConfig, "unknown key " + full);
      }
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kConfig) throw fail(e.what());
      throw;
    }
  }
  if (cfg.tail_window > cfg.n_iters) {
    throw Error(ErrorCode::kConfig, std::string(source) +
                                        ": tail_window exceeds n_iters");
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::kConfig, "cannot read config file " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str(), path);
}

std::optional<double> env_tolerance() {
  const char* raw = std::getenv("TAILSCOPE_TOL");
  if (raw == nullptr || *raw == '\0') return std::nullopt;
  const double v = parse_double(raw);
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw Error(ErrorCode::kConfig, "TAILSCOPE_TOL must be a positive number");
  }
  return v;
}

}  // namespace tailscope
