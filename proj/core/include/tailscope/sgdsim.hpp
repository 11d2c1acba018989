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
#include <string>
#include <vector>

#include "tailscope/random.hpp"
#include "tailscope/schedule.hpp"

namespace tailscope {

// Linear model y = a^T w + noise with a ~ N(0, sigma_x^2 I_d),
// noise ~ N(0, sigma_y^2) and w ~ N(0, sigma_w^2 I_d) drawn once from seed.
struct RegressionProblem {
  int dim = 1;
  double sigma_w = 1.0;
  double sigma_x = 1.0;
  double sigma_y = 1.0;
  std::uint64_t seed = 0;
  std::vector<double> truth;

  static RegressionProblem make(int dim, double sigma_w, double sigma_x,
                                double sigma_y, std::uint64_t seed);
  void validate() const;
};

struct SGDRunConfig {
  int batch = 1;
  Schedule schedule = Schedule::constant(0.0);
  int n_iters = 1000;
  int tail_window = 500;
  std::uint64_t seed = 0;
  std::vector<double> x0;  // empty means the zero vector

  void validate(int dim) const;
};

// One-pass stream of (a_i, y_i) pairs. The cursor counts samples handed out
// and only moves forward.
class DataStream {
 public:
  DataStream(const RegressionProblem& problem, RandomStream rng);

  // Fills a (b x d, row-major) and y (b) with the next b samples.
  void next_batch(int b, double* a, double* y);
  std::uint64_t cursor() const { return cursor_; }

 private:
  const RegressionProblem* problem_;
  RandomStream rng_;
  std::uint64_t cursor_ = 0;
};

// x <- x - (eta/b) sum_i a_i (a_i^T x - y_i), in O(b d). Returns false when
// a component is no longer finite.
bool sgd_step(std::vector<double>& x, const double* a, const double* y, int b,
              double eta);

struct EnsembleMatrix {
  int n_runs = 0;
  int dim = 0;
  // Row-major, n_runs x dim. Censored rows are NaN.
  std::vector<double> data;
  std::vector<std::uint8_t> censored;
  int censored_count = 0;
  bool regime_warning = false;
  std::string config_echo;

  const double* row(int i) const { return data.data() + std::size_t(i) * dim; }
};

inline constexpr double kCensoredWarnFraction = 0.10;

// Runs n_runs independent SGD chains and keeps the average of the last W
// iterates of each. Run r draws data from substream (r, 0) and stepsizes
// from substream (r, 1) of the master seed, so runs with different
// schedules see the same data and results do not depend on `workers`.
EnsembleMatrix run_ensemble(const RegressionProblem& problem,
                            const SGDRunConfig& config, int n_runs,
                            unsigned workers = 1);

// Same as run_ensemble for several configurations at once; each batch of
// data is drawn once and fed to every configuration. All configurations
// must share batch, n_iters, tail_window and seed.
std::vector<EnsembleMatrix> run_ensembles(
    const RegressionProblem& problem, const std::vector<SGDRunConfig>& configs,
    int n_runs, unsigned workers = 1);

struct ProbePoint {
  int k = 0;
  double mean = 0.0;
  double std_error = 0.0;
  double bound = 0.0;
  double bound_std_error = 0.0;
};

struct ProbeReport {
  double p = 1.0;
  double h_p = 0.0;
  std::vector<ProbePoint> points;

  // mean <= bound + z * combined stderr at every recorded k; the
  // contraction probe uses the relative form bound * (1 + z * rel. stderr).
  bool holds(double z = 3.0) const;
  bool relative = false;
  // Contraction probe only: least-squares slope of log E||x_k - x~_k||^p
  // over k >= 1, with a leave-one-batch-out standard error.
  double log_slope = 0.0;
  double log_slope_std_error = 0.0;
  // log_slope <= log h(p) + z * log_slope_std_error.
  bool slope_holds(double z = 3.0) const;
};

struct ProbeOptions {
  int k_max = 200;
  std::size_t n_paths = 20000;
  std::vector<double> x0;        // default: zero vector
  std::vector<double> x0_tilde;  // default: all ones
};

// Two chains sharing (H_k, q_k, eta_k) from different starts; reports
// E||x_k - x~_k||^p against h(p)^k E||x_0 - x~_0||^p. Constant and i.i.d.
// schedules only. h(p) >= 1 refuses.
ProbeReport coupled_contraction_probe(const RegressionProblem& problem,
                                      const SGDRunConfig& config, double p,
                                      const ProbeOptions& options = {});

// E||x_k||^p against h(p)^k E||x_0||^p + (1 - h(p)^k)/(1 - h(p)) E||q_1||^p
// for p <= 1.
ProbeReport moment_bound_probe(const RegressionProblem& problem,
                               const SGDRunConfig& config, double p,
                               const ProbeOptions& options = {});

}  // namespace tailscope
