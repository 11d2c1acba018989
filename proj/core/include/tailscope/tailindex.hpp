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

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tailscope/kernel.hpp"
#include "tailscope/schedule.hpp"

namespace tailscope {

enum class KernelKind {
  kConstant,
  kIID,
  kCyclic,
  kMarkovTwoStateClosed,
  kMarkovRegenMC,
  kMarkovLinearSystem,
  kMarkovMatrixProductMC,
  kNormBound,
  kCustom,
};

std::string_view kernel_kind_name(KernelKind kind);

// s -> h(s) for one (schedule, model) pair, plus its Lyapunov diagnostic.
// Evaluators that leave their domain (Markov kernels past the point where
// the regeneration series diverges) throw Error with code kDivergence and
// at() == s; the root finder reads that as h(s) = +inf.
class ScheduleKernel {
 public:
  using Eval = std::function<Replicated(double)>;
  using Rho = std::function<Replicated()>;

  ScheduleKernel(KernelKind kind, Eval eval, Rho rho,
                 KernelMethod method = KernelMethod::kQuadrature);

  KernelKind kind() const { return kind_; }
  KernelMethod method() const { return method_; }

  Replicated evaluate(double s) const;
  KernelEstimate operator()(double s) const;
  Replicated rho() const { return rho_(); }

  // Optional smooth function of s that crosses 1 exactly where h does.
  // Markov kernels set the Perron root of P o f: h^(r) may jump to +inf
  // just past its root, so replicates are linearized through this instead.
  void set_root_surrogate(Eval surrogate) { surrogate_ = std::move(surrogate); }
  bool has_root_surrogate() const { return static_cast<bool>(surrogate_); }
  Replicated root_surrogate(double s) const { return surrogate_(s); }

 private:
  KernelKind kind_;
  KernelMethod method_;
  Eval eval_;
  Rho rho_;
  Eval surrogate_;
};

// Builds per-step kernels from a shared source; defaults to quadrature.
struct KernelOptions {
  KernelMethod method = KernelMethod::kQuadrature;
  std::size_t n_samples = kDefaultKernelSamples;
  std::uint64_t seed = 0;
  int quadrature_nodes = kDefaultQuadratureNodes;
  // rho is always estimated on a Monte Carlo panel of this size.
  std::size_t rho_samples = kDefaultKernelSamples;
};

// Per-step h and rho tables for a fixed model. Step kernels are cached by
// stepsize so kernels over overlapping grids share work and random numbers.
class KernelContext {
 public:
  KernelContext(const GaussianDataModel& model, const KernelOptions& options);

  const GaussianDataModel& model() const { return model_; }
  const KernelOptions& options() const { return options_; }
  std::shared_ptr<const KernelSource> source() const { return source_; }

  std::shared_ptr<const StepKernel> value_kernel(double eta) const;
  std::shared_ptr<const StepKernel> rho_kernel(double eta) const;

 private:
  GaussianDataModel model_;
  KernelOptions options_;
  std::shared_ptr<const KernelSource> source_;
  std::shared_ptr<const KernelSource> rho_source_;
  mutable std::mutex mutex_;
  mutable std::map<double, std::shared_ptr<const StepKernel>> values_;
  mutable std::map<double, std::shared_ptr<const StepKernel>> rhos_;
};

ScheduleKernel kernel_constant(double eta, const KernelContext& ctx);
// IIDGrid: equal-weight average over grid points; IIDUniformContinuous:
// 32-point Gauss-Legendre over (center - R, center + R).
ScheduleKernel kernel_iid(const Schedule& schedule, const KernelContext& ctx);
// Geometric mean of h over the folded states.
ScheduleKernel kernel_cyclic(const StepsizeGrid& grid,
                             const KernelContext& ctx);
ScheduleKernel kernel_markov_two_state(double eta_l, double eta_u, double p,
                                       const KernelContext& ctx);
ScheduleKernel kernel_markov_regen_mc(const Schedule& schedule,
                                      const KernelContext& ctx,
                                      std::size_t n_paths, std::uint64_t seed);
ScheduleKernel kernel_markov_linear_system(const Schedule& schedule,
                                           const KernelContext& ctx);
// Regeneration paths driven by sampled Gaussian batches: the norm of the
// matrix product applied to a unit vector, without the chi-square
// reduction.
ScheduleKernel kernel_markov_matrix_product_mc(const Schedule& schedule,
                                               const GaussianDataModel& model,
                                               std::size_t n_paths,
                                               std::uint64_t seed);
// Stationary average of E||I - (eta/b) H||^s (uniform over the grid
// points for i.i.d. and folded schedules).
ScheduleKernel kernel_norm_bound(const Schedule& schedule,
                                 std::shared_ptr<const NormPanel> panel);

// Matching kernel for a schedule: constant, iid, cyclic, two-state closed
// form or folded linear system.
ScheduleKernel kernel_for(const Schedule& schedule, const KernelContext& ctx);

// x (1-p+(2p-1) y) / (2 (1-(1-p) y)) + y (1-p+(2p-1) x) / (2 (1-(1-p) x)).
// Returns nullopt when (1-p) x >= 1 or (1-p) y >= 1.
std::optional<double> two_state_closed_form(double x, double y, double p);

// h^(r) = sum_j pi_j ((I - Q^j)^{-1} p^j)_j with W = P o f. Returns nullopt
// when some Q^j has spectral radius >= 1 - 1e-8.
std::optional<double> markov_linear_system_value(const Eigen::MatrixXd& P,
                                                 const std::vector<double>& pi,
                                                 const std::vector<double>& f);

// Spectral radius of W = P o f (column k scaled by f_k). Equals 1 exactly
// when the regeneration kernel equals 1.
double markov_perron_root(const Eigen::MatrixXd& P, const std::vector<double>& f);

inline constexpr double kDefaultTol = 1e-3;
inline constexpr double kDefaultSMax = 64.0;

struct RootOptions {
  double s_max = kDefaultSMax;
  double tol = kDefaultTol;
  double s_lo = 1e-6;
  double s_hi = 8.0;
  double bisection_width = 1e-10;
  // Refusal threshold: rho + z * stderr >= 0 refuses.
  double rho_z = 3.0;
};

struct TailIndexResult {
  double alpha = 0.0;
  // Standard error of alpha, delta method through h'(alpha).
  double alpha_std_error = 0.0;
  // Linearized leave-one-batch-out replicates of alpha (empty for
  // deterministic kernels). Differences of results computed on shared
  // panels are jackknifed through these.
  std::vector<double> alpha_loo;
  double rho = 0.0;
  double rho_std_error = 0.0;
  double s_lo = 0.0;
  double s_hi = 0.0;
  double tol = 0.0;
  // |h(alpha) - 1| bound translated into alpha units via a secant slope.
  double alpha_tol = 0.0;
  double h_at_root = 1.0;
  double mc_stderr_at_root = 0.0;
  KernelKind method = KernelKind::kCustom;
  // (s, h(s)) at every evaluation, in order; +inf marks divergence.
  std::vector<std::pair<double, double>> trace;
};

TailIndexResult find_tail_index(const ScheduleKernel& kernel,
                                const RootOptions& options = {});

enum class Regime { kHeavy, kBoundary, kLight };
std::string_view regime_name(Regime regime);

struct ThresholdReport {
  double c_value = 0.0;
  Regime regime = Regime::kBoundary;
};

ThresholdReport threshold_report(const Schedule& schedule,
                                 const GaussianDataModel& model,
                                 double tol = 1e-9);

struct ComparisonEntry {
  std::string label;  // "constant", "iid", "cyclic", "markov(p=...)"
  double p = 1.0;
  std::optional<TailIndexResult> result;
  std::string refusal;  // error code name when refused
  bool in_p_set = true;  // Markov entries only
};

struct ComparisonReport {
  std::vector<ComparisonEntry> entries;
  double z = 3.0;
  // alpha_iid < alpha_m < alpha_c beyond z combined stderr.
  bool base_ordering_holds = false;
  // Per Markov entry: the ordering expected from p relative to 1/2.
  std::vector<bool> markov_ordering_holds;

  const ComparisonEntry* find(std::string_view label) const;
};

// Constant (center), i.i.d. over the grid, cyclic, and Markov for each p.
// K == 2 uses the two-state chain; larger K the folded chain.
ComparisonReport compare_schedules(double eta_hat, double range, int k,
                                   const std::vector<double>& p_list,
                                   const KernelContext& ctx,
                                   const RootOptions& options = {});

// Standard error of b.alpha - a.alpha: paired jackknife when both carry
// replicates of the same length, otherwise the root sum of squares.
double difference_std_error(const TailIndexResult& a, const TailIndexResult& b);

// b.alpha - a.alpha > z * difference_std_error(a, b).
bool strictly_less(const TailIndexResult& a, const TailIndexResult& b,
                   double z = 3.0);

}  // namespace tailscope
