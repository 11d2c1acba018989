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

#include "tailscope/tailindex.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <limits>

#include "tailscope/error.hpp"
#include "tailscope/random.hpp"

namespace tailscope {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Applies f to the point values and to every leave-one-batch-out replicate.
// Parts without replicates (deterministic) contribute their value to every
// replicate.
template <typename F>
Replicated combine(const std::vector<Replicated>& parts, F f) {
  std::size_t reps = 0;
  for (const auto& r : parts) reps = std::max(reps, r.loo.size());
  std::vector<double> args(parts.size());
  for (std::size_t i = 0; i < parts.size(); ++i) args[i] = parts[i].value;
  Replicated out;
  out.value = f(args);
  out.loo.resize(reps);
  for (std::size_t k = 0; k < reps; ++k) {
    for (std::size_t i = 0; i < parts.size(); ++i) {
      args[i] = parts[i].loo.empty() ? parts[i].value : parts[i].loo[k];
    }
    out.loo[k] = f(args);
  }
  return out;
}

std::vector<Replicated> eval_states(
    const std::vector<std::shared_ptr<const StepKernel>>& ks, double s) {
  std::vector<Replicated> out;
  out.reserve(ks.size());
  for (const auto& k : ks) out.push_back(k->h_replicated(s));
  return out;
}

std::vector<Replicated> rho_states(
    const std::vector<std::shared_ptr<const StepKernel>>& ks) {
  std::vector<Replicated> out;
  out.reserve(ks.size());
  for (const auto& k : ks) out.push_back(k->rho_replicated());
  return out;
}

std::vector<std::shared_ptr<const StepKernel>> value_kernels(
    const std::vector<double>& etas, const KernelContext& ctx) {
  std::vector<std::shared_ptr<const StepKernel>> out;
  for (double e : etas) out.push_back(ctx.value_kernel(e));
  return out;
}

std::vector<std::shared_ptr<const StepKernel>> rho_kernels(
    const std::vector<double>& etas, const KernelContext& ctx) {
  std::vector<std::shared_ptr<const StepKernel>> out;
  for (double e : etas) out.push_back(ctx.rho_kernel(e));
  return out;
}

// Renewal-reward form of the cycle exponent: E[r_1] sum_k pi_k rho_k with
// E[r_1] = m under a stationary start.
ScheduleKernel::Rho cycle_rho(std::vector<std::shared_ptr<const StepKernel>> ks,
                              std::vector<double> pi) {
  return [ks = std::move(ks), pi = std::move(pi)] {
    return combine(rho_states(ks), [&pi](const std::vector<double>& r) {
      double acc = 0.0;
      for (std::size_t i = 0; i < r.size(); ++i) acc += pi[i] * r[i];
      return static_cast<double>(r.size()) * acc;
    });
  };
}

struct Bracket {
  double lo;
  double hi;
};

}  // namespace

std::string_view kernel_kind_name(KernelKind kind) {
  switch (kind) {
    case KernelKind::kConstant: return "constant";
    case KernelKind::kIID: return "iid";
    case KernelKind::kCyclic: return "cyclic";
    case KernelKind::kMarkovTwoStateClosed: return "markov_two_state_closed";
    case KernelKind::kMarkovRegenMC: return "markov_regen_mc";
    case KernelKind::kMarkovLinearSystem: return "markov_linear_system";
    case KernelKind::kMarkovMatrixProductMC: return "markov_matrix_product_mc";
    case KernelKind::kNormBound: return "norm_bound";
    case KernelKind::kCustom: return "custom";
  }
  return "unknown";
}

ScheduleKernel::ScheduleKernel(KernelKind kind, Eval eval, Rho rho,
                               KernelMethod method)
    : kind_(kind), method_(method), eval_(std::move(eval)),
      rho_(std::move(rho)) {}

Replicated ScheduleKernel::evaluate(double s) const {
  if (!(s >= 0.0)) throw Error(ErrorCode::kDomain, "kernel: s < 0", s);
  if (s == 0.0) return Replicated{1.0, {}};
  return eval_(s);
}

KernelEstimate ScheduleKernel::operator()(double s) const {
  const Replicated r = evaluate(s);
  return KernelEstimate{r.value, r.std_error(), 0,
                        r.loo.empty() ? method_ : KernelMethod::kMonteCarlo};
}

KernelContext::KernelContext(const GaussianDataModel& model,
                             const KernelOptions& options)
    : model_(model), options_(options) {
  model.validate();
  if (options.method == KernelMethod::kMonteCarlo) {
    source_ = KernelSource::monte_carlo(model, options.n_samples, options.seed);
  } else {
    source_ = KernelSource::quadrature(model, options.quadrature_nodes);
  }
  if (options.method == KernelMethod::kMonteCarlo &&
      options.rho_samples == options.n_samples) {
    rho_source_ = source_;
  } else {
    rho_source_ =
        KernelSource::monte_carlo(model, options.rho_samples, options.seed);
  }
}

std::shared_ptr<const StepKernel> KernelContext::value_kernel(
    double eta) const {
  std::lock_guard<std::mutex> lock(mutex_);
  auto& slot = values_[eta];
  if (!slot) slot = std::make_shared<StepKernel>(source_, eta);
  return slot;
}

std::shared_ptr<const StepKernel> KernelContext::rho_kernel(double eta) const {
  std::lock_guard<std::mutex> lock(mutex_);
  auto& slot = rhos_[eta];
  if (!slot) slot = std::make_shared<StepKernel>(rho_source_, eta);
  return slot;
}

ScheduleKernel kernel_constant(double eta, const KernelContext& ctx) {
  auto h = ctx.value_kernel(eta);
  auto r = ctx.rho_kernel(eta);
  return ScheduleKernel(
      KernelKind::kConstant, [h](double s) { return h->h_replicated(s); },
      [r] { return r->rho_replicated(); }, ctx.options().method);
}

ScheduleKernel kernel_iid(const Schedule& schedule, const KernelContext& ctx) {
  std::vector<double> etas;
  std::vector<double> weights;
  if (schedule.kind() == ScheduleKind::kIIDGrid) {
    etas = schedule.states();
    weights.assign(etas.size(), 1.0 / etas.size());
  } else if (schedule.kind() == ScheduleKind::kIIDUniformContinuous) {
    const double c = schedule.grid().center;
    const double r = schedule.grid().range;
    if (r == 0.0) return kernel_constant(c, ctx);
    const QuadratureRule rule = uniform_rule(32);
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      etas.push_back(c + r * rule.nodes[i]);
      weights.push_back(rule.weights[i]);
    }
  } else {
    throw Error(ErrorCode::kInvalidArgument,
                "kernel_iid: schedule must be i.i.d.");
  }
  auto hs = value_kernels(etas, ctx);
  auto rs = rho_kernels(etas, ctx);
  auto mean = [weights](const std::vector<double>& v) {
    double acc = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) acc += weights[i] * v[i];
    return acc;
  };
  return ScheduleKernel(
      KernelKind::kIID,
      [hs, mean](double s) { return combine(eval_states(hs, s), mean); },
      [rs, mean] { return combine(rho_states(rs), mean); },
      ctx.options().method);
}

ScheduleKernel kernel_cyclic(const StepsizeGrid& grid,
                             const KernelContext& ctx) {
  const FoldedStateSpace space = build_folded_state_space(grid);
  auto hs = value_kernels(space.states, ctx);
  auto rs = rho_kernels(space.states, ctx);
  auto geo = [](const std::vector<double>& v) {
    double acc = 0.0;
    for (double x : v) acc += std::log(x);
    return std::exp(acc / v.size());
  };
  auto mean = [](const std::vector<double>& v) {
    double acc = 0.0;
    for (double x : v) acc += x;
    return acc / v.size();
  };
  return ScheduleKernel(
      KernelKind::kCyclic,
      [hs, geo](double s) { return combine(eval_states(hs, s), geo); },
      [rs, mean] { return combine(rho_states(rs), mean); },
      ctx.options().method);
}

double markov_perron_root(const Eigen::MatrixXd& P,
                          const std::vector<double>& f) {
  Eigen::MatrixXd W = P;
  for (Eigen::Index k = 0; k < W.cols(); ++k) {
    if (!std::isfinite(f[k])) return kInf;
    W.col(k) *= f[k];
  }
  Eigen::EigenSolver<Eigen::MatrixXd> es(W, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

namespace {

ScheduleKernel::Eval perron_surrogate(
    std::vector<std::shared_ptr<const StepKernel>> hs, Eigen::MatrixXd P) {
  return [hs = std::move(hs), P = std::move(P)](double s) {
    return combine(eval_states(hs, s), [&P](const std::vector<double>& f) {
      return markov_perron_root(P, f);
    });
  };
}

}  // namespace

std::optional<double> two_state_closed_form(double x, double y, double p) {
  const double q = 1.0 - p;
  if (!(q * x < 1.0) || !(q * y < 1.0)) return std::nullopt;
  return x * (q + (2.0 * p - 1.0) * y) / (2.0 * (1.0 - q * y)) +
         y * (q + (2.0 * p - 1.0) * x) / (2.0 * (1.0 - q * x));
}

ScheduleKernel kernel_markov_two_state(double eta_l, double eta_u, double p,
                                       const KernelContext& ctx) {
  // Validates the parameters.
  (void)Schedule::markov_two_state(eta_l, eta_u, p);
  std::vector<std::shared_ptr<const StepKernel>> hs = {
      ctx.value_kernel(eta_l), ctx.value_kernel(eta_u)};
  auto rs = rho_kernels({eta_l, eta_u}, ctx);
  auto eval = [hs, p](double s) {
    Replicated out = combine(eval_states(hs, s),
                             [p](const std::vector<double>& v) {
                               const auto h = two_state_closed_form(v[0], v[1],
                                                                    p);
                               return h ? *h : kInf;
                             });
    if (!std::isfinite(out.value)) {
      throw Error(ErrorCode::kDomain,
                  "two-state kernel: (1-p) h(s) >= 1, series diverges", s);
    }
    return out;
  };
  ScheduleKernel kernel(KernelKind::kMarkovTwoStateClosed, eval,
                        cycle_rho(rs, {0.5, 0.5}), ctx.options().method);
  Eigen::Matrix2d flip;
  flip << 1.0 - p, p, p, 1.0 - p;
  kernel.set_root_surrogate(perron_surrogate(hs, flip));
  return kernel;
}

std::optional<double> markov_linear_system_value(const Eigen::MatrixXd& P,
                                                 const std::vector<double>& pi,
                                                 const std::vector<double>& f) {
  const Eigen::Index m = P.rows();
  Eigen::MatrixXd W = P;
  for (Eigen::Index k = 0; k < m; ++k) {
    if (!std::isfinite(f[k])) return std::nullopt;
    W.col(k) *= f[k];
  }
  double total = 0.0;
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(m, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    if (pi[j] == 0.0) continue;
    Eigen::MatrixXd Q = W;
    Q.col(j).setZero();
    const Eigen::VectorXd pj = W.col(j);
    Eigen::EigenSolver<Eigen::MatrixXd> es(Q, false);
    const double radius = es.eigenvalues().cwiseAbs().maxCoeff();
    if (!(radius < 1.0 - 1e-8)) return std::nullopt;
    const Eigen::VectorXd hj = (I - Q).partialPivLu().solve(pj);
    total += pi[j] * hj(j);
  }
  return total;
}

ScheduleKernel kernel_markov_linear_system(const Schedule& schedule,
                                           const KernelContext& ctx) {
  if (!schedule.is_chain()) {
    throw Error(ErrorCode::kInvalidArgument,
                "linear system kernel: schedule must be a Markov chain");
  }
  const Eigen::MatrixXd P = schedule.transition_matrix();
  const std::vector<double> pi =
      stationary_distribution(schedule, StationaryMethod::kLinearSolve)
          .probabilities;
  auto hs = value_kernels(schedule.states(), ctx);
  auto rs = rho_kernels(schedule.states(), ctx);
  auto eval = [hs, P, pi](double s) {
    Replicated out = combine(eval_states(hs, s),
                             [&](const std::vector<double>& f) {
                               const auto v = markov_linear_system_value(P, pi,
                                                                         f);
                               return v ? *v : kInf;
                             });
    if (!std::isfinite(out.value)) {
      throw Error(ErrorCode::kDivergence,
                  "linear system kernel: I - Q^j is not invertible by a "
                  "convergent series",
                  s);
    }
    return out;
  };
  ScheduleKernel kernel(KernelKind::kMarkovLinearSystem, eval,
                        cycle_rho(rs, pi), ctx.options().method);
  kernel.set_root_surrogate(perron_surrogate(hs, P));
  return kernel;
}

ScheduleKernel kernel_markov_regen_mc(const Schedule& schedule,
                                      const KernelContext& ctx,
                                      std::size_t n_paths,
                                      std::uint64_t seed) {
  if (n_paths == 0) {
    throw Error(ErrorCode::kConfig, "regeneration kernel: n_paths must be >= 1");
  }
  const RegenerationSampler sampler(schedule);
  const int m = schedule.num_states();
  auto counts = std::make_shared<std::vector<std::uint32_t>>(n_paths * m);
  const RandomStream root(seed, 0x7265676eULL);
  for (std::size_t j = 0; j < n_paths; ++j) {
    RandomStream st = root.substream(j);
    const auto c = sampler.sample_counts(st);
    std::copy(c.begin(), c.end(), counts->begin() + j * m);
  }
  auto hs = value_kernels(schedule.states(), ctx);
  auto rs = rho_kernels(schedule.states(), ctx);
  auto eval = [hs, counts, m, n_paths](double s) {
    std::vector<double> logh(m);
    for (int k = 0; k < m; ++k) logh[k] = std::log(hs[k]->h(s).value);
    std::vector<double> logs(n_paths);
    for (std::size_t j = 0; j < n_paths; ++j) {
      double acc = 0.0;
      for (int k = 0; k < m; ++k) {
        const std::uint32_t c = (*counts)[j * m + k];
        if (c) acc += c * logh[k];
      }
      logs[j] = acc;
    }
    return batch_mean_exp(logs, 1.0, kDefaultBatches);
  };
  return ScheduleKernel(KernelKind::kMarkovRegenMC, eval,
                        cycle_rho(rs, sampler.stationary().probabilities),
                        KernelMethod::kMonteCarlo);
}

ScheduleKernel kernel_markov_matrix_product_mc(const Schedule& schedule,
                                               const GaussianDataModel& model,
                                               std::size_t n_paths,
                                               std::uint64_t seed) {
  model.validate();
  if (n_paths == 0) {
    throw Error(ErrorCode::kConfig, "matrix product kernel: n_paths >= 1");
  }
  const RegenerationSampler sampler(schedule);
  const int b = model.batch;
  const int d = model.dim;
  auto logs = std::make_shared<std::vector<double>>(n_paths);
  const RandomStream root(seed, 0x6d70726fULL);
  Eigen::MatrixXd A(b, d);
  Eigen::VectorXd u(d), v(d);
  for (std::size_t j = 0; j < n_paths; ++j) {
    RandomStream st = root.substream(j);
    const RegenerationPath path = sampler.sample(st);
    RandomStream data = st.substream(1);
    u.setZero();
    u(0) = 1.0;
    double acc = 0.0;
    for (double eta : path.stepsizes) {
      for (int i = 0; i < b; ++i) {
        for (int c = 0; c < d; ++c) A(i, c) = model.sigma * data.normal();
      }
      v = u - (eta / b) * (A.transpose() * (A * u));
      const double nv = v.norm();
      acc += std::log(std::max(nv, std::numeric_limits<double>::min()));
      u = v / nv;
    }
    (*logs)[j] = acc;
  }
  auto eval = [logs](double s) {
    return batch_mean_exp(*logs, s, kDefaultBatches);
  };
  auto rho = [logs] { return batch_mean(*logs, 1.0, kDefaultBatches); };
  return ScheduleKernel(KernelKind::kMarkovMatrixProductMC, eval, rho,
                        KernelMethod::kMonteCarlo);
}

ScheduleKernel kernel_norm_bound(const Schedule& schedule,
                                 std::shared_ptr<const NormPanel> panel) {
  std::vector<double> etas;
  std::vector<double> weights;
  switch (schedule.kind()) {
    case ScheduleKind::kConstant:
    case ScheduleKind::kIIDGrid:
      etas = schedule.states();
      weights.assign(etas.size(), 1.0 / etas.size());
      break;
    case ScheduleKind::kIIDUniformContinuous: {
      const QuadratureRule rule = uniform_rule(32);
      for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        etas.push_back(schedule.grid().center +
                       schedule.grid().range * rule.nodes[i]);
        weights.push_back(rule.weights[i]);
      }
      break;
    }
    default:
      etas = schedule.states();
      weights =
          stationary_distribution(schedule, StationaryMethod::kLinearSolve)
              .probabilities;
      break;
  }
  auto mean = [weights](const std::vector<double>& v) {
    double acc = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) acc += weights[i] * v[i];
    return acc;
  };
  auto eval = [panel, etas, mean](double s) {
    std::vector<Replicated> parts;
    for (double e : etas) parts.push_back(panel->hhat(s, e));
    return combine(parts, mean);
  };
  auto rho = [panel, etas, mean] {
    std::vector<Replicated> parts;
    for (double e : etas) parts.push_back(panel->rho_hat(e));
    return combine(parts, mean);
  };
  return ScheduleKernel(KernelKind::kNormBound, eval, rho,
                        KernelMethod::kMonteCarlo);
}

ScheduleKernel kernel_for(const Schedule& schedule, const KernelContext& ctx) {
  switch (schedule.kind()) {
    case ScheduleKind::kConstant:
      return kernel_constant(schedule.states().front(), ctx);
    case ScheduleKind::kIIDGrid:
    case ScheduleKind::kIIDUniformContinuous:
      return kernel_iid(schedule, ctx);
    case ScheduleKind::kCyclic:
      return kernel_cyclic(schedule.grid(), ctx);
    case ScheduleKind::kMarkovFolded:
      return kernel_markov_linear_system(schedule, ctx);
    case ScheduleKind::kMarkovTwoState:
      return kernel_markov_two_state(schedule.states()[0],
                                     schedule.states()[1], schedule.p(), ctx);
  }
  throw Error(ErrorCode::kInvalidArgument, "kernel_for: unknown schedule");
}

TailIndexResult find_tail_index(const ScheduleKernel& kernel,
                                const RootOptions& options) {
  TailIndexResult res;
  res.method = kernel.kind();
  res.tol = options.tol;

  const Replicated rho = kernel.rho();
  res.rho = rho.value;
  res.rho_std_error = rho.std_error();
  if (!(res.rho + options.rho_z * res.rho_std_error < 0.0)) {
    throw Error(ErrorCode::kRefusal,
                "tail index: Lyapunov exponent is not negative, no "
                "stationary solution",
                res.rho);
  }

  auto h_at = [&](double s, double* se) {
    try {
      const Replicated r = kernel.evaluate(s);
      if (se) *se = r.std_error();
      return std::isnan(r.value) ? kInf : r.value;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kDomain &&
          e.code() != ErrorCode::kDivergence) {
        throw;
      }
      if (se) *se = 0.0;
      return kInf;
    }
  };
  auto traced = [&](double s) {
    const double v = h_at(s, nullptr);
    res.trace.emplace_back(s, v);
    return v;
  };

  Bracket br{options.s_lo, std::min(options.s_hi, options.s_max)};
  if (!(traced(br.lo) < 1.0)) {
    throw Error(ErrorCode::kRefusal,
                "tail index: h is not below 1 near s = 0", br.lo);
  }
  while (!(traced(br.hi) > 1.0)) {
    if (br.hi >= options.s_max) {
      throw Error(ErrorCode::kRootAboveCap,
                  "tail index: h(s) <= 1 up to the cap", options.s_max);
    }
    br.lo = br.hi;
    br.hi = std::min(2.0 * br.hi, options.s_max);
  }
  res.s_lo = br.lo;
  res.s_hi = br.hi;
  while (br.hi - br.lo > options.bisection_width) {
    const double mid = 0.5 * (br.lo + br.hi);
    if (traced(mid) > 1.0) {
      br.hi = mid;
    } else {
      br.lo = mid;
    }
  }
  res.alpha = 0.5 * (br.lo + br.hi);
  Replicated at_root{kInf, {}};
  try {
    at_root = kernel.evaluate(res.alpha);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kDomain && e.code() != ErrorCode::kDivergence) {
      throw;
    }
  }
  const double se = at_root.std_error();
  res.h_at_root = at_root.value;
  res.mc_stderr_at_root = se;

  // Secant slope on a small symmetric step, one-sided if the right point
  // diverges.
  const double step = std::max(1e-4, 1e-3 * res.alpha);
  const double left = std::max(res.alpha - step, 0.5 * res.alpha);
  const double hl = h_at(left, nullptr);
  double hr = h_at(res.alpha + step, nullptr);
  double slope;
  if (std::isfinite(hr)) {
    slope = (hr - hl) / (res.alpha + step - left);
  } else {
    slope = (res.h_at_root - hl) / (res.alpha - left);
  }
  const bool h_slope_ok = slope > 0.0 && std::isfinite(slope);
  res.alpha_tol = h_slope_ok ? options.tol / slope : kInf;

  if (kernel.has_root_surrogate()) {
    // Same root, but no pole beside it: the replicates stay finite.
    const Replicated lam = kernel.root_surrogate(res.alpha);
    const double lam_slope =
        (kernel.root_surrogate(res.alpha + step).value -
         kernel.root_surrogate(left).value) /
        (res.alpha + step - left);
    if (lam_slope > 0.0 && std::isfinite(lam_slope) &&
        std::isfinite(lam.value)) {
      if (!h_slope_ok) res.alpha_tol = options.tol / lam_slope;
      res.alpha_std_error = lam.std_error() / lam_slope;
      res.alpha_loo.reserve(lam.loo.size());
      for (double v : lam.loo) {
        res.alpha_loo.push_back(res.alpha - (v - lam.value) / lam_slope);
      }
      return res;
    }
  }
  if (h_slope_ok) {
    res.alpha_std_error = se / slope;
    res.alpha_loo.reserve(at_root.loo.size());
    for (double v : at_root.loo) {
      res.alpha_loo.push_back(res.alpha - (v - at_root.value) / slope);
    }
  } else {
    res.alpha_std_error = se > 0.0 ? kInf : 0.0;
  }
  return res;
}

std::string_view regime_name(Regime regime) {
  switch (regime) {
    case Regime::kHeavy: return "heavy";
    case Regime::kBoundary: return "boundary";
    case Regime::kLight: return "light";
  }
  return "unknown";
}

ThresholdReport threshold_report(const Schedule& schedule,
                                 const GaussianDataModel& model, double tol) {
  auto c_of = [&model](double eta) { return h2_closed(eta, eta * eta, model); };
  double c = 0.0;
  switch (schedule.kind()) {
    case ScheduleKind::kConstant:
      c = c_of(schedule.states().front());
      break;
    case ScheduleKind::kIIDGrid: {
      double m1 = 0.0, m2 = 0.0;
      for (double e : schedule.states()) {
        m1 += e;
        m2 += e * e;
      }
      const double n = static_cast<double>(schedule.num_states());
      c = h2_closed(m1 / n, m2 / n, model);
      break;
    }
    case ScheduleKind::kIIDUniformContinuous: {
      const double mu = schedule.grid().center;
      const double r = schedule.grid().range;
      c = h2_closed(mu, mu * mu + r * r / 3.0, model);
      break;
    }
    case ScheduleKind::kCyclic: {
      c = 1.0;
      for (double e : schedule.states()) c *= c_of(e);
      break;
    }
    case ScheduleKind::kMarkovFolded: {
      std::vector<double> f;
      for (double e : schedule.states()) f.push_back(c_of(e));
      const auto v = markov_linear_system_value(
          schedule.transition_matrix(),
          stationary_distribution(schedule, StationaryMethod::kLinearSolve)
              .probabilities,
          f);
      c = v ? *v : kInf;
      break;
    }
    case ScheduleKind::kMarkovTwoState: {
      const auto v = two_state_closed_form(c_of(schedule.states()[0]),
                                           c_of(schedule.states()[1]),
                                           schedule.p());
      c = v ? *v : kInf;
      break;
    }
  }
  ThresholdReport out;
  out.c_value = c;
  if (std::abs(c - 1.0) <= tol) {
    out.regime = Regime::kBoundary;
  } else {
    out.regime = c > 1.0 ? Regime::kHeavy : Regime::kLight;
  }
  return out;
}

double difference_std_error(const TailIndexResult& a,
                             const TailIndexResult& b) {
  if (!a.alpha_loo.empty() && a.alpha_loo.size() == b.alpha_loo.size()) {
    Replicated diff;
    diff.value = b.alpha - a.alpha;
    for (std::size_t k = 0; k < a.alpha_loo.size(); ++k) {
      diff.loo.push_back(b.alpha_loo[k] - a.alpha_loo[k]);
    }
    return diff.std_error();
  }
  return std::hypot(a.alpha_std_error, b.alpha_std_error);
}

bool strictly_less(const TailIndexResult& a, const TailIndexResult& b,
                   double z) {
  return b.alpha - a.alpha > z * difference_std_error(a, b);
}

const ComparisonEntry* ComparisonReport::find(std::string_view label) const {
  for (const auto& e : entries) {
    if (e.label == label) return &e;
  }
  return nullptr;
}

ComparisonReport compare_schedules(double eta_hat, double range, int k,
                                   const std::vector<double>& p_list,
                                   const KernelContext& ctx,
                                   const RootOptions& options) {
  const StepsizeGrid grid{eta_hat, range, k};
  grid.validate();
  ComparisonReport report;
  report.z = options.rho_z;

  auto run = [&](ComparisonEntry entry, const ScheduleKernel& kernel) {
    try {
      entry.result = find_tail_index(kernel, options);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kRefusal &&
          e.code() != ErrorCode::kRootAboveCap) {
        throw;
      }
      entry.refusal = std::string(error_code_name(e.code()));
    }
    report.entries.push_back(std::move(entry));
  };

  run(ComparisonEntry{"constant", 1.0, {}, {}, true},
      kernel_constant(eta_hat, ctx));
  run(ComparisonEntry{"iid", 1.0, {}, {}, true},
      kernel_iid(Schedule::iid_grid(grid), ctx));
  run(ComparisonEntry{"cyclic", 1.0, {}, {}, true}, kernel_cyclic(grid, ctx));
  for (double p : p_list) {
    const Schedule sched =
        k == 2 ? Schedule::markov_two_state(grid.point(1), grid.point(2), p)
               : Schedule::markov_folded(grid, p);
    ComparisonEntry entry{"markov", p, {}, {}, true};
    const std::size_t before = report.entries.size();
    run(entry, kernel_for(sched, ctx));
    ComparisonEntry& added = report.entries[before];
    if (added.result) {
      double hmax = 0.0;
      for (double e : sched.states()) {
        hmax = std::max(hmax, ctx.value_kernel(e)->h(added.result->alpha).value);
      }
      added.in_p_set = (1.0 - p) * hmax < 1.0;
    }
  }

  const ComparisonEntry* c = report.find("constant");
  const ComparisonEntry* iid = report.find("iid");
  const ComparisonEntry* cyc = report.find("cyclic");
  const bool base_ok = c->result && iid->result && cyc->result;
  const double z = report.z;
  report.base_ordering_holds =
      base_ok && strictly_less(*iid->result, *cyc->result, z) &&
      strictly_less(*cyc->result, *c->result, z);
  for (const auto& e : report.entries) {
    if (e.label != "markov") continue;
    bool ok = false;
    if (base_ok && e.result) {
      const TailIndexResult& r = *e.result;
      auto close = [z, &r](const TailIndexResult& o) {
        return std::abs(r.alpha - o.alpha) <=
               z * difference_std_error(o, r) + 1e-8;
      };
      if (e.p >= 1.0) {
        ok = close(*cyc->result);
      } else if (e.p > 0.5) {
        ok = strictly_less(*iid->result, r, z) &&
             strictly_less(r, *cyc->result, z);
      } else if (e.p < 0.5) {
        ok = strictly_less(r, *iid->result, z);
      } else {
        ok = close(*iid->result);
      }
    }
    report.markov_ordering_holds.push_back(ok);
  }
  return report;
}

}  // namespace tailscope
