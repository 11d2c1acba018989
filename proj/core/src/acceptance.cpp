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

#include "tailscope/acceptance.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <memory>
#include <sstream>

#include "tailscope/error.hpp"
#include "tailscope/estimate.hpp"
#include "tailscope/experiments.hpp"
#include "tailscope/numfmt.hpp"
#include "tailscope/random.hpp"
#include "tailscope/schedule.hpp"
#include "tailscope/sgdsim.hpp"
#include "tailscope/tailindex.hpp"

namespace tailscope {

namespace {

using Clock = std::chrono::steady_clock;

std::string g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.5g", v);
  return buf;
}

class Checker {
 public:
  void note(const std::string& s) { append(s); }
  void check(bool ok, const std::string& s) {
    if (!ok) {
      ok_ = false;
      append("FAIL " + s);
    }
  }
  bool ok() const { return ok_; }
  std::string detail() const { return out_.str(); }

 private:
  void append(const std::string& s) {
    if (!first_) out_ << "; ";
    out_ << s;
    first_ = false;
  }
  std::ostringstream out_;
  bool ok_ = true;
  bool first_ = true;
};

RootOptions root(const AcceptanceOptions& o) {
  RootOptions r;
  r.tol = o.tol;
  return r;
}

KernelOptions quadrature_options(std::uint64_t seed) {
  KernelOptions k;
  k.method = KernelMethod::kQuadrature;
  k.seed = seed;
  return k;
}

KernelOptions mc_options(std::uint64_t seed, std::size_t n) {
  KernelOptions k;
  k.method = KernelMethod::kMonteCarlo;
  k.n_samples = n;
  k.seed = seed;
  return k;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// 1. c = 1 boundary: kernel root and simulated ensemble at alpha = 2.
void boundary_calibration(const AcceptanceOptions& o, Checker& ck) {
  const auto t0 = Clock::now();
  const GaussianDataModel m{1.0, 1, 1};
  const double eta = 2.0 / 3.0;
  KernelContext ctx(m, quadrature_options(o.seed));
  const TailIndexResult r = find_tail_index(kernel_constant(eta, ctx), root(o));
  ck.note("c=" + g(h2_closed(eta, eta * eta, m)) + " kernel alpha=" + g(r.alpha));
  ck.check(r.alpha >= 1.95 && r.alpha <= 2.05, "kernel alpha outside [1.95, 2.05]");

  const RegressionProblem problem = RegressionProblem::make(1, 1.0, 1.0, 1.0, o.seed);
  SGDRunConfig rc;
  rc.batch = 1;
  rc.schedule = Schedule::constant(eta);
  rc.n_iters = 2000;
  rc.tail_window = 1000;
  rc.seed = o.seed;
  const EnsembleMatrix ens = run_ensemble(problem, rc, 5000, o.workers);
  const ProjectionReport rep = project_and_estimate(ens);
  ck.note("simulation alpha=" + g(rep.pooled_alpha) + " censored=" +
          std::to_string(ens.censored_count));
  ck.check(rep.pooled_alpha >= 1.85 && rep.pooled_alpha <= 2.15,
           "simulation alpha outside [1.85, 2.15]");
  const double secs = seconds_since(t0);
  ck.check(secs < 120.0, "runtime " + g(secs) + " s >= 120 s");
}

bool agree(const Replicated& a, const Replicated& b, double z = 3.0) {
  const double se = std::hypot(a.std_error(), b.std_error());
  // Deterministic pairs (se = 0) compare up to rounding.
  const double floor = 1e-12 * std::max(std::abs(a.value), std::abs(b.value));
  return std::abs(a.value - b.value) <= z * se + floor;
}

// 2. Linear system, regeneration MC and matrix-product MC for h^(r); the
// two-state closed form against regeneration MC.
void route_agreement(const AcceptanceOptions& o, Checker& ck) {
  const auto t0 = Clock::now();
  const GaussianDataModel m{1.0, 10, 10};
  KernelContext ctx(m, quadrature_options(o.seed));
  const Schedule chain = Schedule::markov_folded({0.06, 0.05, 5}, 0.7);
  const ScheduleKernel ls = kernel_markov_linear_system(chain, ctx);
  const ScheduleKernel rg =
      kernel_markov_regen_mc(chain, ctx, 100000, splitmix64(o.seed ^ 0x21));
  const ScheduleKernel mp =
      kernel_markov_matrix_product_mc(chain, m, 100000, splitmix64(o.seed ^ 0x22));
  for (double s : {0.5, 1.0, 1.5, 2.0}) {
    const Replicated a = ls.evaluate(s), b = rg.evaluate(s), c = mp.evaluate(s);
    ck.note("s=" + g(s) + " ls=" + g(a.value) + " regen=" + g(b.value) + "+-" +
            g(b.std_error()) + " product=" + g(c.value) + "+-" + g(c.std_error()));
    ck.check(agree(a, b), "linear system vs regen at s=" + g(s));
    ck.check(agree(a, c), "linear system vs product at s=" + g(s));
    ck.check(agree(b, c), "regen vs product at s=" + g(s));
  }
  for (double p : {0.3, 0.5, 0.8, 1.0}) {
    const Schedule two = Schedule::markov_two_state(0.01, 0.11, p);
    const ScheduleKernel cf = kernel_markov_two_state(0.01, 0.11, p, ctx);
    const ScheduleKernel rt = kernel_markov_regen_mc(
        two, ctx, 100000, splitmix64(o.seed ^ (0x30 + static_cast<int>(p * 10))));
    for (double s : {0.5, 1.0, 1.5, 2.0}) {
      const Replicated a = cf.evaluate(s), b = rt.evaluate(s);
      ck.check(agree(a, b), "two-state p=" + g(p) + " s=" + g(s) + " closed=" +
                                g(a.value) + " regen=" + g(b.value) + "+-" +
                                g(b.std_error()));
    }
  }
  const double secs = seconds_since(t0);
  ck.note("runtime " + g(secs) + " s");
  ck.check(secs < 60.0, "runtime >= 60 s");
}

// 3. Folded chain at p = 1 against the cyclic kernel.
void cyclic_markov_collapse(const AcceptanceOptions& o, Checker& ck) {
  const GaussianDataModel m{1.0, 10, 10};
  KernelContext ctx(m, quadrature_options(o.seed));
  const StepsizeGrid grid{0.5, 0.05, 10};
  const ScheduleKernel mk =
      kernel_markov_linear_system(Schedule::markov_folded(grid, 1.0), ctx);
  const ScheduleKernel cy = kernel_cyclic(grid, ctx);
  // The cyclic kernel is reported per step; one regeneration cycle at p = 1
  // is a full period of m steps.
  const double period_len = 2.0 * grid.num_points - 2.0;
  double worst = 0.0;
  for (double s : {0.5, 1.0, 2.0, 4.0, 8.0}) {
    const double period = std::pow(cy.evaluate(s).value, period_len);
    worst = std::max(worst, std::abs(mk.evaluate(s).value - period));
  }
  ck.note("max |h_markov - h_cyclic^m|=" + g(worst));
  ck.check(worst <= 1e-10, "kernels differ by more than 1e-10");
  const TailIndexResult a = find_tail_index(mk, root(o));
  const TailIndexResult b = find_tail_index(cy, root(o));
  const double allowed = std::max(a.alpha_tol, b.alpha_tol);
  ck.note("alpha markov=" + g(a.alpha) + " cyclic=" + g(b.alpha) +
          " allowed=" + g(allowed));
  ck.check(std::abs(a.alpha - b.alpha) <= allowed, "alphas differ beyond tol");
}

const TailIndexResult* result_of(const ComparisonReport& rep,
                                 std::string_view label, double p = -1.0) {
  for (const auto& e : rep.entries) {
    if (e.label == label && (p < 0.0 || std::abs(e.p - p) < 1e-12)) {
      return e.result ? &*e.result : nullptr;
    }
  }
  return nullptr;
}

// 4. Two-state ordering law on Monte Carlo panels.
void ordering_law(const AcceptanceOptions& o, Checker& ck) {
  const GaussianDataModel m{1.0, 1, 4};
  KernelContext ctx(m, mc_options(o.seed, 200000));
  const ComparisonReport rep =
      compare_schedules(0.3, 0.1, 2, {0.25, 0.5, 0.75}, ctx, root(o));
  const TailIndexResult* c = result_of(rep, "constant");
  const TailIndexResult* i = result_of(rep, "iid");
  const TailIndexResult* y = result_of(rep, "cyclic");
  const TailIndexResult* r25 = result_of(rep, "markov", 0.25);
  const TailIndexResult* r50 = result_of(rep, "markov", 0.5);
  const TailIndexResult* r75 = result_of(rep, "markov", 0.75);
  if (!c || !i || !y || !r25 || !r50 || !r75) {
    ck.check(false, "a schedule was refused");
    return;
  }
  ck.note("const=" + g(c->alpha) + " iid=" + g(i->alpha) + " cyclic=" +
          g(y->alpha) + " r(.25)=" + g(r25->alpha) + " r(.5)=" + g(r50->alpha) +
          " r(.75)=" + g(r75->alpha));
  ck.check(strictly_less(*i, *r75), "p=.75: iid < markov");
  ck.check(strictly_less(*r75, *y), "p=.75: markov < cyclic");
  ck.check(strictly_less(*y, *c), "cyclic < constant");
  ck.check(strictly_less(*r25, *i), "p=.25: markov < iid");
  ck.check(strictly_less(*i, *y), "p=.25: iid < cyclic");
  const double se = difference_std_error(*i, *r50);
  ck.note("p=.5 |markov - iid|=" + g(std::abs(r50->alpha - i->alpha)) +
          " se=" + g(se));
  ck.check(std::abs(r50->alpha - i->alpha) <= 3.0 * se + 1e-8,
           "p=.5: markov differs from iid");
}

using KernelFactory = std::function<ScheduleKernel(const KernelContext&, double)>;

// 5. Monotonicity in b, d, R and p on shared panels.
void monotonicity(const AcceptanceOptions& o, Checker& ck) {
  std::map<std::pair<int, int>, std::unique_ptr<KernelContext>> contexts;
  auto ctx_for = [&](int b, int d) -> const KernelContext& {
    auto& slot = contexts[{b, d}];
    if (!slot) {
      slot = std::make_unique<KernelContext>(GaussianDataModel{1.0, b, d},
                                             mc_options(o.seed, 200000));
    }
    return *slot;
  };
  const double eta_bd = 0.6, eta_rp = 0.8, R = 0.05, p = 0.6;
  const int K = 10;
  const std::vector<std::pair<std::string, KernelFactory>> kinds = {
      {"constant", [&](const KernelContext& c, double) { return kernel_constant(eta_bd, c); }},
      {"uniform", [&](const KernelContext& c, double) {
         return kernel_iid(Schedule::iid_uniform(eta_bd, R), c); }},
      {"cyclic", [&](const KernelContext& c, double) {
         return kernel_cyclic({eta_bd, R, K}, c); }},
      {"markov", [&](const KernelContext& c, double) {
         return kernel_markov_linear_system(Schedule::markov_folded({eta_bd, R, K}, p), c); }},
  };

  auto series = [&](const std::string& what, const std::vector<double>& xs,
                    const std::function<ScheduleKernel(double)>& make,
                    bool increasing) {
    std::vector<TailIndexResult> rs;
    std::string line = what + ":";
    for (double x : xs) {
      try {
        rs.push_back(find_tail_index(make(x), root(o)));
        line += " " + g(rs.back().alpha);
      } catch (const Error& e) {
        ck.check(false, what + " refused at " + g(x) + " (" +
                            std::string(error_code_name(e.code())) + ")");
        return;
      }
    }
    ck.note(line);
    for (std::size_t j = 0; j + 1 < rs.size(); ++j) {
      const bool ok = increasing ? strictly_less(rs[j], rs[j + 1])
                                 : strictly_less(rs[j + 1], rs[j]);
      ck.check(ok, what + " not strictly " +
                       (increasing ? "increasing" : "decreasing") + " between " +
                       g(xs[j]) + " and " + g(xs[j + 1]) + " (diff se " +
                       g(difference_std_error(rs[j], rs[j + 1])) + ")");
    }
  };

  for (const auto& [name, make] : kinds) {
    series(name + " vs b", {5, 10, 15},
           [&, mk = make](double b) { return mk(ctx_for(static_cast<int>(b), 10), b); },
           true);
    series(name + " vs d", {5, 10, 20},
           [&, mk = make](double d) { return mk(ctx_for(10, static_cast<int>(d)), d); },
           false);
  }
  const KernelContext& base = ctx_for(10, 10);
  series("uniform vs R", {0.0, 0.02, 0.05},
         [&](double r) { return kernel_iid(Schedule::iid_uniform(eta_rp, r), base); },
         false);
  series("cyclic vs R", {0.0, 0.02, 0.05},
         [&](double r) { return kernel_cyclic({eta_rp, r, K}, base); }, false);
  series("markov vs R", {0.0, 0.02, 0.05},
         [&](double r) {
           return kernel_markov_linear_system(
               Schedule::markov_folded({eta_rp, r, K}, p), base);
         },
         false);
  series("markov vs p", {0.6, 0.8, 1.0},
         [&](double q) {
           return kernel_markov_linear_system(
               Schedule::markov_folded({eta_rp, R, K}, q), base);
         },
         true);
}

// 6. Simulated tail indices over an eta_hat grid for the four schedules.
void figure1_analogue(const AcceptanceOptions& o, Checker& ck) {
  const auto t0 = Clock::now();
  const std::vector<double> etas = {0.95, 0.97, 0.99, 1.01, 1.03};
  const std::vector<std::string> names = {"constant", "uniform", "cyclic", "markov"};
  const RegressionProblem problem = RegressionProblem::make(10, 3.0, 1.0, 3.0, o.seed);
  std::vector<std::vector<double>> alpha(names.size());
  int censored = 0;
  for (double eta : etas) {
    const StepsizeGrid grid{eta, 0.05, 10};
    const std::vector<Schedule> schedules = {
        Schedule::constant(eta), Schedule::iid_uniform(eta, 0.05),
        Schedule::cyclic(grid), Schedule::markov_folded(grid, 0.6)};
    std::vector<SGDRunConfig> configs;
    for (const auto& s : schedules) {
      SGDRunConfig rc;
      rc.batch = 10;
      rc.schedule = s;
      rc.n_iters = 1000;
      rc.tail_window = 500;
      rc.seed = o.seed;
      configs.push_back(rc);
    }
    const auto ens = run_ensembles(problem, configs, 2000, o.workers);
    for (std::size_t k = 0; k < names.size(); ++k) {
      alpha[k].push_back(project_and_estimate(ens[k]).pooled_alpha);
      censored += ens[k].censored_count;
    }
  }
  for (std::size_t k = 0; k < names.size(); ++k) {
    std::string line = names[k] + ":";
    for (double a : alpha[k]) line += " " + g(a);
    ck.note(line);
    for (std::size_t j = 0; j + 1 < etas.size(); ++j) {
      ck.check(alpha[k][j + 1] <= alpha[k][j],
               names[k] + " increases from eta_hat " + g(etas[j]) + " to " +
                   g(etas[j + 1]));
    }
  }
  int ordered = 0;
  for (std::size_t j = 0; j < etas.size(); ++j) ordered += alpha[1][j] < alpha[2][j];
  ck.note("uniform < cyclic at " + std::to_string(ordered) + " of 5; censored " +
          std::to_string(censored));
  ck.check(ordered >= 4, "uniform < cyclic at fewer than 4 grid points");
  const double secs = seconds_since(t0);
  ck.note("runtime " + g(secs) + " s");
  ck.check(secs < 900.0, "runtime >= 900 s");
}

// 7. Stationary law, occupancy, Kac return times, two-state return pmf.
void markov_structure(const AcceptanceOptions& o, Checker& ck) {
  RandomStream rng(o.seed, 7);
  double worst_pi = 0.0, worst_tv = 0.0, worst_kac = 0.0;
  for (int K : {3, 5, 10}) {
    for (double p : {0.3, 0.6, 0.9}) {
      const Schedule s = Schedule::markov_folded({0.5, 0.05, K}, p);
      const auto cf = stationary_distribution(s, StationaryMethod::kClosedForm);
      const auto ls = stationary_distribution(s, StationaryMethod::kLinearSolve);
      const auto emp = empirical_occupancy(s, rng, 100000);
      double dpi = 0.0, tv = 0.0;
      for (std::size_t i = 0; i < ls.probabilities.size(); ++i) {
        dpi = std::max(dpi, std::abs(cf.probabilities[i] - ls.probabilities[i]));
        tv += 0.5 * std::abs(emp.probabilities[i] - ls.probabilities[i]);
      }
      worst_pi = std::max(worst_pi, dpi);
      worst_tv = std::max(worst_tv, tv);
      ck.check(dpi <= 1e-10, "closed form vs solve K=" + std::to_string(K) +
                                 " p=" + g(p) + ": " + g(dpi));
      ck.check(tv <= 0.01, "occupancy TV K=" + std::to_string(K) + " p=" + g(p) +
                               ": " + g(tv));

      // Kac: every state of K=5, p=0.6; state 0 elsewhere.
      const RegenerationSampler sampler(s);
      std::vector<int> starts = {0};
      if (K == 5 && p == 0.6) {
        starts.clear();
        for (int i = 0; i < s.num_states(); ++i) starts.push_back(i);
      }
      for (int start : starts) {
        const int n = 100000;
        double total = 0.0;
        for (int t = 0; t < n; ++t) {
          total += static_cast<double>(sampler.sample(rng, start).length());
        }
        const double expect = 1.0 / ls.probabilities[start];
        const double rel = std::abs(total / n - expect) / expect;
        worst_kac = std::max(worst_kac, rel);
        ck.check(rel <= 0.02, "Kac K=" + std::to_string(K) + " p=" + g(p) +
                                  " state " + std::to_string(start) + ": " + g(rel));
      }
    }
  }
  ck.note("max pi diff=" + g(worst_pi) + " max TV=" + g(worst_tv) +
          " max Kac rel=" + g(worst_kac));

  for (double p : {0.3, 0.6}) {
    const Schedule two = Schedule::markov_two_state(0.1, 0.2, p);
    const RegenerationSampler sampler(two);
    const int n = 100000;
    std::map<long long, long long> counts;
    for (int t = 0; t < n; ++t) ++counts[static_cast<long long>(sampler.sample(rng).length())];
    // Bins k = 1..kmax with expected count >= 5, then a pooled tail bin.
    double stat = 0.0, covered = 0.0;
    long long seen = 0;
    int bins = 0;
    long long k = 1;
    for (;; ++k) {
      const double pk = regeneration_pmf_two_state(p, k);
      if (n * pk < 5.0 || n * (1.0 - covered - pk) < 5.0) break;
      const double obs = static_cast<double>(counts[k]);
      stat += (obs - n * pk) * (obs - n * pk) / (n * pk);
      covered += pk;
      seen += counts[k];
      ++bins;
    }
    const double tail_expected = n * (1.0 - covered);
    const double tail_obs = static_cast<double>(n - seen);
    stat += (tail_obs - tail_expected) * (tail_obs - tail_expected) / tail_expected;
    ++bins;
    const double pvalue = boost::math::gamma_q(0.5 * (bins - 1), 0.5 * stat);
    ck.note("two-state p=" + g(p) + " chi2=" + g(stat) + " bins=" +
            std::to_string(bins) + " pvalue=" + g(pvalue));
    ck.check(pvalue > 0.001, "return-time pmf rejected at p=" + g(p));
  }
}

// 8. Block estimator on stable samples.
void estimator_recovery(const AcceptanceOptions& o, Checker& ck) {
  RandomStream rng(o.seed, 8);
  double prev = 0.0;
  std::vector<double> kept;
  for (double a : {1.2, 1.5, 1.8, 2.0}) {
    const auto x = sample_stable({a, 1.0}, 100000, rng);
    const BlockEstimate e = estimate_alpha_blocks(x);
    ck.note("alpha " + g(a) + " -> " + g(e.alpha));
    ck.check(std::abs(e.alpha - a) <= 0.1, "estimate off by more than 0.1 at " + g(a));
    ck.check(e.alpha > prev, "estimates not increasing at " + g(a));
    prev = e.alpha;
    if (a == 1.5) kept = x;
  }
  const BlockEstimate base = estimate_alpha_blocks(kept);
  for (double gamma : {0x1p-10, 0x1p20}) {
    std::vector<double> y(kept);
    for (double& v : y) v *= gamma;
    ck.check(estimate_alpha_blocks(y).alpha == base.alpha,
             "not bit-identical under scale " + g(gamma));
  }
  double worst = 0.0;
  for (double gamma : {0.37, 12.5, 1e6}) {
    std::vector<double> y(kept);
    for (double& v : y) v *= gamma;
    worst = std::max(worst, std::abs(estimate_alpha_blocks(y).alpha - base.alpha));
  }
  ck.note("scale: powers of two bit-identical, others within " + g(worst));
  ck.check(worst <= 1e-12 * base.alpha, "scale invariance beyond rounding");
  const BlockEstimate c = estimate_alpha_blocks(std::vector<double>(100000, 3.7));
  ck.note("constant input -> " + g(c.alpha));
  ck.check(c.alpha == 1.0, "constant input does not give exactly 1");
}

// 9. Coupling contraction and moment bounds for p in {1/2, 1}.
void contraction_moment_bounds(const AcceptanceOptions& o, Checker& ck) {
  const RegressionProblem problem = RegressionProblem::make(10, 1.0, 1.0, 1.0, o.seed);
  const std::vector<std::pair<std::string, Schedule>> schedules = {
      {"constant", Schedule::constant(0.05)},
      {"iid", Schedule::iid_grid({0.05, 0.04, 10})}};
  for (const auto& [name, s] : schedules) {
    SGDRunConfig rc;
    rc.batch = 10;
    rc.schedule = s;
    rc.seed = o.seed;
    ProbeOptions po;
    po.k_max = 200;
    po.n_paths = 5000;
    for (double p : {0.5, 1.0}) {
      const ProbeReport c = coupled_contraction_probe(problem, rc, p, po);
      const ProbeReport m = moment_bound_probe(problem, rc, p, po);
      ck.note(name + " p=" + g(p) + " log h=" + g(std::log(c.h_p)) + " slope=" +
              g(c.log_slope) + "+-" + g(c.log_slope_std_error));
      ck.check(c.slope_holds(3.0), name + " contraction slope bound fails at p=" + g(p));
      ck.check(m.holds(3.0), name + " moment bound fails at some k, p=" + g(p));
    }
  }
}

// 10. Sweep CSV bytes do not depend on the worker count.
void determinism(const AcceptanceOptions& o, Checker& ck) {
  ExperimentConfig c;
  c.seed = o.seed;
  c.variants = {"constant", "uniform", "cyclic", "markov"};
  c.eta_hat = 0.5;
  c.range = 0.05;
  c.points = 10;
  c.p = 0.6;
  c.batch = 10;
  c.dim = 10;
  c.sweep_parameter = "eta_hat";
  c.sweep_values = {0.4, 0.5, 0.6};
  c.routes = {"kernel", "regen_mc", "simulation"};
  c.kernel_method = KernelMethod::kMonteCarlo;
  c.n_samples = 50000;
  c.n_paths = 20000;
  c.n_runs = 200;
  c.n_iters = 300;
  c.tail_window = 150;
  c.tol = o.tol;
  c.allow_refusals = true;
  c.workers = 1;
  const std::string one = format_csv(cmd_sweep(c).rows);
  c.workers = 3;
  const std::string three = format_csv(cmd_sweep(c).rows);
  ck.note(std::to_string(one.size()) + " bytes, " +
          std::to_string(std::count(one.begin(), one.end(), '\n') - 1) + " rows");
  ck.check(one == three, "CSV differs between 1 and 3 workers");
  ck.check(svg_from_csv(one) == svg_from_csv(three), "SVG differs");
}

}  // namespace

const std::vector<CriterionInfo>& acceptance_criteria() {
  static const std::vector<CriterionInfo> list = {
      {1, "boundary_calibration", "c = 1 gives alpha = 2 by kernel root and by simulation"},
      {2, "route_agreement", "h^(r) evaluators agree; two-state closed form matches regeneration MC"},
      {3, "cyclic_markov_collapse", "folded chain at p = 1 equals the cyclic kernel"},
      {4, "ordering_law", "two-state ordering of iid, Markov, cyclic and constant tail indices"},
      {5, "monotonicity", "alpha up in b, down in d, down in R, up in p"},
      {6, "figure1_analogue", "simulated alpha non-increasing in eta_hat; uniform < cyclic"},
      {7, "markov_structure", "stationary law, occupancy, Kac return times, return-time pmf"},
      {8, "estimator_recovery", "block estimator on stable samples, scale invariance, constants"},
      {9, "contraction_moment_bounds", "coupling contraction and moment bounds for p in {1/2, 1}"},
      {10, "determinism", "sweep CSV identical across worker counts"},
  };
  return list;
}

CriterionResult run_criterion(int id, const AcceptanceOptions& options) {
  const auto& list = acceptance_criteria();
  if (id < 1 || id > static_cast<int>(list.size())) {
    throw Error(ErrorCode::kInvalidArgument, "no acceptance criterion " + std::to_string(id));
  }
  static const std::vector<void (*)(const AcceptanceOptions&, Checker&)> fns = {
      boundary_calibration, route_agreement, cyclic_markov_collapse,
      ordering_law,         monotonicity,    figure1_analogue,
      markov_structure,     estimator_recovery, contraction_moment_bounds,
      determinism};
  CriterionResult out;
  out.id = id;
  out.name = list[id - 1].name;
  Checker ck;
  const auto t0 = Clock::now();
  try {
    fns[id - 1](options, ck);
  } catch (const std::exception& e) {
    ck.check(false, std::string("error: ") + e.what());
  }
  out.seconds = seconds_since(t0);
  out.passed = ck.ok();
  out.detail = ck.detail();
  return out;
}

std::string format_criterion_line(const CriterionResult& r) {
  char secs[32];
  std::snprintf(secs, sizeof secs, "%.1f", r.seconds);
  return "criterion=" + std::to_string(r.id) + " name=" + r.name +
         " status=" + (r.passed ? "pass" : "fail") + " seconds=" + secs +
         " detail=" + r.detail;
}

std::string provenance_header(const AcceptanceOptions& o) {
  std::string h = "# tailscope validate\n";
  h += "# seed=" + std::to_string(o.seed) + "\n";
  h += "# workers=" + std::to_string(o.workers) + "\n";
  h += "# tol=" + format_double(o.tol) +
       (o.tol_from_env ? " (TAILSCOPE_TOL)" : " (default)") + "\n";
  return h;
}

}  // namespace tailscope
