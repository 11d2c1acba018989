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

#include "tailscope/sgdsim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "tailscope/error.hpp"
#include "tailscope/kernel.hpp"
#include "tailscope/parallel.hpp"
#include "tailscope/tailindex.hpp"

namespace tailscope {

namespace {

constexpr std::uint64_t kEnsembleTag = 0x656e7365ULL;
constexpr std::uint64_t kProbeTag = 0x70726f62ULL;

double norm_pow(const std::vector<double>& v, double p) {
  double ss = 0.0;
  for (double x : v) ss += x * x;
  return std::pow(ss, 0.5 * p);
}

// Chain schedules start from a stationary draw.
void randomize_start(Schedule& schedule, const std::vector<double>& cdf,
                     RandomStream& rng) {
  if (cdf.empty()) return;
  const double u = rng.uniform() * cdf.back();
  const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  schedule.set_state(static_cast<int>(
      std::min<std::ptrdiff_t>(it - cdf.begin(), cdf.size() - 1)));
}

std::vector<double> stationary_cdf(const Schedule& schedule) {
  std::vector<double> cdf;
  if (!schedule.is_chain()) return cdf;
  double acc = 0.0;
  for (double v : stationary_distribution(schedule,
                                          StationaryMethod::kLinearSolve)
                      .probabilities) {
    acc += v;
    cdf.push_back(acc);
  }
  return cdf;
}

std::string echo(const RegressionProblem& problem, const SGDRunConfig& c,
                 int n_runs) {
  std::ostringstream os;
  os << "schedule=" << c.schedule.tag() << " batch=" << c.batch
     << " n_iters=" << c.n_iters << " tail_window=" << c.tail_window
     << " seed=" << c.seed << " n_runs=" << n_runs << " dim=" << problem.dim
     << " sigma_w=" << problem.sigma_w << " sigma_x=" << problem.sigma_x
     << " sigma_y=" << problem.sigma_y;
  return os.str();
}

}  // namespace

RegressionProblem RegressionProblem::make(int dim, double sigma_w,
                                          double sigma_x, double sigma_y,
                                          std::uint64_t seed) {
  RegressionProblem p;
  p.dim = dim;
  p.sigma_w = sigma_w;
  p.sigma_x = sigma_x;
  p.sigma_y = sigma_y;
  p.seed = seed;
  p.validate();
  RandomStream rng(seed, 0x74727574ULL);
  p.truth.resize(dim);
  for (double& w : p.truth) w = sigma_w * rng.normal();
  return p;
}

void RegressionProblem::validate() const {
  if (dim < 1) throw Error(ErrorCode::kInvalidArgument, "problem: dim < 1");
  if (!(sigma_w >= 0.0) || !(sigma_x > 0.0) || !(sigma_y >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "problem: need sigma_w >= 0, sigma_x > 0, sigma_y >= 0");
  }
  if (!truth.empty() && static_cast<int>(truth.size()) != dim) {
    throw Error(ErrorCode::kInvalidArgument, "problem: truth has wrong size");
  }
}

void SGDRunConfig::validate(int dim) const {
  if (batch < 1) throw Error(ErrorCode::kInvalidArgument, "sgd: batch < 1");
  if (n_iters < 1) throw Error(ErrorCode::kInvalidArgument, "sgd: n_iters < 1");
  if (tail_window < 1 || tail_window > n_iters) {
    throw Error(ErrorCode::kInvalidArgument,
                "sgd: need 1 <= tail_window <= n_iters");
  }
  if (!x0.empty() && static_cast<int>(x0.size()) != dim) {
    throw Error(ErrorCode::kInvalidArgument, "sgd: x0 has wrong size");
  }
}

DataStream::DataStream(const RegressionProblem& problem, RandomStream rng)
    : problem_(&problem), rng_(rng) {}

void DataStream::next_batch(int b, double* a, double* y) {
  const int d = problem_->dim;
  const double sx = problem_->sigma_x;
  const double sy = problem_->sigma_y;
  const std::vector<double>& w = problem_->truth;
  for (int i = 0; i < b; ++i) {
    double* row = a + std::size_t(i) * d;
    double dot = 0.0;
    for (int c = 0; c < d; ++c) {
      row[c] = sx * rng_.normal();
      if (!w.empty()) dot += row[c] * w[c];
    }
    y[i] = dot + sy * rng_.normal();
  }
  cursor_ += static_cast<std::uint64_t>(b);
}

bool sgd_step(std::vector<double>& x, const double* a, const double* y, int b,
              double eta) {
  if (eta == 0.0) return true;
  const std::size_t d = x.size();
  const double scale = eta / b;
  // Residuals first so every sample sees the same pre-step x.
  double r[64];
  std::vector<double> heap;
  double* res = r;
  if (b > 64) {
    heap.resize(b);
    res = heap.data();
  }
  for (int i = 0; i < b; ++i) {
    const double* row = a + std::size_t(i) * d;
    double dot = 0.0;
    for (std::size_t c = 0; c < d; ++c) dot += row[c] * x[c];
    res[i] = scale * (dot - y[i]);
  }
  bool finite = true;
  for (std::size_t c = 0; c < d; ++c) {
    double g = 0.0;
    for (int i = 0; i < b; ++i) g += a[std::size_t(i) * d + c] * res[i];
    x[c] -= g;
    finite = finite && std::isfinite(x[c]);
  }
  return finite;
}

std::vector<EnsembleMatrix> run_ensembles(
    const RegressionProblem& problem, const std::vector<SGDRunConfig>& configs,
    int n_runs, unsigned workers) {
  problem.validate();
  if (configs.empty()) return {};
  if (n_runs < 1) throw Error(ErrorCode::kInvalidArgument, "sgd: n_runs < 1");
  const SGDRunConfig& first = configs.front();
  for (const auto& c : configs) {
    c.validate(problem.dim);
    if (c.batch != first.batch || c.n_iters != first.n_iters ||
        c.tail_window != first.tail_window || c.seed != first.seed) {
      throw Error(ErrorCode::kInvalidArgument,
                  "run_ensembles: configurations must share batch, n_iters, "
                  "tail_window and seed");
    }
  }
  const int d = problem.dim;
  const int b = first.batch;
  const std::size_t nc = configs.size();
  std::vector<std::vector<double>> cdfs;
  for (const auto& c : configs) cdfs.push_back(stationary_cdf(c.schedule));

  std::vector<EnsembleMatrix> out(nc);
  for (std::size_t c = 0; c < nc; ++c) {
    out[c].n_runs = n_runs;
    out[c].dim = d;
    out[c].data.assign(std::size_t(n_runs) * d, 0.0);
    out[c].censored.assign(n_runs, 0);
    out[c].config_echo = echo(problem, configs[c], n_runs);
  }

  const RandomStream master(first.seed, kEnsembleTag);
  parallel_for(static_cast<std::size_t>(n_runs), workers, [&](std::size_t r) {
    const RandomStream run = master.substream(r);
    DataStream data(problem, run.substream(0));
    std::vector<Schedule> sched;
    std::vector<RandomStream> srng;
    std::vector<std::vector<double>> x(nc), acc(nc);
    std::vector<char> alive(nc, 1);
    for (std::size_t c = 0; c < nc; ++c) {
      sched.push_back(configs[c].schedule);
      srng.push_back(run.substream(1));
      randomize_start(sched[c], cdfs[c], srng[c]);
      x[c] = configs[c].x0.empty() ? std::vector<double>(d, 0.0)
                                   : configs[c].x0;
      acc[c].assign(d, 0.0);
    }
    std::vector<double> a(std::size_t(b) * d), y(b);
    const int burn = first.n_iters - first.tail_window;
    for (int k = 1; k <= first.n_iters; ++k) {
      data.next_batch(b, a.data(), y.data());
      for (std::size_t c = 0; c < nc; ++c) {
        const double eta = sched[c].next_step(srng[c]);
        if (!alive[c]) continue;
        if (!sgd_step(x[c], a.data(), y.data(), b, eta)) {
          alive[c] = 0;
          continue;
        }
        if (k > burn) {
          for (int i = 0; i < d; ++i) acc[c][i] += x[c][i];
        }
      }
    }
    for (std::size_t c = 0; c < nc; ++c) {
      double* row = out[c].data.data() + r * d;
      bool finite = alive[c];
      for (int i = 0; i < d && finite; ++i) {
        row[i] = acc[c][i] / first.tail_window;
        finite = std::isfinite(row[i]);
      }
      if (!finite) {
        out[c].censored[r] = 1;
        std::fill(row, row + d, std::numeric_limits<double>::quiet_NaN());
      }
    }
  });

  for (auto& e : out) {
    e.censored_count = 0;
    for (auto flag : e.censored) e.censored_count += flag;
    e.regime_warning = e.censored_count > kCensoredWarnFraction * n_runs;
  }
  return out;
}

EnsembleMatrix run_ensemble(const RegressionProblem& problem,
                            const SGDRunConfig& config, int n_runs,
                            unsigned workers) {
  return run_ensembles(problem, {config}, n_runs, workers).front();
}

bool ProbeReport::holds(double z) const {
  for (const auto& pt : points) {
    double limit;
    if (relative) {
      const double rel = pt.mean > 0.0 ? pt.std_error / pt.mean : 0.0;
      limit = pt.bound * (1.0 + z * rel);
    } else {
      limit = pt.bound + z * std::hypot(pt.std_error, pt.bound_std_error);
    }
    if (!(pt.mean <= limit)) return false;
  }
  return true;
}

bool ProbeReport::slope_holds(double z) const {
  return log_slope <= std::log(h_p) + z * log_slope_std_error;
}

namespace {

// Ordinary least-squares slope of ys against k = 1, 2, ...
double ls_slope(const std::vector<double>& ys) {
  const double n = static_cast<double>(ys.size());
  double sk = 0.0, sy = 0.0, skk = 0.0, sky = 0.0;
  for (std::size_t i = 0; i < ys.size(); ++i) {
    const double k = static_cast<double>(i + 1);
    sk += k;
    sy += ys[i];
    skk += k * k;
    sky += k * ys[i];
  }
  return (n * sky - sk * sy) / (n * skk - sk * sk);
}

double schedule_h(const RegressionProblem& problem, const SGDRunConfig& config,
                  double p) {
  const ScheduleKind kind = config.schedule.kind();
  if (kind != ScheduleKind::kConstant && kind != ScheduleKind::kIIDGrid &&
      kind != ScheduleKind::kIIDUniformContinuous) {
    throw Error(ErrorCode::kInvalidArgument,
                "probe: only constant and i.i.d. schedules are supported");
  }
  const GaussianDataModel model{problem.sigma_x, config.batch, problem.dim};
  KernelOptions opts;
  opts.rho_samples = 1000;
  const KernelContext ctx(model, opts);
  const double h = kernel_for(config.schedule, ctx)(p).value;
  if (!(h < 1.0)) {
    throw Error(ErrorCode::kRefusal, "probe: requires h(p) < 1", h);
  }
  return h;
}

struct PerK {
  std::vector<std::vector<double>> sums;  // [k][batch]
  int batches;
  std::size_t n;

  PerK(int k_max, std::size_t n_paths)
      : sums(k_max + 1,
             std::vector<double>(
                 std::min<std::size_t>(n_paths, kDefaultBatches), 0.0)),
        batches(static_cast<int>(
            std::min<std::size_t>(n_paths, kDefaultBatches))),
        n(n_paths) {}

  int batch_of(std::size_t j) const {
    // Inverse of batch_start.
    int k = static_cast<int>(j * batches / n);
    while (k + 1 < batches && batch_start(n, batches, k + 1) <= j) ++k;
    while (k > 0 && batch_start(n, batches, k) > j) --k;
    return k;
  }

  Replicated at(int k) const {
    Replicated r;
    double total = 0.0;
    for (double s : sums[k]) total += s;
    r.value = total / n;
    if (batches < 2) return r;
    for (int q = 0; q < batches; ++q) {
      const std::size_t len =
          batch_start(n, batches, q + 1) - batch_start(n, batches, q);
      r.loo.push_back((total - sums[k][q]) / static_cast<double>(n - len));
    }
    return r;
  }
};

}  // namespace

ProbeReport coupled_contraction_probe(const RegressionProblem& problem,
                                      const SGDRunConfig& config, double p,
                                      const ProbeOptions& options) {
  problem.validate();
  config.validate(problem.dim);
  if (!(p > 0.0)) throw Error(ErrorCode::kDomain, "probe: p must be > 0", p);
  if (options.n_paths == 0 || options.k_max < 0) {
    throw Error(ErrorCode::kConfig, "probe: need n_paths >= 1, k_max >= 0");
  }
  const int d = problem.dim;
  const std::vector<double> x0 =
      options.x0.empty() ? std::vector<double>(d, 0.0) : options.x0;
  const std::vector<double> xt0 =
      options.x0_tilde.empty() ? std::vector<double>(d, 1.0)
                               : options.x0_tilde;
  if (static_cast<int>(x0.size()) != d || static_cast<int>(xt0.size()) != d) {
    throw Error(ErrorCode::kInvalidArgument, "probe: start has wrong size");
  }
  ProbeReport report;
  report.p = p;
  report.relative = true;
  report.h_p = schedule_h(problem, config, p);

  std::vector<double> diff0(d);
  for (int i = 0; i < d; ++i) diff0[i] = x0[i] - xt0[i];
  const double start = norm_pow(diff0, p);

  const int b = config.batch;
  PerK acc(options.k_max, options.n_paths);
  const RandomStream master(config.seed, kProbeTag);
  std::vector<double> a(std::size_t(b) * d), y(b), diff(d);
  for (std::size_t j = 0; j < options.n_paths; ++j) {
    const RandomStream path = master.substream(j);
    DataStream data(problem, path.substream(0));
    RandomStream srng = path.substream(1);
    Schedule sched = config.schedule;
    std::vector<double> x = x0, xt = xt0;
    const int q = acc.batch_of(j);
    acc.sums[0][q] += start;
    for (int k = 1; k <= options.k_max; ++k) {
      data.next_batch(b, a.data(), y.data());
      const double eta = sched.next_step(srng);
      sgd_step(x, a.data(), y.data(), b, eta);
      sgd_step(xt, a.data(), y.data(), b, eta);
      for (int i = 0; i < d; ++i) diff[i] = x[i] - xt[i];
      acc.sums[k][q] += norm_pow(diff, p);
    }
  }
  std::vector<Replicated> per_k;
  for (int k = 0; k <= options.k_max; ++k) {
    per_k.push_back(acc.at(k));
    const Replicated& r = per_k.back();
    report.points.push_back(ProbePoint{
        k, r.value, r.std_error(), std::pow(report.h_p, k) * start, 0.0});
  }
  if (options.k_max >= 2 && start > 0.0) {
    auto slope_of = [&](auto value_at) {
      std::vector<double> ys;
      for (int k = 1; k <= options.k_max; ++k) ys.push_back(std::log(value_at(k)));
      return ls_slope(ys);
    };
    Replicated slope;
    slope.value = slope_of([&](int k) { return per_k[k].value; });
    for (std::size_t q = 0; q < per_k[0].loo.size(); ++q) {
      slope.loo.push_back(slope_of([&](int k) { return per_k[k].loo[q]; }));
    }
    report.log_slope = slope.value;
    report.log_slope_std_error = slope.std_error();
  }
  return report;
}

ProbeReport moment_bound_probe(const RegressionProblem& problem,
                               const SGDRunConfig& config, double p,
                               const ProbeOptions& options) {
  problem.validate();
  config.validate(problem.dim);
  if (!(p > 0.0 && p <= 1.0)) {
    throw Error(ErrorCode::kDomain, "moment probe: need 0 < p <= 1", p);
  }
  if (options.n_paths == 0 || options.k_max < 0) {
    throw Error(ErrorCode::kConfig, "probe: need n_paths >= 1, k_max >= 0");
  }
  const int d = problem.dim;
  const std::vector<double> x0 =
      options.x0.empty() ? std::vector<double>(d, 0.0) : options.x0;
  if (static_cast<int>(x0.size()) != d) {
    throw Error(ErrorCode::kInvalidArgument, "probe: start has wrong size");
  }
  ProbeReport report;
  report.p = p;
  report.h_p = schedule_h(problem, config, p);

  const int b = config.batch;
  PerK acc(options.k_max, options.n_paths);
  std::vector<double> q1(options.n_paths);
  const RandomStream master(config.seed, kProbeTag ^ 0x6d6f6dULL);
  std::vector<double> a(std::size_t(b) * d), y(b), q(d);
  const double start = norm_pow(x0, p);
  for (std::size_t j = 0; j < options.n_paths; ++j) {
    const RandomStream path = master.substream(j);
    DataStream data(problem, path.substream(0));
    RandomStream srng = path.substream(1);
    Schedule sched = config.schedule;
    std::vector<double> x = x0;
    const int bq = acc.batch_of(j);
    acc.sums[0][bq] += start;
    for (int k = 1; k <= options.k_max; ++k) {
      data.next_batch(b, a.data(), y.data());
      const double eta = sched.next_step(srng);
      if (k == 1) {
        // q_1 = (eta_1 / b) sum_i a_i y_i from the same first batch.
        std::fill(q.begin(), q.end(), 0.0);
        for (int i = 0; i < b; ++i) {
          for (int c = 0; c < d; ++c) q[c] += a[std::size_t(i) * d + c] * y[i];
        }
        for (double& v : q) v *= eta / b;
        q1[j] = norm_pow(q, p);
      }
      sgd_step(x, a.data(), y.data(), b, eta);
      acc.sums[k][bq] += norm_pow(x, p);
    }
  }
  const Replicated qm = batch_mean(q1, 1.0, kDefaultBatches);
  const double h = report.h_p;
  for (int k = 0; k <= options.k_max; ++k) {
    const Replicated r = acc.at(k);
    const double hk = std::pow(h, k);
    const double geo = (1.0 - hk) / (1.0 - h);
    report.points.push_back(ProbePoint{k, r.value, r.std_error(),
                                       hk * start + geo * qm.value,
                                       geo * qm.std_error()});
  }
  return report;
}

}  // namespace tailscope
