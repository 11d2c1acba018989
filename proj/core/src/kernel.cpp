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

#include "tailscope/kernel.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cfloat>
#include <cmath>

#include "tailscope/error.hpp"
#include "tailscope/random.hpp"

namespace tailscope {

void GaussianDataModel::validate() const {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw Error(ErrorCode::kInvalidArgument, "model: sigma must be > 0");
  }
  if (batch < 1) throw Error(ErrorCode::kInvalidArgument, "model: b < 1");
  if (dim < 1) throw Error(ErrorCode::kInvalidArgument, "model: d < 1");
}

std::string_view kernel_method_name(KernelMethod method) {
  switch (method) {
    case KernelMethod::kMonteCarlo: return "monte_carlo";
    case KernelMethod::kQuadrature: return "quadrature";
    case KernelMethod::kClosedForm: return "closed_form";
  }
  return "unknown";
}

double Replicated::std_error() const {
  if (loo.size() < 2) return 0.0;
  const double b = static_cast<double>(loo.size());
  double mean = 0.0;
  for (double v : loo) mean += v;
  mean /= b;
  double ss = 0.0;
  for (double v : loo) ss += (v - mean) * (v - mean);
  return std::sqrt((b - 1.0) / b * ss);
}

namespace {

int clamp_batches(std::size_t n, int requested) {
  if (requested < 2) {
    throw Error(ErrorCode::kConfig, "kernel: need at least 2 batches");
  }
  return static_cast<int>(std::min<std::size_t>(n, requested));
}

double safe_log(double v) { return std::log(std::max(v, DBL_MIN)); }

}  // namespace

std::size_t batch_start(std::size_t n, int num_batches, int k) {
  return n * static_cast<std::size_t>(k) /
         static_cast<std::size_t>(num_batches);
}

// The largest exponent is factored out so large s does not overflow early.
Replicated batch_mean_exp(const std::vector<double>& logs, double scale,
                          int num_batches) {
  const std::size_t n = logs.size();
  if (n == 0) throw Error(ErrorCode::kSize, "batch_mean_exp: no samples");
  const int batches = static_cast<int>(
      std::min<std::size_t>(n, static_cast<std::size_t>(num_batches)));
  double top = -INFINITY;
  for (double l : logs) top = std::max(top, scale * l);
  std::vector<double> sums(batches, 0.0);
  double total = 0.0;
  for (int k = 0; k < batches; ++k) {
    double acc = 0.0;
    const std::size_t end = batch_start(n, batches, k + 1);
    for (std::size_t j = batch_start(n, batches, k); j < end; ++j) {
      acc += std::exp(scale * logs[j] - top);
    }
    sums[k] = acc;
    total += acc;
  }
  const double factor = std::exp(top);
  Replicated out;
  out.value = factor * (total / static_cast<double>(n));
  if (batches < 2) return out;
  out.loo.resize(batches);
  for (int k = 0; k < batches; ++k) {
    const std::size_t len =
        batch_start(n, batches, k + 1) - batch_start(n, batches, k);
    out.loo[k] = factor * ((total - sums[k]) / static_cast<double>(n - len));
  }
  return out;
}

Replicated batch_mean(const std::vector<double>& values, double scale,
                      int num_batches) {
  const std::size_t n = values.size();
  if (n == 0) throw Error(ErrorCode::kSize, "batch_mean: no samples");
  const int batches = static_cast<int>(
      std::min<std::size_t>(n, static_cast<std::size_t>(num_batches)));
  std::vector<double> sums(batches, 0.0);
  double total = 0.0;
  for (int k = 0; k < batches; ++k) {
    double acc = 0.0;
    const std::size_t end = batch_start(n, batches, k + 1);
    for (std::size_t j = batch_start(n, batches, k); j < end; ++j) {
      acc += values[j];
    }
    sums[k] = acc;
    total += acc;
  }
  Replicated out;
  out.value = scale * total / static_cast<double>(n);
  if (batches < 2) return out;
  out.loo.resize(batches);
  for (int k = 0; k < batches; ++k) {
    const std::size_t len =
        batch_start(n, batches, k + 1) - batch_start(n, batches, k);
    out.loo[k] = scale * (total - sums[k]) / static_cast<double>(n - len);
  }
  return out;
}

ChiSquarePanel::ChiSquarePanel(const GaussianDataModel& model, std::size_t n,
                               std::uint64_t seed, int num_batches)
    : x_(n, 0.0), y_(n, 0.0) {
  model.validate();
  if (n == 0) {
    throw Error(ErrorCode::kConfig, "kernel: Monte Carlo needs n >= 1");
  }
  num_batches_ = clamp_batches(n, num_batches);
  const RandomStream root(seed, 0x6b65726eULL);
  for (int i = 0; i < model.batch; ++i) {
    RandomStream st = root.substream(static_cast<std::uint64_t>(i));
    for (std::size_t j = 0; j < n; ++j) {
      const double z = st.normal();
      x_[j] += z * z;
    }
  }
  for (int i = 0; i + 1 < model.dim; ++i) {
    RandomStream st = root.substream((1ULL << 32) + static_cast<unsigned>(i));
    for (std::size_t j = 0; j < n; ++j) {
      const double z = st.normal();
      y_[j] += z * z;
    }
  }
}

std::size_t ChiSquarePanel::batch_begin(int k) const {
  return batch_start(x_.size(), num_batches_, k);
}

std::shared_ptr<const KernelSource> KernelSource::quadrature(
    const GaussianDataModel& model, int nodes) {
  model.validate();
  auto src = std::shared_ptr<KernelSource>(new KernelSource());
  src->model_ = model;
  src->method_ = KernelMethod::kQuadrature;
  src->x_rule_ = chi_square_rule(model.batch, nodes);
  src->y_rule_ = chi_square_rule(model.dim - 1, nodes);
  return src;
}

std::shared_ptr<const KernelSource> KernelSource::monte_carlo(
    const GaussianDataModel& model, std::size_t n, std::uint64_t seed,
    int num_batches) {
  auto src = std::shared_ptr<KernelSource>(new KernelSource());
  src->model_ = model;
  src->method_ = KernelMethod::kMonteCarlo;
  src->panel_ = std::make_shared<ChiSquarePanel>(model, n, seed, num_batches);
  return src;
}

std::uint64_t KernelSource::n_samples() const {
  if (method_ == KernelMethod::kMonteCarlo) return panel_->size();
  return x_rule_.nodes.size() * y_rule_.nodes.size();
}

StepKernel::StepKernel(std::shared_ptr<const KernelSource> source, double eta)
    : source_(std::move(source)), eta_(eta) {
  if (!(eta >= 0.0) || !std::isfinite(eta)) {
    throw Error(ErrorCode::kInvalidArgument, "kernel: eta must be >= 0", eta);
  }
  trivial_ = eta == 0.0;
  if (trivial_) return;
  const GaussianDataModel& m = source_->model();
  const double a = eta * m.sigma * m.sigma / m.batch;
  auto log_base = [a](double x, double y) {
    const double u = 1.0 - a * x;
    return safe_log(u * u + a * a * x * y);
  };
  if (source_->method() == KernelMethod::kQuadrature) {
    const QuadratureRule& rx = source_->x_rule();
    const QuadratureRule& ry = source_->y_rule();
    log_base_.reserve(rx.nodes.size() * ry.nodes.size());
    log_weight_.reserve(log_base_.capacity());
    for (std::size_t i = 0; i < rx.nodes.size(); ++i) {
      for (std::size_t j = 0; j < ry.nodes.size(); ++j) {
        const double w = rx.weights[i] * ry.weights[j];
        if (!(w > 0.0)) continue;
        log_weight_.push_back(std::log(w));
        log_base_.push_back(log_base(rx.nodes[i], ry.nodes[j]));
      }
    }
  } else {
    const ChiSquarePanel& p = source_->panel();
    log_base_.resize(p.size());
    for (std::size_t j = 0; j < p.size(); ++j) {
      log_base_[j] = log_base(p.x()[j], p.y()[j]);
    }
  }
}

Replicated StepKernel::h_replicated(double s) const {
  if (!(s >= 0.0)) {
    throw Error(ErrorCode::kDomain, "kernel: s must be >= 0", s);
  }
  Replicated out;
  const bool mc = source_->method() == KernelMethod::kMonteCarlo;
  const int batches = mc ? source_->panel().num_batches() : 0;
  if (s == 0.0 || trivial_) {
    out.value = 1.0;
    out.loo.assign(batches, 1.0);
    return out;
  }
  const double t = 0.5 * s;
  if (mc) {
    const ChiSquarePanel& p = source_->panel();
    return batch_mean_exp(log_base_, t, p.num_batches());
  }
  if (s == 2.0) {
    out.value = h2_closed(eta_, eta_ * eta_, source_->model());
    return out;
  }
  double top = -INFINITY;
  for (std::size_t i = 0; i < log_base_.size(); ++i) {
    top = std::max(top, log_weight_[i] + t * log_base_[i]);
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < log_base_.size(); ++i) {
    acc += std::exp(log_weight_[i] + t * log_base_[i] - top);
  }
  out.value = std::exp(top) * acc;
  return out;
}

KernelEstimate StepKernel::h(double s) const {
  const Replicated r = h_replicated(s);
  return KernelEstimate{r.value, r.std_error(), source_->n_samples(),
                        source_->method()};
}

Replicated StepKernel::rho_replicated() const {
  const bool mc = source_->method() == KernelMethod::kMonteCarlo;
  Replicated out;
  if (trivial_) {
    out.value = 0.0;
    out.loo.assign(mc ? source_->panel().num_batches() : 0, 0.0);
    return out;
  }
  if (mc) {
    const ChiSquarePanel& p = source_->panel();
    return batch_mean(log_base_, 0.5, p.num_batches());
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < log_base_.size(); ++i) {
    acc += std::exp(log_weight_[i]) * log_base_[i];
  }
  out.value = 0.5 * acc;
  return out;
}

KernelEstimate StepKernel::rho() const {
  const Replicated r = rho_replicated();
  return KernelEstimate{r.value, r.std_error(), source_->n_samples(),
                        source_->method()};
}

NormPanel::NormPanel(const GaussianDataModel& model, std::size_t n,
                     std::uint64_t seed, int num_batches)
    : model_(model), lambda_min_(n), lambda_max_(n) {
  model.validate();
  if (n == 0) {
    throw Error(ErrorCode::kConfig, "kernel: Monte Carlo needs n >= 1");
  }
  num_batches_ = clamp_batches(n, num_batches);
  const int b = model.batch;
  const int d = model.dim;
  const RandomStream root(seed, 0x6e6f726dULL);
  Eigen::MatrixXd A(b, d);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  for (std::size_t j = 0; j < n; ++j) {
    const RandomStream sample = root.substream(j);
    for (int i = 0; i < b; ++i) {
      RandomStream row = sample.substream(static_cast<std::uint64_t>(i));
      for (int c = 0; c < d; ++c) A(i, c) = model.sigma * row.normal();
    }
    // The nonzero spectrum of A^T A is that of the smaller Gram matrix.
    const Eigen::MatrixXd G =
        b <= d ? Eigen::MatrixXd(A * A.transpose())
               : Eigen::MatrixXd(A.transpose() * A);
    solver.compute(G, Eigen::EigenvaluesOnly);
    const auto& ev = solver.eigenvalues();
    lambda_max_[j] = ev(ev.size() - 1);
    lambda_min_[j] = b < d ? 0.0 : std::max(0.0, ev(0));
  }
}

std::size_t NormPanel::batch_begin(int k) const {
  return batch_start(lambda_min_.size(), num_batches_, k);
}

double NormPanel::log_norm(std::size_t j, double eta) const {
  const double a = eta / model_.batch;
  const double norm = std::max(std::abs(1.0 - a * lambda_max_[j]),
                               std::abs(1.0 - a * lambda_min_[j]));
  return safe_log(norm);
}

Replicated NormPanel::hhat(double s, double eta) const {
  if (!(s >= 0.0)) {
    throw Error(ErrorCode::kDomain, "hhat: s must be >= 0", s);
  }
  if (s == 0.0 || eta == 0.0) {
    return Replicated{1.0, std::vector<double>(num_batches_, 1.0)};
  }
  std::vector<double> logs(size());
  for (std::size_t j = 0; j < size(); ++j) logs[j] = log_norm(j, eta);
  return batch_mean_exp(logs, s, num_batches_);
}

Replicated NormPanel::rho_hat(double eta) const {
  std::vector<double> logs(size());
  for (std::size_t j = 0; j < size(); ++j) logs[j] = log_norm(j, eta);
  return batch_mean(logs, 1.0, num_batches_);
}

KernelEstimate h_step(double s, double eta, const GaussianDataModel& model,
                      KernelMethod method, std::size_t n, std::uint64_t seed) {
  model.validate();
  if (!(s >= 0.0)) throw Error(ErrorCode::kDomain, "h_step: s < 0", s);
  switch (method) {
    case KernelMethod::kClosedForm: {
      if (s == 0.0) return KernelEstimate{1.0, 0.0, 0, method};
      if (s != 2.0) {
        throw Error(ErrorCode::kDomain,
                    "h_step: closed form is available only at s = 2", s);
      }
      return KernelEstimate{h2_closed(eta, eta * eta, model), 0.0, 0, method};
    }
    case KernelMethod::kQuadrature:
      return StepKernel(KernelSource::quadrature(model), eta).h(s);
    case KernelMethod::kMonteCarlo:
      if (n == 0) {
        throw Error(ErrorCode::kConfig, "h_step: Monte Carlo needs n >= 1");
      }
      return StepKernel(KernelSource::monte_carlo(model, n, seed), eta).h(s);
  }
  return {};
}

double h2_closed(double eta_mean, double eta_sq_mean,
                 const GaussianDataModel& model) {
  model.validate();
  const double tol = 1e-12 * std::max(1.0, eta_sq_mean);
  if (!(eta_sq_mean >= eta_mean * eta_mean - tol) ||
      !std::isfinite(eta_mean)) {
    throw Error(ErrorCode::kDomain,
                "h2_closed: need E[eta^2] >= E[eta]^2", eta_sq_mean);
  }
  const double s2 = model.sigma * model.sigma;
  const double b = model.batch;
  return 1.0 - 2.0 * eta_mean * s2 +
         eta_sq_mean * s2 * s2 / b * (model.dim + b + 1.0);
}

KernelEstimate rho_step(double eta, const GaussianDataModel& model,
                        std::size_t n, std::uint64_t seed) {
  if (n == 0) throw Error(ErrorCode::kConfig, "rho_step: n must be >= 1");
  return StepKernel(KernelSource::monte_carlo(model, n, seed), eta).rho();
}

KernelEstimate hhat_norm(double s, double eta, const GaussianDataModel& model,
                         std::size_t n, std::uint64_t seed) {
  const NormPanel panel(model, n, seed);
  const Replicated r = panel.hhat(s, eta);
  return KernelEstimate{r.value, r.std_error(), panel.size(),
                        KernelMethod::kMonteCarlo};
}

}  // namespace tailscope
