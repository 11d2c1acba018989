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
#include <memory>
#include <string_view>
#include <vector>

#include "tailscope/quadrature.hpp"

namespace tailscope {

// Data a_i ~ N(0, sigma^2 I_d), mini-batches of size b.
struct GaussianDataModel {
  double sigma = 1.0;
  int batch = 1;
  int dim = 1;

  void validate() const;
};

enum class KernelMethod { kMonteCarlo, kQuadrature, kClosedForm };

std::string_view kernel_method_name(KernelMethod method);

struct KernelEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::uint64_t n_samples = 0;
  KernelMethod method = KernelMethod::kQuadrature;
};

// A point estimate with its leave-one-batch-out replicates. Functions of
// several replicated quantities computed on a shared panel keep their
// jackknife error by mapping every replicate through the same function.
struct Replicated {
  double value = 0.0;
  std::vector<double> loo;

  double std_error() const;
};

inline constexpr int kDefaultBatches = 50;

// First index of batch k when n samples are cut into equal contiguous
// batches.
std::size_t batch_start(std::size_t n, int num_batches, int k);

// Mean of exp(scale * logs[j]) and of scale * values[j], each with
// leave-one-batch-out replicates.
Replicated batch_mean_exp(const std::vector<double>& logs, double scale,
                          int num_batches);
Replicated batch_mean(const std::vector<double>& values, double scale,
                      int num_batches);
inline constexpr int kDefaultQuadratureNodes = 128;
inline constexpr std::size_t kDefaultKernelSamples = 1'000'000;

// Common-random-number panel of (X, Y), X ~ chi2(b), Y ~ chi2(d-1). Both are
// sums of squared normals drawn column by column from per-degree streams, so
// panels for nested (b, d) share their leading terms.
class ChiSquarePanel {
 public:
  ChiSquarePanel(const GaussianDataModel& model, std::size_t n,
                 std::uint64_t seed, int num_batches = kDefaultBatches);

  std::size_t size() const { return x_.size(); }
  const std::vector<double>& x() const { return x_; }
  const std::vector<double>& y() const { return y_; }
  int num_batches() const { return num_batches_; }
  // Half-open sample range of batch k.
  std::size_t batch_begin(int k) const;

 private:
  std::vector<double> x_;
  std::vector<double> y_;
  int num_batches_;
};

// Shared, read-only backing for per-step kernels: either tensor
// Gauss-Laguerre tables or a Monte Carlo panel.
class KernelSource {
 public:
  static std::shared_ptr<const KernelSource> quadrature(
      const GaussianDataModel& model, int nodes = kDefaultQuadratureNodes);
  static std::shared_ptr<const KernelSource> monte_carlo(
      const GaussianDataModel& model, std::size_t n, std::uint64_t seed,
      int num_batches = kDefaultBatches);

  const GaussianDataModel& model() const { return model_; }
  KernelMethod method() const { return method_; }
  std::uint64_t n_samples() const;

  const QuadratureRule& x_rule() const { return x_rule_; }
  const QuadratureRule& y_rule() const { return y_rule_; }
  const ChiSquarePanel& panel() const { return *panel_; }

 private:
  KernelSource() = default;

  GaussianDataModel model_;
  KernelMethod method_ = KernelMethod::kQuadrature;
  QuadratureRule x_rule_;
  QuadratureRule y_rule_;
  std::shared_ptr<const ChiSquarePanel> panel_;
};

// h(s; eta) = E[((1 - eta sigma^2 X/b)^2 + eta^2 sigma^4 X Y / b^2)^{s/2}]
// and rho(eta) = E[log(...)] / 2 for one fixed stepsize. The log of the
// integrand base is tabulated once, so evaluating many s is cheap.
class StepKernel {
 public:
  StepKernel(std::shared_ptr<const KernelSource> source, double eta);

  double eta() const { return eta_; }
  const KernelSource& source() const { return *source_; }

  KernelEstimate h(double s) const;
  Replicated h_replicated(double s) const;
  KernelEstimate rho() const;
  Replicated rho_replicated() const;

 private:
  std::shared_ptr<const KernelSource> source_;
  double eta_;
  std::vector<double> log_base_;
  std::vector<double> log_weight_;  // quadrature only
  bool trivial_ = false;            // eta == 0
};

// Spectral extremes of H = sum of b outer products of N(0, sigma^2 I_d)
// vectors. Independent of eta, so one panel serves every stepsize.
class NormPanel {
 public:
  NormPanel(const GaussianDataModel& model, std::size_t n, std::uint64_t seed,
            int num_batches = kDefaultBatches);

  const GaussianDataModel& model() const { return model_; }
  std::size_t size() const { return lambda_min_.size(); }
  int num_batches() const { return num_batches_; }
  std::size_t batch_begin(int k) const;

  // E||I - (eta/b) H||^s and E log||I - (eta/b) H||.
  Replicated hhat(double s, double eta) const;
  Replicated rho_hat(double eta) const;

 private:
  double log_norm(std::size_t j, double eta) const;

  GaussianDataModel model_;
  std::vector<double> lambda_min_;
  std::vector<double> lambda_max_;
  int num_batches_;
};

KernelEstimate h_step(double s, double eta, const GaussianDataModel& model,
                      KernelMethod method,
                      std::size_t n = kDefaultKernelSamples,
                      std::uint64_t seed = 0);

// 1 - 2 E[eta] sigma^2 + E[eta^2] sigma^4 (d + b + 1) / b.
double h2_closed(double eta_mean, double eta_sq_mean,
                 const GaussianDataModel& model);

KernelEstimate rho_step(double eta, const GaussianDataModel& model,
                        std::size_t n = kDefaultKernelSamples,
                        std::uint64_t seed = 0);

KernelEstimate hhat_norm(double s, double eta, const GaussianDataModel& model,
                         std::size_t n, std::uint64_t seed = 0);

}  // namespace tailscope
