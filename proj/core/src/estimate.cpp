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

#include "tailscope/estimate.hpp"

#include <algorithm>
#include <bit>
#include <cfloat>
#include <cmath>
#include <numbers>
#include <numeric>

#include "tailscope/error.hpp"

namespace tailscope {

void StableSpec::validate() const {
  if (!(alpha > 0.0 && alpha <= 2.0)) {
    throw Error(ErrorCode::kInvalidArgument, "stable: alpha must lie in (0, 2]",
                alpha);
  }
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw Error(ErrorCode::kInvalidArgument, "stable: scale must be > 0");
  }
}

std::vector<double> sample_stable(const StableSpec& spec, std::size_t n,
                                  RandomStream& rng) {
  spec.validate();
  const double a = spec.alpha;
  std::vector<double> out(n);
  for (double& x : out) {
    const double v = std::numbers::pi * (rng.uniform() - 0.5);
    if (a == 1.0) {
      x = spec.scale * std::tan(v);
      continue;
    }
    const double w = rng.exponential();
    x = spec.scale * std::sin(a * v) / std::pow(std::cos(v), 1.0 / a) *
        std::pow(std::cos(v - a * v) / w, (1.0 - a) / a);
  }
  return out;
}

BlockEstimatorConfig BlockEstimatorConfig::for_size(std::size_t n) {
  const auto r = static_cast<std::size_t>(std::sqrt(static_cast<double>(n)));
  std::size_t k = r;
  while ((k + 1) * (k + 1) <= n) ++k;
  while (k * k > n) --k;
  return BlockEstimatorConfig{k, k};
}

namespace {

double median_of(std::vector<double> v) {
  const std::size_t n = v.size();
  std::nth_element(v.begin(), v.begin() + n / 2, v.end());
  const double hi = v[n / 2];
  if (n % 2) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + n / 2);
  return 0.5 * (lo + hi);
}

// Mean taken relative to the first element, so k equal values average to
// exactly that value.
double shifted_mean(const std::vector<double>& v) {
  const double base = v.front();
  double acc = 0.0;
  for (double x : v) acc += x - base;
  return base + acc / static_cast<double>(v.size());
}

}  // namespace

BlockEstimate estimate_alpha_blocks(const std::vector<double>& samples,
                                    const BlockEstimatorConfig& config) {
  const std::size_t k1 = config.k1;
  const std::size_t k2 = config.k2;
  if (k1 < 1 || k2 < 2) {
    throw Error(ErrorCode::kSize, "block estimator: need k1 >= 1, k2 >= 2");
  }
  if (samples.size() < k1 * k2) {
    throw Error(ErrorCode::kSize,
                "block estimator: fewer than k1*k2 samples",
                static_cast<double>(samples.size()));
  }
  const std::size_t n = k1 * k2;
  std::vector<double> absx(n);
  for (std::size_t j = 0; j < n; ++j) {
    if (!std::isfinite(samples[j])) {
      throw Error(ErrorCode::kDomain, "block estimator: non-finite sample");
    }
    absx[j] = std::abs(samples[j]);
  }
  // Normalizing by the median |X| keeps constants at exactly 1 and leaves
  // the estimate unchanged under rescaling.
  const double scale = median_of(absx);
  if (!(scale > 0.0)) {
    throw Error(ErrorCode::kDegenerate,
                "block estimator: at least half of the samples are zero");
  }

  BlockEstimate out;
  std::vector<double> log_x(n), log_y(k1);
  for (std::size_t i = 0; i < k1; ++i) {
    double y = 0.0;
    for (std::size_t j = i * k2; j < (i + 1) * k2; ++j) {
      const double x = samples[j] / scale;
      y += x;
      double ax = std::abs(x);
      if (ax == 0.0) {
        ax = DBL_EPSILON;
        ++out.zeros;
      }
      log_x[j] = std::log(ax);
    }
    double ay = std::abs(y);
    if (ay == 0.0) {
      ay = DBL_EPSILON;
      ++out.zeros;
    }
    log_y[i] = std::log(ay);
  }
  out.raw_inverse =
      (shifted_mean(log_y) - shifted_mean(log_x)) / std::log(static_cast<double>(k2));
  out.raw_alpha = 1.0 / out.raw_inverse;
  if (out.raw_inverse >= 0.5) {
    out.alpha = out.raw_alpha;
  } else {
    out.alpha = 2.0;
    out.clamped = true;
  }
  return out;
}

BlockEstimate estimate_alpha_blocks(const std::vector<double>& samples) {
  return estimate_alpha_blocks(samples,
                               BlockEstimatorConfig::for_size(samples.size()));
}

double estimate_alpha_hill(const std::vector<double>& samples,
                           std::size_t k_order) {
  const std::size_t n = samples.size();
  if (k_order < 1 || 2 * k_order >= n) {
    throw Error(ErrorCode::kSize, "hill: need 1 <= k_order < n/2",
                static_cast<double>(k_order));
  }
  std::vector<double> a(n);
  for (std::size_t i = 0; i < n; ++i) a[i] = std::abs(samples[i]);
  std::nth_element(a.begin(), a.begin() + k_order, a.end(),
                   std::greater<double>());
  const double threshold = a[k_order];
  if (!(threshold > 0.0)) {
    throw Error(ErrorCode::kDegenerate, "hill: order statistic is zero");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < k_order; ++i) acc += std::log(a[i] / threshold);
  if (!(acc > 0.0)) {
    throw Error(ErrorCode::kDegenerate, "hill: no spread in the upper tail");
  }
  return static_cast<double>(k_order) / acc;
}

namespace {

std::uint64_t row_hash(const double* row, int dim) {
  std::uint64_t h = 0x9e3779b97f4a7c15ULL;
  for (int c = 0; c < dim; ++c) {
    double v = row[c];
    if (v == 0.0) v = 0.0;  // fold -0 into +0
    h = splitmix64(h ^ std::bit_cast<std::uint64_t>(v));
  }
  return h;
}

}  // namespace

ProjectionReport project_and_estimate(
    const EnsembleMatrix& ensemble,
    const std::vector<std::vector<double>>& directions) {
  const int d = ensemble.dim;
  if (ensemble.n_runs < 1 || d < 1) {
    throw Error(ErrorCode::kSize, "project_and_estimate: empty ensemble");
  }
  std::vector<std::vector<double>> dirs = directions;
  if (dirs.empty()) {
    for (int c = 0; c < d; ++c) {
      dirs.emplace_back(d, 0.0);
      dirs.back()[c] = 1.0;
    }
  }
  for (auto& u : dirs) {
    if (static_cast<int>(u.size()) != d) {
      throw Error(ErrorCode::kInvalidArgument,
                  "project_and_estimate: direction has wrong size");
    }
    double nn = 0.0;
    for (double v : u) nn += v * v;
    if (!(nn > 0.0)) {
      throw Error(ErrorCode::kDomain, "project_and_estimate: zero direction");
    }
    for (double& v : u) v /= std::sqrt(nn);
  }

  ProjectionReport report;
  std::vector<std::pair<std::uint64_t, int>> order;
  for (int r = 0; r < ensemble.n_runs; ++r) {
    const double* row = ensemble.row(r);
    bool ok = ensemble.censored.empty() || !ensemble.censored[r];
    for (int c = 0; c < d && ok; ++c) ok = std::isfinite(row[c]);
    if (!ok) {
      ++report.censored_rows;
      continue;
    }
    order.emplace_back(row_hash(row, d), r);
  }
  // Ties are bit-identical rows, so their relative order is immaterial.
  std::sort(order.begin(), order.end());
  report.used_rows = static_cast<int>(order.size());
  if (order.empty()) {
    throw Error(ErrorCode::kDegenerate,
                "project_and_estimate: every row is censored");
  }

  std::vector<double> alphas;
  std::vector<double> z(order.size());
  for (const auto& u : dirs) {
    for (std::size_t i = 0; i < order.size(); ++i) {
      const double* row = ensemble.row(order[i].second);
      double acc = 0.0;
      for (int c = 0; c < d; ++c) acc += u[c] * row[c];
      z[i] = acc;
    }
    const double center = median_of(z);
    std::vector<double> centered(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) centered[i] = z[i] - center;
    report.per_direction.push_back(estimate_alpha_blocks(centered));
    alphas.push_back(report.per_direction.back().alpha);
  }
  report.pooled_alpha = median_of(alphas);
  return report;
}

}  // namespace tailscope
