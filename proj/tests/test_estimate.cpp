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


#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "tailscope/error.hpp"
#include "tailscope/estimate.hpp"

namespace tailscope {
namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::kIo;
}

double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  return v[static_cast<std::size_t>(q * (v.size() - 1))];
}

TEST(SampleStable, GaussianCase) {
  RandomStream rng(1);
  const auto x = sample_stable({2.0, 1.0 / std::sqrt(2.0)}, 100000, rng);
  double s = 0.0, s2 = 0.0;
  for (double v : x) {
    s += v;
    s2 += v * v;
  }
  const double mean = s / x.size();
  EXPECT_NEAR(s2 / x.size() - mean * mean, 1.0, 0.05);
}

TEST(SampleStable, CauchyCase) {
  RandomStream rng(2);
  const auto x = sample_stable({1.0, 1.0}, 100000, rng);
  EXPECT_NEAR(quantile(x, 0.5), 0.0, 0.02);
  EXPECT_NEAR(quantile(x, 0.75) - quantile(x, 0.25), 2.0, 0.05);
}

TEST(SampleStable, EdgeCases) {
  RandomStream rng(3);
  EXPECT_TRUE(sample_stable({1.5, 1.0}, 0, rng).empty());
  EXPECT_THROW(StableSpec({2.5, 1.0}).validate(), Error);
  EXPECT_THROW(StableSpec({0.0, 1.0}).validate(), Error);
  EXPECT_THROW(StableSpec({1.0, -1.0}).validate(), Error);
}

TEST(BlockEstimator, ConstantInputIsExactlyOne) {
  for (double c : {3.7, -0.2, 1e-30}) {
    const BlockEstimate e = estimate_alpha_blocks(std::vector<double>(10000, c));
    EXPECT_EQ(e.raw_inverse, 1.0);
    EXPECT_EQ(e.alpha, 1.0);
  }
}

TEST(BlockEstimator, DefaultSplit) {
  const auto c = BlockEstimatorConfig::for_size(100000);
  EXPECT_EQ(c.k1, 316u);
  EXPECT_EQ(c.k2, 316u);
}

TEST(BlockEstimator, GaussianAndCauchy) {
  RandomStream rng(4);
  const BlockEstimatorConfig cfg{316, 316};
  const auto g = estimate_alpha_blocks(sample_stable({2.0, 1.0}, 100000, rng), cfg);
  EXPECT_NEAR(g.alpha, 2.0, 0.1);
  const auto c = estimate_alpha_blocks(sample_stable({1.0, 1.0}, 100000, rng), cfg);
  EXPECT_NEAR(c.alpha, 1.0, 0.1);
}

TEST(BlockEstimator, MonotoneRecovery) {
  RandomStream rng(5);
  double prev = 0.0;
  for (double a : {1.2, 1.5, 1.8, 2.0}) {
    const double est = estimate_alpha_blocks(sample_stable({a, 1.0}, 100000, rng)).alpha;
    EXPECT_NEAR(est, a, 0.1);
    EXPECT_GT(est, prev);
    prev = est;
  }
}

TEST(BlockEstimator, ScaleInvariance) {
  RandomStream rng(6);
  const auto x = sample_stable({1.4, 1.0}, 40000, rng);
  const BlockEstimate base = estimate_alpha_blocks(x);
  auto scaled = [&](double gamma) {
    std::vector<double> y(x);
    for (auto& v : y) v *= gamma;
    return estimate_alpha_blocks(y);
  };
  // Powers of two scale every log by an exact shift.
  for (double gamma : {std::ldexp(1.0, -10), 2.0, std::ldexp(1.0, 20)}) {
    EXPECT_EQ(scaled(gamma).alpha, base.alpha) << gamma;
  }
  for (double gamma : {0.37, 12.5, 1e6}) {
    EXPECT_NEAR(scaled(gamma).alpha, base.alpha, 1e-12 * base.alpha) << gamma;
  }
}

TEST(BlockEstimator, Errors) {
  EXPECT_EQ(code_of([] { estimate_alpha_blocks(std::vector<double>(50, 1.0), {10, 10}); }),
            ErrorCode::kSize);
  std::vector<double> bad(100, 1.0);
  bad[3] = NAN;
  EXPECT_EQ(code_of([&] { estimate_alpha_blocks(bad, {10, 10}); }), ErrorCode::kDomain);
}

TEST(BlockEstimator, ClampsAndFlags) {
  // Alternating signs cancel inside blocks: the raw estimate overshoots 2.
  std::vector<double> x(10000);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = (i % 2 ? 1.0 : -1.0) * (1.0 + 1e-3 * (i % 7));
  const BlockEstimate e = estimate_alpha_blocks(x);
  EXPECT_LE(e.alpha, 2.0);
  EXPECT_GT(e.alpha, 0.0);
  if (e.raw_alpha > 2.0 || e.raw_alpha <= 0.0) EXPECT_TRUE(e.clamped);
}

TEST(Hill, ParetoInput) {
  RandomStream rng(7);
  std::vector<double> x(100000);
  for (auto& v : x) v = std::pow(rng.uniform(), -1.0 / 1.5);
  EXPECT_NEAR(estimate_alpha_hill(x, 1000), 1.5, 0.1);
}

TEST(Hill, Errors) {
  EXPECT_EQ(code_of([] { estimate_alpha_hill(std::vector<double>(100, 2.0), 10); }),
            ErrorCode::kDegenerate);
  EXPECT_EQ(code_of([] { estimate_alpha_hill(std::vector<double>(100, 2.0), 50); }),
            ErrorCode::kSize);
}

EnsembleMatrix stable_ensemble(double alpha, int n, int d, std::uint64_t seed) {
  RandomStream rng(seed);
  EnsembleMatrix e;
  e.n_runs = n;
  e.dim = d;
  e.censored.assign(n, 0);
  e.data.resize(static_cast<std::size_t>(n) * d);
  for (int j = 0; j < d; ++j) {
    const auto col = sample_stable({alpha, 1.0}, n, rng);
    for (int i = 0; i < n; ++i) e.data[static_cast<std::size_t>(i) * d + j] = col[i];
  }
  return e;
}

TEST(ProjectAndEstimate, CoordinateDirections) {
  const auto e = stable_ensemble(1.5, 40000, 5, 8);
  const ProjectionReport r = project_and_estimate(e);
  EXPECT_EQ(r.per_direction.size(), 5u);
  EXPECT_NEAR(r.pooled_alpha, 1.5, 0.1);
  EXPECT_EQ(r.used_rows, 40000);
}

TEST(ProjectAndEstimate, RowPermutationInvariant) {
  const auto e = stable_ensemble(1.3, 5000, 3, 9);
  const std::vector<std::vector<double>> dirs = {{1, 0, 0}, {0.6, 0.8, 0}, {1, 1, 1}};
  const double base = project_and_estimate(e, dirs).pooled_alpha;
  EnsembleMatrix p = e;
  std::vector<int> order(e.n_runs);
  for (int i = 0; i < e.n_runs; ++i) order[i] = (i * 7919) % e.n_runs;
  for (int i = 0; i < e.n_runs; ++i) {
    for (int j = 0; j < e.dim; ++j) p.data[i * 3 + j] = e.data[order[i] * 3 + j];
  }
  EXPECT_EQ(project_and_estimate(p, dirs).pooled_alpha, base);
}

TEST(ProjectAndEstimate, SkipsCensoredRows) {
  auto e = stable_ensemble(1.5, 2000, 2, 10);
  for (int i = 0; i < 100; ++i) {
    e.censored[i] = 1;
    e.data[2 * i] = e.data[2 * i + 1] = NAN;
  }
  e.censored_count = 100;
  const auto r = project_and_estimate(e);
  EXPECT_EQ(r.used_rows, 1900);
  EXPECT_EQ(r.censored_rows, 100);
  EXPECT_TRUE(std::isfinite(r.pooled_alpha));
}

TEST(ProjectAndEstimate, Errors) {
  EnsembleMatrix zero;
  zero.n_runs = 400;
  zero.dim = 2;
  zero.data.assign(800, 0.0);
  zero.censored.assign(400, 0);
  EXPECT_EQ(code_of([&] { project_and_estimate(zero); }), ErrorCode::kDegenerate);
  const auto e = stable_ensemble(1.5, 400, 2, 11);
  EXPECT_EQ(code_of([&] { project_and_estimate(e, {{0.0, 0.0}}); }), ErrorCode::kDomain);
  EnsembleMatrix empty;
  EXPECT_EQ(code_of([&] { project_and_estimate(empty); }), ErrorCode::kSize);
}

}  // namespace
}  // namespace tailscope
