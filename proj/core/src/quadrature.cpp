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

#include "tailscope/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "tailscope/error.hpp"

namespace tailscope {

namespace {

// Golub-Welsch for the nodes; weights from the Christoffel function
// 1 / sum_k p_k(x)^2 over orthonormal p_k, accumulated in long double so the
// far-tail weights (down to ~1e-250) keep full relative precision.
QuadratureRule jacobi_rule(const std::vector<long double>& diag,
                           const std::vector<long double>& offdiag) {
  const auto n = static_cast<Eigen::Index>(diag.size());
  Eigen::VectorXd d(n), e(n > 1 ? n - 1 : 0);
  for (Eigen::Index i = 0; i < n; ++i) d[i] = static_cast<double>(diag[i]);
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    e[i] = static_cast<double>(offdiag[i]);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(d, e, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::kInvalidArgument, "quadrature: eigen solve failed");
  }

  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  long double total = 0.0L;
  std::vector<long double> w(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const long double x = solver.eigenvalues()[i];
    long double prev = 0.0L, cur = 1.0L, sum = 1.0L;
    for (Eigen::Index k = 0; k + 1 < n; ++k) {
      const long double next =
          ((x - diag[k]) * cur - (k > 0 ? offdiag[k - 1] : 0.0L) * prev) /
          offdiag[k];
      prev = cur;
      cur = next;
      sum += cur * cur;
    }
    w[i] = 1.0L / sum;
    total += w[i];
    rule.nodes[i] = static_cast<double>(x);
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    rule.weights[i] = static_cast<double>(w[i] / total);
  }
  return rule;
}

}  // namespace

QuadratureRule chi_square_rule(int df, int num_nodes) {
  if (df < 0 || num_nodes < 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "chi_square_rule: need df >= 0 and num_nodes >= 1");
  }
  if (df == 0) return QuadratureRule{{0.0}, {1.0}};
  const long double a = 0.5L * df - 1.0L;
  std::vector<long double> diag(num_nodes), off(num_nodes - 1);
  for (int k = 0; k < num_nodes; ++k) diag[k] = 2.0L * k + a + 1.0L;
  for (int k = 1; k < num_nodes; ++k) off[k - 1] = std::sqrt(k * (k + a));
  QuadratureRule rule = jacobi_rule(diag, off);
  for (double& x : rule.nodes) x *= 2.0;
  return rule;
}

QuadratureRule uniform_rule(int num_nodes) {
  if (num_nodes < 1) {
    throw Error(ErrorCode::kInvalidArgument, "uniform_rule: num_nodes < 1");
  }
  std::vector<long double> diag(num_nodes, 0.0L), off(num_nodes - 1);
  for (int k = 1; k < num_nodes; ++k) {
    off[k - 1] = k / std::sqrt(4.0L * k * k - 1.0L);
  }
  return jacobi_rule(diag, off);
}

}  // namespace tailscope
