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

#include <vector>

namespace tailscope {

// Nodes and weights of a quadrature rule for a probability measure; weights
// sum to one.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Gauss rule for the chi-square(df) law, i.e. generalized Gauss-Laguerre with
// exponent df/2 - 1 after the substitution x = 2t. df == 0 yields the single
// node {0}.
QuadratureRule chi_square_rule(int df, int num_nodes);

// Gauss-Legendre rule for the uniform law on [-1, 1].
QuadratureRule uniform_rule(int num_nodes);

}  // namespace tailscope
