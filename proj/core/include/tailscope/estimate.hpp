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

#include <cstddef>
#include <vector>

#include "tailscope/random.hpp"
#include "tailscope/sgdsim.hpp"

namespace tailscope {

// Symmetric, zero-location alpha-stable law. alpha == 2 is N(0, 2 scale^2).
struct StableSpec {
  double alpha = 2.0;
  double scale = 1.0;

  void validate() const;
};

// Chambers-Mallows-Stuck transform of a uniform angle and an exponential.
std::vector<double> sample_stable(const StableSpec& spec, std::size_t n,
                                  RandomStream& rng);

struct BlockEstimatorConfig {
  std::size_t k1 = 0;  // number of blocks
  std::size_t k2 = 0;  // block size

  // k1 = k2 = floor(sqrt(n)).
  static BlockEstimatorConfig for_size(std::size_t n);
};

struct BlockEstimate {
  double alpha = 0.0;      // clamped to (0, 2]
  double raw_alpha = 0.0;  // 1 / raw_inverse; may exceed 2 or be negative
  double raw_inverse = 0.0;
  bool clamped = false;
  std::size_t zeros = 0;   // samples or block sums nudged away from 0
};

// 1/alpha = (mean_i log|Y_i| - mean_j log|X_j|) / log k2 over the first
// k1*k2 samples, Y_i the sum of block i.
BlockEstimate estimate_alpha_blocks(const std::vector<double>& samples,
                                    const BlockEstimatorConfig& config);
BlockEstimate estimate_alpha_blocks(const std::vector<double>& samples);

// Hill estimator on the k_order largest |X|.
double estimate_alpha_hill(const std::vector<double>& samples,
                           std::size_t k_order);

struct ProjectionReport {
  std::vector<BlockEstimate> per_direction;
  double pooled_alpha = 0.0;  // median over directions
  int used_rows = 0;
  int censored_rows = 0;
};

// Projects non-censored rows onto each direction (empty list: coordinate
// axes), centers each projection at its median and runs the block
// estimator. Rows are visited in an order fixed by their content, so the
// result does not depend on how the rows are permuted.
ProjectionReport project_and_estimate(
    const EnsembleMatrix& ensemble,
    const std::vector<std::vector<double>>& directions = {});

}  // namespace tailscope
