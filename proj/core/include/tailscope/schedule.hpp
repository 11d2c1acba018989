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

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tailscope/random.hpp"

namespace tailscope {

// K equally spaced stepsizes on [center - range, center + range].
struct StepsizeGrid {
  double center = 0.0;
  double range = 0.0;
  int num_points = 2;

  double spacing() const;
  // 1-based grid point j, j in [1, K].
  double point(int j) const;
  std::vector<double> points() const;
  // Throws kInvalidGrid unless K >= 2, R >= 0 and center > R.
  void validate() const;
};

// (c_1, ..., c_K, c_{K-1}, ..., c_2); m = 2K - 2 states. State index i
// (0-based here) wraps modulo m.
struct FoldedStateSpace {
  std::vector<double> states;
  int num_points = 0;

  int size() const { return static_cast<int>(states.size()); }
};

FoldedStateSpace build_folded_state_space(const StepsizeGrid& grid);

enum class ScheduleKind {
  kConstant,
  kIIDGrid,
  kIIDUniformContinuous,
  kCyclic,
  kMarkovFolded,
  kMarkovTwoState,
};

enum class StationaryMethod { kClosedForm, kLinearSolve, kEmpirical };

struct StationaryDist {
  std::vector<double> probabilities;
  StationaryMethod source = StationaryMethod::kLinearSolve;
};

struct RegenerationPath {
  std::vector<double> stepsizes;
  std::vector<int> states;
  int start_state = 0;

  std::size_t length() const { return stepsizes.size(); }
};

// A stepsize process. Chains (cyclic, folded Markov, two-state Markov) carry
// a current state index; the i.i.d. and constant variants are stateless.
// Objects are single-owner: copy one per thread.
class Schedule {
 public:
  static Schedule constant(double eta);
  static Schedule iid_grid(const StepsizeGrid& grid);
  static Schedule iid_uniform(double center, double range);
  static Schedule cyclic(const StepsizeGrid& grid);
  static Schedule markov_folded(const StepsizeGrid& grid, double p);
  static Schedule markov_two_state(double eta_l, double eta_u, double p);

  ScheduleKind kind() const { return kind_; }
  double p() const { return p_; }
  const StepsizeGrid& grid() const { return grid_; }
  bool is_chain() const;
  std::string tag() const;

  // Values a chain moves between (folded states, or {eta_l, eta_u}); for the
  // i.i.d. grid the atoms; for constant the single value; empty for the
  // continuous uniform variant.
  const std::vector<double>& states() const { return states_; }
  int num_states() const { return static_cast<int>(states_.size()); }

  double min_stepsize() const { return lo_; }
  double max_stepsize() const { return hi_; }

  int state() const { return state_; }
  void set_state(int state);
  double current() const;

  // Advances the process by one step and returns the new stepsize.
  double next_step(RandomStream& rng);

  // One transition of the chain from `state`, leaving *this untouched.
  int step_state(int state, RandomStream& rng) const;
  Eigen::MatrixXd transition_matrix() const;

 private:
  Schedule() = default;

  ScheduleKind kind_ = ScheduleKind::kConstant;
  StepsizeGrid grid_;
  double p_ = 1.0;
  double lo_ = 0.0;
  double hi_ = 0.0;
  std::vector<double> states_;
  int num_points_ = 0;
  int state_ = 0;
};

StationaryDist stationary_distribution(const Schedule& schedule,
                                       StationaryMethod method);

// Long-run state frequencies of a chain over n_steps transitions.
StationaryDist empirical_occupancy(const Schedule& schedule, RandomStream& rng,
                                   std::uint64_t n_steps);

inline constexpr std::uint64_t kDefaultReturnCap = 10'000'000;

// Samples excursions up to and including the first return to the start
// state. Start defaults to a stationary draw.
class RegenerationSampler {
 public:
  explicit RegenerationSampler(const Schedule& schedule,
                               std::uint64_t cap = kDefaultReturnCap);

  RegenerationPath sample(RandomStream& rng,
                          std::optional<int> start = std::nullopt) const;
  // Same walk, but only the per-state visit counts; count[i] is the number
  // of times state i is emitted on the path.
  std::vector<std::uint32_t> sample_counts(
      RandomStream& rng, std::optional<int> start = std::nullopt) const;

  const StationaryDist& stationary() const { return pi_; }

 private:
  int draw_start(RandomStream& rng) const;

  Schedule schedule_;
  StationaryDist pi_;
  std::vector<double> cdf_;
  std::uint64_t cap_;
};

RegenerationPath sample_regeneration_path(
    const Schedule& schedule, RandomStream& rng,
    std::optional<int> start = std::nullopt,
    std::uint64_t cap = kDefaultReturnCap);

// P(r_1 = k) for the symmetric two-state chain with flip probability p.
double regeneration_pmf_two_state(double p, long long k);

}  // namespace tailscope
