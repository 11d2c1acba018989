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

#include "tailscope/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tailscope/error.hpp"

namespace tailscope {

double StepsizeGrid::spacing() const {
  return num_points > 1 ? 2.0 * range / (num_points - 1) : 0.0;
}

double StepsizeGrid::point(int j) const {
  return center - range + (j - 1) * spacing();
}

std::vector<double> StepsizeGrid::points() const {
  std::vector<double> out(num_points);
  for (int j = 1; j <= num_points; ++j) out[j - 1] = point(j);
  // Pin the endpoint exactly; accumulated spacing may drift by an ulp.
  out.back() = center + range;
  return out;
}

void StepsizeGrid::validate() const {
  if (num_points < 2) {
    throw Error(ErrorCode::kInvalidGrid, "grid: need K >= 2 points");
  }
  if (!(range >= 0.0) || !std::isfinite(range)) {
    throw Error(ErrorCode::kInvalidGrid, "grid: range must be >= 0");
  }
  if (!(center > range) || !std::isfinite(center)) {
    throw Error(ErrorCode::kInvalidGrid,
                "grid: center must exceed range so all stepsizes are positive");
  }
}

FoldedStateSpace build_folded_state_space(const StepsizeGrid& grid) {
  grid.validate();
  const std::vector<double> c = grid.points();
  const int k = grid.num_points;
  FoldedStateSpace out;
  out.num_points = k;
  out.states.reserve(2 * k - 2);
  for (int j = 0; j < k; ++j) out.states.push_back(c[j]);
  for (int j = k - 2; j >= 1; --j) out.states.push_back(c[j]);
  return out;
}

namespace {

void check_probability(double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "schedule: p must lie in [0, 1]",
                p);
  }
}

void check_nonnegative(double eta) {
  if (!(eta >= 0.0) || !std::isfinite(eta)) {
    throw Error(ErrorCode::kInvalidArgument,
                "schedule: stepsize must be finite and >= 0", eta);
  }
}

}  // namespace

Schedule Schedule::constant(double eta) {
  check_nonnegative(eta);
  Schedule s;
  s.kind_ = ScheduleKind::kConstant;
  s.grid_ = StepsizeGrid{eta, 0.0, 2};
  s.lo_ = s.hi_ = eta;
  s.states_ = {eta};
  return s;
}

Schedule Schedule::iid_grid(const StepsizeGrid& grid) {
  grid.validate();
  Schedule s;
  s.kind_ = ScheduleKind::kIIDGrid;
  s.grid_ = grid;
  s.states_ = grid.points();
  s.lo_ = s.states_.front();
  s.hi_ = s.states_.back();
  return s;
}

Schedule Schedule::iid_uniform(double center, double range) {
  check_nonnegative(range);
  if (!(center > range)) {
    throw Error(ErrorCode::kInvalidGrid,
                "uniform schedule: center must exceed range");
  }
  Schedule s;
  s.kind_ = ScheduleKind::kIIDUniformContinuous;
  s.grid_ = StepsizeGrid{center, range, 2};
  s.lo_ = center - range;
  s.hi_ = center + range;
  return s;
}

Schedule Schedule::cyclic(const StepsizeGrid& grid) {
  Schedule s;
  s.kind_ = ScheduleKind::kCyclic;
  s.grid_ = grid;
  s.states_ = build_folded_state_space(grid).states;
  s.num_points_ = grid.num_points;
  s.lo_ = s.states_.front();
  s.hi_ = grid.center + grid.range;
  return s;
}

Schedule Schedule::markov_folded(const StepsizeGrid& grid, double p) {
  check_probability(p);
  Schedule s = cyclic(grid);
  s.kind_ = ScheduleKind::kMarkovFolded;
  s.p_ = p;
  return s;
}

Schedule Schedule::markov_two_state(double eta_l, double eta_u, double p) {
  check_nonnegative(eta_l);
  check_nonnegative(eta_u);
  check_probability(p);
  if (eta_l > eta_u) {
    throw Error(ErrorCode::kInvalidArgument,
                "two-state schedule: need eta_l <= eta_u");
  }
  Schedule s;
  s.kind_ = ScheduleKind::kMarkovTwoState;
  s.grid_ = StepsizeGrid{0.5 * (eta_l + eta_u), 0.5 * (eta_u - eta_l), 2};
  s.p_ = p;
  s.states_ = {eta_l, eta_u};
  s.lo_ = eta_l;
  s.hi_ = eta_u;
  return s;
}

bool Schedule::is_chain() const {
  return kind_ == ScheduleKind::kCyclic ||
         kind_ == ScheduleKind::kMarkovFolded ||
         kind_ == ScheduleKind::kMarkovTwoState;
}

std::string Schedule::tag() const {
  switch (kind_) {
    case ScheduleKind::kConstant: return "constant";
    case ScheduleKind::kIIDGrid: return "iid";
    case ScheduleKind::kIIDUniformContinuous: return "uniform";
    case ScheduleKind::kCyclic: return "cyclic";
    case ScheduleKind::kMarkovFolded: return "markov";
    case ScheduleKind::kMarkovTwoState: return "two_state";
  }
  return "unknown";
}

void Schedule::set_state(int state) {
  if (!is_chain() || state < 0 || state >= num_states()) {
    throw Error(ErrorCode::kInvalidArgument, "schedule: state out of range",
                state);
  }
  state_ = state;
}

double Schedule::current() const {
  if (is_chain()) return states_[state_];
  return kind_ == ScheduleKind::kConstant ? lo_ : grid_.center;
}

int Schedule::step_state(int state, RandomStream& rng) const {
  const int m = num_states();
  switch (kind_) {
    case ScheduleKind::kCyclic:
      return (state + 1) % m;
    case ScheduleKind::kMarkovFolded: {
      // The two turning points c_1 (index 0) and c_K (index K-1) always
      // move forward; p == 1 skips the draw so the walk matches cyclic.
      if (state == 0 || state == num_points_ - 1 || p_ >= 1.0) {
        return (state + 1) % m;
      }
      if (rng.uniform() < p_) return (state + 1) % m;
      return (state + m - 1) % m;
    }
    case ScheduleKind::kMarkovTwoState:
      if (p_ >= 1.0) return 1 - state;
      return rng.uniform() < p_ ? 1 - state : state;
    default:
      return 0;
  }
}

double Schedule::next_step(RandomStream& rng) {
  switch (kind_) {
    case ScheduleKind::kConstant:
      return lo_;
    case ScheduleKind::kIIDGrid:
      return states_[rng.uniform_index(states_.size())];
    case ScheduleKind::kIIDUniformContinuous:
      return lo_ + (hi_ - lo_) * rng.uniform();
    default:
      state_ = step_state(state_, rng);
      return states_[state_];
  }
}

Eigen::MatrixXd Schedule::transition_matrix() const {
  const int m = num_states();
  if (kind_ == ScheduleKind::kIIDUniformContinuous) {
    throw Error(ErrorCode::kInvalidArgument,
                "transition_matrix: continuous schedule has no finite chain");
  }
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(m, m);
  switch (kind_) {
    case ScheduleKind::kConstant:
    case ScheduleKind::kIIDGrid:
      P.setConstant(1.0 / m);
      break;
    case ScheduleKind::kCyclic:
      for (int i = 0; i < m; ++i) P(i, (i + 1) % m) = 1.0;
      break;
    case ScheduleKind::kMarkovFolded:
      for (int i = 0; i < m; ++i) {
        if (i == 0 || i == num_points_ - 1) {
          P(i, (i + 1) % m) += 1.0;
        } else {
          P(i, (i + 1) % m) += p_;
          P(i, (i + m - 1) % m) += 1.0 - p_;
        }
      }
      break;
    case ScheduleKind::kMarkovTwoState:
      P << 1.0 - p_, p_, p_, 1.0 - p_;
      break;
    default:
      break;
  }
  return P;
}

namespace {

// Net probability flux J around the cycle is the same across every edge.
// Solving the edge balances from c_{K-1} backwards gives
//   pi_i = J/(2p-1) * (1 - r^{K-i}),  2 <= i <= K-1,  r = (1-p)/p,
//   pi_1 = J + (1-p) pi_2,
// and the descending half mirrors the ascending one.
std::vector<double> folded_closed_form(int k, double p) {
  const int m = 2 * k - 2;
  std::vector<double> pi(m, 0.0);
  if (k == 2 || p >= 1.0) {
    std::fill(pi.begin(), pi.end(), 1.0 / m);
    return pi;
  }
  const double r = (1.0 - p) / p;
  const double scale = 1.0 / (2.0 * p - 1.0);
  std::vector<double> half(k, 0.0);  // half[i-1] = pi_i for 1 <= i <= K
  for (int i = 2; i <= k - 1; ++i) {
    half[i - 1] = scale * (1.0 - std::pow(r, k - i));
  }
  half[0] = 1.0 + (1.0 - p) * half[1];
  half[k - 1] = half[0];
  double half_sum = 0.0;
  for (int i = 0; i < k - 1; ++i) half_sum += half[i];
  for (int i = 0; i < k - 1; ++i) {
    pi[i] = half[i] / (2.0 * half_sum);
    pi[i + k - 1] = pi[i];
  }
  return pi;
}

}  // namespace

StationaryDist stationary_distribution(const Schedule& schedule,
                                       StationaryMethod method) {
  if (!schedule.is_chain()) {
    throw Error(ErrorCode::kInvalidArgument,
                "stationary_distribution: schedule is not a Markov chain");
  }
  const int m = schedule.num_states();
  const bool folded = schedule.kind() == ScheduleKind::kMarkovFolded;
  const bool two_state = schedule.kind() == ScheduleKind::kMarkovTwoState;
  if ((two_state || (folded && m > 2)) && schedule.p() <= 0.0) {
    throw Error(ErrorCode::kDomain,
                "stationary_distribution: chain is reducible at p = 0",
                schedule.p());
  }

  StationaryDist out;
  out.source = method;
  if (method == StationaryMethod::kClosedForm) {
    if (folded) {
      if (m > 2 && schedule.p() < 1.0 && schedule.p() == 0.5) {
        throw Error(ErrorCode::kSingularParameter,
                    "stationary_distribution: closed form is singular at "
                    "p = 1/2; use the linear solve",
                    0.5);
      }
      out.probabilities = folded_closed_form(schedule.grid().num_points,
                                             schedule.p());
    } else {
      out.probabilities.assign(m, 1.0 / m);
    }
    return out;
  }
  if (method != StationaryMethod::kLinearSolve) {
    throw Error(ErrorCode::kInvalidArgument,
                "stationary_distribution: use empirical_occupancy for "
                "empirical estimates");
  }

  // Grassmann-Taksar-Heyman elimination: Gaussian elimination on P^T - I
  // arranged so that no step subtracts, which keeps tiny entries of
  // slowly mixing chains accurate to relative precision.
  Eigen::MatrixXd A = schedule.transition_matrix();
  for (int n = m - 1; n >= 1; --n) {
    const double out_mass = A.row(n).head(n).sum();
    if (!(out_mass > 0.0)) {
      throw Error(ErrorCode::kDomain,
                  "stationary_distribution: stationary law is not unique");
    }
    A.col(n).head(n) /= out_mass;
    A.topLeftCorner(n, n) += A.col(n).head(n) * A.row(n).head(n);
  }
  out.probabilities.assign(m, 0.0);
  out.probabilities[0] = 1.0;
  double total = 1.0;
  for (int j = 1; j < m; ++j) {
    double v = 0.0;
    for (int i = 0; i < j; ++i) v += out.probabilities[i] * A(i, j);
    out.probabilities[j] = v;
    total += v;
  }
  for (double& v : out.probabilities) v /= total;
  return out;
}

StationaryDist empirical_occupancy(const Schedule& schedule, RandomStream& rng,
                                   std::uint64_t n_steps) {
  if (!schedule.is_chain()) {
    throw Error(ErrorCode::kInvalidArgument,
                "empirical_occupancy: schedule is not a Markov chain");
  }
  std::vector<std::uint64_t> counts(schedule.num_states(), 0);
  int state = schedule.state();
  for (std::uint64_t t = 0; t < n_steps; ++t) {
    state = schedule.step_state(state, rng);
    ++counts[state];
  }
  StationaryDist out;
  out.source = StationaryMethod::kEmpirical;
  out.probabilities.resize(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) {
    out.probabilities[i] =
        n_steps ? static_cast<double>(counts[i]) / n_steps : 0.0;
  }
  return out;
}

RegenerationSampler::RegenerationSampler(const Schedule& schedule,
                                         std::uint64_t cap)
    : schedule_(schedule), cap_(cap) {
  if (!schedule.is_chain()) {
    throw Error(ErrorCode::kInvalidArgument,
                "regeneration: schedule must be a finite-state chain");
  }
  pi_ = stationary_distribution(schedule, StationaryMethod::kLinearSolve);
  cdf_.resize(pi_.probabilities.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < cdf_.size(); ++i) {
    acc += pi_.probabilities[i];
    cdf_[i] = acc;
  }
}

int RegenerationSampler::draw_start(RandomStream& rng) const {
  const double u = rng.uniform() * cdf_.back();
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  return static_cast<int>(
      std::min<std::ptrdiff_t>(it - cdf_.begin(), cdf_.size() - 1));
}

RegenerationPath RegenerationSampler::sample(RandomStream& rng,
                                             std::optional<int> start) const {
  RegenerationPath path;
  path.start_state = start ? *start : draw_start(rng);
  if (path.start_state < 0 || path.start_state >= schedule_.num_states()) {
    throw Error(ErrorCode::kInvalidArgument, "regeneration: bad start state",
                path.start_state);
  }
  int state = path.start_state;
  do {
    if (path.states.size() >= cap_) {
      throw Error(ErrorCode::kNonReturn,
                  "regeneration: no return to the start state within the cap",
                  static_cast<double>(cap_));
    }
    state = schedule_.step_state(state, rng);
    path.states.push_back(state);
    path.stepsizes.push_back(schedule_.states()[state]);
  } while (state != path.start_state);
  return path;
}

std::vector<std::uint32_t> RegenerationSampler::sample_counts(
    RandomStream& rng, std::optional<int> start) const {
  const int s0 = start ? *start : draw_start(rng);
  if (s0 < 0 || s0 >= schedule_.num_states()) {
    throw Error(ErrorCode::kInvalidArgument, "regeneration: bad start state",
                s0);
  }
  std::vector<std::uint32_t> counts(schedule_.num_states(), 0);
  int state = s0;
  std::uint64_t steps = 0;
  do {
    if (steps++ >= cap_) {
      throw Error(ErrorCode::kNonReturn,
                  "regeneration: no return to the start state within the cap",
                  static_cast<double>(cap_));
    }
    state = schedule_.step_state(state, rng);
    ++counts[state];
  } while (state != s0);
  return counts;
}

RegenerationPath sample_regeneration_path(const Schedule& schedule,
                                          RandomStream& rng,
                                          std::optional<int> start,
                                          std::uint64_t cap) {
  return RegenerationSampler(schedule, cap).sample(rng, start);
}

double regeneration_pmf_two_state(double p, long long k) {
  if (k < 1) {
    throw Error(ErrorCode::kDomain, "regeneration pmf: k must be >= 1",
                static_cast<double>(k));
  }
  if (!(p > 0.0 && p <= 1.0)) {
    throw Error(ErrorCode::kDomain, "regeneration pmf: p must lie in (0, 1]",
                p);
  }
  if (k == 1) return 1.0 - p;
  return p * p * std::pow(1.0 - p, static_cast<double>(k - 2));
}

}  // namespace tailscope
