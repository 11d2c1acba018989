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

#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

#include "tailscope/error.hpp"
#include "tailscope/schedule.hpp"

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

double tv(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return 0.5 * s;
}

TEST(StepsizeGrid, PointsAndSpacing) {
  const StepsizeGrid g{0.5, 0.05, 3};
  EXPECT_DOUBLE_EQ(g.spacing(), 0.05);
  EXPECT_DOUBLE_EQ(g.point(1), 0.45);
  EXPECT_DOUBLE_EQ(g.point(3), 0.55);
  for (int k : {2, 3, 10, 17}) {
    const StepsizeGrid h{0.06, 0.05, k};
    EXPECT_NEAR(h.point(1), 0.01, 1e-15);
    EXPECT_NEAR(h.point(k), 0.11, 1e-15);
    EXPECT_NEAR((k - 1) * h.spacing() / 2.0, h.range, 1e-15);
  }
}

TEST(StepsizeGrid, RejectsBadGrids) {
  EXPECT_EQ(code_of([] { StepsizeGrid{0.5, 0.1, 1}.validate(); }),
            ErrorCode::kInvalidGrid);
  EXPECT_EQ(code_of([] { StepsizeGrid{0.1, 0.1, 3}.validate(); }),
            ErrorCode::kInvalidGrid);
  EXPECT_EQ(code_of([] { build_folded_state_space({0.5, 0.1, 1}); }),
            ErrorCode::kInvalidGrid);
}

TEST(FoldedStateSpace, SmallExamples) {
  const auto f3 = build_folded_state_space({0.5, 0.05, 3});
  ASSERT_EQ(f3.size(), 4);
  EXPECT_NEAR(f3.states[0], 0.45, 1e-15);
  EXPECT_NEAR(f3.states[1], 0.50, 1e-15);
  EXPECT_NEAR(f3.states[2], 0.55, 1e-15);
  EXPECT_NEAR(f3.states[3], 0.50, 1e-15);

  const auto f2 = build_folded_state_space({0.5, 0.0, 2});
  ASSERT_EQ(f2.size(), 2);
  EXPECT_EQ(f2.states[0], 0.5);
  EXPECT_EQ(f2.states[1], 0.5);

  const auto f10 = build_folded_state_space({0.06, 0.05, 10});
  ASSERT_EQ(f10.size(), 18);
  EXPECT_NEAR(f10.states.front(), 0.01, 1e-15);
  EXPECT_NEAR(f10.states[9], 0.11, 1e-15);
}

TEST(FoldedStateSpace, MirrorSymmetry) {
  for (int k = 2; k <= 12; ++k) {
    const auto f = build_folded_state_space({1.0, 0.3, k});
    ASSERT_EQ(f.size(), 2 * k - 2);
    // 1-based: state i and state 2K - i agree for 2 <= i <= K - 1.
    for (int i = 2; i <= k - 1; ++i) {
      EXPECT_EQ(f.states[i - 1], f.states[2 * k - i - 1]);
    }
  }
}

TEST(Schedule, ConstantAlwaysSame) {
  Schedule s = Schedule::constant(0.1);
  RandomStream rng(1);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(s.next_step(rng), 0.1);
}

TEST(Schedule, FoldedAtPOneCyclesDeterministically) {
  const StepsizeGrid g{0.5, 0.05, 3};
  Schedule s = Schedule::markov_folded(g, 1.0);
  s.set_state(0);
  RandomStream rng(1);
  const double c1 = g.point(1), c2 = g.point(2), c3 = g.point(3);
  const std::vector<double> want = {c2, c3, c2, c1, c2, c3, c2, c1};
  for (double w : want) EXPECT_DOUBLE_EQ(s.next_step(rng), w);
}

TEST(Schedule, FoldedPOneMatchesCyclic) {
  const StepsizeGrid g{0.3, 0.1, 6};
  for (int start = 0; start < 10; ++start) {
    Schedule a = Schedule::markov_folded(g, 1.0);
    Schedule b = Schedule::cyclic(g);
    a.set_state(start);
    b.set_state(start);
    RandomStream ra(5), rb(77);
    for (int i = 0; i < 100; ++i) ASSERT_EQ(a.next_step(ra), b.next_step(rb));
  }
}

TEST(Schedule, EmittedStepsizesStayInRange) {
  const StepsizeGrid g{0.06, 0.05, 10};
  std::vector<Schedule> all = {
      Schedule::iid_grid(g), Schedule::iid_uniform(0.06, 0.05),
      Schedule::cyclic(g), Schedule::markov_folded(g, 0.3),
      Schedule::markov_folded(g, 0.8), Schedule::markov_two_state(0.01, 0.11, 0.4)};
  RandomStream rng(3);
  for (auto& s : all) {
    for (int i = 0; i < 20000; ++i) {
      const double e = s.next_step(rng);
      ASSERT_GE(e, 0.01 - 1e-15) << s.tag();
      ASSERT_LE(e, 0.11 + 1e-15) << s.tag();
    }
  }
}

TEST(Schedule, FoldedMovesForwardFromBothEnds) {
  const StepsizeGrid g{1.0, 0.5, 5};
  const Schedule s = Schedule::markov_folded(g, 0.2);
  const Eigen::MatrixXd P = s.transition_matrix();
  EXPECT_EQ(P(0, 1), 1.0);
  EXPECT_EQ(P(4, 5), 1.0);
  EXPECT_NEAR(P(2, 3), 0.2, 1e-15);
  EXPECT_NEAR(P(2, 1), 0.8, 1e-15);
  EXPECT_NEAR(P(7, 0), 0.2, 1e-15);
  for (Eigen::Index i = 0; i < P.rows(); ++i) {
    EXPECT_NEAR(P.row(i).sum(), 1.0, 1e-15);
  }
}

TEST(Schedule, RejectsBadProbability) {
  EXPECT_EQ(code_of([] { Schedule::markov_folded({0.5, 0.1, 3}, 1.5); }),
            ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([] { Schedule::markov_two_state(0.1, 0.2, -0.1); }),
            ErrorCode::kInvalidArgument);
}

TEST(Schedule, TwoStateOccupancyIsHalf) {
  Schedule s = Schedule::markov_two_state(0.1, 0.2, 0.6);
  RandomStream rng(8);
  long long low = 0;
  const int n = 1000000;
  for (int i = 0; i < n; ++i) low += s.next_step(rng) == 0.1;
  EXPECT_NEAR(static_cast<double>(low) / n, 0.5, 0.002);
}

TEST(Stationary, CyclicIsUniform) {
  for (int k : {2, 3, 7}) {
    const auto pi = stationary_distribution(
        Schedule::markov_folded({1.0, 0.5, k}, 1.0), StationaryMethod::kClosedForm);
    for (double v : pi.probabilities) EXPECT_NEAR(v, 1.0 / (2 * k - 2), 1e-14);
  }
}

TEST(Stationary, TwoStateIsHalf) {
  for (double p : {0.1, 0.6, 1.0}) {
    for (auto m : {StationaryMethod::kClosedForm, StationaryMethod::kLinearSolve}) {
      const auto pi = stationary_distribution(Schedule::markov_two_state(0.1, 0.2, p), m);
      EXPECT_NEAR(pi.probabilities[0], 0.5, 1e-12);
      EXPECT_NEAR(pi.probabilities[1], 0.5, 1e-12);
    }
  }
}

TEST(Stationary, ClosedFormMatchesLinearSolveAndIsFixedPoint) {
  for (int k : {3, 4, 5, 10, 15}) {
    for (double p : {0.05, 0.3, 0.6, 0.9, 1.0}) {
      const Schedule s = Schedule::markov_folded({1.0, 0.5, k}, p);
      const auto a = stationary_distribution(s, StationaryMethod::kClosedForm);
      const auto b = stationary_distribution(s, StationaryMethod::kLinearSolve);
      const Eigen::MatrixXd P = s.transition_matrix();
      Eigen::RowVectorXd pi(a.probabilities.size());
      for (std::size_t i = 0; i < a.probabilities.size(); ++i) {
        EXPECT_NEAR(a.probabilities[i], b.probabilities[i], 1e-10)
            << "K=" << k << " p=" << p << " i=" << i;
        EXPECT_GE(a.probabilities[i], 0.0);
        pi(i) = a.probabilities[i];
      }
      EXPECT_NEAR(pi.sum(), 1.0, 1e-12);
      EXPECT_LE((pi * P - pi).cwiseAbs().maxCoeff(), 1e-10);
    }
  }
}

TEST(Stationary, ClosedFormAtHalfIsSingular) {
  const Schedule s = Schedule::markov_folded({1.0, 0.5, 4}, 0.5);
  EXPECT_EQ(code_of([&] { stationary_distribution(s, StationaryMethod::kClosedForm); }),
            ErrorCode::kSingularParameter);
  const auto pi = stationary_distribution(s, StationaryMethod::kLinearSolve);
  EXPECT_NEAR(std::accumulate(pi.probabilities.begin(), pi.probabilities.end(), 0.0),
              1.0, 1e-12);
}

TEST(Stationary, SmallChainHandValue) {
  // K = 3: the four-state chain is doubly stochastic, so pi is uniform.
  const auto pi = stationary_distribution(Schedule::markov_folded({0.5, 0.05, 3}, 0.6),
                                          StationaryMethod::kClosedForm);
  for (double v : pi.probabilities) EXPECT_NEAR(v, 0.25, 1e-14);
}

TEST(Occupancy, ConvergesToStationary) {
  for (double p : {0.6, 0.9}) {
    const Schedule s = Schedule::markov_folded({1.0, 0.5, 5}, p);
    RandomStream rng(21);
    const auto emp = empirical_occupancy(s, rng, 100000);
    const auto pi = stationary_distribution(s, StationaryMethod::kLinearSolve);
    EXPECT_LE(tv(emp.probabilities, pi.probabilities), 0.01) << "p=" << p;
  }
}

TEST(Regeneration, CyclicReturnsAfterOnePeriod) {
  const Schedule s = Schedule::cyclic({0.5, 0.1, 5});
  RandomStream rng(4);
  for (int start = 0; start < 8; ++start) {
    EXPECT_EQ(sample_regeneration_path(s, rng, start).length(), 8u);
  }
}

TEST(Regeneration, PathEndsAtStartAndNotBefore) {
  const Schedule s = Schedule::markov_folded({1.0, 0.5, 6}, 0.4);
  RandomStream rng(12);
  for (int rep = 0; rep < 2000; ++rep) {
    const RegenerationPath path = sample_regeneration_path(s, rng);
    ASSERT_GE(path.length(), 1u);
    ASSERT_EQ(path.states.size(), path.length());
    EXPECT_EQ(path.states.back(), path.start_state);
    for (std::size_t i = 0; i + 1 < path.states.size(); ++i) {
      ASSERT_NE(path.states[i], path.start_state);
    }
    for (std::size_t i = 0; i < path.length(); ++i) {
      ASSERT_EQ(path.stepsizes[i], s.states()[path.states[i]]);
    }
  }
}

TEST(Regeneration, CapRaisesNonReturn) {
  const Schedule s = Schedule::markov_folded({1.0, 0.5, 4}, 0.5);
  RandomStream rng(1);
  EXPECT_EQ(code_of([&] { sample_regeneration_path(s, rng, 0, 1); }),
            ErrorCode::kNonReturn);
}

TEST(Regeneration, TwoStatePmfValues) {
  EXPECT_EQ(regeneration_pmf_two_state(1.0, 2), 1.0);
  EXPECT_EQ(regeneration_pmf_two_state(1.0, 1), 0.0);
  EXPECT_DOUBLE_EQ(regeneration_pmf_two_state(0.5, 3), 0.125);
  EXPECT_DOUBLE_EQ(regeneration_pmf_two_state(0.3, 1), 0.7);
  double total = 0.0;
  for (long long k = 1; k <= 10000; ++k) total += regeneration_pmf_two_state(0.2, k);
  EXPECT_NEAR(total, 1.0, 1e-12);
  EXPECT_EQ(code_of([] { regeneration_pmf_two_state(0.5, 0); }), ErrorCode::kDomain);
}

TEST(Regeneration, TwoStateMeanReturnTimeIsTwo) {
  for (double p : {0.3, 0.5, 0.8, 1.0}) {
    const Schedule s = Schedule::markov_two_state(0.1, 0.2, p);
    RegenerationSampler sampler(s);
    RandomStream rng(31);
    double total = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) total += sampler.sample(rng).length();
    EXPECT_NEAR(total / n / 2.0, 1.0, 0.01) << "p=" << p;
  }
}

TEST(Regeneration, KacReturnTimes) {
  const Schedule s = Schedule::markov_folded({1.0, 0.5, 4}, 0.7);
  const auto pi = stationary_distribution(s, StationaryMethod::kClosedForm);
  RegenerationSampler sampler(s);
  RandomStream rng(44);
  for (int i = 0; i < s.num_states(); ++i) {
    double total = 0.0;
    const int n = 100000;
    for (int r = 0; r < n; ++r) total += sampler.sample(rng, i).length();
    EXPECT_NEAR(total / n * pi.probabilities[i], 1.0, 0.02) << "state " << i;
  }
}

// Transitions read off concatenated regeneration paths follow P.
TEST(Regeneration, ConcatenatedPathsReproduceTransitions) {
  const Schedule s = Schedule::markov_folded({1.0, 0.5, 5}, 0.35);
  const Eigen::MatrixXd P = s.transition_matrix();
  const int m = s.num_states();
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(m, m);
  RandomStream rng(57);
  int prev = -1;
  for (int rep = 0; rep < 20000; ++rep) {
    const auto path = sample_regeneration_path(s, rng, prev < 0 ? std::optional<int>() : prev);
    int from = path.start_state;
    for (int st : path.states) {
      counts(from, st) += 1.0;
      from = st;
    }
    prev = path.states.back();
  }
  double chi2 = 0.0;
  int dof = 0;
  for (int i = 0; i < m; ++i) {
    const double row = counts.row(i).sum();
    int cells = 0;
    for (int j = 0; j < m; ++j) {
      if (P(i, j) == 0.0) {
        EXPECT_EQ(counts(i, j), 0.0);
        continue;
      }
      const double e = row * P(i, j);
      chi2 += (counts(i, j) - e) * (counts(i, j) - e) / e;
      ++cells;
    }
    dof += cells - 1;
  }
  ASSERT_GT(dof, 0);
  EXPECT_GT(boost::math::gamma_q(0.5 * dof, 0.5 * chi2), 0.001);
}

}  // namespace
}  // namespace tailscope
