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

#include <cmath>
#include <set>
#include <vector>

#include "tailscope/error.hpp"
#include "tailscope/numfmt.hpp"
#include "tailscope/parallel.hpp"
#include "tailscope/random.hpp"

namespace tailscope {
namespace {

// Known-answer vectors published with the Random123 reference code.
TEST(Philox, KnownAnswers) {
  using A4 = std::array<std::uint32_t, 4>;
  EXPECT_EQ(philox4x32({0, 0, 0, 0}, {0, 0}),
            (A4{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
  EXPECT_EQ(philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff},
                       {0xffffffff, 0xffffffff}),
            (A4{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
  EXPECT_EQ(philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344},
                       {0xa4093822, 0x299f31d0}),
            (A4{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(RandomStream, SameSeedSameSequence) {
  RandomStream a(42, 7), b(42, 7);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.next_u64(), b.next_u64());
}

TEST(RandomStream, SubstreamsAreDistinctAndStable) {
  const RandomStream root(9);
  std::set<std::uint64_t> firsts;
  for (std::uint64_t id = 0; id < 256; ++id) {
    RandomStream s = root.substream(id);
    firsts.insert(s.next_u64());
    RandomStream again = root.substream(id);
    RandomStream s2 = root.substream(id);
    EXPECT_EQ(again.next_u64(), s2.next_u64());
  }
  EXPECT_EQ(firsts.size(), 256u);
}

TEST(RandomStream, UniformIsOpenInterval) {
  RandomStream rng(1);
  double lo = 1.0, hi = 0.0, sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    lo = std::min(lo, u);
    hi = std::max(hi, u);
    sum += u;
  }
  EXPECT_GT(lo, 0.0);
  EXPECT_LT(hi, 1.0);
  EXPECT_NEAR(sum / n, 0.5, 3.0 * std::sqrt(1.0 / 12.0 / n));
}

TEST(RandomStream, UniformIndexCoversRange) {
  RandomStream rng(3);
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 70000; ++i) ++counts[rng.uniform_index(7)];
  for (int c : counts) EXPECT_NEAR(c, 10000, 400);
  EXPECT_THROW(rng.uniform_index(0), Error);
}

TEST(RandomStream, ChiSquareMoments) {
  RandomStream rng(5);
  for (double df : {1.0, 4.0, 10.0}) {
    const int n = 200000;
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double x = rng.chi_square(df);
      s += x;
      s2 += x * x;
    }
    const double mean = s / n;
    const double var = s2 / n - mean * mean;
    EXPECT_NEAR(mean, df, 4.0 * std::sqrt(2.0 * df / n)) << "df=" << df;
    EXPECT_NEAR(var / (2.0 * df), 1.0, 0.03) << "df=" << df;
  }
  EXPECT_EQ(rng.chi_square(0.0), 0.0);
  EXPECT_THROW(rng.chi_square(-1.0), Error);
}

TEST(RandomStream, NormalMoments) {
  RandomStream rng(11);
  const int n = 200000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    s += z;
    s2 += z * z;
  }
  EXPECT_NEAR(s / n, 0.0, 4.0 / std::sqrt(n));
  EXPECT_NEAR(s2 / n, 1.0, 0.02);
}

TEST(NumberFormat, ShortestRoundTrip) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(2.0), "2");
  EXPECT_EQ(format_double(-1.5e-300), "-1.5e-300");
  EXPECT_EQ(format_double(std::nan("")), "nan");
  EXPECT_EQ(format_double(INFINITY), "inf");
  RandomStream rng(2);
  for (int i = 0; i < 1000; ++i) {
    const double v = std::ldexp(rng.uniform() - 0.5, static_cast<int>(rng.uniform_index(200)) - 100);
    EXPECT_EQ(parse_double(format_double(v)), v);
  }
}

TEST(NumberFormat, StrictParse) {
  EXPECT_EQ(parse_double("2.5"), 2.5);
  EXPECT_THROW(parse_double("2.5x"), Error);
  EXPECT_THROW(parse_double(""), Error);
  EXPECT_EQ(parse_int("-12"), -12);
  EXPECT_THROW(parse_int("1.0"), Error);
}

TEST(ParallelFor, EveryIndexOnceAnyWorkerCount) {
  for (unsigned w : {1u, 2u, 5u}) {
    std::vector<int> hits(37, 0);
    parallel_for(hits.size(), w, [&](std::size_t i) { hits[i] += 1; });
    for (int h : hits) EXPECT_EQ(h, 1);
  }
}

TEST(ParallelFor, RethrowsTaskError) {
  EXPECT_THROW(parallel_for(10, 3,
                            [](std::size_t i) {
                              if (i == 4) throw Error(ErrorCode::kIo, "boom");
                            }),
               Error);
}

}  // namespace
}  // namespace tailscope
