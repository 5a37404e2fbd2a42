// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <random>
#include <set>

#include "urllc/core/parallel.hpp"
#include "urllc/core/random.hpp"
#include "urllc/core/stats.hpp"

using namespace urllc;

// Published Philox4x32-10 known-answer vectors.
TEST(Philox, KnownAnswerVectors) {
  using P = Philox4x32;
  EXPECT_EQ(P::block({0, 0, 0, 0}, {0, 0}),
            (P::Counter{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
  EXPECT_EQ(P::block({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}),
            (P::Counter{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
  EXPECT_EQ(P::block({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}),
            (P::Counter{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(Philox, UnitConversionRange) {
  EXPECT_EQ(to_unit(0, 0), 0.0);
  EXPECT_LT(to_unit(0xffffffff, 0xffffffff), 1.0);
  EXPECT_EQ(to_unit(0xffffffff, 0xffffffff), 1.0 - 0x1.0p-53);
}

TEST(CounterStream, ReproducibleAndStreamSeparated) {
  CounterStream a(42, 0), b(42, 0), c(42, 1), d(43, 0);
  bool diff_c = false, diff_d = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a(), y = b(), z = c(), w = d();
    EXPECT_EQ(x, y);
    diff_c |= x != z;
    diff_d |= x != w;
  }
  EXPECT_TRUE(diff_c);
  EXPECT_TRUE(diff_d);
}

TEST(CounterStream, MatchesRandomAccess) {
  CounterStream s(7, 3);
  for (std::uint64_t i = 0; i < 10; ++i) {
    const double u = s.uniform();
    s();
    s();
    EXPECT_EQ(u, uniform_at(7, 3, i));
  }
}

TEST(CounterStream, WorksAsUrbg) {
  CounterStream s(1, 0);
  std::uniform_int_distribution<int> die(1, 6);
  std::set<int> seen;
  for (int i = 0; i < 200; ++i) seen.insert(die(s));
  EXPECT_EQ(seen.size(), 6u);
}

TEST(CounterStream, UniformMoments) {
  CounterStream s(99, 0);
  RunningStats st;
  for (int i = 0; i < 200000; ++i) st.add(s.uniform());
  EXPECT_NEAR(st.mean, 0.5, 4.0 * std::sqrt(1.0 / 12.0 / 200000));
  EXPECT_NEAR(st.variance(), 1.0 / 12.0, 1e-3);
}

TEST(CounterStream, ComplexNormalMoments) {
  CounterStream s(5, 0);
  RunningStats re, im, e, cross;
  for (int i = 0; i < 200000; ++i) {
    const auto z = s.complex_normal(2.0);
    re.add(z.real());
    im.add(z.imag());
    e.add(std::norm(z));
    cross.add(z.real() * z.imag());
  }
  EXPECT_NEAR(re.mean, 0.0, 0.01);
  EXPECT_NEAR(im.mean, 0.0, 0.01);
  EXPECT_NEAR(re.variance(), 1.0, 0.015);
  EXPECT_NEAR(im.variance(), 1.0, 0.015);
  EXPECT_NEAR(e.mean, 2.0, 0.02);
  EXPECT_NEAR(cross.mean, 0.0, 0.01);
}

TEST(DeriveSeed, DistinctChildren) {
  std::set<std::uint64_t> s;
  for (std::uint64_t i = 0; i < 10000; ++i) s.insert(derive_seed(1, i));
  EXPECT_EQ(s.size(), 10000u);
  EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
}

TEST(ChunkedReduce, IndependentOfThreadCount) {
  auto run = [](unsigned threads) {
    return chunked_reduce<double>(
        100003, Parallelism{threads, 1000},
        [](std::uint64_t lo, std::uint64_t hi) {
          double s = 0.0;
          for (auto i = lo; i < hi; ++i) s += uniform_at(3, 0, i);
          return s;
        },
        [](double& a, double b) { a += b; });
  };
  const double one = run(1);
  EXPECT_EQ(one, run(2));
  EXPECT_EQ(one, run(3));
  EXPECT_EQ(one, run(8));
}

TEST(ChunkedReduce, PropagatesWorkerExceptions) {
  auto bad = [](unsigned threads) {
    return chunked_reduce<int>(
        10, Parallelism{threads, 1},
        [](std::uint64_t lo, std::uint64_t) -> int {
          if (lo == 7) throw std::runtime_error("boom");
          return 1;
        },
        [](int& a, int b) { a += b; });
  };
  EXPECT_THROW(bad(1), std::runtime_error);
  EXPECT_THROW(bad(4), std::runtime_error);
}
