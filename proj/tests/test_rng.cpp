#include <gtest/gtest.h>

#include <set>

#include "zpfsim/parallel.hpp"
#include "zpfsim/rng.hpp"

using zpfsim::CounterStream;
using zpfsim::Philox4x32;

// Known-answer vectors of the reference Philox4x32-10 implementation.
TEST(Philox, KnownAnswers) {
  EXPECT_EQ(Philox4x32::generate({0, 0, 0, 0}, {0, 0}),
            (Philox4x32::Counter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
  EXPECT_EQ(Philox4x32::generate({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                                 {0xffffffffu, 0xffffffffu}),
            (Philox4x32::Counter{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
  EXPECT_EQ(Philox4x32::generate({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                                 {0xa4093822u, 0x299f31d0u}),
            (Philox4x32::Counter{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(CounterStream, PureFunctionOfAddress) {
  CounterStream a(42, 1), b(42, 1), c(42, 2), d(43, 1);
  EXPECT_EQ(a.words(7, 3), b.words(7, 3));
  EXPECT_NE(a.words(7, 3), c.words(7, 3));
  EXPECT_NE(a.words(7, 3), d.words(7, 3));
  EXPECT_NE(a.words(7, 3), a.words(8, 3));
  EXPECT_NE(a.words(7, 3), a.words(7, 4));
}

TEST(CounterStream, UniformsStayInsideOpenInterval) {
  CounterStream s(1, 1);
  for (std::uint64_t i = 0; i < 100000; ++i) {
    const auto u = s.uniforms(i, 0);
    ASSERT_GT(u[0], 0.0);
    ASSERT_LT(u[0], 1.0);
    ASSERT_GT(u[1], 0.0);
    ASSERT_LT(u[1], 1.0);
  }
}

TEST(Parallel, BlockReductionIndependentOfThreads) {
  CounterStream s(9, 1);
  const std::size_t n = 100003;
  auto run = [&](unsigned threads) {
    std::vector<double> partial(zpfsim::parallel::block_count(n), 0.0);
    zpfsim::parallel::for_each_block(n, threads, [&](std::size_t b, std::size_t lo, std::size_t hi) {
      double acc = 0.0;
      for (std::size_t i = lo; i < hi; ++i) acc += s.normals(i, 0)[0];
      partial[b] = acc;
    });
    double total = 0.0;
    for (double p : partial) total += p;
    return total;
  };
  const double one = run(1);
  EXPECT_EQ(one, run(2));
  EXPECT_EQ(one, run(7));
}

TEST(Parallel, ExceptionsPropagate) {
  EXPECT_THROW(zpfsim::parallel::for_each_index(100, 4,
                                                [](std::size_t i) {
                                                  if (i == 57) throw std::runtime_error("x");
                                                }),
               std::runtime_error);
}
