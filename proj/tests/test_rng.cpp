#include <gtest/gtest.h>

#include <cmath>

#include "riemsa/rng.hpp"

using riemsa::Rng;

// Reference outputs of numpy.random.Philox (4x64, 10 rounds), which encrypts
// counter {1, 0, 0, 0} for its first block.
TEST(Philox, KnownAnswerZeroKey) {
  Rng rng(0, 0);
  EXPECT_EQ(rng(), 0x02f4ba6408e4d89bULL);
  EXPECT_EQ(rng(), 0x3dd62b0b9ca8c5b2ULL);
  EXPECT_EQ(rng(), 0x1c8667a55d902e79ULL);
  EXPECT_EQ(rng(), 0x907d7a052fd5b4dcULL);
  EXPECT_EQ(rng(), 0x809bf322883987c3ULL);
}

TEST(Philox, KnownAnswerNonzeroKey) {
  Rng rng(123, 7);
  EXPECT_EQ(rng(), 0x1a9e860091be87b3ULL);
  EXPECT_EQ(rng(), 0xfce44826d0b0e471ULL);
  EXPECT_EQ(rng(), 0xfe35216afaa5ee73ULL);
  EXPECT_EQ(rng(), 0x94253a85000b3d26ULL);
}

TEST(Philox, BlockFunctionMatchesGenerator) {
  const auto block = riemsa::philox4x64_10({1, 0, 0, 0}, {123, 7});
  EXPECT_EQ(block[0], 0x1a9e860091be87b3ULL);
  EXPECT_EQ(block[3], 0x94253a85000b3d26ULL);
}

TEST(Rng, CopiesReplayAndStreamsDiffer) {
  Rng a(5, 1);
  a();
  a.normal();
  Rng b = a;
  for (int i = 0; i < 100; ++i) {
    EXPECT_EQ(a.normal(), b.normal());
    EXPECT_EQ(a(), b());
  }
  Rng s0(5, 0);
  Rng s1(5, 1);
  int equal = 0;
  for (int i = 0; i < 100; ++i) equal += s0() == s1();
  EXPECT_EQ(equal, 0);
  EXPECT_EQ(s1.seed(), 5u);
  EXPECT_EQ(s1.stream(), 1u);
}

TEST(Rng, UniformAndNormalMoments) {
  Rng rng(42, 0);
  const int n = 100000;
  double su = 0.0;
  double sn = 0.0;
  double sn2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    su += u;
    const double z = rng.normal();
    sn += z;
    sn2 += z * z;
  }
  // 4 standard errors of the respective sample means.
  EXPECT_NEAR(su / n, 0.5, 4.0 * std::sqrt(1.0 / 12.0 / n));
  EXPECT_NEAR(sn / n, 0.0, 4.0 / std::sqrt(n));
  EXPECT_NEAR(sn2 / n, 1.0, 4.0 * std::sqrt(2.0 / n));
}
