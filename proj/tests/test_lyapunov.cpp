#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "riemsa/lyapunov.hpp"
#include "test_util.hpp"

using namespace riemsa;
using testutil::point;

namespace {

Point on_line(double x) { return point(ManifoldKind::euclidean(1), {x}); }

}  // namespace

TEST(V1, Examples) {
  const auto m = make_manifold(ManifoldKind::euclidean(1));
  EXPECT_EQ(v1(*m, {1.0, on_line(0)}, on_line(0)), 0.0);
  EXPECT_NEAR(v1(*m, {1.0, on_line(0)}, on_line(std::sqrt(3.0))), 1.0, 1e-15);
  EXPECT_EQ(v1(*m, {2.0, on_line(0)}, on_line(0)), 0.0);
  EXPECT_NEAR(v1(*m, {2.0, on_line(0)}, on_line(2 * std::sqrt(3.0))), 4.0, 1e-14);
}

TEST(V1, GradientExamples) {
  const auto m = make_manifold(ManifoldKind::euclidean(2));
  const HuberParams hp{1.0, m->origin()};
  EXPECT_EQ(grad_v1(*m, hp, m->origin()).coords, Eigen::Vector2d::Zero());
  const Point p = point(m->kind(), {std::sqrt(3.0), 0});
  EXPECT_NEAR(m->norm(p, grad_v1(*m, hp, p)), std::sqrt(3.0) / 2.0, 1e-15);
}

class V1AllKinds : public ::testing::TestWithParam<ManifoldKind> {};

TEST_P(V1AllKinds, GradientMatchesFiniteDifferences) {
  const auto m = make_manifold(GetParam());
  Rng rng(41, 0);
  const double h = 1e-4;
  for (int t = 0; t < 25; ++t) {
    const HuberParams hp{0.5 + rng.uniform(), testutil::random_point(*m, rng)};
    const Point p = testutil::random_point(*m, rng);
    if (GetParam().tag == ManifoldKind::Tag::circle && m->dist(p, hp.target) > 3.0) continue;
    const Tangent g = grad_v1(*m, hp, p);
    for (int k = 0; k < 10; ++k) {
      Tangent e = m->gaussian_tangent(p, 1.0, rng);
      e *= 1.0 / m->norm(p, e);
      const double fd = (v1(*m, hp, m->exp(p, h * e)) - v1(*m, hp, m->exp(p, -h * e))) / (2 * h);
      ASSERT_NEAR(fd, m->inner(p, g, e), 1e-5);
    }
  }
}

TEST_P(V1AllKinds, MonotoneAlongRaysAndBelowDistance) {
  const auto m = make_manifold(GetParam());
  Rng rng(42, 0);
  const HuberParams hp{1.0, testutil::random_point(*m, rng)};
  for (int t = 0; t < 20; ++t) {
    Tangent dir = m->gaussian_tangent(hp.target, 1.0, rng);
    dir *= 1.0 / m->norm(hp.target, dir);
    double prev = 0.0;
    for (double s = 0.1; s < 3.0; s += 0.1) {
      const Point p = m->exp(hp.target, s * dir);
      const double v = v1(*m, hp, p);
      ASSERT_GE(v, prev);
      ASSERT_LE(v, m->dist(p, hp.target) + 1e-12);
      prev = v;
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Kinds, V1AllKinds, ::testing::ValuesIn(testutil::all_kinds()),
                         [](const auto& info) { return to_string(info.param.tag); });

TEST(V2, RegionsAndContinuity) {
  const auto m = make_manifold(ManifoldKind::euclidean(1));
  const double dh = 2.0;
  const CutoffParams cp{dh, on_line(0)};
  EXPECT_DOUBLE_EQ(v2(*m, cp, on_line(dh / 2)), dh * dh / 4);
  EXPECT_DOUBLE_EQ(v2(*m, cp, on_line(dh + 2)), dh * dh);
  EXPECT_EQ(cutoff_chi(dh, dh), 1.0);
  EXPECT_EQ(cutoff_chi(dh + 1, dh), 0.0);
  // |d v2/d rho| <= max|chi'| ((D+1)^2 - D^2) + 2(D+1), with max|chi'| = 15/8.
  const double lip = 15.0 / 8.0 * (2 * dh + 1) + 2 * (dh + 1);
  const double step = 1e-3;
  for (double r = 0.0; r < dh + 2; r += step) {
    ASSERT_LE(std::abs(v2(*m, cp, on_line(r + step)) - v2(*m, cp, on_line(r))), lip * step);
  }
}

TEST(DThetaSq, Examples) {
  const auto m = make_manifold(ManifoldKind::euclidean(1));
  EXPECT_EQ(d_theta_sq(*m, on_line(0), on_line(0)), 0.0);
  EXPECT_DOUBLE_EQ(d_theta_sq(*m, on_line(0), on_line(1)), 0.5);
  EXPECT_DOUBLE_EQ(d_theta_sq(*m, on_line(0), on_line(3)), 0.9);
}

TEST(EtaBar, Examples) {
  BoundParams p;
  p.C2 = 1;
  p.L = 1;
  p.sigma1_sq = 0;
  EXPECT_DOUBLE_EQ(eta_bar(BoundKind::thm1c, p), 0.5);
  BoundParams c;
  c.L_f = 2;
  c.sigma1_sq = 1;
  EXPECT_DOUBLE_EQ(eta_bar(BoundKind::cor9, c), 1.0 / 8);
  BoundParams q;
  q.c_f = 1;
  q.lambda_tilde_f = 1;
  q.kappa = 1;
  q.sigma1_sq = 0;
  EXPECT_DOUBLE_EQ(eta_bar(BoundKind::prop11, q), 1.0 / 16);
  EXPECT_EQ(eta_bar(BoundKind::thm13, BoundParams{}), std::numeric_limits<double>::infinity());
}

TEST(EtaBar, MissingConstantIsNamed) {
  try {
    eta_bar(BoundKind::cor9, BoundParams{});
    FAIL() << "expected DomainError";
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("L_f"), std::string::npos);
  }
}

TEST(BoundEval, Thm1cExampleAndLimit) {
  BoundParams p;
  p.v0 = 1;
  p.lambda = 0.5;  // a = lambda / 2 = 0.25
  p.L = 1;
  p.sigma0_sq = 1;  // b = 2 L sigma0^2 = 2
  p.C2 = 1;
  p.v_sup_kstar = 0;
  EXPECT_NEAR(bound_eval(BoundKind::thm1c, p, 0.1, 0), 1.4, 1e-15);
  double prev = bound_eval(BoundKind::thm1c, p, 0.1, 0);
  for (std::int64_t n = 1; n < 5000; n *= 2) {
    const double v = bound_eval(BoundKind::thm1c, p, 0.1, n);
    ASSERT_LE(v, prev);
    prev = v;
  }
  EXPECT_DOUBLE_EQ(bound_eval(BoundKind::thm1c, p, 0.1, 100000), 0.1 * 2 / (2 * 0.25));
}

TEST(BoundEval, Cor9FloorAndThm13Example) {
  BoundParams c;
  c.v0 = 1;
  c.lambda_f = 1;
  c.L_f = 1;
  c.sigma0_sq = 1;
  EXPECT_NEAR(bound_eval(BoundKind::cor9, c, 0.1, 1000000), 0.2, 1e-15);
  EXPECT_NEAR(bound_eval(BoundKind::cor9, c, 0.1, 0), 1.2, 1e-15);

  BoundParams t;
  t.v1_theta0 = 2;
  t.c_pi = 4;
  t.b_pi = 1;
  EXPECT_NEAR(bound_eval(BoundKind::thm13, t, 0.1, 100), 2.0, 1e-15);
}

TEST(BoundEval, AveragedAndRemainingForms) {
  BoundParams p;
  p.v0 = 1;
  p.L = 1;
  p.C1 = 0;
  p.C2 = 1;
  p.sigma0_sq = 1;
  p.lambda = 1;
  // b = 2 L (sigma0^2 + C1 (1 + sigma1^2)) = 2, a = 1/2
  EXPECT_NEAR(bound_eval(BoundKind::thm1a, p, 0.1, 10), 2.0 / (10 * 0.1) + 0.1 * 2, 1e-14);
  EXPECT_NEAR(bound_eval(BoundKind::thm1b, p, 0.1, 10), 1.0 / (0.5 * 10 * 0.1) + 0.1 * 2 / (2 * 0.5), 1e-14);
  // b~ = L ((1 + sigma1^2) h_sup + sigma0^2) = 1
  EXPECT_NEAR(bound_eval(BoundKind::thm15, p, 0.1, 10), 1.0 / (0.5 * 0.1 * 10) + 0.1 * 1 / 0.5, 1e-14);

  BoundParams q;
  q.v1_theta0 = 1;
  q.lambda_tilde_f = 0.5;
  q.kappa = 1;
  q.sigma0_sq = 2;
  q.c_f = 1;
  EXPECT_NEAR(bound_eval(BoundKind::prop11, q, 0.01, 100), 4.0 / (100 * 0.01 * 0.5) + 4 * 0.01 * 2 * 2 / 0.5, 1e-13);

  BoundParams r;
  r.rho0_sq = 1;
  r.diam_d = 1;
  r.kappa = 0;
  // L_pi = (1 + D)(1 + 1/D) = 4, eta_bar = 1/16
  EXPECT_DOUBLE_EQ(eta_bar(BoundKind::prop12, r), 1.0 / 16);
  EXPECT_NEAR(bound_eval(BoundKind::prop12, r, 0.05, 0), 1.0 + 0.05 * 4, 1e-15);
  EXPECT_NEAR(bound_eval(BoundKind::prop12, r, 0.05, 10), std::pow(1 - 0.05 / 4, 10) + 0.2, 1e-15);
}

TEST(BoundEval, RejectsLargeStepAndBadHorizon) {
  BoundParams c;
  c.v0 = 1;
  c.lambda_f = 1;
  c.L_f = 1;
  c.sigma0_sq = 1;
  EXPECT_THROW(bound_eval(BoundKind::cor9, c, 0.6, 10), DomainError);
  EXPECT_THROW(bound_eval(BoundKind::cor9, c, 0.0, 10), DomainError);
  EXPECT_THROW(bound_eval(BoundKind::cor9, c, 0.1, -1), DomainError);
  BoundParams t;
  t.v1_theta0 = 2;
  t.c_pi = 4;
  t.b_pi = 1;
  EXPECT_THROW(bound_eval(BoundKind::thm13, t, 0.1, 0), DomainError);
  EXPECT_TRUE(is_averaged(BoundKind::thm13));
  EXPECT_FALSE(is_averaged(BoundKind::prop12));
}

TEST(BoundKinds, ParseRoundTrip) {
  for (auto k : {BoundKind::thm1a, BoundKind::thm1b, BoundKind::thm1c, BoundKind::thm15, BoundKind::cor9,
                 BoundKind::prop11, BoundKind::prop12, BoundKind::thm13}) {
    EXPECT_EQ(parse_bound_kind(to_string(k)), k);
  }
  EXPECT_THROW(parse_bound_kind("thm99"), DomainError);
}

TEST(Barycenter, LipschitzAndOracleConstants) {
  EXPECT_DOUBLE_EQ(barycenter_lipschitz(2.0, 0.0), 3.0 * 1.5);
  EXPECT_NEAR(barycenter_lipschitz(2.0, 1e-9), 4.5, 1e-9);
  EXPECT_NEAR(barycenter_lipschitz(1.0, 1.0), 2.0 * (1.0 + 1.0 / std::tanh(1.0)), 1e-14);
  const BarycenterConstants bc = rescaled_oracle_constants(1.0, 1.0);
  EXPECT_DOUBLE_EQ(bc.c_pi, 3.0);
  EXPECT_NEAR(bc.b_pi, 2.0 * 2.0 * 3.0 / std::sqrt(3.0), 1e-14);
}
