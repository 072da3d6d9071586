#include <gtest/gtest.h>

#include <cmath>

#include "riemsa/spd.hpp"
#include "test_util.hpp"

using namespace riemsa;
using testutil::spd_point;
using testutil::spd_tangent;

namespace {

Eigen::MatrixXd random_symmetric(int d, Rng& rng) {
  Eigen::MatrixXd a(d, d);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = rng.normal();
  return 0.5 * (a + a.transpose());
}

Eigen::MatrixXd random_spd(int d, Rng& rng) {
  return wishart(d, d + 2, rng) + 0.1 * Eigen::MatrixXd::Identity(d, d);
}

}  // namespace

TEST(SymEig, DiagonalCases) {
  EXPECT_EQ(sym_eig(Eigen::MatrixXd::Identity(3, 3)).values, Eigen::Vector3d(1, 1, 1));
  const SymEig e = sym_eig(Eigen::Vector3d(3, 1, 2).asDiagonal().toDenseMatrix());
  EXPECT_EQ(e.values, Eigen::Vector3d(1, 2, 3));
}

TEST(SymEig, ReconstructionAndOrthogonality) {
  Rng rng(31, 0);
  for (int t = 0; t < 100; ++t) {
    const int d = 1 + t % 6;
    const Eigen::MatrixXd a = random_symmetric(d, rng);
    const SymEig e = sym_eig(a);
    const double scale = std::max(1.0, a.norm());
    ASSERT_LE((e.vectors * e.values.asDiagonal() * e.vectors.transpose() - a).norm(), 1e-10 * scale);
    ASSERT_LE((e.vectors.transpose() * e.vectors - Eigen::MatrixXd::Identity(d, d)).norm(), 1e-10);
    for (int i = 1; i < d; ++i) ASSERT_LE(e.values[i - 1], e.values[i]);
  }
}

TEST(SymEig, RejectsNonFinite) {
  Eigen::Matrix2d a = Eigen::Matrix2d::Identity();
  a(0, 1) = NAN;
  EXPECT_THROW(sym_eig(a), NumericalError);
}

TEST(SpdFun, Examples) {
  EXPECT_LE(spd_fun(Eigen::MatrixXd::Identity(3, 3), SpdFunction::log).norm(), 1e-15);
  const Eigen::MatrixXd r = spd_fun(Eigen::Vector2d(4, 9).asDiagonal().toDenseMatrix(), SpdFunction::sqrt);
  EXPECT_LE((r - Eigen::Vector2d(2, 3).asDiagonal().toDenseMatrix()).norm(), 1e-14);
  Rng rng(32, 0);
  const Eigen::MatrixXd a = random_spd(5, rng);
  const Eigen::MatrixXd s = spd_fun(a, SpdFunction::sqrt);
  EXPECT_LE((s * s - a).norm(), 1e-9);
  const Eigen::MatrixXd is = spd_fun(a, SpdFunction::inv_sqrt);
  EXPECT_LE((is * a * is - Eigen::MatrixXd::Identity(5, 5)).norm(), 1e-9);
  EXPECT_LE((spd_fun(spd_fun(a, SpdFunction::log), SpdFunction::exp) - a).norm(), 1e-9 * a.norm());
}

TEST(SpdFun, RejectsBelowFloor) {
  EXPECT_THROW(spd_fun(Eigen::Vector2d(1, 1e-13).asDiagonal().toDenseMatrix(), SpdFunction::log), NumericalError);
  EXPECT_THROW(spd_fun(Eigen::Vector2d(1, -1).asDiagonal().toDenseMatrix(), SpdFunction::sqrt), NumericalError);
  EXPECT_NO_THROW(spd_fun(Eigen::Vector2d(1, -1).asDiagonal().toDenseMatrix(), SpdFunction::exp));
}

TEST(Wishart, ChiSquareMean) {
  Rng rng(33, 0);
  double acc = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) acc += wishart(1, 5, rng)(0, 0);
  EXPECT_NEAR(acc / n, 5.0, 0.03 * 5.0);
}

TEST(Wishart, MatrixMeanAndPositivity) {
  Rng rng(34, 0);
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(3, 3);
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const Eigen::MatrixXd w = wishart(3, 10, rng);
    if (i < 10000) ASSERT_GT(sym_eig(w).values.minCoeff(), 0.0);
    acc += w;
  }
  acc /= n;
  EXPECT_LE((acc - 10.0 * Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff(), 0.15);
  EXPECT_THROW(wishart(3, 2, rng), DomainError);
}

TEST(Spd, ExpLogDistExamples) {
  const SpdManifold m(2);
  const Point i2 = m.origin();
  const Point q = m.exp(i2, spd_tangent(i2, Eigen::Vector2d(2, 0).asDiagonal().toDenseMatrix()));
  const Eigen::MatrixXd expected = Eigen::Vector2d(std::exp(2.0), 1).asDiagonal();
  EXPECT_LE((as_matrix(q.coords, 2) - expected).norm(), 1e-12);
  const Tangent l = m.log(i2, spd_point(expected));
  EXPECT_LE((as_matrix(l.coords, 2) - Eigen::Vector2d(2, 0).asDiagonal().toDenseMatrix()).norm(), 1e-12);
  EXPECT_NEAR(m.dist(i2, spd_point(expected)), 2.0, 1e-12);
}

TEST(Spd, InnerExamples) {
  const SpdManifold m(2);
  const Point i2 = m.origin();
  const Tangent u = spd_tangent(i2, Eigen::Vector2d(1, 0).asDiagonal().toDenseMatrix());
  EXPECT_NEAR(m.inner(i2, u, u), 1.0, 1e-15);
  const Point p2 = spd_point(2.0 * Eigen::MatrixXd::Identity(2, 2));
  const Tangent id = spd_tangent(p2, Eigen::MatrixXd::Identity(2, 2));
  EXPECT_NEAR(m.inner(p2, id, id), 0.5, 1e-15);
  EXPECT_EQ(m.inner(i2, m.zero(i2), m.zero(i2)), 0.0);
}

TEST(Spd, TransportExample) {
  const SpdManifold m(2);
  const Point i2 = m.origin();
  const Point q = spd_point(Eigen::Vector2d(std::exp(2.0), 1).asDiagonal());
  const Tangent v = spd_tangent(i2, Eigen::Vector2d(0, 1).asDiagonal().toDenseMatrix());
  EXPECT_NEAR(m.norm(q, m.transport(i2, q, v)), 1.0, 1e-12);
}

TEST(Spd, ProjectBallExample) {
  const SpdManifold m(2);
  const Point out = m.project_ball(m.origin(), 1.0, spd_point(Eigen::Vector2d(std::exp(2.0), 1).asDiagonal()));
  EXPECT_LE((as_matrix(out.coords, 2) - Eigen::Vector2d(std::exp(1.0), 1).asDiagonal().toDenseMatrix()).norm(), 1e-12);
  EXPECT_NEAR(m.dist(m.origin(), out), 1.0, 1e-12);
}

TEST(Spd, GaussianTangentNormMean) {
  const SpdManifold m(2);
  Rng rng(35, 0);
  double acc = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const Tangent v = m.gaussian_tangent(m.origin(), 1.0, rng);
    acc += m.inner(m.origin(), v, v);
  }
  EXPECT_NEAR(acc / n, 3.0, 0.02 * 3.0);
}

TEST(Spd, FrameAtIdentity) {
  const SpdManifold m(2);
  const auto frame = m.orthonormal_frame(m.origin());
  ASSERT_EQ(frame.size(), 3u);
  EXPECT_EQ(as_matrix(frame[0].coords, 2), Eigen::Vector2d(1, 0).asDiagonal().toDenseMatrix());
  EXPECT_EQ(as_matrix(frame[1].coords, 2), Eigen::Vector2d(0, 1).asDiagonal().toDenseMatrix());
  EXPECT_NEAR(frame[2].coords[1], 1.0 / std::sqrt(2.0), 1e-16);
  EXPECT_NEAR(frame[2].coords[2], 1.0 / std::sqrt(2.0), 1e-16);
}

TEST(Spd, AffineInvariance) {
  Rng rng(36, 0);
  for (int d = 2; d <= 4; ++d) {
    const SpdManifold m(d);
    for (int t = 0; t < 100; ++t) {
      const Eigen::MatrixXd p = random_spd(d, rng);
      const Eigen::MatrixXd q = random_spd(d, rng);
      Eigen::MatrixXd g = Eigen::MatrixXd::Identity(d, d) + 0.5 * random_symmetric(d, rng);
      g(0, d - 1) += 0.3;
      if (std::abs(g.determinant()) < 0.05) continue;
      const double d0 = m.dist(spd_point(p), spd_point(q));
      const Eigen::MatrixXd gp = g * p * g.transpose();
      const Eigen::MatrixXd gq = g * q * g.transpose();
      const double d1 = m.dist(spd_point(0.5 * (gp + gp.transpose())), spd_point(0.5 * (gq + gq.transpose())));
      ASSERT_NEAR(d0, d1, 1e-8);
    }
  }
}

TEST(Spd, CommutingClosedFormAndMidpoint) {
  Rng rng(37, 0);
  const SpdManifold m(3);
  for (int t = 0; t < 100; ++t) {
    Eigen::Vector3d a;
    Eigen::Vector3d b;
    for (int i = 0; i < 3; ++i) {
      a[i] = std::exp(2 * rng.normal());
      b[i] = std::exp(2 * rng.normal());
    }
    const Point p = spd_point(a.asDiagonal());
    const Point q = spd_point(b.asDiagonal());
    ASSERT_NEAR(m.dist(p, q), (b.array() / a.array()).log().matrix().norm(), 1e-10);
    const Point mid = m.exp(p, 0.5 * m.log(p, q));
    const Eigen::Vector3d gm = (a.array() * b.array()).sqrt();
    ASSERT_LE((as_matrix(mid.coords, 3) - gm.asDiagonal().toDenseMatrix()).norm(), 1e-9 * gm.norm());
  }
}

TEST(Spd, ValidationRejectsAsymmetricAndIndefinite) {
  const SpdManifold m(2);
  Eigen::Matrix2d a;
  a << 1, 0.5, 0.4, 1;
  EXPECT_THROW(m.validate_point(spd_point(a)), GeometryError);
  EXPECT_THROW(m.validate_point(spd_point(Eigen::Vector2d(1, -1).asDiagonal())), GeometryError);
  EXPECT_THROW(m.validate_tangent(spd_tangent(m.origin(), a)), GeometryError);
  EXPECT_DOUBLE_EQ(m.curvature_bound(), 1.0 / std::sqrt(2.0));
}
