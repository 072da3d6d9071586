#include <gtest/gtest.h>

#include <cmath>

#include "riemsa/manifold.hpp"
#include "test_util.hpp"

using namespace riemsa;
using testutil::point;
using testutil::tangent;

TEST(ManifoldKind, DimensionsAndNames) {
  EXPECT_EQ(ManifoldKind::euclidean(4).intrinsic_dim(), 4);
  EXPECT_EQ(ManifoldKind::spd(3).intrinsic_dim(), 6);
  EXPECT_EQ(ManifoldKind::spd(3).ambient_size(), 9);
  EXPECT_EQ(ManifoldKind::hyperboloid(2).ambient_size(), 3);
  EXPECT_EQ(ManifoldKind::circle().intrinsic_dim(), 1);
  EXPECT_FALSE(ManifoldKind::circle().is_hadamard());
  EXPECT_EQ(parse_manifold_tag("hyperboloid"), ManifoldKind::Tag::hyperboloid);
  EXPECT_THROW(parse_manifold_tag("sphere"), Error);
  EXPECT_THROW(make_manifold(ManifoldKind::spd(0)), GeometryError);
}

TEST(Euclidean, ExpLogDist) {
  const auto m = make_manifold(ManifoldKind::euclidean(2));
  const Point p = point(m->kind(), {1, 2});
  const Point q = m->exp(p, tangent(p, {0.5, -1}));
  EXPECT_EQ(q.coords, Eigen::Vector2d(1.5, 1));
  const Point o = point(m->kind(), {0, 0});
  const Tangent l = m->log(o, point(m->kind(), {3, 4}));
  EXPECT_EQ(l.coords, Eigen::Vector2d(3, 4));
  EXPECT_DOUBLE_EQ(m->norm(o, l), 5.0);
  EXPECT_EQ(m->dist(p, p), 0.0);
}

TEST(Euclidean, TransportMovesBaseOnly) {
  const auto m = make_manifold(ManifoldKind::euclidean(2));
  const Point p = point(m->kind(), {0, 0});
  const Point q = point(m->kind(), {1, 1});
  const Tangent v = m->transport(p, q, tangent(p, {2, 3}));
  EXPECT_EQ(v.base, q);
  EXPECT_EQ(v.coords, Eigen::Vector2d(2, 3));
}

TEST(Euclidean, ProjectBall) {
  const auto m = make_manifold(ManifoldKind::euclidean(2));
  const Point c = m->origin();
  const Point inside = point(m->kind(), {0.3, 0.1});
  EXPECT_EQ(m->project_ball(c, 1.0, inside), inside);
  const Point out = m->project_ball(c, 1.0, point(m->kind(), {2, 0}));
  EXPECT_NEAR(out.coords[0], 1.0, 1e-15);
  EXPECT_NEAR(out.coords[1], 0.0, 1e-15);
  EXPECT_THROW(m->project_ball(c, 0.0, inside), GeometryError);
}

TEST(Euclidean, GaussianTangentMean) {
  const auto m = make_manifold(ManifoldKind::euclidean(2));
  Rng rng(3, 0);
  const Point p = m->origin();
  EXPECT_EQ(m->gaussian_tangent(p, 0.0, rng).coords, Eigen::Vector2d::Zero());
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  const int n = 100000;
  for (int i = 0; i < n; ++i) mean += m->gaussian_tangent(p, 1.0, rng).coords;
  mean /= n;
  EXPECT_LT(mean.cwiseAbs().maxCoeff(), 0.02);
}

TEST(Euclidean, CanonicalFrame) {
  const auto m = make_manifold(ManifoldKind::euclidean(3));
  const auto frame = m->orthonormal_frame(m->origin());
  ASSERT_EQ(frame.size(), 3u);
  for (int i = 0; i < 3; ++i) EXPECT_EQ(frame[static_cast<std::size_t>(i)].coords, Eigen::Vector3d::Unit(i));
}

TEST(Tangent, ArithmeticChecksBase) {
  const auto m = make_manifold(ManifoldKind::euclidean(1));
  const Point a = point(m->kind(), {0});
  const Point b = point(m->kind(), {1});
  EXPECT_THROW(tangent(a, {1}) + tangent(b, {1}), GeometryError);
  EXPECT_EQ((2.0 * tangent(a, {1.5}) - tangent(a, {1})).coords[0], 2.0);
}

TEST(Validation, ShapeAndFiniteness) {
  const auto m = make_manifold(ManifoldKind::euclidean(2));
  EXPECT_THROW(m->validate_point(point(m->kind(), {1})), GeometryError);
  EXPECT_THROW(m->validate_point(point(m->kind(), {NAN, 0})), GeometryError);
  EXPECT_THROW(m->log(point(m->kind(), {1, 2}), point(ManifoldKind::euclidean(3), {1, 2, 3})), GeometryError);
  EXPECT_THROW(m->exp(m->origin(), tangent(point(m->kind(), {1, 1}), {0, 0})), GeometryError);
}

class AllKinds : public ::testing::TestWithParam<ManifoldKind> {};

TEST_P(AllKinds, RoundTripAndGeodesicLength) {
  const auto m = make_manifold(GetParam());
  Rng rng(11, 0);
  const bool circle = GetParam().tag == ManifoldKind::Tag::circle;
  for (int t = 0; t < 1000; ++t) {
    const Point p = testutil::random_point(*m, rng);
    Tangent v = m->gaussian_tangent(p, 1.0, rng);
    v *= (circle ? 2.0 : 5.0) * rng.uniform() / m->norm(p, v);
    const double nv = m->norm(p, v);
    const Point q = m->exp(p, v);
    ASSERT_LE(m->norm(p, m->log(p, q) - v), 1e-8 * std::max(1.0, nv));
    const double s = rng.uniform();
    ASSERT_NEAR(m->dist(p, m->exp(p, s * v)), s * nv, 1e-8 * std::max(1.0, nv));
  }
}

TEST_P(AllKinds, LogOfSelfIsZeroAndTransportIsIdentity) {
  const auto m = make_manifold(GetParam());
  Rng rng(12, 0);
  const Point p = testutil::random_point(*m, rng);
  EXPECT_LE(m->norm(p, m->log(p, p)), 1e-12);
  EXPECT_EQ(m->dist(p, p), 0.0);
  const Tangent v = m->gaussian_tangent(p, 1.0, rng);
  EXPECT_LE(m->norm(p, m->transport(p, p, v) - v), 1e-12);
}

TEST_P(AllKinds, TransportIsometry) {
  const auto m = make_manifold(GetParam());
  Rng rng(13, 0);
  for (int t = 0; t < 200; ++t) {
    const Point p = testutil::random_point(*m, rng);
    const Point q = testutil::random_point(*m, rng);
    if (GetParam().tag == ManifoldKind::Tag::circle && m->dist(p, q) > 3.0) continue;
    const Tangent v = m->gaussian_tangent(p, 1.0, rng);
    const Tangent w = m->transport(p, q, v);
    ASSERT_EQ(w.base, q);
    ASSERT_NEAR(m->norm(q, w), m->norm(p, v), 1e-8);
  }
}

TEST_P(AllKinds, FrameIsOrthonormal) {
  const auto m = make_manifold(GetParam());
  Rng rng(14, 0);
  for (int t = 0; t < 50; ++t) {
    const Point p = testutil::random_point(*m, rng);
    const auto frame = m->orthonormal_frame(p);
    ASSERT_EQ(static_cast<int>(frame.size()), m->intrinsic_dim());
    for (std::size_t i = 0; i < frame.size(); ++i) {
      for (std::size_t j = 0; j < frame.size(); ++j) {
        ASSERT_NEAR(m->inner(p, frame[i], frame[j]), i == j ? 1.0 : 0.0, 1e-12);
      }
    }
    const Tangent v = m->gaussian_tangent(p, 1.0, rng);
    const Tangent back = m->from_frame_coords(p, m->frame_coords(p, v), frame);
    ASSERT_LE(m->norm(p, back - v), 1e-10);
  }
}

TEST_P(AllKinds, ProjectionIdempotentAndConfining) {
  const auto m = make_manifold(GetParam());
  Rng rng(15, 0);
  const Point c = m->origin();
  if (!GetParam().is_hadamard()) {
    EXPECT_THROW(m->project_ball(c, 1.0, c), GeometryError);
    return;
  }
  for (int t = 0; t < 100; ++t) {
    const Point p = testutil::random_point(*m, rng, 4.0);
    const Point once = m->project_ball(c, 1.0, p);
    const Point twice = m->project_ball(c, 1.0, once);
    ASSERT_LE(m->dist(c, once), 1.0 + 1e-10);
    ASSERT_LE(m->dist(once, twice), 1e-10);
    if (m->dist(c, p) > 1.0) ASSERT_NEAR(m->dist(c, once), 1.0, 1e-10);
  }
}

TEST_P(AllKinds, GaussianTangentSecondMoment) {
  const auto m = make_manifold(GetParam());
  Rng rng(16, 0);
  const Point p = testutil::random_point(*m, rng);
  double acc = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const Tangent v = m->gaussian_tangent(p, 0.5, rng);
    acc += m->inner(p, v, v);
  }
  // E|v|^2 = d * scale^2; chi-square relative sd is sqrt(2/(d n)).
  const double d = m->intrinsic_dim();
  EXPECT_NEAR(acc / n, 0.25 * d, 4.0 * 0.25 * d * std::sqrt(2.0 / (d * n)));
}

INSTANTIATE_TEST_SUITE_P(Kinds, AllKinds, ::testing::ValuesIn(testutil::all_kinds()),
                         [](const auto& info) { return to_string(info.param.tag); });
