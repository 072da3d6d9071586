#pragma once

#include <Eigen/Dense>

#include "riemsa/manifold.hpp"

namespace riemsa {

/// -x0 y0 + sum_{i>=1} xi yi. Throws GeometryError on length mismatch.
double minkowski_inner(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

/// Wraps an angle into (-pi, pi].
double wrap_angle(double a);

/// Hyperbolic space H^d in the hyperboloid model
/// {x in R^{d+1} : <x, x>_M = -1, x0 > 0}. Curvature is -1.
class HyperboloidManifold final : public Manifold {
 public:
  explicit HyperboloidManifold(int d);

  Point origin() const override;
  Point exp(const Point& p, const Tangent& v) const override;
  Tangent log(const Point& p, const Point& q) const override;
  double dist(const Point& p, const Point& q) const override;
  double inner(const Point& p, const Tangent& u, const Tangent& v) const override;
  Tangent transport(const Point& p, const Point& q, const Tangent& v) const override;
  std::vector<Tangent> orthonormal_frame(const Point& p) const override;
  double curvature_bound() const override { return 1.0; }
  void validate_point(const Point& p) const override;
  void validate_tangent(const Tangent& v) const override;

  /// Rescales x so that <x, x>_M = -1 with x0 > 0.
  static Eigen::VectorXd renormalize(const Eigen::VectorXd& x);
  /// Removes the component of v normal to the tangent space at p.
  static Eigen::VectorXd project_tangent(const Eigen::VectorXd& p, const Eigen::VectorXd& v);
};

/// The unit circle, points are angles in (-pi, pi]. Compact, not Hadamard:
/// project_ball rejects, and log/dist/transport reject exact antipodes.
class CircleManifold final : public Manifold {
 public:
  CircleManifold();

  Point origin() const override;
  Point exp(const Point& p, const Tangent& v) const override;
  Tangent log(const Point& p, const Point& q) const override;
  double dist(const Point& p, const Point& q) const override;
  double inner(const Point& p, const Tangent& u, const Tangent& v) const override;
  Tangent transport(const Point& p, const Point& q, const Tangent& v) const override;
  std::vector<Tangent> orthonormal_frame(const Point& p) const override;
  Point project_ball(const Point& center, double radius, const Point& p) const override;
  double curvature_bound() const override { return 0.0; }
  void validate_point(const Point& p) const override;
  void validate_tangent(const Tangent& v) const override;

  Point at(double angle) const;
};

}  // namespace riemsa
