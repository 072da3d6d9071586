#pragma once

#include <Eigen/Dense>

#include <memory>
#include <string>
#include <vector>

#include "riemsa/error.hpp"
#include "riemsa/rng.hpp"

namespace riemsa {

/// Supported geometries. `dim` is the ambient dimension parameter:
/// euclidean(d) has intrinsic dim d, spd(d) has d(d+1)/2, hyperboloid(d) has
/// d (stored in R^{d+1}), and the circle has no parameter (dim is 1).
struct ManifoldKind {
  enum class Tag { euclidean, spd, hyperboloid, circle };

  Tag tag = Tag::euclidean;
  int dim = 1;

  static ManifoldKind euclidean(int d) { return {Tag::euclidean, d}; }
  static ManifoldKind spd(int d) { return {Tag::spd, d}; }
  static ManifoldKind hyperboloid(int d) { return {Tag::hyperboloid, d}; }
  static ManifoldKind circle() { return {Tag::circle, 1}; }

  int intrinsic_dim() const;
  /// Length of the coordinate array of points and tangents.
  int ambient_size() const;
  bool is_hadamard() const { return tag != Tag::circle; }

  std::string name() const;

  friend bool operator==(const ManifoldKind&, const ManifoldKind&) = default;
};

/// Parses "euclidean" / "spd" / "hyperboloid" / "circle".
ManifoldKind::Tag parse_manifold_tag(const std::string& name);
std::string to_string(ManifoldKind::Tag tag);

/// A point of a supported manifold in its ambient representation
/// (spd matrices are stored row-major).
struct Point {
  ManifoldKind kind;
  Eigen::VectorXd coords;

  friend bool operator==(const Point& a, const Point& b) {
    return a.kind == b.kind && a.coords.size() == b.coords.size() && a.coords == b.coords;
  }
};

/// A tangent vector anchored at `base`, same ambient representation.
struct Tangent {
  Point base;
  Eigen::VectorXd coords;

  Tangent& operator*=(double s) {
    coords *= s;
    return *this;
  }
  Tangent& operator+=(const Tangent& other);
  Tangent& operator-=(const Tangent& other);

  friend Tangent operator*(double s, Tangent v) { return v *= s; }
  friend Tangent operator*(Tangent v, double s) { return v *= s; }
  friend Tangent operator+(Tangent a, const Tangent& b) { return a += b; }
  friend Tangent operator-(Tangent a, const Tangent& b) { return a -= b; }
  friend Tangent operator-(Tangent v) { return v *= -1.0; }
};

/// Common interface of the concrete geometries. All operations are pure.
class Manifold {
 public:
  explicit Manifold(ManifoldKind kind) : kind_(kind) {}
  virtual ~Manifold() = default;

  const ManifoldKind& kind() const { return kind_; }
  int intrinsic_dim() const { return kind_.intrinsic_dim(); }
  int ambient_size() const { return kind_.ambient_size(); }

  /// Canonical reference point: 0, the identity, (1, 0, ..., 0) or angle 0.
  virtual Point origin() const = 0;

  virtual Point exp(const Point& p, const Tangent& v) const = 0;
  virtual Tangent log(const Point& p, const Point& q) const = 0;
  virtual double dist(const Point& p, const Point& q) const = 0;
  virtual double inner(const Point& p, const Tangent& u, const Tangent& v) const = 0;
  /// Parallel transport along the minimizing geodesic from p to q.
  virtual Tangent transport(const Point& p, const Point& q, const Tangent& v) const = 0;
  /// Deterministic orthonormal basis of T_p.
  virtual std::vector<Tangent> orthonormal_frame(const Point& p) const = 0;

  /// Metric projection onto the closed geodesic ball B(center, radius).
  virtual Point project_ball(const Point& center, double radius, const Point& p) const;

  /// Isotropic Gaussian in T_p: frame coordinates are i.i.d. N(0, scale^2).
  virtual Tangent gaussian_tangent(const Point& p, double scale, Rng& rng) const;

  /// Lower bound kappa on sectional curvature (-kappa^2).
  virtual double curvature_bound() const = 0;

  /// Throws GeometryError unless `p` satisfies the point invariants.
  virtual void validate_point(const Point& p) const = 0;
  /// Throws GeometryError unless `v` is a tangent vector at its base.
  virtual void validate_tangent(const Tangent& v) const = 0;

  double norm(const Point& p, const Tangent& v) const;
  Tangent zero(const Point& p) const;
  Point make_point(const Eigen::VectorXd& coords) const;
  Tangent make_tangent(const Point& p, const Eigen::VectorXd& coords) const;

  /// Components of v in orthonormal_frame(p).
  Eigen::VectorXd frame_coords(const Point& p, const Tangent& v) const;
  Eigen::VectorXd frame_coords(const Point& p, const Tangent& v,
                               const std::vector<Tangent>& frame) const;
  Tangent from_frame_coords(const Point& p, const Eigen::VectorXd& c,
                            const std::vector<Tangent>& frame) const;

 protected:
  void check_point_shape(const Point& p, const char* what) const;
  void check_base(const Point& p, const Tangent& v, const char* what) const;

 private:
  ManifoldKind kind_;
};

using ManifoldPtr = std::shared_ptr<const Manifold>;

/// Returns the geometry for `kind`; throws GeometryError on invalid kinds.
ManifoldPtr make_manifold(const ManifoldKind& kind);

/// Flat R^d.
class EuclideanManifold final : public Manifold {
 public:
  explicit EuclideanManifold(int d);

  Point origin() const override;
  Point exp(const Point& p, const Tangent& v) const override;
  Tangent log(const Point& p, const Point& q) const override;
  double dist(const Point& p, const Point& q) const override;
  double inner(const Point& p, const Tangent& u, const Tangent& v) const override;
  Tangent transport(const Point& p, const Point& q, const Tangent& v) const override;
  std::vector<Tangent> orthonormal_frame(const Point& p) const override;
  Point project_ball(const Point& center, double radius, const Point& p) const override;
  Tangent gaussian_tangent(const Point& p, double scale, Rng& rng) const override;
  double curvature_bound() const override { return 0.0; }
  void validate_point(const Point& p) const override;
  void validate_tangent(const Tangent& v) const override;
};

}  // namespace riemsa
