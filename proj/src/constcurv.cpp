#include "riemsa/constcurv.hpp"

#include <cmath>
#include <numbers>

namespace riemsa {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSmallNorm = 1e-8;
constexpr double kAntipodeTolerance = 1e-12;

}  // namespace

double minkowski_inner(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  if (x.size() != y.size() || x.size() < 1) throw GeometryError("minkowski_inner: length mismatch");
  return -x[0] * y[0] + x.tail(x.size() - 1).dot(y.tail(y.size() - 1));
}

double wrap_angle(double a) {
  double r = std::remainder(a, 2.0 * kPi);
  if (r <= -kPi) r += 2.0 * kPi;
  return r;
}

// ---------------------------------------------------------------------------
// Hyperboloid

HyperboloidManifold::HyperboloidManifold(int d) : Manifold(ManifoldKind::hyperboloid(d)) {}

Eigen::VectorXd HyperboloidManifold::renormalize(const Eigen::VectorXd& x) {
  const double q = -minkowski_inner(x, x);
  if (!(q > 0.0)) throw GeometryError("hyperboloid: point is not timelike");
  // Rescale, then rebuild the time coordinate from the spatial part: far from
  // the origin -<x, x> cancels to ~eps * x0^2, so rescaling alone leaves the
  // constraint violated at that level.
  Eigen::VectorXd y = (x[0] < 0.0 ? -1.0 : 1.0) / std::sqrt(q) * x;
  const double spatial_sq = y.tail(y.size() - 1).squaredNorm();
  y[0] = std::sqrt(1.0 + spatial_sq);
  return y;
}

Eigen::VectorXd HyperboloidManifold::project_tangent(const Eigen::VectorXd& p, const Eigen::VectorXd& v) {
  return v + minkowski_inner(p, v) * p;
}

Point HyperboloidManifold::origin() const {
  return Point{kind(), Eigen::VectorXd::Unit(ambient_size(), 0)};
}

Point HyperboloidManifold::exp(const Point& p, const Tangent& v) const {
  check_base(p, v, "exp");
  // A residual normal component of v shifts the geodesic parameter by about
  // sinh^2(|v|) times its size, so v is re-projected first.
  const Eigen::VectorXd t = project_tangent(p.coords, v.coords);
  const double n = std::sqrt(std::max(0.0, minkowski_inner(t, t)));
  Eigen::VectorXd x;
  if (n < kSmallNorm) {
    const double n2 = n * n;
    x = (1.0 + n2 / 2.0) * p.coords + (1.0 + n2 / 6.0) * t;
  } else {
    x = std::cosh(n) * p.coords + (std::sinh(n) / n) * t;
  }
  return Point{kind(), renormalize(x)};
}

Tangent HyperboloidManifold::log(const Point& p, const Point& q) const {
  check_point_shape(p, "log");
  check_point_shape(q, "log");
  const Eigen::VectorXd w = q.coords - p.coords;
  const double w2 = std::max(0.0, minkowski_inner(w, w));
  // |q - p|_M = 2 sinh(d/2); q + <p,q> p = w - (|w|^2/2) p.
  const double d = 2.0 * std::asinh(std::sqrt(w2) / 2.0);
  const Eigen::VectorXd u = w - (w2 / 2.0) * p.coords;
  const double ratio = d < kSmallNorm ? 1.0 - d * d / 6.0 : d / std::sinh(d);
  return Tangent{p, project_tangent(p.coords, ratio * u)};
}

double HyperboloidManifold::dist(const Point& p, const Point& q) const {
  check_point_shape(p, "dist");
  check_point_shape(q, "dist");
  const Eigen::VectorXd w = q.coords - p.coords;
  const double w2 = std::max(0.0, minkowski_inner(w, w));
  return 2.0 * std::asinh(std::sqrt(w2) / 2.0);
}

double HyperboloidManifold::inner(const Point& p, const Tangent& u, const Tangent& v) const {
  check_base(p, u, "inner");
  check_base(p, v, "inner");
  return minkowski_inner(u.coords, v.coords);
}

Tangent HyperboloidManifold::transport(const Point& p, const Point& q, const Tangent& v) const {
  check_base(p, v, "transport");
  check_point_shape(q, "transport");
  const double coef = minkowski_inner(q.coords, v.coords) / (1.0 - minkowski_inner(p.coords, q.coords));
  return Tangent{q, project_tangent(q.coords, v.coords + coef * (p.coords + q.coords))};
}

std::vector<Tangent> HyperboloidManifold::orthonormal_frame(const Point& p) const {
  check_point_shape(p, "orthonormal_frame");
  const int n = ambient_size();
  std::vector<Tangent> frame;
  frame.reserve(static_cast<std::size_t>(n - 1));
  // Gram-Schmidt of the spatial ambient basis projected to T_p; these
  // projections are always linearly independent.
  for (int k = 1; k < n; ++k) {
    Eigen::VectorXd u = project_tangent(p.coords, Eigen::VectorXd::Unit(n, k));
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& e : frame) u -= minkowski_inner(e.coords, u) * e.coords;
    }
    u /= std::sqrt(minkowski_inner(u, u));
    frame.push_back(Tangent{p, std::move(u)});
  }
  return frame;
}

void HyperboloidManifold::validate_point(const Point& p) const {
  check_point_shape(p, "hyperboloid point");
  if (!p.coords.allFinite()) throw GeometryError("hyperboloid point has non-finite coordinates");
  if (std::abs(minkowski_inner(p.coords, p.coords) + 1.0) > 1e-10) {
    throw GeometryError("hyperboloid point violates <x,x>_M = -1");
  }
  if (!(p.coords[0] > 0.0)) throw GeometryError("hyperboloid point must have x0 > 0");
}

void HyperboloidManifold::validate_tangent(const Tangent& v) const {
  validate_point(v.base);
  check_base(v.base, v, "hyperboloid tangent");
  if (!v.coords.allFinite()) throw GeometryError("hyperboloid tangent has non-finite coordinates");
  if (std::abs(minkowski_inner(v.base.coords, v.coords)) > 1e-10) {
    throw GeometryError("hyperboloid tangent is not Minkowski-orthogonal to its base");
  }
}

// ---------------------------------------------------------------------------
// Circle

CircleManifold::CircleManifold() : Manifold(ManifoldKind::circle()) {}

Point CircleManifold::at(double angle) const { return Point{kind(), Eigen::VectorXd::Constant(1, wrap_angle(angle))}; }

Point CircleManifold::origin() const { return at(0.0); }

Point CircleManifold::exp(const Point& p, const Tangent& v) const {
  check_base(p, v, "exp");
  return at(p.coords[0] + v.coords[0]);
}

Tangent CircleManifold::log(const Point& p, const Point& q) const {
  check_point_shape(p, "log");
  check_point_shape(q, "log");
  const double delta = wrap_angle(q.coords[0] - p.coords[0]);
  if (kPi - std::abs(delta) <= kAntipodeTolerance) throw GeometryError("circle log: antipodal points (cut locus)");
  return Tangent{p, Eigen::VectorXd::Constant(1, delta)};
}

double CircleManifold::dist(const Point& p, const Point& q) const {
  check_point_shape(p, "dist");
  check_point_shape(q, "dist");
  const double delta = wrap_angle(q.coords[0] - p.coords[0]);
  if (kPi - std::abs(delta) <= kAntipodeTolerance) throw GeometryError("circle dist: antipodal points (cut locus)");
  return std::abs(delta);
}

double CircleManifold::inner(const Point& p, const Tangent& u, const Tangent& v) const {
  check_base(p, u, "inner");
  check_base(p, v, "inner");
  return u.coords[0] * v.coords[0];
}

Tangent CircleManifold::transport(const Point& p, const Point& q, const Tangent& v) const {
  check_base(p, v, "transport");
  check_point_shape(q, "transport");
  const double delta = wrap_angle(q.coords[0] - p.coords[0]);
  if (kPi - std::abs(delta) <= kAntipodeTolerance) throw GeometryError("circle transport: antipodal points");
  return Tangent{q, v.coords};
}

std::vector<Tangent> CircleManifold::orthonormal_frame(const Point& p) const {
  check_point_shape(p, "orthonormal_frame");
  return {Tangent{p, Eigen::VectorXd::Ones(1)}};
}

Point CircleManifold::project_ball(const Point&, double, const Point&) const {
  throw GeometryError("project_ball is not supported on the circle");
}

void CircleManifold::validate_point(const Point& p) const {
  check_point_shape(p, "circle point");
  const double a = p.coords[0];
  if (!std::isfinite(a) || !(a > -kPi) || a > kPi) throw GeometryError("circle angle must lie in (-pi, pi]");
}

void CircleManifold::validate_tangent(const Tangent& v) const {
  validate_point(v.base);
  check_base(v.base, v, "circle tangent");
  if (!std::isfinite(v.coords[0])) throw GeometryError("circle tangent is not finite");
}

}  // namespace riemsa
