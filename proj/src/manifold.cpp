#include "riemsa/manifold.hpp"

#include <cmath>

#include "riemsa/constcurv.hpp"
#include "riemsa/spd.hpp"

namespace riemsa {

int ManifoldKind::intrinsic_dim() const {
  switch (tag) {
    case Tag::euclidean:
    case Tag::hyperboloid:
      return dim;
    case Tag::spd:
      return dim * (dim + 1) / 2;
    case Tag::circle:
      return 1;
  }
  return 0;
}

int ManifoldKind::ambient_size() const {
  switch (tag) {
    case Tag::euclidean:
      return dim;
    case Tag::spd:
      return dim * dim;
    case Tag::hyperboloid:
      return dim + 1;
    case Tag::circle:
      return 1;
  }
  return 0;
}

std::string to_string(ManifoldKind::Tag tag) {
  switch (tag) {
    case ManifoldKind::Tag::euclidean:
      return "euclidean";
    case ManifoldKind::Tag::spd:
      return "spd";
    case ManifoldKind::Tag::hyperboloid:
      return "hyperboloid";
    case ManifoldKind::Tag::circle:
      return "circle";
  }
  return "unknown";
}

ManifoldKind::Tag parse_manifold_tag(const std::string& name) {
  if (name == "euclidean") return ManifoldKind::Tag::euclidean;
  if (name == "spd") return ManifoldKind::Tag::spd;
  if (name == "hyperboloid") return ManifoldKind::Tag::hyperboloid;
  if (name == "circle") return ManifoldKind::Tag::circle;
  throw GeometryError("unknown manifold kind '" + name + "'");
}

std::string ManifoldKind::name() const {
  if (tag == Tag::circle) return "circle";
  return to_string(tag) + "(" + std::to_string(dim) + ")";
}

Tangent& Tangent::operator+=(const Tangent& other) {
  if (!(base == other.base)) throw GeometryError("tangent addition with different base points");
  coords += other.coords;
  return *this;
}

Tangent& Tangent::operator-=(const Tangent& other) {
  if (!(base == other.base)) throw GeometryError("tangent subtraction with different base points");
  coords -= other.coords;
  return *this;
}

void Manifold::check_point_shape(const Point& p, const char* what) const {
  if (!(p.kind == kind_)) {
    throw GeometryError(std::string(what) + ": point belongs to " + p.kind.name() + ", expected " +
                        kind_.name());
  }
  if (p.coords.size() != ambient_size()) {
    throw GeometryError(std::string(what) + ": point has " + std::to_string(p.coords.size()) +
                        " coordinates, expected " + std::to_string(ambient_size()));
  }
}

void Manifold::check_base(const Point& p, const Tangent& v, const char* what) const {
  check_point_shape(p, what);
  if (v.coords.size() != ambient_size()) {
    throw GeometryError(std::string(what) + ": tangent has wrong coordinate count");
  }
  if (!(v.base == p)) throw GeometryError(std::string(what) + ": tangent is not based at the point");
}

double Manifold::norm(const Point& p, const Tangent& v) const {
  return std::sqrt(std::max(0.0, inner(p, v, v)));
}

Tangent Manifold::zero(const Point& p) const {
  check_point_shape(p, "zero");
  return Tangent{p, Eigen::VectorXd::Zero(ambient_size())};
}

Point Manifold::make_point(const Eigen::VectorXd& coords) const {
  Point p{kind_, coords};
  validate_point(p);
  return p;
}

Tangent Manifold::make_tangent(const Point& p, const Eigen::VectorXd& coords) const {
  Tangent v{p, coords};
  validate_tangent(v);
  return v;
}

Eigen::VectorXd Manifold::frame_coords(const Point& p, const Tangent& v) const {
  return frame_coords(p, v, orthonormal_frame(p));
}

Eigen::VectorXd Manifold::frame_coords(const Point& p, const Tangent& v,
                                       const std::vector<Tangent>& frame) const {
  Eigen::VectorXd c(static_cast<Eigen::Index>(frame.size()));
  for (std::size_t i = 0; i < frame.size(); ++i) c[static_cast<Eigen::Index>(i)] = inner(p, frame[i], v);
  return c;
}

Tangent Manifold::from_frame_coords(const Point& p, const Eigen::VectorXd& c,
                                    const std::vector<Tangent>& frame) const {
  if (c.size() != static_cast<Eigen::Index>(frame.size())) {
    throw GeometryError("from_frame_coords: coordinate count does not match frame");
  }
  Tangent v = zero(p);
  for (std::size_t i = 0; i < frame.size(); ++i) v.coords += c[static_cast<Eigen::Index>(i)] * frame[i].coords;
  return v;
}

Point Manifold::project_ball(const Point& center, double radius, const Point& p) const {
  if (!kind_.is_hadamard()) throw GeometryError("project_ball requires a Hadamard manifold");
  if (!(radius > 0.0)) throw GeometryError("project_ball: radius must be positive");
  check_point_shape(center, "project_ball");
  check_point_shape(p, "project_ball");
  const double d = dist(center, p);
  if (d <= radius) return p;
  return exp(center, (radius / d) * log(center, p));
}

Tangent Manifold::gaussian_tangent(const Point& p, double scale, Rng& rng) const {
  if (scale < 0.0) throw GeometryError("gaussian_tangent: scale must be nonnegative");
  const auto frame = orthonormal_frame(p);
  Eigen::VectorXd c(static_cast<Eigen::Index>(frame.size()));
  for (Eigen::Index i = 0; i < c.size(); ++i) c[i] = scale * rng.normal();
  return from_frame_coords(p, c, frame);
}

ManifoldPtr make_manifold(const ManifoldKind& kind) {
  if (kind.dim < 1) throw GeometryError("manifold dimension must be >= 1");
  switch (kind.tag) {
    case ManifoldKind::Tag::euclidean:
      return std::make_shared<EuclideanManifold>(kind.dim);
    case ManifoldKind::Tag::spd:
      return std::make_shared<SpdManifold>(kind.dim);
    case ManifoldKind::Tag::hyperboloid:
      return std::make_shared<HyperboloidManifold>(kind.dim);
    case ManifoldKind::Tag::circle:
      if (kind.dim != 1) throw GeometryError("circle takes no dimension parameter");
      return std::make_shared<CircleManifold>();
  }
  throw GeometryError("unsupported manifold kind");
}

// ---------------------------------------------------------------------------
// Euclidean

EuclideanManifold::EuclideanManifold(int d) : Manifold(ManifoldKind::euclidean(d)) {}

Point EuclideanManifold::origin() const { return Point{kind(), Eigen::VectorXd::Zero(ambient_size())}; }

Point EuclideanManifold::exp(const Point& p, const Tangent& v) const {
  check_base(p, v, "exp");
  return Point{kind(), p.coords + v.coords};
}

Tangent EuclideanManifold::log(const Point& p, const Point& q) const {
  check_point_shape(p, "log");
  check_point_shape(q, "log");
  return Tangent{p, q.coords - p.coords};
}

double EuclideanManifold::dist(const Point& p, const Point& q) const {
  check_point_shape(p, "dist");
  check_point_shape(q, "dist");
  return (q.coords - p.coords).norm();
}

double EuclideanManifold::inner(const Point& p, const Tangent& u, const Tangent& v) const {
  check_base(p, u, "inner");
  check_base(p, v, "inner");
  return u.coords.dot(v.coords);
}

Tangent EuclideanManifold::transport(const Point& p, const Point& q, const Tangent& v) const {
  check_base(p, v, "transport");
  check_point_shape(q, "transport");
  return Tangent{q, v.coords};
}

std::vector<Tangent> EuclideanManifold::orthonormal_frame(const Point& p) const {
  check_point_shape(p, "orthonormal_frame");
  std::vector<Tangent> frame;
  frame.reserve(static_cast<std::size_t>(ambient_size()));
  for (int i = 0; i < ambient_size(); ++i) frame.push_back(Tangent{p, Eigen::VectorXd::Unit(ambient_size(), i)});
  return frame;
}

Point EuclideanManifold::project_ball(const Point& center, double radius, const Point& p) const {
  if (!(radius > 0.0)) throw GeometryError("project_ball: radius must be positive");
  check_point_shape(center, "project_ball");
  check_point_shape(p, "project_ball");
  const Eigen::VectorXd diff = p.coords - center.coords;
  const double d = diff.norm();
  if (d <= radius) return p;
  return Point{kind(), center.coords + (radius / d) * diff};
}

Tangent EuclideanManifold::gaussian_tangent(const Point& p, double scale, Rng& rng) const {
  if (scale < 0.0) throw GeometryError("gaussian_tangent: scale must be nonnegative");
  check_point_shape(p, "gaussian_tangent");
  Eigen::VectorXd c(ambient_size());
  for (Eigen::Index i = 0; i < c.size(); ++i) c[i] = scale * rng.normal();
  return Tangent{p, std::move(c)};
}

void EuclideanManifold::validate_point(const Point& p) const {
  check_point_shape(p, "euclidean point");
  if (!p.coords.allFinite()) throw GeometryError("euclidean point has non-finite coordinates");
}

void EuclideanManifold::validate_tangent(const Tangent& v) const {
  validate_point(v.base);
  check_base(v.base, v, "euclidean tangent");
  if (!v.coords.allFinite()) throw GeometryError("euclidean tangent has non-finite coordinates");
}

}  // namespace riemsa
