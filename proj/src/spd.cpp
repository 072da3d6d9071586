#include "riemsa/spd.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace riemsa {
namespace {

constexpr double kJacobiTolerance = 1e-13;
constexpr int kJacobiMaxSweeps = 100;

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& m) { return 0.5 * (m + m.transpose()); }

double scalar_fun(double x, SpdFunction f) {
  switch (f) {
    case SpdFunction::exp:
      return std::exp(x);
    case SpdFunction::log:
      return std::log(x);
    case SpdFunction::sqrt:
      return std::sqrt(x);
    case SpdFunction::inv_sqrt:
      return 1.0 / std::sqrt(x);
  }
  return x;
}

}  // namespace

SymEig sym_eig(const Eigen::MatrixXd& input) {
  if (input.rows() != input.cols()) throw NumericalError("sym_eig: matrix is not square");
  if (!input.allFinite()) throw NumericalError("sym_eig: non-finite entries");
  const Eigen::Index n = input.rows();
  Eigen::MatrixXd a = symmetrize(input);
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
  const double scale = a.norm();

  auto off_norm = [&] {
    double s = 0.0;
    for (Eigen::Index q = 1; q < n; ++q)
      for (Eigen::Index p = 0; p < q; ++p) s += 2.0 * a(p, q) * a(p, q);
    return std::sqrt(s);
  };

  int sweep = 0;
  for (; sweep < kJacobiMaxSweeps; ++sweep) {
    if (off_norm() <= kJacobiTolerance * scale) break;
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  if (sweep == kJacobiMaxSweeps && off_norm() > kJacobiTolerance * scale) {
    throw NumericalError("sym_eig: Jacobi iteration did not converge");
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) { return a(i, i) < a(j, j); });

  SymEig out{Eigen::VectorXd(n), Eigen::MatrixXd(n, n)};
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index src = order[static_cast<std::size_t>(k)];
    out.values[k] = a(src, src);
    out.vectors.col(k) = v.col(src);
  }
  return out;
}

Eigen::MatrixXd spd_fun(const SymEig& eig, SpdFunction f) {
  if (f != SpdFunction::exp && !(eig.values.minCoeff() > kEigenvalueFloor)) {
    char value[32];
    std::snprintf(value, sizeof value, "%.3g", eig.values.minCoeff());
    throw NumericalError(std::string("spd_fun: smallest eigenvalue ") + value +
                         " is below the positive-definiteness floor");
  }
  Eigen::VectorXd fv(eig.values.size());
  for (Eigen::Index i = 0; i < fv.size(); ++i) fv[i] = scalar_fun(eig.values[i], f);
  return symmetrize(eig.vectors * fv.asDiagonal() * eig.vectors.transpose());
}

Eigen::MatrixXd spd_fun(const Eigen::MatrixXd& a, SpdFunction f) { return spd_fun(sym_eig(a), f); }

Eigen::MatrixXd wishart(int d, int dof, Rng& rng) {
  if (d < 1) throw DomainError("wishart: dimension must be >= 1");
  if (dof < d) throw DomainError("wishart: degrees of freedom must be >= dimension");
  Eigen::MatrixXd g(d, dof);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < dof; ++j) g(i, j) = rng.normal();
  return symmetrize(g * g.transpose());
}

Eigen::MatrixXd as_matrix(const Eigen::VectorXd& coords, int d) {
  Eigen::MatrixXd m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = coords[i * d + j];
  return m;
}

Eigen::VectorXd as_coords(const Eigen::MatrixXd& m) {
  const auto d = m.rows();
  Eigen::VectorXd c(d * d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) c[i * d + j] = m(i, j);
  return c;
}

// ---------------------------------------------------------------------------

SpdManifold::SpdManifold(int d) : Manifold(ManifoldKind::spd(d)) {}

Point SpdManifold::origin() const { return from_matrix(Eigen::MatrixXd::Identity(matrix_dim(), matrix_dim())); }

Point SpdManifold::from_matrix(const Eigen::MatrixXd& m) const {
  if (m.rows() != matrix_dim() || m.cols() != matrix_dim()) throw GeometryError("spd: matrix has wrong shape");
  return Point{kind(), as_coords(symmetrize(m))};
}

SpdManifold::Roots SpdManifold::roots(const Point& p) const {
  const SymEig eig = sym_eig(as_matrix(p.coords, matrix_dim()));
  return Roots{spd_fun(eig, SpdFunction::sqrt), spd_fun(eig, SpdFunction::inv_sqrt)};
}

Point SpdManifold::exp(const Point& p, const Tangent& v) const {
  check_base(p, v, "exp");
  const int d = matrix_dim();
  const Roots r = roots(p);
  const Eigen::MatrixXd inner_arg = r.inv_sqrt * as_matrix(v.coords, d) * r.inv_sqrt;
  return from_matrix(r.sqrt * spd_fun(inner_arg, SpdFunction::exp) * r.sqrt);
}

Tangent SpdManifold::log(const Point& p, const Point& q) const {
  check_point_shape(p, "log");
  check_point_shape(q, "log");
  if (p.coords == q.coords) return zero(p);
  const int d = matrix_dim();
  const Roots r = roots(p);
  const Eigen::MatrixXd inner_arg = r.inv_sqrt * as_matrix(q.coords, d) * r.inv_sqrt;
  return Tangent{p, as_coords(symmetrize(r.sqrt * spd_fun(inner_arg, SpdFunction::log) * r.sqrt))};
}

double SpdManifold::dist(const Point& p, const Point& q) const {
  check_point_shape(p, "dist");
  check_point_shape(q, "dist");
  if (p.coords == q.coords) return 0.0;
  const int d = matrix_dim();
  const Roots r = roots(p);
  const SymEig eig = sym_eig(r.inv_sqrt * as_matrix(q.coords, d) * r.inv_sqrt);
  if (!(eig.values.minCoeff() > kEigenvalueFloor)) throw NumericalError("dist: argument lost positive-definiteness");
  return eig.values.array().log().matrix().norm();
}

double SpdManifold::inner(const Point& p, const Tangent& u, const Tangent& v) const {
  check_base(p, u, "inner");
  check_base(p, v, "inner");
  const int d = matrix_dim();
  // Whitening with the eigen-based inverse root keeps the frame built from
  // the same decomposition orthonormal to roundoff even for ill-conditioned P.
  const Eigen::MatrixXd w = roots(p).inv_sqrt;
  const Eigen::MatrixXd a = w * as_matrix(u.coords, d) * w;
  const Eigen::MatrixXd b = w * as_matrix(v.coords, d) * w;
  return (a.array() * b.array()).sum();
}

Tangent SpdManifold::transport(const Point& p, const Point& q, const Tangent& v) const {
  check_base(p, v, "transport");
  check_point_shape(q, "transport");
  if (p == q) return v;
  const int d = matrix_dim();
  const Roots r = roots(p);
  const Eigen::MatrixXd mid = spd_fun(r.inv_sqrt * as_matrix(q.coords, d) * r.inv_sqrt, SpdFunction::sqrt);
  const Eigen::MatrixXd e = r.sqrt * mid * r.inv_sqrt;
  return Tangent{q, as_coords(symmetrize(e * as_matrix(v.coords, d) * e.transpose()))};
}

std::vector<Tangent> SpdManifold::orthonormal_frame(const Point& p) const {
  check_point_shape(p, "orthonormal_frame");
  const int d = matrix_dim();
  const Eigen::MatrixXd s = roots(p).sqrt;
  std::vector<Tangent> frame;
  frame.reserve(static_cast<std::size_t>(intrinsic_dim()));
  for (int i = 0; i < d; ++i) {
    Eigen::MatrixXd e = Eigen::MatrixXd::Zero(d, d);
    e(i, i) = 1.0;
    frame.push_back(Tangent{p, as_coords(symmetrize(s * e * s))});
  }
  const double h = 1.0 / std::sqrt(2.0);
  for (int i = 0; i < d; ++i) {
    for (int j = i + 1; j < d; ++j) {
      Eigen::MatrixXd e = Eigen::MatrixXd::Zero(d, d);
      e(i, j) = h;
      e(j, i) = h;
      frame.push_back(Tangent{p, as_coords(symmetrize(s * e * s))});
    }
  }
  return frame;
}

Tangent SpdManifold::gaussian_tangent(const Point& p, double scale, Rng& rng) const {
  if (scale < 0.0) throw GeometryError("gaussian_tangent: scale must be nonnegative");
  check_point_shape(p, "gaussian_tangent");
  const int d = matrix_dim();
  // Same coefficient order as orthonormal_frame: diagonal first, then i < j.
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(d, d);
  for (int i = 0; i < d; ++i) g(i, i) = scale * rng.normal();
  const double h = scale / std::sqrt(2.0);
  for (int i = 0; i < d; ++i) {
    for (int j = i + 1; j < d; ++j) {
      g(i, j) = h * rng.normal();
      g(j, i) = g(i, j);
    }
  }
  if (scale == 0.0) return zero(p);
  const Eigen::MatrixXd s = roots(p).sqrt;
  return Tangent{p, as_coords(symmetrize(s * g * s))};
}

double SpdManifold::curvature_bound() const { return 1.0 / std::sqrt(2.0); }

void SpdManifold::validate_point(const Point& p) const {
  check_point_shape(p, "spd point");
  if (!p.coords.allFinite()) throw GeometryError("spd point has non-finite entries");
  const Eigen::MatrixXd m = as_matrix(p.coords, matrix_dim());
  const double tol = 1e-12 * std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > tol) throw GeometryError("spd point is not symmetric");
  if (!(sym_eig(m).values.minCoeff() > 0.0)) throw GeometryError("spd point is not positive-definite");
}

void SpdManifold::validate_tangent(const Tangent& v) const {
  validate_point(v.base);
  check_base(v.base, v, "spd tangent");
  if (!v.coords.allFinite()) throw GeometryError("spd tangent has non-finite entries");
  const Eigen::MatrixXd m = as_matrix(v.coords, matrix_dim());
  const double tol = 1e-12 * std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > tol) throw GeometryError("spd tangent is not symmetric");
}

}  // namespace riemsa
