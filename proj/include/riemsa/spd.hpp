#pragma once

#include <Eigen/Dense>

#include "riemsa/manifold.hpp"

namespace riemsa {

/// Eigendecomposition A = Q diag(values) Q^T with ascending eigenvalues.
struct SymEig {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;  // orthonormal columns
};

/// Cyclic Jacobi eigensolver for small symmetric matrices. The input is
/// symmetrized first; throws NumericalError on non-finite entries.
SymEig sym_eig(const Eigen::MatrixXd& a);

enum class SpdFunction { exp, log, sqrt, inv_sqrt };

/// Spectral eigenvalue floor below which log/sqrt/inv_sqrt are rejected.
inline constexpr double kEigenvalueFloor = 1e-12;

/// Q f(Lambda) Q^T. For log/sqrt/inv_sqrt the smallest eigenvalue must exceed
/// kEigenvalueFloor (NumericalError otherwise).
Eigen::MatrixXd spd_fun(const Eigen::MatrixXd& a, SpdFunction f);
Eigen::MatrixXd spd_fun(const SymEig& eig, SpdFunction f);

/// G G^T with G a d x dof matrix of i.i.d. standard normals.
Eigen::MatrixXd wishart(int d, int dof, Rng& rng);

/// Row-major flattening helpers for spd coordinates.
Eigen::MatrixXd as_matrix(const Eigen::VectorXd& coords, int d);
Eigen::VectorXd as_coords(const Eigen::MatrixXd& m);

/// Symmetric positive-definite matrices with the affine-invariant metric
/// <U, V>_P = tr(P^-1 U P^-1 V).
class SpdManifold final : public Manifold {
 public:
  explicit SpdManifold(int d);

  int matrix_dim() const { return kind().dim; }

  Point origin() const override;
  Point exp(const Point& p, const Tangent& v) const override;
  Tangent log(const Point& p, const Point& q) const override;
  double dist(const Point& p, const Point& q) const override;
  double inner(const Point& p, const Tangent& u, const Tangent& v) const override;
  Tangent transport(const Point& p, const Point& q, const Tangent& v) const override;
  std::vector<Tangent> orthonormal_frame(const Point& p) const override;
  Tangent gaussian_tangent(const Point& p, double scale, Rng& rng) const override;
  /// Conservative constant 1/sqrt(2).
  double curvature_bound() const override;
  void validate_point(const Point& p) const override;
  void validate_tangent(const Tangent& v) const override;

  Point from_matrix(const Eigen::MatrixXd& m) const;

 private:
  struct Roots {
    Eigen::MatrixXd sqrt;
    Eigen::MatrixXd inv_sqrt;
  };
  Roots roots(const Point& p) const;
};

}  // namespace riemsa
