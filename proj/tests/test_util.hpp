#pragma once

#include <Eigen/Dense>

#include <vector>

#include "riemsa/manifold.hpp"
#include "riemsa/spd.hpp"

namespace testutil {

inline riemsa::Point point(const riemsa::ManifoldKind& kind, std::vector<double> coords) {
  return riemsa::Point{kind, Eigen::Map<Eigen::VectorXd>(coords.data(), static_cast<Eigen::Index>(coords.size()))};
}

inline riemsa::Tangent tangent(const riemsa::Point& base, std::vector<double> coords) {
  return riemsa::Tangent{base, Eigen::Map<Eigen::VectorXd>(coords.data(), static_cast<Eigen::Index>(coords.size()))};
}

inline riemsa::Point spd_point(const Eigen::MatrixXd& m) {
  return riemsa::Point{riemsa::ManifoldKind::spd(static_cast<int>(m.rows())), riemsa::as_coords(m)};
}

inline riemsa::Tangent spd_tangent(const riemsa::Point& base, const Eigen::MatrixXd& m) {
  return riemsa::Tangent{base, riemsa::as_coords(m)};
}

/// Random point at geodesic distance up to `radius` from the origin.
inline riemsa::Point random_point(const riemsa::Manifold& m, riemsa::Rng& rng, double radius = 2.0) {
  riemsa::Tangent v = m.gaussian_tangent(m.origin(), 1.0, rng);
  const double n = m.norm(m.origin(), v);
  return m.exp(m.origin(), (radius * rng.uniform() / n) * v);
}

inline std::vector<riemsa::ManifoldKind> all_kinds() {
  return {riemsa::ManifoldKind::euclidean(3), riemsa::ManifoldKind::spd(3), riemsa::ManifoldKind::hyperboloid(2),
          riemsa::ManifoldKind::circle()};
}

}  // namespace testutil
