#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>

#include "riemsa/manifold.hpp"

namespace riemsa {

/// Huberized distance V1(theta) = delta^2 sqrt((rho/delta)^2 + 1) - delta^2.
struct HuberParams {
  double delta = 1.0;
  Point target;
};

/// Cutoff Lyapunov function V2 = chi rho^2 + (1 - chi) D_H^2.
struct CutoffParams {
  double d_h = 1.0;
  Point target;
};

double v1(const Manifold& m, const HuberParams& params, const Point& p);
/// -Log_p(target) / sqrt((rho/delta)^2 + 1).
Tangent grad_v1(const Manifold& m, const HuberParams& params, const Point& p);

/// Quintic smoothstep cutoff: 1 for rho <= d_h, 0 for rho >= d_h + 1.
double cutoff_chi(double rho, double d_h);
double v2(const Manifold& m, const CutoffParams& params, const Point& p);

/// rho^2 / (1 + rho^2).
double d_theta_sq(const Manifold& m, const Point& p, const Point& q);
inline double d_sq_from_rho_sq(double rho_sq) { return rho_sq / (1.0 + rho_sq); }
inline double v1_from_rho(double rho, double delta) {
  const double t = rho / delta;
  return delta * delta * (std::sqrt(t * t + 1.0) - 1.0);
}

/// The closed-form bounds that can be evaluated.
enum class BoundKind { thm1a, thm1b, thm1c, thm15, cor9, prop11, prop12, thm13 };

std::string to_string(BoundKind kind);
BoundKind parse_bound_kind(const std::string& name);
/// True for bounds on running averages (n must be >= 1).
bool is_averaged(BoundKind kind);

/// Constants feeding the bound evaluators. Fields are optional; an evaluator
/// throws DomainError naming any constant it needs but does not find.
struct BoundParams {
  std::optional<double> L;             // geodesic Lipschitz constant of grad V
  std::optional<double> C1;            // drift/variance trade-off constants
  std::optional<double> C2;
  std::optional<double> lambda;        // contraction constant
  std::optional<double> sigma0_sq;     // noise second-moment constants
  std::optional<double> sigma1_sq;
  std::optional<double> v_sup_kstar;   // sup of V on K*
  std::optional<double> h_sup_kstar;   // sup of |h| on K*
  std::optional<double> kappa;         // curvature lower bound -kappa^2
  std::optional<double> lambda_f;      // strong convexity of f
  std::optional<double> L_f;           // Lipschitz constant of grad f
  std::optional<double> c_f;           // gradient-growth constants for V1-based rates
  std::optional<double> lambda_tilde_f;
  std::optional<double> c_pi;          // barycenter constants for the rescaled oracle
  std::optional<double> b_pi;
  std::optional<double> v1_theta0;     // V1(theta_0) with delta = 1
  std::optional<double> v0;            // V(theta_0); f(theta_0) - f* for cor9
  std::optional<double> rho0_sq;       // rho^2(theta_0, theta*) (prop12)
  std::optional<double> diam_d;        // max distance from theta_0 to the atoms (prop12)
  std::optional<double> c_univ;        // unspecified universal constant (prop12), default 1

  friend bool operator==(const BoundParams&, const BoundParams&) = default;
};

/// Largest admissible step size for `kind`; +infinity when the statement is
/// unconditional in eta (thm13).
double eta_bar(BoundKind kind, const BoundParams& params);

/// Closed-form right-hand side of the bound at step size eta and horizon n.
/// Rejects eta outside (0, eta_bar] and n < 1 for averaged bounds.
double bound_eval(BoundKind kind, const BoundParams& params, double eta, std::int64_t n);

/// L_pi = (1 + D)(1 + kappa coth(kappa D)), with the kappa -> 0 limit 1/D.
double barycenter_lipschitz(double diam, double kappa);

struct BarycenterConstants {
  double c_pi;
  double b_pi;
};

/// C_pi = 1 + 2 f_pi(theta*), B_pi = (1 + kappa)(f + 1)(f + 2) / sqrt(C_pi).
BarycenterConstants rescaled_oracle_constants(double f_pi_at_star, double kappa);

}  // namespace riemsa
