#include "riemsa/lyapunov.hpp"

#include <cmath>
#include <limits>

namespace riemsa {
namespace {

double need(const std::optional<double>& v, const char* name, BoundKind kind) {
  if (!v) throw DomainError("bound " + to_string(kind) + " requires constant '" + name + "'");
  if (!std::isfinite(*v)) throw DomainError(std::string("constant '") + name + "' must be finite");
  return *v;
}

double need_positive(const std::optional<double>& v, const char* name, BoundKind kind) {
  const double x = need(v, name, kind);
  if (!(x > 0.0)) throw DomainError(std::string("constant '") + name + "' must be positive");
  return x;
}

double or_zero(const std::optional<double>& v) { return v.value_or(0.0); }

}  // namespace

double v1(const Manifold& m, const HuberParams& params, const Point& p) {
  if (!(params.delta > 0.0)) throw DomainError("v1: delta must be positive");
  return v1_from_rho(m.dist(params.target, p), params.delta);
}

Tangent grad_v1(const Manifold& m, const HuberParams& params, const Point& p) {
  if (!(params.delta > 0.0)) throw DomainError("grad_v1: delta must be positive");
  Tangent to_target = m.log(p, params.target);
  const double rho = m.norm(p, to_target);
  const double t = rho / params.delta;
  return (-1.0 / std::sqrt(t * t + 1.0)) * std::move(to_target);
}

double cutoff_chi(double rho, double d_h) {
  const double t = rho - d_h;
  if (t <= 0.0) return 1.0;
  if (t >= 1.0) return 0.0;
  const double s = t * t * t * (t * (6.0 * t - 15.0) + 10.0);
  return 1.0 - s;
}

double v2(const Manifold& m, const CutoffParams& params, const Point& p) {
  if (!m.kind().is_hadamard()) throw DomainError("v2 requires a Hadamard manifold");
  if (!(params.d_h > 0.0)) throw DomainError("v2: d_h must be positive");
  const double rho = m.dist(params.target, p);
  const double chi = cutoff_chi(rho, params.d_h);
  return chi * rho * rho + (1.0 - chi) * params.d_h * params.d_h;
}

double d_theta_sq(const Manifold& m, const Point& p, const Point& q) {
  const double d = m.dist(p, q);
  return d_sq_from_rho_sq(d * d);
}

std::string to_string(BoundKind kind) {
  switch (kind) {
    case BoundKind::thm1a: return "thm1a";
    case BoundKind::thm1b: return "thm1b";
    case BoundKind::thm1c: return "thm1c";
    case BoundKind::thm15: return "thm15";
    case BoundKind::cor9: return "cor9";
    case BoundKind::prop11: return "prop11";
    case BoundKind::prop12: return "prop12";
    case BoundKind::thm13: return "thm13";
  }
  return "unknown";
}

BoundKind parse_bound_kind(const std::string& name) {
  for (BoundKind k : {BoundKind::thm1a, BoundKind::thm1b, BoundKind::thm1c, BoundKind::thm15, BoundKind::cor9,
                      BoundKind::prop11, BoundKind::prop12, BoundKind::thm13}) {
    if (to_string(k) == name) return k;
  }
  throw DomainError("unknown bound kind '" + name + "'");
}

bool is_averaged(BoundKind kind) {
  switch (kind) {
    case BoundKind::thm1a:
    case BoundKind::thm1b:
    case BoundKind::thm15:
    case BoundKind::prop11:
    case BoundKind::thm13:
      return true;
    default:
      return false;
  }
}

double barycenter_lipschitz(double diam, double kappa) {
  if (!(diam > 0.0)) throw DomainError("barycenter_lipschitz: D must be positive");
  if (kappa < 0.0) throw DomainError("barycenter_lipschitz: kappa must be nonnegative");
  const double kcoth = kappa == 0.0 ? 1.0 / diam : kappa / std::tanh(kappa * diam);
  return (1.0 + diam) * (1.0 + kcoth);
}

BarycenterConstants rescaled_oracle_constants(double f_pi_at_star, double kappa) {
  if (f_pi_at_star < 0.0) throw DomainError("f_pi(theta*) must be nonnegative");
  const double c_pi = 1.0 + 2.0 * f_pi_at_star;
  const double b_pi = (1.0 + kappa) * (f_pi_at_star + 1.0) * (f_pi_at_star + 2.0) / std::sqrt(c_pi);
  return {c_pi, b_pi};
}

double eta_bar(BoundKind kind, const BoundParams& p) {
  switch (kind) {
    case BoundKind::thm1a:
    case BoundKind::thm1b:
    case BoundKind::thm1c: {
      const double c2 = need_positive(p.C2, "C2", kind);
      const double l = need_positive(p.L, "L", kind);
      return 1.0 / (2.0 * c2 * l * (1.0 + or_zero(p.sigma1_sq)));
    }
    case BoundKind::thm15: {
      const double lambda = need_positive(p.lambda, "lambda", kind);
      const double l = need_positive(p.L, "L", kind);
      return lambda / (2.0 * (1.0 + or_zero(p.sigma1_sq)) * l);
    }
    case BoundKind::cor9: {
      const double lf = need_positive(p.L_f, "L_f", kind);
      return 1.0 / (2.0 * lf * (1.0 + or_zero(p.sigma1_sq)));
    }
    case BoundKind::prop11: {
      const double cf = need_positive(p.c_f, "c_f", kind);
      const double lt = need_positive(p.lambda_tilde_f, "lambda_tilde_f", kind);
      const double kappa = need(p.kappa, "kappa", kind);
      return 1.0 / ((8.0 * cf / lt) * (1.0 + kappa) * (1.0 + or_zero(p.sigma1_sq)));
    }
    case BoundKind::prop12: {
      const double lpi = barycenter_lipschitz(need_positive(p.diam_d, "diam_d", kind), need(p.kappa, "kappa", kind));
      const double c = p.c_univ.value_or(1.0);
      if (!(c > 0.0)) throw DomainError("constant 'c_univ' must be positive");
      return 1.0 / (c * lpi * lpi);
    }
    case BoundKind::thm13:
      return std::numeric_limits<double>::infinity();
  }
  throw DomainError("unknown bound kind");
}

double bound_eval(BoundKind kind, const BoundParams& p, double eta, std::int64_t n) {
  if (!(eta > 0.0)) throw DomainError("bound_eval: eta must be positive");
  const double bar = eta_bar(kind, p);
  if (eta > bar) {
    throw DomainError("bound_eval: eta = " + std::to_string(eta) + " exceeds eta_bar = " + std::to_string(bar) +
                      " for " + to_string(kind));
  }
  if (n < 0 || (is_averaged(kind) && n < 1)) {
    throw DomainError("bound_eval: invalid horizon n = " + std::to_string(n) + " for " + to_string(kind));
  }
  const auto nd = static_cast<double>(n);

  auto drift_b = [&] {
    const double l = need_positive(p.L, "L", kind);
    return 2.0 * l * (need(p.sigma0_sq, "sigma0_sq", kind) + or_zero(p.C1) * (1.0 + or_zero(p.sigma1_sq)));
  };

  switch (kind) {
    case BoundKind::thm1a:
      return 2.0 * need(p.v0, "v0", kind) / (nd * eta) + eta * drift_b();
    case BoundKind::thm1b: {
      const double a = need_positive(p.lambda, "lambda", kind) / 2.0;
      return need(p.v0, "v0", kind) / (a * nd * eta) + eta * drift_b() / (2.0 * a);
    }
    case BoundKind::thm1c: {
      const double a = need_positive(p.lambda, "lambda", kind) / 2.0;
      return std::pow(1.0 - eta * a, nd) * need(p.v0, "v0", kind) + or_zero(p.v_sup_kstar) +
             eta * drift_b() / (2.0 * a);
    }
    case BoundKind::thm15: {
      const double a = need_positive(p.lambda, "lambda", kind) / 2.0;
      const double l = need_positive(p.L, "L", kind);
      const double b_tilde =
          l * ((1.0 + or_zero(p.sigma1_sq)) * or_zero(p.h_sup_kstar) + need(p.sigma0_sq, "sigma0_sq", kind));
      return need(p.v0, "v0", kind) / (a * eta * nd) + eta * b_tilde / a;
    }
    case BoundKind::cor9: {
      const double lf = need_positive(p.lambda_f, "lambda_f", kind);
      const double big_lf = need_positive(p.L_f, "L_f", kind);
      return std::pow(1.0 - eta * lf / 2.0, nd) * need(p.v0, "v0", kind) +
             2.0 * eta * big_lf * need(p.sigma0_sq, "sigma0_sq", kind) / lf;
    }
    case BoundKind::prop11: {
      const double lt = need_positive(p.lambda_tilde_f, "lambda_tilde_f", kind);
      const double kappa = need(p.kappa, "kappa", kind);
      return 4.0 * need(p.v1_theta0, "v1_theta0", kind) / (nd * eta * lt) +
             4.0 * eta * (1.0 + kappa) * need(p.sigma0_sq, "sigma0_sq", kind) / lt;
    }
    case BoundKind::prop12: {
      const double diam = need_positive(p.diam_d, "diam_d", kind);
      const double lpi = barycenter_lipschitz(diam, need(p.kappa, "kappa", kind));
      return std::pow(1.0 - eta / 4.0, nd) * need(p.rho0_sq, "rho0_sq", kind) +
             p.c_univ.value_or(1.0) * eta * lpi * diam * diam;
    }
    case BoundKind::thm13: {
      const double c_pi = need_positive(p.c_pi, "c_pi", kind);
      return 4.0 * need(p.v1_theta0, "v1_theta0", kind) * std::sqrt(c_pi) / (eta * nd) +
             4.0 * eta * need(p.b_pi, "b_pi", kind);
    }
  }
  throw DomainError("unknown bound kind");
}

}  // namespace riemsa
