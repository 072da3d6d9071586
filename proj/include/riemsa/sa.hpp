#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <variant>
#include <vector>

#include "riemsa/manifold.hpp"

namespace riemsa {

/// Finitely supported law sum_i w_i delta_{atoms_i}.
struct DiscreteMeasure {
  std::vector<Point> atoms;
  std::vector<double> weights;

  /// Uniform weights over `atoms`.
  static DiscreteMeasure uniform(std::vector<Point> atoms);
};

/// scale * W(dof, I_d) on the SPD manifold of d x d matrices.
struct WishartLaw {
  int d = 1;
  int dof = 1;
  double scale = 1.0;
};

using Law = std::variant<DiscreteMeasure, WishartLaw>;

/// Throws DomainError unless weights are nonnegative and sum to 1 within 1e-12.
void validate_measure(const DiscreteMeasure& mu);
Point sample_law(const Manifold& m, const Law& law, Rng& rng);

/// H(X) = rate * Log_p(target) + N(0, noise_scale^2) in T_p.
struct SgdQuadratic {
  Point target;
  double rate = 1.0;
  double noise_scale = 0.0;
};

/// H(X) = Log_p(X), X drawn from the atoms by weight.
struct KarcherDiscrete {
  DiscreteMeasure measure;
};

/// H(X) = (1/2) Log_p(X1) / sqrt(rho^2(p, X2)/2 + 1) with X1, X2 independent
/// draws from the law; batch_size > 1 averages independent H draws.
struct KarcherRescaled {
  Law law;
  int batch_size = 1;
};

/// H(X) = rate * Log_p(target) + N(0, noise_scale^2) in T_p.
struct LinearPull {
  Point target;
  double rate = 1.0;
  double noise_scale = 0.0;
};

/// Circle only: H(X) = rate * sin(Log_p(target)) + N(0, noise_scale^2), the
/// noisy negative gradient of rate * (1 - cos(theta - target)).
struct CosinePull {
  Point target;
  double rate = 1.0;
  double noise_scale = 0.0;
};

/// Stochastic update rule H_theta(X) = h(theta) + e_theta(X). An optional
/// isotropic Gaussian of scale `regularization_scale` is added to every draw.
struct Oracle {
  std::variant<SgdQuadratic, KarcherDiscrete, KarcherRescaled, LinearPull, CosinePull> rule;
  double regularization_scale = 0.0;
};

Tangent oracle_draw(const Manifold& m, const Oracle& oracle, const Point& p, Rng& rng);

/// Exact mean field h(p). Throws DomainError when h has no closed form
/// (rescaled oracle over a continuous law).
Tangent mean_field(const Manifold& m, const Oracle& oracle, const Point& p);

/// e_p(X) = oracle_draw - mean_field.
Tangent oracle_noise(const Manifold& m, const Oracle& oracle, const Point& p, Rng& rng);

/// Target point of the pull/quadratic variants, if the oracle has one.
std::optional<Point> oracle_target(const Oracle& oracle);

struct BallProjection {
  Point center;
  double radius = 1.0;
};

struct SaConfig {
  ManifoldKind manifold;
  Oracle oracle;
  double eta = 0.1;
  std::int64_t n_steps = 0;
  std::optional<BallProjection> projection;
  std::uint64_t seed = 0;
  /// Substream of the seed; replicate r of an experiment uses stream r.
  std::uint64_t stream = 0;
  std::int64_t record_every = 1;
  std::optional<Point> diagnostics_target;
  std::optional<Point> initial_point;
  /// delta of the recorded V1 diagnostic.
  double v1_delta = 1.0;
  bool store_points = true;
};

struct Record {
  std::int64_t step = 0;
  std::optional<Point> point;
  double rho_sq = 0.0;
  double d_sq = 0.0;
  double v1 = 0.0;
};

struct Trajectory {
  SaConfig config;
  bool has_diagnostics = false;
  std::vector<Record> records;
};

/// Throws DomainError on eta <= 0, n_steps < 0, record_every < 1, radius <= 0.
void validate_config(const SaConfig& config);

/// One step: proj_S(Exp_state(eta * H_state(X))).
Point sa_step(const Manifold& m, const SaConfig& config, const Point& state, Rng& rng);

/// n_steps applications of sa_step from the initial point (default: origin),
/// recording step 0 and every record_every-th step.
Trajectory run_chain(const SaConfig& config);

struct KarcherResult {
  Point point;
  int iterations = 0;
  double grad_norm = 0.0;
};

/// Guarded fixed-point iteration theta <- Exp_theta(tau sum_i w_i Log_theta(x_i))
/// with tau = 1 halved until sum_i w_i rho^2/2 decreases. Stops when
/// |sum_i w_i Log_theta(x_i)| <= tol; throws NumericalError after max_iter.
KarcherResult karcher_reference(const Manifold& m, const std::vector<Point>& atoms,
                                const std::vector<double>& weights, double tol = 1e-10,
                                int max_iter = 500);

}  // namespace riemsa
