#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <vector>

#include "riemsa/lyapunov.hpp"
#include "riemsa/manifold.hpp"
#include "riemsa/sa.hpp"

namespace riemsa {

/// Post-burn-in points approximating the stationary law at step size eta.
struct TailSampleSet {
  double eta = 0.0;
  std::vector<Point> points;
  double burn_fraction = 0.5;
};

/// eta^{-1/2} Log_{theta*}(theta) in an orthonormal frame at theta*.
struct RescaledSampleSet {
  double eta = 0.0;
  std::vector<Eigen::VectorXd> coords;
};

/// Linearization A of the mean field at theta* and noise covariance Sigma(theta*),
/// both in an orthonormal frame at theta*.
struct CltInputs {
  Eigen::MatrixXd a_matrix;
  Eigen::MatrixXd sigma_matrix;
};

/// Throws DomainError unless A is stable and Sigma symmetric PSD (1e-10).
void validate_clt_inputs(const CltInputs& in);

struct TailStats {
  double mean_rho_sq = 0.0;
  double var_rho_sq = 0.0;
  double mean_d_sq = 0.0;
  double mean_v1 = 0.0;
  std::int64_t n_tail = 0;
};

/// Statistics of the recorded diagnostics over records with
/// step >= burn_fraction * n_steps. Unbiased variance; needs >= 2 tail records.
TailStats tail_stats(const Trajectory& traj, double burn_fraction = 0.5);

/// Post-burn-in points of a trajectory recorded with store_points.
TailSampleSet tail_samples(const Trajectory& traj, double burn_fraction = 0.5);
/// Appends the tail of `traj` to `pool` (same eta required).
void pool_tail(TailSampleSet& pool, const Trajectory& traj, double burn_fraction = 0.5);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_sq = 0.0;
  /// Standard error of the slope (0 when the fit is exact or n == 2).
  double slope_stderr = 0.0;
};

/// Ordinary least squares stat ~ intercept + slope * eta.
LinearFit eta_sweep_fit(const std::vector<std::pair<double, double>>& points);

RescaledSampleSet rescale_samples(const Manifold& m, const TailSampleSet& tail, const Point& target);
RescaledSampleSet rescale_samples(const Manifold& m, const TailSampleSet& tail, const Point& target,
                                  const std::vector<Tangent>& frame);

/// Sample covariance (n - 1 divisor) of the rescaled coordinates.
Eigen::MatrixXd empirical_cov(const RescaledSampleSet& samples);

/// Solves A V + V A^T + Sigma = 0 through the Kronecker-sum linear system.
Eigen::MatrixXd lyapunov_solve(const CltInputs& in);

/// Symmetric operator (spectral) norm via sym_eig.
double sym_operator_norm(const Eigen::MatrixXd& m);

using MeanFieldFn = std::function<Tangent(const Point&)>;
using NoiseSampler = std::function<Tangent(Rng&)>;

/// Jacobian of h at target in normal coordinates, by central differences of
/// the frame coordinates of transport(Exp_target(+-fd e_i) -> target, h(.)).
Eigen::MatrixXd estimate_a_matrix(const Manifold& m, const MeanFieldFn& h, const Point& target, double fd_step);

/// Second moment E[e (x) e] of the frame coordinates of noise draws at target.
/// `centered` subtracts the sample mean instead (diagnostic variant).
Eigen::MatrixXd estimate_sigma(const Manifold& m, const Point& target, const NoiseSampler& noise, Rng& rng,
                               std::int64_t n_samples, bool centered = false);
/// Exact second moment of weighted tangent vectors at target.
Eigen::MatrixXd sigma_from_weighted(const Manifold& m, const Point& target, const std::vector<Tangent>& values,
                                    const std::vector<double>& weights);

struct CltReport {
  Eigen::MatrixXd empirical_cov;
  Eigen::MatrixXd predicted_v;
  double rel_error_operator_norm = 0.0;
  std::int64_t n_samples = 0;
};

/// Compares the covariance of the rescaled tail with the Lyapunov prediction.
CltReport clt_check(const Manifold& m, const TailSampleSet& tail, const Point& target, const CltInputs& in);

using ScalarFn = std::function<double(const Point&)>;

struct BiasReport {
  double lhs = 0.0;  // tail average of |grad f|^2
  double rhs = 0.0;  // (eta/2) [Hess f : Sigma](theta*)
  double rel_error = 0.0;
  double hessian = 0.0;
  double sigma = 0.0;
};

/// First-order bias identity for SGD on a compact one-dimensional manifold.
/// Gradients and the Hessian of f use central differences with fd_step.
BiasReport bias_check_thm6(const Manifold& m, const TailSampleSet& tail, const ScalarFn& f,
                           const NoiseSampler& noise, const Point& target, double fd_step, Rng& rng,
                           std::int64_t n_sigma_samples = 100000);

struct DominationReport {
  std::vector<std::int64_t> checkpoints;
  std::vector<double> mc_mean;
  std::vector<double> std_err;
  std::vector<double> bound;
  /// bound - (mean - 3 std_err); negative entries are violations.
  std::vector<double> margins;
  std::vector<std::int64_t> violations;
};

/// values[r][k] is V(theta_{checkpoints[k]}) (or its running average for
/// averaged bounds) on replicate r.
DominationReport bound_dominates(const std::vector<std::vector<double>>& values,
                                 const std::vector<std::int64_t>& checkpoints, BoundKind kind,
                                 const BoundParams& params, double eta, std::size_t min_replicates = 30);

/// Mean and standard error of a sample (n - 1 divisor).
std::pair<double, double> mean_and_stderr(const std::vector<double>& xs);

}  // namespace riemsa
