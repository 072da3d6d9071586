#include "riemsa/stationary.hpp"

#include <cmath>
#include <limits>

#include "riemsa/spd.hpp"

namespace riemsa {

std::pair<double, double> mean_and_stderr(const std::vector<double>& xs) {
  if (xs.empty()) throw DomainError("mean_and_stderr: empty sample");
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  if (xs.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  const double var = ss / static_cast<double>(xs.size() - 1);
  return {mean, std::sqrt(var / static_cast<double>(xs.size()))};
}

void validate_clt_inputs(const CltInputs& in) {
  const auto n = in.a_matrix.rows();
  if (n < 1 || in.a_matrix.cols() != n || in.sigma_matrix.rows() != n || in.sigma_matrix.cols() != n) {
    throw DomainError("clt inputs: A and Sigma must be square of equal size");
  }
  const Eigen::EigenSolver<Eigen::MatrixXd> es(in.a_matrix, false);
  const double margin = 1e-12 * std::max(1.0, in.a_matrix.norm());
  if (!(es.eigenvalues().real().maxCoeff() < -margin)) {
    throw DomainError("clt inputs: A has an eigenvalue with nonnegative real part");
  }
  const double tol = 1e-10 * std::max(1.0, in.sigma_matrix.norm());
  if ((in.sigma_matrix - in.sigma_matrix.transpose()).cwiseAbs().maxCoeff() > tol) {
    throw DomainError("clt inputs: Sigma is not symmetric");
  }
  if (sym_eig(in.sigma_matrix).values.minCoeff() < -tol) throw DomainError("clt inputs: Sigma is not PSD");
}

TailStats tail_stats(const Trajectory& traj, double burn_fraction) {
  if (!(burn_fraction >= 0.0 && burn_fraction < 1.0)) throw DomainError("tail_stats: burn_fraction must be in [0,1)");
  if (!traj.has_diagnostics) throw DomainError("tail_stats: trajectory has no recorded diagnostics");
  const double first = burn_fraction * static_cast<double>(traj.config.n_steps);
  TailStats s;
  double sum_rho = 0.0;
  double sum_d = 0.0;
  double sum_v1 = 0.0;
  for (const auto& r : traj.records) {
    if (static_cast<double>(r.step) < first) continue;
    ++s.n_tail;
    sum_rho += r.rho_sq;
    sum_d += r.d_sq;
    sum_v1 += r.v1;
  }
  if (s.n_tail < 2) throw DomainError("tail_stats: fewer than 2 tail records");
  const auto n = static_cast<double>(s.n_tail);
  s.mean_rho_sq = sum_rho / n;
  s.mean_d_sq = sum_d / n;
  s.mean_v1 = sum_v1 / n;
  double ss = 0.0;
  for (const auto& r : traj.records) {
    if (static_cast<double>(r.step) < first) continue;
    ss += (r.rho_sq - s.mean_rho_sq) * (r.rho_sq - s.mean_rho_sq);
  }
  s.var_rho_sq = ss / (n - 1.0);
  return s;
}

void pool_tail(TailSampleSet& pool, const Trajectory& traj, double burn_fraction) {
  if (!(burn_fraction >= 0.0 && burn_fraction < 1.0)) throw DomainError("tail: burn_fraction must be in [0,1)");
  if (!pool.points.empty() && pool.eta != traj.config.eta) throw DomainError("pool_tail: step sizes differ");
  pool.eta = traj.config.eta;
  pool.burn_fraction = burn_fraction;
  const double first = burn_fraction * static_cast<double>(traj.config.n_steps);
  for (const auto& r : traj.records) {
    if (static_cast<double>(r.step) < first) continue;
    if (!r.point) throw DomainError("tail: trajectory was recorded without points");
    pool.points.push_back(*r.point);
  }
}

TailSampleSet tail_samples(const Trajectory& traj, double burn_fraction) {
  TailSampleSet tail;
  pool_tail(tail, traj, burn_fraction);
  if (tail.points.empty()) throw DomainError("tail: no post-burn-in records");
  return tail;
}

LinearFit eta_sweep_fit(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 2) throw DomainError("eta_sweep_fit: need at least 2 points");
  const auto n = static_cast<double>(points.size());
  double mx = 0.0;
  double my = 0.0;
  for (const auto& [x, y] : points) {
    mx += x;
    my += y;
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (const auto& [x, y] : points) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
    syy += (y - my) * (y - my);
  }
  if (!(sxx > 0.0)) throw DomainError("eta_sweep_fit: all eta values are identical");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (const auto& [x, y] : points) {
    const double e = y - (fit.intercept + fit.slope * x);
    ss_res += e * e;
  }
  fit.r_sq = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
  if (points.size() > 2) fit.slope_stderr = std::sqrt(ss_res / (n - 2.0) / sxx);
  return fit;
}

RescaledSampleSet rescale_samples(const Manifold& m, const TailSampleSet& tail, const Point& target) {
  return rescale_samples(m, tail, target, m.orthonormal_frame(target));
}

RescaledSampleSet rescale_samples(const Manifold& m, const TailSampleSet& tail, const Point& target,
                                  const std::vector<Tangent>& frame) {
  if (!(tail.eta > 0.0)) throw DomainError("rescale_samples: eta must be positive");
  RescaledSampleSet out;
  out.eta = tail.eta;
  out.coords.reserve(tail.points.size());
  const double s = 1.0 / std::sqrt(tail.eta);
  for (const auto& p : tail.points) out.coords.push_back(s * m.frame_coords(target, m.log(target, p), frame));
  return out;
}

Eigen::MatrixXd empirical_cov(const RescaledSampleSet& samples) {
  if (samples.coords.size() < 2) throw DomainError("empirical_cov: need at least 2 samples");
  const auto d = samples.coords.front().size();
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
  for (const auto& c : samples.coords) mean += c;
  mean /= static_cast<double>(samples.coords.size());
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
  for (const auto& c : samples.coords) {
    const Eigen::VectorXd z = c - mean;
    cov.noalias() += z * z.transpose();
  }
  cov /= static_cast<double>(samples.coords.size() - 1);
  return 0.5 * (cov + cov.transpose());
}

Eigen::MatrixXd lyapunov_solve(const CltInputs& in) {
  validate_clt_inputs(in);
  const auto n = in.a_matrix.rows();
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
  // vec(A V + V A^T) = (I (x) A + A (x) I) vec(V), column-major vec.
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n * n, n * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      k.block(i * n, j * n, n, n) += eye(i, j) * in.a_matrix;
      k.block(i * n, j * n, n, n) += in.a_matrix(i, j) * eye;
    }
  }
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(k);
  const double rcond = lu.rcond();
  if (!(rcond > 1e-14)) throw NumericalError("lyapunov_solve: singular Kronecker system");
  const Eigen::VectorXd rhs = -Eigen::Map<const Eigen::VectorXd>(in.sigma_matrix.data(), n * n);
  Eigen::VectorXd sol = lu.solve(rhs);
  const Eigen::MatrixXd v = Eigen::Map<const Eigen::MatrixXd>(sol.data(), n, n);
  return 0.5 * (v + v.transpose());
}

double sym_operator_norm(const Eigen::MatrixXd& m) {
  return sym_eig(m).values.cwiseAbs().maxCoeff();
}

Eigen::MatrixXd estimate_a_matrix(const Manifold& m, const MeanFieldFn& h, const Point& target, double fd_step) {
  if (!(fd_step > 0.0)) throw DomainError("estimate_a_matrix: fd_step must be positive");
  const auto frame = m.orthonormal_frame(target);
  const auto d = static_cast<Eigen::Index>(frame.size());
  Eigen::MatrixXd a(d, d);
  auto coords_at = [&](const Tangent& step) {
    const Point p = m.exp(target, step);
    return m.frame_coords(target, m.transport(p, target, h(p)), frame);
  };
  for (Eigen::Index i = 0; i < d; ++i) {
    const Tangent e = fd_step * frame[static_cast<std::size_t>(i)];
    a.col(i) = (coords_at(e) - coords_at(-e)) / (2.0 * fd_step);
  }
  return a;
}

Eigen::MatrixXd estimate_sigma(const Manifold& m, const Point& target, const NoiseSampler& noise, Rng& rng,
                               std::int64_t n_samples, bool centered) {
  if (n_samples < 2) throw DomainError("estimate_sigma: need at least 2 samples");
  const auto frame = m.orthonormal_frame(target);
  const auto d = static_cast<Eigen::Index>(frame.size());
  Eigen::MatrixXd second = Eigen::MatrixXd::Zero(d, d);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
  for (std::int64_t k = 0; k < n_samples; ++k) {
    const Eigen::VectorXd c = m.frame_coords(target, noise(rng), frame);
    second.noalias() += c * c.transpose();
    mean += c;
  }
  const auto n = static_cast<double>(n_samples);
  second /= n;
  mean /= n;
  if (centered) second = (second - mean * mean.transpose()) * (n / (n - 1.0));
  return 0.5 * (second + second.transpose());
}

Eigen::MatrixXd sigma_from_weighted(const Manifold& m, const Point& target, const std::vector<Tangent>& values,
                                    const std::vector<double>& weights) {
  if (values.size() != weights.size() || values.empty()) throw DomainError("sigma_from_weighted: size mismatch");
  const auto frame = m.orthonormal_frame(target);
  const auto d = static_cast<Eigen::Index>(frame.size());
  Eigen::MatrixXd second = Eigen::MatrixXd::Zero(d, d);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const Eigen::VectorXd c = m.frame_coords(target, values[i], frame);
    second.noalias() += weights[i] * (c * c.transpose());
  }
  return 0.5 * (second + second.transpose());
}

CltReport clt_check(const Manifold& m, const TailSampleSet& tail, const Point& target, const CltInputs& in) {
  if (tail.points.empty()) throw DomainError("clt_check: empty tail");
  CltReport r;
  r.predicted_v = lyapunov_solve(in);
  const RescaledSampleSet rescaled = rescale_samples(m, tail, target);
  r.n_samples = static_cast<std::int64_t>(rescaled.coords.size());
  r.empirical_cov = empirical_cov(rescaled);
  if (r.empirical_cov.rows() != r.predicted_v.rows()) throw DomainError("clt_check: dimension mismatch");
  r.rel_error_operator_norm = sym_operator_norm(r.empirical_cov - r.predicted_v) / sym_operator_norm(r.predicted_v);
  return r;
}

BiasReport bias_check_thm6(const Manifold& m, const TailSampleSet& tail, const ScalarFn& f, const NoiseSampler& noise,
                           const Point& target, double fd_step, Rng& rng, std::int64_t n_sigma_samples) {
  if (m.kind().tag != ManifoldKind::Tag::circle) throw DomainError("bias_check_thm6 requires a compact manifold (circle)");
  if (!(fd_step > 0.0)) throw DomainError("bias_check_thm6: fd_step must be positive");
  if (tail.points.empty()) throw DomainError("bias_check_thm6: empty tail");

  auto directional = [&](const Point& p, double t) {
    const Tangent e = m.orthonormal_frame(p).front();
    return f(m.exp(p, t * e));
  };

  BiasReport r;
  double acc = 0.0;
  for (const auto& p : tail.points) {
    const double g = (directional(p, fd_step) - directional(p, -fd_step)) / (2.0 * fd_step);
    acc += g * g;
  }
  r.lhs = acc / static_cast<double>(tail.points.size());
  r.hessian = (directional(target, fd_step) - 2.0 * f(target) + directional(target, -fd_step)) / (fd_step * fd_step);
  r.sigma = estimate_sigma(m, target, noise, rng, n_sigma_samples)(0, 0);
  r.rhs = tail.eta / 2.0 * r.hessian * r.sigma;
  if (r.rhs != 0.0) {
    r.rel_error = std::abs(r.lhs - r.rhs) / std::abs(r.rhs);
  } else {
    r.rel_error = r.lhs == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  }
  return r;
}

DominationReport bound_dominates(const std::vector<std::vector<double>>& values,
                                 const std::vector<std::int64_t>& checkpoints, BoundKind kind,
                                 const BoundParams& params, double eta, std::size_t min_replicates) {
  if (values.size() < min_replicates) {
    throw DomainError("bound_dominates: need at least " + std::to_string(min_replicates) + " replicates");
  }
  DominationReport rep;
  rep.checkpoints = checkpoints;
  for (std::size_t k = 0; k < checkpoints.size(); ++k) {
    std::vector<double> column;
    column.reserve(values.size());
    for (const auto& row : values) {
      if (row.size() != checkpoints.size()) throw DomainError("bound_dominates: ragged value table");
      column.push_back(row[k]);
    }
    const auto [mean, se] = mean_and_stderr(column);
    const double bound = bound_eval(kind, params, eta, checkpoints[k]);
    rep.mc_mean.push_back(mean);
    rep.std_err.push_back(se);
    rep.bound.push_back(bound);
    rep.margins.push_back(bound - (mean - 3.0 * se));
    if (mean - 3.0 * se > bound) rep.violations.push_back(checkpoints[k]);
  }
  return rep;
}

}  // namespace riemsa
