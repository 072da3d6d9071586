#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "riemsa/lyapunov.hpp"
#include "riemsa/manifold.hpp"
#include "riemsa/sa.hpp"

namespace riemsa {

/// Atoms generated as scale * W(dof, I_d) draws from Rng(seed, 0).
struct WishartAtomsSpec {
  int count = 1;
  int dof = 1;
  double scale = 1.0;
  std::uint64_t seed = 0;

  friend bool operator==(const WishartAtomsSpec&, const WishartAtomsSpec&) = default;
};

struct WishartLawSpec {
  int dof = 1;
  double scale = 1.0;

  friend bool operator==(const WishartLawSpec&, const WishartLawSpec&) = default;
};

struct OracleSpec {
  /// sgd_quadratic, karcher_discrete, karcher_rescaled, linear_pull, cosine_pull
  std::string type;
  std::optional<std::vector<double>> target;
  double rate = 1.0;
  double noise_scale = 0.0;
  double regularization_scale = 0.0;
  std::vector<std::vector<double>> atoms;
  std::optional<WishartAtomsSpec> wishart_atoms;
  std::vector<double> weights;
  /// karcher_rescaled only; absent means the discrete law over the atoms.
  std::optional<WishartLawSpec> law;
  int batch_size = 1;

  friend bool operator==(const OracleSpec&, const OracleSpec&) = default;
};

struct ProjectionSpec {
  std::optional<std::vector<double>> center;
  double radius = 1.0;

  friend bool operator==(const ProjectionSpec&, const ProjectionSpec&) = default;
};

struct ExperimentConfig {
  /// geom-test, run, sweep, karcher, clt, bias, bounds
  std::string experiment;
  std::optional<ManifoldKind> manifold;
  std::optional<OracleSpec> oracle;
  std::optional<double> eta;
  std::optional<std::vector<double>> eta_grid;
  std::optional<std::int64_t> n_steps;
  /// n = ceil(c / eta)
  std::optional<double> n_rule_c;
  std::int64_t replicates = 1;
  std::uint64_t seed = 0;
  double burn_fraction = 0.5;
  std::string output = "out";
  std::int64_t record_every = 1;
  std::optional<std::vector<double>> initial_point;
  std::optional<ProjectionSpec> projection;
  std::optional<BoundKind> bound_kind;
  BoundParams bound_params;
  std::optional<std::vector<std::int64_t>> checkpoints;
  std::optional<double> tolerance;
  /// geom-test: random trials per invariant and kind.
  std::int64_t trials = 1000;
  /// Draws used for the reference barycenter of a continuous law.
  std::int64_t reference_samples = 10000;
  /// Draws used to estimate f_pi at the reference point.
  std::int64_t f_samples = 100000;
  /// Draws used to estimate the noise covariance at the target.
  std::int64_t sigma_samples = 100000;
  double fd_step = 1e-4;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Parses a JSON config. Throws ConfigError naming the offending field on
/// malformed JSON, unknown keys, wrong types or invariant violations.
ExperimentConfig parse_config(const std::string& text);
/// Canonical JSON text; parse_config(to_json(c)) == c.
std::string to_json(const ExperimentConfig& config);

/// The step sizes of the config in increasing order.
std::vector<double> eta_values(const ExperimentConfig& config);
/// n_steps, or ceil(c / eta) under an n_rule.
std::int64_t steps_for(const ExperimentConfig& config, double eta);

ManifoldKind config_manifold(const ExperimentConfig& config);
Oracle build_oracle(const Manifold& m, const OracleSpec& oracle_spec);

/// Reference solution of the oracle: its target, or the barycenter of the
/// atoms, or of `reference_samples` draws of a continuous law.
Point reference_point(const Manifold& m, const Oracle& oracle, const ExperimentConfig& config);

/// f_pi(theta) = (1/2) E rho^2(theta, X) under the oracle's law (exact for
/// atoms, Monte Carlo with f_samples draws otherwise).
double barycenter_objective(const Manifold& m, const Oracle& oracle, const Point& theta,
                            const ExperimentConfig& config);

struct CheckLine {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

/// Randomized invariant checks of every operation of the given geometries:
/// exp/log round trips, transport isometry, frame orthonormality, SPD affine
/// invariance (d <= 4) and grad_v1 against central differences.
std::vector<CheckLine> geometry_suite(const std::vector<ManifoldKind>& kinds, std::int64_t trials,
                                      std::uint64_t seed);

/// Runs fn(0..n-1) on up to `threads` workers. Exceptions are rethrown in
/// task order after all workers finish.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn);

struct RunOptions {
  std::optional<std::string> out_dir;
  unsigned threads = 1;
};

struct ExperimentResult {
  /// 0 success, 1 tolerance or invariant failure, 2 config or I/O error.
  int exit_code = 0;
  std::string report;
  std::vector<std::string> files;
};

/// Runs the experiment and writes its CSV files and report.txt.
ExperimentResult run_experiment(const ExperimentConfig& config, const RunOptions& options);

}  // namespace riemsa
