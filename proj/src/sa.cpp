#include "riemsa/sa.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "riemsa/constcurv.hpp"
#include "riemsa/lyapunov.hpp"
#include "riemsa/spd.hpp"

namespace riemsa {
namespace {

constexpr double kWishartRedrawFloor = 100.0 * kEigenvalueFloor;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::size_t pick_atom(const DiscreteMeasure& mu, Rng& rng) {
  if (mu.atoms.empty()) throw DomainError("discrete measure has no atoms");
  if (mu.atoms.size() == 1) return 0;
  const double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t i = 0; i < mu.weights.size(); ++i) {
    acc += mu.weights[i];
    if (u < acc) return i;
  }
  return mu.atoms.size() - 1;
}

Tangent rescaled_draw(const Manifold& m, const Law& law, const Point& p, Rng& rng) {
  const Point x1 = sample_law(m, law, rng);
  const Point x2 = sample_law(m, law, rng);
  const double rho2 = m.dist(p, x2);
  return (0.5 / std::sqrt(rho2 * rho2 / 2.0 + 1.0)) * m.log(p, x1);
}

Tangent cosine_field(const Manifold& m, const CosinePull& o, const Point& p) {
  if (m.kind().tag != ManifoldKind::Tag::circle) throw DomainError("cosine_pull oracle requires the circle");
  const Tangent to_target = m.log(p, o.target);
  return Tangent{p, Eigen::VectorXd::Constant(1, o.rate * std::sin(to_target.coords[0]))};
}

}  // namespace

DiscreteMeasure DiscreteMeasure::uniform(std::vector<Point> atoms) {
  const std::size_t n = atoms.size();
  return DiscreteMeasure{std::move(atoms), std::vector<double>(n, n == 0 ? 0.0 : 1.0 / static_cast<double>(n))};
}

void validate_measure(const DiscreteMeasure& mu) {
  if (mu.atoms.empty()) throw DomainError("discrete measure has no atoms");
  if (mu.weights.size() != mu.atoms.size()) throw DomainError("discrete measure: weights/atoms size mismatch");
  double total = 0.0;
  for (double w : mu.weights) {
    if (!(w >= 0.0)) throw DomainError("discrete measure: negative weight");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) throw DomainError("discrete measure: weights do not sum to 1");
}

Point sample_law(const Manifold& m, const Law& law, Rng& rng) {
  return std::visit(overloaded{
                        [&](const DiscreteMeasure& mu) { return mu.atoms[pick_atom(mu, rng)]; },
                        [&](const WishartLaw& w) {
                          if (m.kind() != ManifoldKind::spd(w.d)) {
                            throw DomainError("wishart law requires spd(" + std::to_string(w.d) + ")");
                          }
                          // With dof close to d a draw is occasionally singular to working
                          // precision. Such draws are redrawn, with headroom so that whitening
                          // by a chain state with eigenvalues up to 100 stays above the floor
                          // of the matrix functions.
                          for (;;) {
                            const Eigen::MatrixXd x = w.scale * wishart(w.d, w.dof, rng);
                            if (sym_eig(x).values.minCoeff() > kWishartRedrawFloor) {
                              return Point{m.kind(), as_coords(x)};
                            }
                          }
                        },
                    },
                    law);
}

Tangent oracle_draw(const Manifold& m, const Oracle& oracle, const Point& p, Rng& rng) {
  Tangent h = std::visit(
      overloaded{
          [&](const SgdQuadratic& o) {
            return o.rate * m.log(p, o.target) + m.gaussian_tangent(p, o.noise_scale, rng);
          },
          [&](const LinearPull& o) {
            return o.rate * m.log(p, o.target) + m.gaussian_tangent(p, o.noise_scale, rng);
          },
          [&](const CosinePull& o) { return cosine_field(m, o, p) + m.gaussian_tangent(p, o.noise_scale, rng); },
          [&](const KarcherDiscrete& o) { return m.log(p, o.measure.atoms[pick_atom(o.measure, rng)]); },
          [&](const KarcherRescaled& o) {
            if (o.batch_size < 1) throw DomainError("karcher_rescaled: batch_size must be >= 1");
            Tangent acc = rescaled_draw(m, o.law, p, rng);
            for (int b = 1; b < o.batch_size; ++b) acc += rescaled_draw(m, o.law, p, rng);
            if (o.batch_size > 1) acc *= 1.0 / o.batch_size;
            return acc;
          },
      },
      oracle.rule);
  if (oracle.regularization_scale > 0.0) h += m.gaussian_tangent(p, oracle.regularization_scale, rng);
  return h;
}

Tangent mean_field(const Manifold& m, const Oracle& oracle, const Point& p) {
  return std::visit(
      overloaded{
          [&](const SgdQuadratic& o) { return o.rate * m.log(p, o.target); },
          [&](const LinearPull& o) { return o.rate * m.log(p, o.target); },
          [&](const CosinePull& o) { return cosine_field(m, o, p); },
          [&](const KarcherDiscrete& o) {
            Tangent acc = m.zero(p);
            for (std::size_t i = 0; i < o.measure.atoms.size(); ++i) {
              acc += o.measure.weights[i] * m.log(p, o.measure.atoms[i]);
            }
            return acc;
          },
          [&](const KarcherRescaled& o) {
            const auto* mu = std::get_if<DiscreteMeasure>(&o.law);
            if (mu == nullptr) throw DomainError("mean_field: no closed form for the rescaled oracle over a continuous law");
            Tangent pull = m.zero(p);
            double damp = 0.0;
            for (std::size_t i = 0; i < mu->atoms.size(); ++i) {
              const Tangent l = m.log(p, mu->atoms[i]);
              const double r = m.norm(p, l);
              pull += mu->weights[i] * l;
              damp += mu->weights[i] / std::sqrt(r * r / 2.0 + 1.0);
            }
            return (0.5 * damp) * pull;
          },
      },
      oracle.rule);
}

Tangent oracle_noise(const Manifold& m, const Oracle& oracle, const Point& p, Rng& rng) {
  return oracle_draw(m, oracle, p, rng) - mean_field(m, oracle, p);
}

std::optional<Point> oracle_target(const Oracle& oracle) {
  return std::visit(overloaded{
                        [](const SgdQuadratic& o) -> std::optional<Point> { return o.target; },
                        [](const LinearPull& o) -> std::optional<Point> { return o.target; },
                        [](const CosinePull& o) -> std::optional<Point> { return o.target; },
                        [](const auto&) -> std::optional<Point> { return std::nullopt; },
                    },
                    oracle.rule);
}

void validate_config(const SaConfig& c) {
  if (!(c.eta >= 0.0) || !std::isfinite(c.eta)) throw DomainError("sa config: eta must be finite and >= 0");
  if (c.n_steps < 0) throw DomainError("sa config: n_steps must be >= 0");
  if (c.record_every < 1) throw DomainError("sa config: record_every must be >= 1");
  if (c.projection && !(c.projection->radius > 0.0)) throw DomainError("sa config: projection radius must be > 0");
  if (!(c.v1_delta > 0.0)) throw DomainError("sa config: v1_delta must be > 0");
  if (const auto* kd = std::get_if<KarcherDiscrete>(&c.oracle.rule)) validate_measure(kd->measure);
  if (const auto* kr = std::get_if<KarcherRescaled>(&c.oracle.rule)) {
    if (const auto* mu = std::get_if<DiscreteMeasure>(&kr->law)) validate_measure(*mu);
  }
}

Point sa_step(const Manifold& m, const SaConfig& config, const Point& state, Rng& rng) {
  const Tangent h = oracle_draw(m, config.oracle, state, rng);
  if (config.eta == 0.0) return state;
  const Point next = m.exp(state, config.eta * h);
  if (config.projection) return m.project_ball(config.projection->center, config.projection->radius, next);
  return next;
}

Trajectory run_chain(const SaConfig& config) {
  validate_config(config);
  const ManifoldPtr m = make_manifold(config.manifold);
  Point state = config.initial_point.value_or(m->origin());
  m->validate_point(state);
  Rng rng(config.seed, config.stream);

  Trajectory traj{config, config.diagnostics_target.has_value(), {}};
  traj.records.reserve(static_cast<std::size_t>(config.n_steps / config.record_every + 1));
  auto record = [&](std::int64_t step) {
    Record r;
    r.step = step;
    if (config.store_points) r.point = state;
    if (config.diagnostics_target) {
      const double rho = m->dist(*config.diagnostics_target, state);
      r.rho_sq = rho * rho;
      r.d_sq = d_sq_from_rho_sq(r.rho_sq);
      r.v1 = v1_from_rho(rho, config.v1_delta);
    }
    traj.records.push_back(std::move(r));
  };

  record(0);
  for (std::int64_t n = 1; n <= config.n_steps; ++n) {
    state = sa_step(*m, config, state, rng);
    if (n % config.record_every == 0) record(n);
  }
  return traj;
}

KarcherResult karcher_reference(const Manifold& m, const std::vector<Point>& atoms,
                                const std::vector<double>& weights, double tol, int max_iter) {
  if (atoms.empty()) throw DomainError("karcher_reference: no atoms");
  if (!m.kind().is_hadamard()) throw DomainError("karcher_reference requires a Hadamard manifold");
  validate_measure(DiscreteMeasure{atoms, weights});

  auto field = [&](const Point& theta, double* objective) {
    Tangent g = m.zero(theta);
    double f = 0.0;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      const Tangent l = m.log(theta, atoms[i]);
      const double r = m.norm(theta, l);
      g += weights[i] * l;
      f += weights[i] * r * r / 2.0;
    }
    if (objective != nullptr) *objective = f;
    return g;
  };

  const auto start = static_cast<std::size_t>(
      std::distance(weights.begin(), std::max_element(weights.begin(), weights.end())));
  Point theta = atoms[start];
  double f = 0.0;
  Tangent g = field(theta, &f);
  double gn = m.norm(theta, g);
  int it = 0;
  while (gn > tol) {
    if (it >= max_iter) {
      throw NumericalError("karcher_reference: no convergence after " + std::to_string(max_iter) +
                           " iterations (gradient norm " + std::to_string(gn) + ")");
    }
    ++it;
    double tau = 1.0;
    Point candidate = m.exp(theta, g);
    double f_new = 0.0;
    Tangent g_new = field(candidate, &f_new);
    // Near the optimum the objective change drops below the roundoff of the
    // summed distances (~1e-13 relative for well-conditioned atoms, ~1e-10
    // with near-singular SPD atoms); a step that keeps f flat to that level
    // and shrinks the gradient is accepted.
    const double f_slack = 1e-8 * std::max(1.0, std::abs(f));
    auto acceptable = [&] { return f_new < f || (f_new - f <= f_slack && m.norm(candidate, g_new) < gn); };
    while (!acceptable() && tau > 1e-12) {
      tau /= 2.0;
      candidate = m.exp(theta, tau * g);
      g_new = field(candidate, &f_new);
    }
    if (!acceptable()) {
      throw NumericalError("karcher_reference: step halving failed at gradient norm " + std::to_string(gn));
    }
    theta = std::move(candidate);
    g = std::move(g_new);
    f = f_new;
    gn = m.norm(theta, g);
  }
  return KarcherResult{theta, it, gn};
}

}  // namespace riemsa
