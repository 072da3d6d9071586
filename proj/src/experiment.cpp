#include "riemsa/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "riemsa/constcurv.hpp"
#include "riemsa/spd.hpp"
#include "riemsa/stationary.hpp"

namespace riemsa {
namespace {

using nlohmann::json;

// Auxiliary draws use streams far above any replicate index.
constexpr std::uint64_t kReferenceStream = 0x8000000000000000ULL;
constexpr std::uint64_t kObjectiveStream = kReferenceStream + 1;
constexpr std::uint64_t kSigmaStream = kReferenceStream + 2;

const std::set<std::string> kExperiments = {"geom-test", "run", "sweep", "karcher", "clt", "bias", "bounds"};
const std::set<std::string> kOracleTypes = {"sgd_quadratic", "karcher_discrete", "karcher_rescaled", "linear_pull",
                                            "cosine_pull"};

class IoError : public Error {
 public:
  using Error::Error;
};

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& prefix) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (allowed.count(it.key()) == 0) throw ConfigError(prefix + it.key(), "unknown key");
  }
}

const json& require_object(const json& j, const std::string& field) {
  if (!j.is_object()) throw ConfigError(field, "expected an object");
  return j;
}

double get_number(const json& j, const std::string& field) {
  if (!j.is_number()) throw ConfigError(field, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(field, "must be finite");
  return v;
}

std::int64_t get_int(const json& j, const std::string& field) {
  if (!j.is_number_integer()) throw ConfigError(field, "expected an integer");
  if (j.is_number_unsigned() && j.get<std::uint64_t>() > static_cast<std::uint64_t>(INT64_MAX)) {
    throw ConfigError(field, "integer out of range");
  }
  return j.get<std::int64_t>();
}

std::uint64_t get_u64(const json& j, const std::string& field) {
  if (!j.is_number_unsigned()) throw ConfigError(field, "expected a nonnegative integer");
  return j.get<std::uint64_t>();
}

std::string get_string(const json& j, const std::string& field) {
  if (!j.is_string()) throw ConfigError(field, "expected a string");
  return j.get<std::string>();
}

std::vector<double> get_vector(const json& j, const std::string& field) {
  if (!j.is_array()) throw ConfigError(field, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(get_number(j[i], field + "[" + std::to_string(i) + "]"));
  return out;
}

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Point config_point(const Manifold& m, const std::vector<double>& coords, const std::string& field) {
  try {
    return m.make_point(to_eigen(coords));
  } catch (const GeometryError& e) {
    throw ConfigError(field, e.what());
  }
}

ManifoldKind parse_manifold(const json& j) {
  require_object(j, "manifold");
  reject_unknown(j, {"kind", "dim"}, "manifold.");
  if (!j.contains("kind")) throw ConfigError("manifold.kind", "missing");
  ManifoldKind::Tag tag;
  try {
    tag = parse_manifold_tag(get_string(j["kind"], "manifold.kind"));
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError("manifold.kind", e.what());
  }
  const bool has_dim = j.contains("dim");
  const int dim = has_dim ? static_cast<int>(get_int(j["dim"], "manifold.dim")) : 0;
  switch (tag) {
    case ManifoldKind::Tag::circle:
      if (has_dim && dim != 1) throw ConfigError("manifold.dim", "the circle takes no dimension");
      return ManifoldKind::circle();
    case ManifoldKind::Tag::hyperboloid:
      if (has_dim && dim < 1) throw ConfigError("manifold.dim", "must be >= 1");
      return ManifoldKind::hyperboloid(has_dim ? dim : 2);
    case ManifoldKind::Tag::euclidean:
    case ManifoldKind::Tag::spd:
      if (!has_dim) throw ConfigError("manifold.dim", "missing");
      if (dim < 1) throw ConfigError("manifold.dim", "must be >= 1");
      return ManifoldKind{tag, dim};
  }
  throw ConfigError("manifold.kind", "unsupported");
}

OracleSpec parse_oracle(const json& j) {
  require_object(j, "oracle");
  reject_unknown(j,
                 {"type", "target", "rate", "noise_scale", "regularization_scale", "atoms", "weights", "law",
                  "batch_size"},
                 "oracle.");
  OracleSpec s;
  if (!j.contains("type")) throw ConfigError("oracle.type", "missing");
  s.type = get_string(j["type"], "oracle.type");
  if (kOracleTypes.count(s.type) == 0) throw ConfigError("oracle.type", "unknown oracle type '" + s.type + "'");
  if (j.contains("target")) s.target = get_vector(j["target"], "oracle.target");
  if (j.contains("rate")) s.rate = get_number(j["rate"], "oracle.rate");
  if (j.contains("noise_scale")) s.noise_scale = get_number(j["noise_scale"], "oracle.noise_scale");
  if (j.contains("regularization_scale")) {
    s.regularization_scale = get_number(j["regularization_scale"], "oracle.regularization_scale");
  }
  if (j.contains("atoms")) {
    const json& a = j["atoms"];
    if (a.is_array()) {
      for (std::size_t i = 0; i < a.size(); ++i) {
        s.atoms.push_back(get_vector(a[i], "oracle.atoms[" + std::to_string(i) + "]"));
      }
    } else if (a.is_object()) {
      reject_unknown(a, {"count", "dof", "scale", "seed"}, "oracle.atoms.");
      WishartAtomsSpec w;
      if (!a.contains("count")) throw ConfigError("oracle.atoms.count", "missing");
      if (!a.contains("dof")) throw ConfigError("oracle.atoms.dof", "missing");
      w.count = static_cast<int>(get_int(a["count"], "oracle.atoms.count"));
      w.dof = static_cast<int>(get_int(a["dof"], "oracle.atoms.dof"));
      if (a.contains("scale")) w.scale = get_number(a["scale"], "oracle.atoms.scale");
      if (a.contains("seed")) w.seed = get_u64(a["seed"], "oracle.atoms.seed");
      if (w.count < 1) throw ConfigError("oracle.atoms.count", "must be >= 1");
      if (!(w.scale > 0.0)) throw ConfigError("oracle.atoms.scale", "must be > 0");
      s.wishart_atoms = w;
    } else {
      throw ConfigError("oracle.atoms", "expected an array of points or a wishart generator object");
    }
  }
  if (j.contains("weights")) s.weights = get_vector(j["weights"], "oracle.weights");
  if (j.contains("law")) {
    const json& l = require_object(j["law"], "oracle.law");
    reject_unknown(l, {"dof", "scale"}, "oracle.law.");
    WishartLawSpec w;
    if (!l.contains("dof")) throw ConfigError("oracle.law.dof", "missing");
    w.dof = static_cast<int>(get_int(l["dof"], "oracle.law.dof"));
    if (l.contains("scale")) w.scale = get_number(l["scale"], "oracle.law.scale");
    if (!(w.scale > 0.0)) throw ConfigError("oracle.law.scale", "must be > 0");
    s.law = w;
  }
  if (j.contains("batch_size")) s.batch_size = static_cast<int>(get_int(j["batch_size"], "oracle.batch_size"));
  return s;
}

struct BoundField {
  const char* name;
  std::optional<double> BoundParams::*member;
};

const std::vector<BoundField>& bound_fields() {
  static const std::vector<BoundField> fields = {
      {"L", &BoundParams::L},
      {"C1", &BoundParams::C1},
      {"C2", &BoundParams::C2},
      {"lambda", &BoundParams::lambda},
      {"sigma0_sq", &BoundParams::sigma0_sq},
      {"sigma1_sq", &BoundParams::sigma1_sq},
      {"v_sup_kstar", &BoundParams::v_sup_kstar},
      {"h_sup_kstar", &BoundParams::h_sup_kstar},
      {"kappa", &BoundParams::kappa},
      {"lambda_f", &BoundParams::lambda_f},
      {"L_f", &BoundParams::L_f},
      {"c_f", &BoundParams::c_f},
      {"lambda_tilde_f", &BoundParams::lambda_tilde_f},
      {"c_pi", &BoundParams::c_pi},
      {"b_pi", &BoundParams::b_pi},
      {"v1_theta0", &BoundParams::v1_theta0},
      {"v0", &BoundParams::v0},
      {"rho0_sq", &BoundParams::rho0_sq},
      {"diam_d", &BoundParams::diam_d},
      {"c_univ", &BoundParams::c_univ},
  };
  return fields;
}

void validate_config_invariants(const ExperimentConfig& c) {
  if (c.experiment == "geom-test") {
    if (c.trials < 1) throw ConfigError("trials", "must be >= 1");
    return;
  }
  if (!c.manifold) throw ConfigError("manifold", "missing");
  if (!c.oracle) throw ConfigError("oracle", "missing");
  if (c.eta.has_value() == c.eta_grid.has_value()) throw ConfigError("eta", "exactly one of eta and eta_grid is required");
  if (c.eta && !(*c.eta > 0.0)) throw ConfigError("eta", "must be > 0");
  if (c.eta_grid) {
    if (c.eta_grid->empty()) throw ConfigError("eta_grid", "must be nonempty");
    for (std::size_t i = 0; i < c.eta_grid->size(); ++i) {
      if (!((*c.eta_grid)[i] > 0.0)) throw ConfigError("eta_grid", "entries must be > 0");
      if (i > 0 && !((*c.eta_grid)[i] > (*c.eta_grid)[i - 1])) {
        throw ConfigError("eta_grid", "must be strictly increasing");
      }
    }
  }
  if (c.n_steps.has_value() == c.n_rule_c.has_value()) {
    throw ConfigError("n_steps", "exactly one of n_steps and n_rule is required");
  }
  if (c.n_steps && *c.n_steps < 0) throw ConfigError("n_steps", "must be >= 0");
  if (c.n_rule_c && !(*c.n_rule_c > 0.0)) throw ConfigError("n_rule.c", "must be > 0");
  if (c.replicates < 1) throw ConfigError("replicates", "must be >= 1");
  if (!(c.burn_fraction >= 0.0 && c.burn_fraction < 1.0)) throw ConfigError("burn_fraction", "must lie in [0, 1)");
  if (c.record_every < 1) throw ConfigError("record_every", "must be >= 1");
  if (c.reference_samples < 1) throw ConfigError("reference_samples", "must be >= 1");
  if (c.f_samples < 1) throw ConfigError("f_samples", "must be >= 1");
  if (c.sigma_samples < 2) throw ConfigError("sigma_samples", "must be >= 2");
  if (!(c.fd_step > 0.0)) throw ConfigError("fd_step", "must be > 0");
  if (c.tolerance && !(*c.tolerance > 0.0)) throw ConfigError("tolerance", "must be > 0");
  if (c.projection && !(c.projection->radius > 0.0)) throw ConfigError("projection.radius", "must be > 0");
  if (c.checkpoints) {
    for (std::size_t i = 0; i < c.checkpoints->size(); ++i) {
      if ((*c.checkpoints)[i] < 0) throw ConfigError("checkpoints", "entries must be >= 0");
      if (i > 0 && (*c.checkpoints)[i] <= (*c.checkpoints)[i - 1]) {
        throw ConfigError("checkpoints", "must be strictly increasing");
      }
    }
  }
  if (c.experiment == "bounds" && !c.bound_kind) throw ConfigError("bounds", "missing for a bounds experiment");

  const ManifoldPtr m = make_manifold(*c.manifold);
  const OracleSpec& o = *c.oracle;
  const bool pull = o.type == "sgd_quadratic" || o.type == "linear_pull" || o.type == "cosine_pull";
  if (pull && !o.target) throw ConfigError("oracle.target", "missing for oracle type " + o.type);
  if (o.target) config_point(*m, *o.target, "oracle.target");
  if (o.type == "cosine_pull" && c.manifold->tag != ManifoldKind::Tag::circle) {
    throw ConfigError("oracle.type", "cosine_pull requires the circle");
  }
  if (!(o.noise_scale >= 0.0)) throw ConfigError("oracle.noise_scale", "must be >= 0");
  if (!(o.regularization_scale >= 0.0)) throw ConfigError("oracle.regularization_scale", "must be >= 0");
  if (o.batch_size < 1) throw ConfigError("oracle.batch_size", "must be >= 1");
  if (!o.atoms.empty() && o.wishart_atoms) throw ConfigError("oracle.atoms", "ambiguous atoms");
  for (std::size_t i = 0; i < o.atoms.size(); ++i) {
    config_point(*m, o.atoms[i], "oracle.atoms[" + std::to_string(i) + "]");
  }
  const bool needs_spd = o.wishart_atoms || o.law;
  if (needs_spd && c.manifold->tag != ManifoldKind::Tag::spd) {
    throw ConfigError(o.law ? "oracle.law" : "oracle.atoms", "wishart draws require the spd manifold");
  }
  if (o.wishart_atoms && o.wishart_atoms->dof < c.manifold->dim) {
    throw ConfigError("oracle.atoms.dof", "must be >= the matrix dimension");
  }
  if (o.law && o.law->dof < c.manifold->dim) throw ConfigError("oracle.law.dof", "must be >= the matrix dimension");
  const std::size_t n_atoms = o.wishart_atoms ? static_cast<std::size_t>(o.wishart_atoms->count) : o.atoms.size();
  const bool uses_atoms = o.type == "karcher_discrete" || (o.type == "karcher_rescaled" && !o.law);
  if (uses_atoms && n_atoms == 0) throw ConfigError("oracle.atoms", "missing for oracle type " + o.type);
  if (!o.weights.empty()) {
    if (o.weights.size() != n_atoms) throw ConfigError("oracle.weights", "must have one entry per atom");
    double total = 0.0;
    for (double w : o.weights) {
      if (!(w >= 0.0)) throw ConfigError("oracle.weights", "must be nonnegative");
      total += w;
    }
    if (std::abs(total - 1.0) > 1e-12) throw ConfigError("oracle.weights", "must sum to 1");
  }
  if (c.initial_point) config_point(*m, *c.initial_point, "initial_point");
  if (c.projection && c.projection->center) config_point(*m, *c.projection->center, "projection.center");
  if (c.projection && !m->kind().is_hadamard()) throw ConfigError("projection", "requires a Hadamard manifold");
}


std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string fmt_short(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << content;
  out.flush();
  if (!out) throw IoError("failed writing " + path.string());
}

struct SweepRow {
  double eta;
  std::int64_t replicate;
  std::string stat;
  double value;
};

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string s = "eta,replicate,stat_name,value\n";
  for (const auto& r : rows) s += fmt(r.eta) + "," + std::to_string(r.replicate) + "," + r.stat + "," + fmt(r.value) + "\n";
  return s;
}


struct Problem {
  ManifoldPtr m;
  Oracle oracle;
  Point target;
  Point initial;
  std::optional<BallProjection> projection;
};

struct Reference {
  Point point;
  int iterations = 0;
  double grad_norm = 0.0;
  std::string source;
};

std::vector<Point> oracle_atoms(const Oracle& oracle) {
  if (const auto* kd = std::get_if<KarcherDiscrete>(&oracle.rule)) return kd->measure.atoms;
  if (const auto* kr = std::get_if<KarcherRescaled>(&oracle.rule)) {
    if (const auto* mu = std::get_if<DiscreteMeasure>(&kr->law)) return mu->atoms;
  }
  return {};
}

const DiscreteMeasure* oracle_measure(const Oracle& oracle) {
  if (const auto* kd = std::get_if<KarcherDiscrete>(&oracle.rule)) return &kd->measure;
  if (const auto* kr = std::get_if<KarcherRescaled>(&oracle.rule)) return std::get_if<DiscreteMeasure>(&kr->law);
  return nullptr;
}

Reference reference_solution(const Manifold& m, const Oracle& oracle, const ExperimentConfig& config) {
  if (auto t = oracle_target(oracle)) return Reference{*t, 0, 0.0, "oracle target"};
  if (const DiscreteMeasure* mu = oracle_measure(oracle)) {
    const KarcherResult r = karcher_reference(m, mu->atoms, mu->weights);
    return Reference{r.point, r.iterations, r.grad_norm, "barycenter of the atoms"};
  }
  const auto& kr = std::get<KarcherRescaled>(oracle.rule);
  Rng rng(config.seed, kReferenceStream);
  std::vector<Point> draws;
  draws.reserve(static_cast<std::size_t>(config.reference_samples));
  for (std::int64_t i = 0; i < config.reference_samples; ++i) draws.push_back(sample_law(m, kr.law, rng));
  const DiscreteMeasure empirical = DiscreteMeasure::uniform(std::move(draws));
  const KarcherResult r = karcher_reference(m, empirical.atoms, empirical.weights);
  return Reference{r.point, r.iterations, r.grad_norm,
                   "barycenter of " + std::to_string(config.reference_samples) + " law draws"};
}

Problem build_problem(const ExperimentConfig& config, const Reference& ref) {
  Problem p{make_manifold(*config.manifold), {}, ref.point, {}, std::nullopt};
  p.oracle = build_oracle(*p.m, *config.oracle);
  p.initial = config.initial_point ? p.m->make_point(to_eigen(*config.initial_point)) : p.m->origin();
  if (config.projection) {
    const Point center =
        config.projection->center ? p.m->make_point(to_eigen(*config.projection->center)) : p.m->origin();
    p.projection = BallProjection{center, config.projection->radius};
  }
  return p;
}

SaConfig chain_config(const ExperimentConfig& config, const Problem& p, double eta, std::int64_t n,
                      std::int64_t replicate) {
  SaConfig sa;
  sa.manifold = *config.manifold;
  sa.oracle = p.oracle;
  sa.eta = eta;
  sa.n_steps = n;
  sa.projection = p.projection;
  sa.seed = config.seed;
  sa.stream = replicate_stream(static_cast<std::uint64_t>(replicate));
  sa.record_every = config.record_every;
  sa.diagnostics_target = p.target;
  sa.initial_point = p.initial;
  sa.store_points = false;
  return sa;
}

struct Task {
  double eta;
  std::int64_t replicate;
};

std::vector<Task> task_grid(const ExperimentConfig& config) {
  std::vector<Task> tasks;
  for (double eta : eta_values(config)) {
    for (std::int64_t r = 0; r < config.replicates; ++r) tasks.push_back({eta, r});
  }
  return tasks;
}

double single_eta(const ExperimentConfig& config) {
  const auto etas = eta_values(config);
  if (etas.size() != 1) throw ConfigError("eta", "this experiment takes a single step size");
  return etas.front();
}

struct Output {
  std::ostringstream report;
  std::vector<std::pair<std::string, std::string>> files;
  bool failed = false;
};

void report_header(Output& out, const ExperimentConfig& config) {
  out.report << "experiment: " << config.experiment << "\n";
  if (config.manifold) out.report << "manifold: " << config.manifold->name() << "\n";
  if (config.oracle) out.report << "oracle: " << config.oracle->type << "\n";
  out.report << "seed: " << config.seed << "\n";
}

void verdict(Output& out, const std::string& what, double value, double tol, bool pass) {
  out.report << (pass ? "PASS " : "FAIL ") << what << " value=" << fmt_short(value) << " threshold=" << fmt_short(tol)
             << "\n";
  if (!pass) out.failed = true;
}

void exp_geom(const ExperimentConfig& config, Output& out) {
  std::vector<ManifoldKind> kinds;
  if (config.manifold) {
    kinds.push_back(*config.manifold);
  } else {
    kinds = {ManifoldKind::euclidean(3), ManifoldKind::spd(3), ManifoldKind::hyperboloid(2), ManifoldKind::circle()};
  }
  for (const auto& line : geometry_suite(kinds, config.trials, config.seed)) {
    verdict(out, line.name, line.value, line.tolerance, line.pass);
  }
}

void exp_run(const ExperimentConfig& config, const RunOptions& opts, Output& out, bool karcher) {
  if (karcher && config.oracle->type != "karcher_discrete" && config.oracle->type != "karcher_rescaled") {
    throw ConfigError("oracle.type", "the karcher experiment needs a karcher oracle");
  }
  const ManifoldPtr m = make_manifold(*config.manifold);
  const Reference ref = reference_solution(*m, build_oracle(*m, *config.oracle), config);
  const Problem p = build_problem(config, ref);
  out.report << "reference: " << ref.source << " (iterations=" << ref.iterations
             << ", grad_norm=" << fmt_short(ref.grad_norm) << ")\n";

  const auto tasks = task_grid(config);
  std::vector<Trajectory> trajs(tasks.size());
  parallel_for(tasks.size(), opts.threads, [&](std::size_t i) {
    trajs[i] = run_chain(chain_config(config, p, tasks[i].eta, steps_for(config, tasks[i].eta), tasks[i].replicate));
  });

  std::string csv = "replicate,step,eta,rho_sq,d_sq,v1\n";
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    for (const auto& r : trajs[i].records) {
      csv += std::to_string(tasks[i].replicate) + "," + std::to_string(r.step) + "," + fmt(tasks[i].eta) + "," +
             fmt(r.rho_sq) + "," + fmt(r.d_sq) + "," + fmt(r.v1) + "\n";
    }
  }
  out.files.emplace_back("trajectories.csv", std::move(csv));

  for (double eta : eta_values(config)) {
    std::vector<double> finals;
    std::vector<double> tails;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      if (tasks[i].eta != eta) continue;
      finals.push_back(trajs[i].records.back().rho_sq);
      double sum = 0.0;
      std::int64_t count = 0;
      const double first = config.burn_fraction * static_cast<double>(trajs[i].config.n_steps);
      for (const auto& r : trajs[i].records) {
        if (static_cast<double>(r.step) < first) continue;
        sum += r.rho_sq;
        ++count;
      }
      tails.push_back(sum / static_cast<double>(count));
    }
    const auto [fm, fse] = mean_and_stderr(finals);
    const auto [tm, tse] = mean_and_stderr(tails);
    out.report << "eta=" << fmt_short(eta) << " n=" << steps_for(config, eta) << " final mean rho_sq=" << fmt_short(fm)
               << " (se " << fmt_short(fse) << ") tail mean rho_sq=" << fmt_short(tm) << " (se " << fmt_short(tse)
               << ")\n";
  }
}

void exp_sweep(const ExperimentConfig& config, const RunOptions& opts, Output& out) {
  const auto etas = eta_values(config);
  if (etas.size() < 2) throw ConfigError("eta_grid", "a sweep needs at least two step sizes");
  if (config.replicates < 2) throw ConfigError("replicates", "a sweep needs at least two replicates");
  const ManifoldPtr m = make_manifold(*config.manifold);
  const Reference ref = reference_solution(*m, build_oracle(*m, *config.oracle), config);
  const Problem p = build_problem(config, ref);
  out.report << "reference: " << ref.source << "\n";
  out.report << "statistic: rho_sq of the final iterate of each replicate\n";

  const auto tasks = task_grid(config);
  std::vector<double> finals(tasks.size());
  parallel_for(tasks.size(), opts.threads, [&](std::size_t i) {
    const std::int64_t n = steps_for(config, tasks[i].eta);
    SaConfig sa = chain_config(config, p, tasks[i].eta, n, tasks[i].replicate);
    sa.record_every = std::max<std::int64_t>(n, 1);
    finals[i] = run_chain(sa).records.back().rho_sq;
  });

  std::vector<SweepRow> rows;
  for (std::size_t i = 0; i < tasks.size(); ++i) rows.push_back({tasks[i].eta, tasks[i].replicate, "rho_sq", finals[i]});
  out.files.emplace_back("sweeps.csv", sweep_csv(rows));

  std::vector<std::pair<double, double>> means;
  std::vector<std::pair<double, double>> vars;
  for (double eta : etas) {
    std::vector<double> xs;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      if (tasks[i].eta == eta) xs.push_back(finals[i]);
    }
    const auto [mean, se] = mean_and_stderr(xs);
    const double var = se * se * static_cast<double>(xs.size());
    means.emplace_back(eta, mean);
    vars.emplace_back(eta, var);
    out.report << "eta=" << fmt_short(eta) << " n=" << steps_for(config, eta) << " mean=" << fmt_short(mean)
               << " var=" << fmt_short(var) << "\n";
  }
  const LinearFit fm = eta_sweep_fit(means);
  const LinearFit fv = eta_sweep_fit(vars);
  std::string csv = "stat_name,slope,intercept,r_sq\n";
  csv += "mean_rho_sq," + fmt(fm.slope) + "," + fmt(fm.intercept) + "," + fmt(fm.r_sq) + "\n";
  csv += "var_rho_sq," + fmt(fv.slope) + "," + fmt(fv.intercept) + "," + fmt(fv.r_sq) + "\n";
  out.files.emplace_back("fits.csv", std::move(csv));
  out.report << "fits:\n";
  out.report << "  mean_rho_sq slope=" << fmt_short(fm.slope) << " intercept=" << fmt_short(fm.intercept)
             << " r_sq=" << fmt_short(fm.r_sq) << "\n";
  out.report << "  var_rho_sq slope=" << fmt_short(fv.slope) << " intercept=" << fmt_short(fv.intercept)
             << " r_sq=" << fmt_short(fv.r_sq) << "\n";
  if (config.tolerance) {
    verdict(out, "mean_rho_sq r_sq >= threshold", fm.r_sq, *config.tolerance, fm.r_sq >= *config.tolerance);
    verdict(out, "var_rho_sq r_sq >= threshold", fv.r_sq, *config.tolerance, fv.r_sq >= *config.tolerance);
  }
}

// Runs the replicates at `eta` keeping points, returns the pooled tail and
// the per-replicate tails.
std::vector<TailSampleSet> replicate_tails(const ExperimentConfig& config, const Problem& p, double eta,
                                           unsigned threads) {
  std::vector<TailSampleSet> tails(static_cast<std::size_t>(config.replicates));
  parallel_for(tails.size(), threads, [&](std::size_t r) {
    SaConfig sa = chain_config(config, p, eta, steps_for(config, eta), static_cast<std::int64_t>(r));
    sa.store_points = true;
    tails[r] = tail_samples(run_chain(sa), config.burn_fraction);
  });
  return tails;
}

TailSampleSet pooled(const std::vector<TailSampleSet>& tails) {
  TailSampleSet pool;
  pool.eta = tails.front().eta;
  pool.burn_fraction = tails.front().burn_fraction;
  for (const auto& t : tails) pool.points.insert(pool.points.end(), t.points.begin(), t.points.end());
  return pool;
}

void exp_clt(const ExperimentConfig& config, const RunOptions& opts, Output& out) {
  const ManifoldPtr m = make_manifold(*config.manifold);
  const Reference ref = reference_solution(*m, build_oracle(*m, *config.oracle), config);
  const Problem p = build_problem(config, ref);
  const double tol = config.tolerance.value_or(0.1);
  out.report << "reference: " << ref.source << "\n";

  const MeanFieldFn h = [&](const Point& x) { return mean_field(*m, p.oracle, x); };
  const NoiseSampler noise = [&](Rng& rng) { return oracle_noise(*m, p.oracle, p.target, rng); };
  CltInputs in;
  in.a_matrix = estimate_a_matrix(*m, h, p.target, config.fd_step);
  Rng sigma_rng(config.seed, kSigmaStream);
  in.sigma_matrix = estimate_sigma(*m, p.target, noise, sigma_rng, config.sigma_samples);

  std::vector<SweepRow> rows;
  for (double eta : eta_values(config)) {
    const auto tails = replicate_tails(config, p, eta, opts.threads);
    for (std::size_t r = 0; r < tails.size(); ++r) {
      const RescaledSampleSet z = rescale_samples(*m, tails[r], p.target);
      rows.push_back({eta, static_cast<std::int64_t>(r), "rescaled_cov_trace", empirical_cov(z).trace()});
    }
    const CltReport rep = clt_check(*m, pooled(tails), p.target, in);
    std::ostringstream label;
    label << "eta=" << fmt_short(eta) << " samples=" << rep.n_samples << " rel_error";
    out.report << "eta=" << fmt_short(eta) << " predicted trace=" << fmt_short(rep.predicted_v.trace())
               << " empirical trace=" << fmt_short(rep.empirical_cov.trace()) << "\n";
    verdict(out, label.str(), rep.rel_error_operator_norm, tol, rep.rel_error_operator_norm <= tol);
  }
  out.files.emplace_back("sweeps.csv", sweep_csv(rows));
}

void exp_bias(const ExperimentConfig& config, const RunOptions& opts, Output& out) {
  if (config.manifold->tag != ManifoldKind::Tag::circle || config.oracle->type != "cosine_pull") {
    throw ConfigError("oracle.type", "the bias experiment needs the cosine_pull oracle on the circle");
  }
  const ManifoldPtr m = make_manifold(*config.manifold);
  const Reference ref = reference_solution(*m, build_oracle(*m, *config.oracle), config);
  const Problem p = build_problem(config, ref);
  const double tol = config.tolerance.value_or(0.15);
  const double rate = config.oracle->rate;
  const ScalarFn f = [&](const Point& x) { return rate * (1.0 - std::cos(x.coords[0] - p.target.coords[0])); };
  const NoiseSampler noise = [&](Rng& rng) { return oracle_noise(*m, p.oracle, p.target, rng); };

  std::vector<SweepRow> rows;
  for (double eta : eta_values(config)) {
    const auto tails = replicate_tails(config, p, eta, opts.threads);
    for (std::size_t r = 0; r < tails.size(); ++r) {
      double acc = 0.0;
      for (const auto& x : tails[r].points) {
        const double g = rate * std::sin(x.coords[0] - p.target.coords[0]);
        acc += g * g;
      }
      rows.push_back({eta, static_cast<std::int64_t>(r), "tail_mean_grad_sq",
                      acc / static_cast<double>(tails[r].points.size())});
    }
    const TailSampleSet pool = pooled(tails);
    Rng sigma_rng(config.seed, kSigmaStream);
    const BiasReport b = bias_check_thm6(*m, pool, f, noise, p.target, config.fd_step, sigma_rng, config.sigma_samples);
    std::ostringstream label;
    label << "eta=" << fmt_short(eta) << " samples=" << pool.points.size() << " rel_error";
    out.report << "eta=" << fmt_short(eta) << " tail mean |grad f|^2 / eta=" << fmt_short(b.lhs / eta)
               << " predicted=" << fmt_short(b.rhs / eta) << " (hessian " << fmt_short(b.hessian) << ", sigma "
               << fmt_short(b.sigma) << ")\n";
    verdict(out, label.str(), b.rel_error, tol, b.rel_error <= tol);
  }
  out.files.emplace_back("sweeps.csv", sweep_csv(rows));
}

void exp_bounds(const ExperimentConfig& config, const RunOptions& opts, Output& out) {
  const BoundKind kind = *config.bound_kind;
  const double eta = single_eta(config);
  const std::int64_t n = steps_for(config, eta);
  const ManifoldPtr m = make_manifold(*config.manifold);
  const Reference ref = reference_solution(*m, build_oracle(*m, *config.oracle), config);
  const Problem p = build_problem(config, ref);
  out.report << "reference: " << ref.source << "\nbound: " << to_string(kind) << "\n";

  BoundParams params = config.bound_params;
  auto fill = [](std::optional<double>& field, double v) {
    if (!field) field = v;
  };
  const double rho0 = m->dist(p.initial, p.target);
  fill(params.kappa, m->curvature_bound());
  fill(params.rho0_sq, rho0 * rho0);
  fill(params.v1_theta0, v1_from_rho(rho0, 1.0));

  std::string stat_name;
  std::function<std::vector<double>(const Trajectory&, const std::vector<std::int64_t>&)> statistic;
  auto at_checkpoints = [](auto value_of) {
    return [value_of](const Trajectory& t, const std::vector<std::int64_t>& cps) {
      std::vector<double> v;
      for (auto c : cps) v.push_back(value_of(t.records[static_cast<std::size_t>(c)]));
      return v;
    };
  };
  auto running_average = [](auto value_of) {
    return [value_of](const Trajectory& t, const std::vector<std::int64_t>& cps) {
      std::vector<double> v;
      double sum = 0.0;
      std::size_t k = 0;
      for (auto c : cps) {
        for (; k < static_cast<std::size_t>(c); ++k) sum += value_of(t.records[k]);
        v.push_back(sum / static_cast<double>(c));
      }
      return v;
    };
  };
  switch (kind) {
    case BoundKind::cor9: {
      const auto* q = std::get_if<SgdQuadratic>(&p.oracle.rule);
      if (q == nullptr) throw ConfigError("oracle.type", "cor9 needs the sgd_quadratic oracle");
      const double rate = q->rate;
      fill(params.lambda_f, rate);
      fill(params.L_f, rate);
      fill(params.sigma0_sq, m->intrinsic_dim() * q->noise_scale * q->noise_scale);
      fill(params.v0, rate * rho0 * rho0 / 2.0);
      stat_name = "f_gap";
      statistic = at_checkpoints([rate](const Record& r) { return rate * r.rho_sq / 2.0; });
      break;
    }
    case BoundKind::prop12: {
      double diam = 0.0;
      for (const auto& a : oracle_atoms(p.oracle)) diam = std::max(diam, m->dist(p.initial, a));
      if (diam > 0.0) fill(params.diam_d, diam);
      stat_name = "rho_sq";
      statistic = at_checkpoints([](const Record& r) { return r.rho_sq; });
      break;
    }
    case BoundKind::thm13: {
      if (!params.c_pi || !params.b_pi) {
        const double f_star = barycenter_objective(*m, p.oracle, p.target, config);
        const BarycenterConstants bc = rescaled_oracle_constants(f_star, *params.kappa);
        fill(params.c_pi, bc.c_pi);
        fill(params.b_pi, bc.b_pi);
        out.report << "f_pi(reference)=" << fmt_short(f_star) << "\n";
      }
      stat_name = "avg_d_sq";
      statistic = running_average([](const Record& r) { return r.d_sq; });
      break;
    }
    case BoundKind::prop11:
      stat_name = "avg_d_sq";
      statistic = running_average([](const Record& r) { return r.d_sq; });
      break;
    case BoundKind::thm1c:
      fill(params.v0, v1_from_rho(rho0, 1.0));
      stat_name = "v1";
      statistic = at_checkpoints([](const Record& r) { return r.v1; });
      break;
    case BoundKind::thm1b:
      fill(params.v0, v1_from_rho(rho0, 1.0));
      stat_name = "avg_v1";
      statistic = running_average([](const Record& r) { return r.v1; });
      break;
    case BoundKind::thm1a:
    case BoundKind::thm15:
      throw ConfigError("bounds.kind", to_string(kind) + " bounds a quantity the runner does not observe");
  }

  std::vector<std::int64_t> cps;
  const std::vector<std::int64_t> requested =
      config.checkpoints.value_or(std::vector<std::int64_t>{0, 10, 100, 1000, n});
  for (auto c : requested) {
    if (c > n) continue;
    if (c == 0 && is_averaged(kind)) {
      if (config.checkpoints) throw ConfigError("checkpoints", "averaged bounds need checkpoints >= 1");
      continue;
    }
    if (cps.empty() || c > cps.back()) cps.push_back(c);
  }
  if (cps.empty()) throw ConfigError("checkpoints", "no checkpoint within n_steps");

  std::vector<std::vector<double>> values(static_cast<std::size_t>(config.replicates));
  parallel_for(values.size(), opts.threads, [&](std::size_t r) {
    SaConfig sa = chain_config(config, p, eta, n, static_cast<std::int64_t>(r));
    sa.record_every = 1;
    values[r] = statistic(run_chain(sa), cps);
  });

  std::vector<SweepRow> rows;
  for (std::size_t r = 0; r < values.size(); ++r) {
    for (std::size_t k = 0; k < cps.size(); ++k) {
      rows.push_back({eta, static_cast<std::int64_t>(r), stat_name + "@" + std::to_string(cps[k]), values[r][k]});
    }
  }
  out.files.emplace_back("sweeps.csv", sweep_csv(rows));

  out.report << "constants:";
  for (const auto& f : bound_fields()) {
    if (params.*(f.member)) out.report << " " << f.name << "=" << fmt_short(*(params.*(f.member)));
  }
  out.report << "\neta=" << fmt_short(eta) << " eta_bar=" << fmt_short(eta_bar(kind, params)) << "\n";
  const DominationReport rep = bound_dominates(values, cps, kind, params, eta, 2);
  for (std::size_t k = 0; k < cps.size(); ++k) {
    std::ostringstream label;
    label << "n=" << cps[k] << " " << stat_name << " mean=" << fmt_short(rep.mc_mean[k])
          << " se=" << fmt_short(rep.std_err[k]) << " bound=" << fmt_short(rep.bound[k]) << " margin";
    verdict(out, label.str(), rep.margins[k], 0.0, rep.margins[k] >= 0.0);
  }
}

}  // namespace


ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("", "top level must be a JSON object");
  reject_unknown(j,
                 {"experiment", "manifold", "oracle", "eta", "eta_grid", "n_steps", "n_rule", "replicates", "seed",
                  "burn_fraction", "output", "record_every", "initial_point", "projection", "bounds", "checkpoints",
                  "tolerance", "trials", "reference_samples", "f_samples", "sigma_samples", "fd_step"},
                 "");
  ExperimentConfig c;
  if (!j.contains("experiment")) throw ConfigError("experiment", "missing");
  c.experiment = get_string(j["experiment"], "experiment");
  if (kExperiments.count(c.experiment) == 0) throw ConfigError("experiment", "unknown experiment '" + c.experiment + "'");
  if (j.contains("manifold")) c.manifold = parse_manifold(j["manifold"]);
  if (j.contains("oracle")) c.oracle = parse_oracle(j["oracle"]);
  if (j.contains("eta")) c.eta = get_number(j["eta"], "eta");
  if (j.contains("eta_grid")) c.eta_grid = get_vector(j["eta_grid"], "eta_grid");
  if (j.contains("n_steps")) c.n_steps = get_int(j["n_steps"], "n_steps");
  if (j.contains("n_rule")) {
    const json& r = require_object(j["n_rule"], "n_rule");
    reject_unknown(r, {"c"}, "n_rule.");
    if (!r.contains("c")) throw ConfigError("n_rule.c", "missing");
    c.n_rule_c = get_number(r["c"], "n_rule.c");
  }
  if (j.contains("replicates")) c.replicates = get_int(j["replicates"], "replicates");
  if (j.contains("seed")) c.seed = get_u64(j["seed"], "seed");
  if (j.contains("burn_fraction")) c.burn_fraction = get_number(j["burn_fraction"], "burn_fraction");
  if (j.contains("output")) c.output = get_string(j["output"], "output");
  if (j.contains("record_every")) c.record_every = get_int(j["record_every"], "record_every");
  if (j.contains("initial_point")) c.initial_point = get_vector(j["initial_point"], "initial_point");
  if (j.contains("projection")) {
    const json& pj = require_object(j["projection"], "projection");
    reject_unknown(pj, {"center", "radius"}, "projection.");
    ProjectionSpec ps;
    if (pj.contains("center")) ps.center = get_vector(pj["center"], "projection.center");
    if (!pj.contains("radius")) throw ConfigError("projection.radius", "missing");
    ps.radius = get_number(pj["radius"], "projection.radius");
    c.projection = ps;
  }
  if (j.contains("bounds")) {
    const json& b = require_object(j["bounds"], "bounds");
    std::set<std::string> allowed = {"kind"};
    for (const auto& f : bound_fields()) allowed.insert(f.name);
    reject_unknown(b, allowed, "bounds.");
    if (!b.contains("kind")) throw ConfigError("bounds.kind", "missing");
    try {
      c.bound_kind = parse_bound_kind(get_string(b["kind"], "bounds.kind"));
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      throw ConfigError("bounds.kind", e.what());
    }
    for (const auto& f : bound_fields()) {
      if (b.contains(f.name)) c.bound_params.*(f.member) = get_number(b[f.name], std::string("bounds.") + f.name);
    }
  }
  if (j.contains("checkpoints")) {
    const json& cp = j["checkpoints"];
    if (!cp.is_array()) throw ConfigError("checkpoints", "expected an array of integers");
    std::vector<std::int64_t> v;
    for (std::size_t i = 0; i < cp.size(); ++i) v.push_back(get_int(cp[i], "checkpoints[" + std::to_string(i) + "]"));
    c.checkpoints = v;
  }
  if (j.contains("tolerance")) c.tolerance = get_number(j["tolerance"], "tolerance");
  if (j.contains("trials")) c.trials = get_int(j["trials"], "trials");
  if (j.contains("reference_samples")) c.reference_samples = get_int(j["reference_samples"], "reference_samples");
  if (j.contains("f_samples")) c.f_samples = get_int(j["f_samples"], "f_samples");
  if (j.contains("sigma_samples")) c.sigma_samples = get_int(j["sigma_samples"], "sigma_samples");
  if (j.contains("fd_step")) c.fd_step = get_number(j["fd_step"], "fd_step");
  validate_config_invariants(c);
  return c;
}

std::string to_json(const ExperimentConfig& c) {
  json j;
  j["experiment"] = c.experiment;
  if (c.manifold) {
    j["manifold"]["kind"] = to_string(c.manifold->tag);
    if (c.manifold->tag != ManifoldKind::Tag::circle) j["manifold"]["dim"] = c.manifold->dim;
  }
  if (c.oracle) {
    const OracleSpec& o = *c.oracle;
    json oj;
    oj["type"] = o.type;
    if (o.target) oj["target"] = *o.target;
    oj["rate"] = o.rate;
    oj["noise_scale"] = o.noise_scale;
    oj["regularization_scale"] = o.regularization_scale;
    if (o.wishart_atoms) {
      oj["atoms"] = {{"count", o.wishart_atoms->count},
                     {"dof", o.wishart_atoms->dof},
                     {"scale", o.wishart_atoms->scale},
                     {"seed", o.wishart_atoms->seed}};
    } else if (!o.atoms.empty()) {
      oj["atoms"] = o.atoms;
    }
    if (!o.weights.empty()) oj["weights"] = o.weights;
    if (o.law) oj["law"] = {{"dof", o.law->dof}, {"scale", o.law->scale}};
    oj["batch_size"] = o.batch_size;
    j["oracle"] = oj;
  }
  if (c.eta) j["eta"] = *c.eta;
  if (c.eta_grid) j["eta_grid"] = *c.eta_grid;
  if (c.n_steps) j["n_steps"] = *c.n_steps;
  if (c.n_rule_c) j["n_rule"]["c"] = *c.n_rule_c;
  j["replicates"] = c.replicates;
  j["seed"] = c.seed;
  j["burn_fraction"] = c.burn_fraction;
  j["output"] = c.output;
  j["record_every"] = c.record_every;
  if (c.initial_point) j["initial_point"] = *c.initial_point;
  if (c.projection) {
    if (c.projection->center) j["projection"]["center"] = *c.projection->center;
    j["projection"]["radius"] = c.projection->radius;
  }
  if (c.bound_kind) {
    j["bounds"]["kind"] = to_string(*c.bound_kind);
    for (const auto& f : bound_fields()) {
      if (c.bound_params.*(f.member)) j["bounds"][f.name] = *(c.bound_params.*(f.member));
    }
  }
  if (c.checkpoints) j["checkpoints"] = *c.checkpoints;
  if (c.tolerance) j["tolerance"] = *c.tolerance;
  j["trials"] = c.trials;
  j["reference_samples"] = c.reference_samples;
  j["f_samples"] = c.f_samples;
  j["sigma_samples"] = c.sigma_samples;
  j["fd_step"] = c.fd_step;
  return j.dump(2) + "\n";
}

std::vector<double> eta_values(const ExperimentConfig& config) {
  if (config.eta_grid) return *config.eta_grid;
  if (config.eta) return {*config.eta};
  throw ConfigError("eta", "missing");
}

std::int64_t steps_for(const ExperimentConfig& config, double eta) {
  if (config.n_steps) return *config.n_steps;
  if (config.n_rule_c) return static_cast<std::int64_t>(std::ceil(*config.n_rule_c / eta));
  throw ConfigError("n_steps", "missing");
}

ManifoldKind config_manifold(const ExperimentConfig& config) {
  if (!config.manifold) throw ConfigError("manifold", "missing");
  return *config.manifold;
}

Oracle build_oracle(const Manifold& m, const OracleSpec& s) {
  std::vector<Point> atoms;
  for (std::size_t i = 0; i < s.atoms.size(); ++i) {
    atoms.push_back(config_point(m, s.atoms[i], "oracle.atoms[" + std::to_string(i) + "]"));
  }
  if (s.wishart_atoms) {
    Rng rng(s.wishart_atoms->seed, 0);
    const int d = m.kind().dim;
    for (int i = 0; i < s.wishart_atoms->count; ++i) {
      atoms.push_back(Point{m.kind(), as_coords(s.wishart_atoms->scale * wishart(d, s.wishart_atoms->dof, rng))});
    }
  }
  DiscreteMeasure measure = DiscreteMeasure::uniform(atoms);
  if (!s.weights.empty()) measure.weights = s.weights;
  auto target = [&] {
    if (!s.target) throw ConfigError("oracle.target", "missing");
    return config_point(m, *s.target, "oracle.target");
  };

  Oracle o;
  o.regularization_scale = s.regularization_scale;
  if (s.type == "sgd_quadratic") {
    o.rule = SgdQuadratic{target(), s.rate, s.noise_scale};
  } else if (s.type == "linear_pull") {
    o.rule = LinearPull{target(), s.rate, s.noise_scale};
  } else if (s.type == "cosine_pull") {
    o.rule = CosinePull{target(), s.rate, s.noise_scale};
  } else if (s.type == "karcher_discrete") {
    o.rule = KarcherDiscrete{std::move(measure)};
  } else if (s.type == "karcher_rescaled") {
    Law law = std::move(measure);
    if (s.law) law = WishartLaw{m.kind().dim, s.law->dof, s.law->scale};
    o.rule = KarcherRescaled{std::move(law), s.batch_size};
  } else {
    throw ConfigError("oracle.type", "unknown oracle type '" + s.type + "'");
  }
  return o;
}

Point reference_point(const Manifold& m, const Oracle& oracle, const ExperimentConfig& config) {
  return reference_solution(m, oracle, config).point;
}

double barycenter_objective(const Manifold& m, const Oracle& oracle, const Point& theta,
                            const ExperimentConfig& config) {
  if (const DiscreteMeasure* mu = oracle_measure(oracle)) {
    double f = 0.0;
    for (std::size_t i = 0; i < mu->atoms.size(); ++i) {
      const double r = m.dist(theta, mu->atoms[i]);
      f += mu->weights[i] * r * r / 2.0;
    }
    return f;
  }
  const auto* kr = std::get_if<KarcherRescaled>(&oracle.rule);
  if (kr == nullptr) throw ConfigError("oracle.type", "the oracle has no barycenter objective");
  Rng rng(config.seed, kObjectiveStream);
  double f = 0.0;
  for (std::int64_t i = 0; i < config.f_samples; ++i) {
    const double r = m.dist(theta, sample_law(m, kr->law, rng));
    f += r * r / 2.0;
  }
  return f / static_cast<double>(config.f_samples);
}

std::vector<CheckLine> geometry_suite(const std::vector<ManifoldKind>& kinds, std::int64_t trials,
                                      std::uint64_t seed) {
  std::vector<CheckLine> lines;
  std::uint64_t stream = 0;
  for (const auto& kind : kinds) {
    const ManifoldPtr m = make_manifold(kind);
    Rng rng(seed, stream++);
    const bool circle = kind.tag == ManifoldKind::Tag::circle;
    // Random direction with norm uniform on [0, 5] ([0, 2] on the circle).
    const double max_norm = circle ? 2.0 : 5.0;
    auto tangent = [&](const Point& p) {
      Tangent v = m->gaussian_tangent(p, 1.0, rng);
      const double nv = m->norm(p, v);
      return nv > 0.0 ? (max_norm * rng.uniform() / nv) * v : v;
    };
    auto point = [&] { return m->exp(m->origin(), tangent(m->origin())); };
    const std::string prefix = kind.name() + " ";

    double roundtrip = 0.0;
    double geodesic = 0.0;
    double isometry = 0.0;
    for (std::int64_t t = 0; t < trials; ++t) {
      const Point p = point();
      const Tangent v = tangent(p);
      const Point q = m->exp(p, v);
      const double nv = m->norm(p, v);
      roundtrip = std::max(roundtrip, m->norm(p, m->log(p, q) - v) / std::max(1.0, nv));
      const double t_frac = rng.uniform();
      geodesic = std::max(geodesic, std::abs(m->dist(p, m->exp(p, t_frac * v)) - t_frac * nv) / std::max(1.0, nv));
      const Tangent u = tangent(p);
      const Tangent w = tangent(p);
      const Point r = point();
      if (circle && std::abs(wrap_angle(r.coords[0] - p.coords[0])) > 3.0) continue;
      const double before = m->inner(p, u, w);
      const double after = m->inner(r, m->transport(p, r, u), m->transport(p, r, w));
      isometry = std::max(isometry, std::abs(after - before) / std::max(1.0, m->norm(p, u) * m->norm(p, w)));
    }
    lines.push_back({prefix + "exp_log_roundtrip", roundtrip, 1e-8, roundtrip <= 1e-8});
    lines.push_back({prefix + "geodesic_length", geodesic, 1e-8, geodesic <= 1e-8});
    lines.push_back({prefix + "transport_isometry", isometry, 1e-8, isometry <= 1e-8});

    double ortho = 0.0;
    const std::int64_t few = std::max<std::int64_t>(1, trials / 10);
    for (std::int64_t t = 0; t < few; ++t) {
      const Point p = point();
      const auto frame = m->orthonormal_frame(p);
      for (std::size_t i = 0; i < frame.size(); ++i) {
        for (std::size_t k = 0; k < frame.size(); ++k) {
          ortho = std::max(ortho, std::abs(m->inner(p, frame[i], frame[k]) - (i == k ? 1.0 : 0.0)));
        }
      }
    }
    lines.push_back({prefix + "frame_orthonormality", ortho, 1e-12, ortho <= 1e-12});

    if (kind.tag == ManifoldKind::Tag::spd && kind.dim <= 4) {
      double affine = 0.0;
      for (std::int64_t t = 0; t < few; ++t) {
        Eigen::MatrixXd g(kind.dim, kind.dim);
        do {
          for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = rng.normal();
        } while (Eigen::JacobiSVD<Eigen::MatrixXd>(g).singularValues().minCoeff() < 0.1);
        const Point p = point();
        const Point q = point();
        auto congruence = [&](const Point& x) {
          const Eigen::MatrixXd y = g * as_matrix(x.coords, kind.dim) * g.transpose();
          return Point{kind, as_coords(0.5 * (y + y.transpose()))};
        };
        const double d0 = m->dist(p, q);
        affine = std::max(affine, std::abs(m->dist(congruence(p), congruence(q)) - d0) / std::max(1.0, d0));
      }
      lines.push_back({prefix + "affine_invariance", affine, 1e-8, affine <= 1e-8});
    }

    double grad = 0.0;
    const double h = 1e-4;
    const std::int64_t grad_points = std::max<std::int64_t>(1, trials / 40);
    for (std::int64_t t = 0; t < grad_points; ++t) {
      const HuberParams hp{1.0, point()};
      const Point p = point();
      if (circle && std::abs(wrap_angle(p.coords[0] - hp.target.coords[0])) > 3.0) continue;
      const Tangent g = grad_v1(*m, hp, p);
      for (const Tangent& e : m->orthonormal_frame(p)) {
        const double fd = (v1(*m, hp, m->exp(p, h * e)) - v1(*m, hp, m->exp(p, -h * e))) / (2.0 * h);
        grad = std::max(grad, std::abs(fd - m->inner(p, g, e)));
      }
    }
    lines.push_back({prefix + "grad_v1_finite_difference", grad, 1e-5, grad <= 1e-5});
  }
  return lines;
}

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn) {
  std::vector<std::exception_ptr> errors(n);
  auto work = [&](std::atomic<std::size_t>& next) {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::atomic<std::size_t> next{0};
  const std::size_t workers = std::min<std::size_t>(std::max(1u, threads), n);
  if (workers <= 1) {
    work(next);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back([&] { work(next); });
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

ExperimentResult run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  ExperimentResult result;
  Output out;
  const std::filesystem::path dir = options.out_dir.value_or(config.output);
  try {
    report_header(out, config);
    if (config.experiment == "geom-test") {
      exp_geom(config, out);
    } else if (config.experiment == "run") {
      exp_run(config, options, out, false);
    } else if (config.experiment == "karcher") {
      exp_run(config, options, out, true);
    } else if (config.experiment == "sweep") {
      exp_sweep(config, options, out);
    } else if (config.experiment == "clt") {
      exp_clt(config, options, out);
    } else if (config.experiment == "bias") {
      exp_bias(config, options, out);
    } else if (config.experiment == "bounds") {
      exp_bounds(config, options, out);
    } else {
      throw ConfigError("experiment", "unknown experiment '" + config.experiment + "'");
    }
    out.report << (out.failed ? "status: FAIL\n" : "status: PASS\n");
    result.exit_code = out.failed ? 1 : 0;
  } catch (const ConfigError& e) {
    out.report << "config error: " << e.what() << "\nstatus: ERROR\n";
    result.exit_code = 2;
  } catch (const Error& e) {
    out.report << "error: " << e.what() << "\nstatus: FAIL\n";
    result.exit_code = 1;
  }
  result.report = out.report.str();

  try {
    std::filesystem::create_directories(dir);
    for (const auto& [name, content] : out.files) {
      write_file(dir / name, content);
      result.files.push_back((dir / name).string());
    }
    write_file(dir / "report.txt", result.report);
    result.files.push_back((dir / "report.txt").string());
  } catch (const std::exception& e) {
    result.report += std::string("io error: ") + e.what() + "\n";
    result.exit_code = 2;
  }
  return result;
}

}  // namespace riemsa
