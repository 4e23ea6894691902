#include <cmath>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "expectation_atlas/boundary.hpp"
#include "expectation_atlas/certificates.hpp"
#include "expectation_atlas/errors.hpp"
#include "expectation_atlas/flow.hpp"
#include "expectation_atlas/io.hpp"
#include "expectation_atlas/parallel.hpp"

namespace ea = expectation_atlas;

namespace {

enum ExitCode {
  kOk = 0,
  kUsage = 1,
  kExterior = 2,
  kBoundary = 3,
  kInconclusive = 4,
  kParse = 10,
  kValidation = 11,
  kDomain = 12,
  kPrecondition = 13,
  kUnsupported = 14,
  kNumerical = 15,
  kIo = 16,
};

enum class Level { Error = 0, Info = 1, Debug = 2 };

Level log_level() {
  const char* env = std::getenv("EXPECTATION_ATLAS_LOG");
  if (!env) return Level::Error;
  const std::string v = env;
  if (v == "debug") return Level::Debug;
  if (v == "info") return Level::Info;
  return Level::Error;
}

void log(Level level, const std::string& msg) {
  static const Level current = log_level();
  if (level > current) return;
  static const char* names[] = {"error", "info", "debug"};
  std::cerr << "[" << names[static_cast<int>(level)] << "] " << msg << "\n";
}

struct Config {
  std::string input;
  std::string target;
  int dirs = 360;
  double dt = 0.4;
  int max_steps = 2000;
  double delta_tol = 1e-24;
  std::optional<double> beta_cap;
  std::string integrator = "euler";
  std::uint64_t seed = 0;
  std::string output;
  std::string format;
  int threads = 1;
  bool project_traceless = false;
  // betamap
  std::string axes = "1,2";
  std::string beta_range = "-2,2";
  int points = 21;
  // certify
  int dim = 0;
  bool with_flow = false;
};

void emit(const Config& cfg, const std::string& content) {
  if (cfg.output.empty()) {
    std::cout << content;
    std::cout.flush();
  } else {
    ea::write_atomic(cfg.output, content);
    log(Level::Info, "wrote " + cfg.output);
  }
}

void emit_json(const Config& cfg, const ea::Json& doc) { emit(cfg, doc.dump(2) + "\n"); }

ea::OperatorSet load_set(const Config& cfg) {
  if (cfg.input.empty()) throw ea::DomainError("--input is required");
  const ea::Json doc = ea::parse_json(ea::read_file(cfg.input), cfg.input);
  ea::OperatorSet ops = ea::to_operator_set(ea::operator_file_from_json(doc), cfg.project_traceless);
  log(Level::Info, "loaded " + std::to_string(ops.size()) + " operators on dimension " + std::to_string(ops.dim()));
  return ops;
}

ea::FlowParams flow_params(const Config& cfg) {
  ea::FlowParams p;
  p.dt = cfg.dt;
  p.max_steps = cfg.max_steps;
  p.delta_tol = cfg.delta_tol;
  p.beta_cap = cfg.beta_cap;
  p.integrator = ea::parse_integrator(cfg.integrator);
  if (log_level() >= Level::Debug) {
    p.observer = [](const ea::FlowSample& s) {
      std::ostringstream msg;
      msg << "t=" << s.t << " delta=" << s.delta;
      log(Level::Debug, msg.str());
      return true;
    };
  }
  p.validate();
  return p;
}

ea::RVector require_target(const Config& cfg) {
  if (cfg.target.empty()) throw ea::DomainError("--target is required");
  return ea::parse_vector(cfg.target);
}

int exit_for(ea::Classification c) {
  switch (c) {
    case ea::Classification::Interior: return kOk;
    case ea::Classification::Exterior: return kExterior;
    case ea::Classification::Boundary: return kBoundary;
    case ea::Classification::Inconclusive: return kInconclusive;
  }
  return kInconclusive;
}

ea::Json flow_json(const ea::FlowResult& r, const ea::RVector& target) {
  ea::Json out;
  out["classification"] = std::string(ea::to_string(r.classification));
  out["termination"] = std::string(ea::to_string(r.termination));
  out["target"] = ea::vector_to_json(target);
  out["beta_final"] = ea::vector_to_json(r.beta_final);
  out["expectations"] = ea::vector_to_json(r.expectations_final);
  out["residual"] = r.residual;
  out["distance"] = (r.expectations_final - target).norm();
  out["steps"] = r.steps;
  out["rejected_steps"] = r.rejected_steps;
  ea::Json traj = ea::Json::array();
  for (const auto& s : r.trajectory) traj.push_back(ea::Json::array({s.t, s.delta}));
  out["trajectory"] = std::move(traj);
  out["state"] = r.state ? ea::complex_matrix_to_json(r.state->matrix()) : ea::Json(nullptr);
  return out;
}

int cmd_validate(const Config& cfg) {
  const ea::Json doc = ea::parse_json(ea::read_file(cfg.input), cfg.input);
  const ea::OperatorFile file = ea::operator_file_from_json(doc);
  ea::Json out;
  out["dim"] = file.dim;
  out["count"] = file.operators.size();
  ea::Json traces = ea::Json::array();
  for (const auto& o : file.operators) traces.push_back(o.trace());
  out["traces"] = traces;
  try {
    const ea::OperatorSet ops = ea::to_operator_set(file, cfg.project_traceless);
    const ea::RVector gram = Eigen::SelfAdjointEigenSolver<ea::RMatrix>(ops.gram()).eigenvalues();
    out["gram_spectrum"] = ea::vector_to_json(gram);
    ea::Json comm = ea::Json::array();
    for (ea::Index i = 0; i < ops.size(); ++i)
      for (ea::Index j = i + 1; j < ops.size(); ++j) {
        const ea::CMatrix& a = ops.op(i).matrix();
        const ea::CMatrix& b = ops.op(j).matrix();
        comm.push_back({{"i", i}, {"j", j}, {"norm", (a * b - b * a).norm()}});
      }
    out["commutator_norms"] = comm;
    if (cfg.project_traceless) out["offsets"] = ea::vector_to_json(ops.offsets());
    out["valid"] = true;
    emit_json(cfg, out);
    return kOk;
  } catch (const ea::ValidationError& e) {
    out["valid"] = false;
    out["error"] = e.what();
    emit_json(cfg, out);
    log(Level::Error, e.what());
    return kValidation;
  }
}

int cmd_boundary(const Config& cfg) {
  const ea::OperatorSet ops = load_set(cfg);
  const auto faces = ea::trace_boundary(ops, cfg.dirs, cfg.threads);
  if (cfg.format == "json") {
    ea::Json rows = ea::Json::array();
    for (const auto& f : faces) {
      ea::Json pts = ea::Json::array();
      for (const auto& p : f.points) pts.push_back(ea::vector_to_json(p));
      rows.push_back({{"theta", f.theta}, {"support", f.support}, {"ground_dim", f.ground_dim}, {"points", pts}});
    }
    emit_json(cfg, {{"faces", rows}});
  } else {
    emit(cfg, ea::boundary_csv(faces));
  }
  return kOk;
}

int cmd_eigenset(const Config& cfg) {
  const ea::OperatorSet ops = load_set(cfg);
  const auto pts = ea::eigenset(ops, cfg.dirs, cfg.threads);
  if (cfg.format == "json") {
    ea::Json rows = ea::Json::array();
    for (const auto& p : pts)
      rows.push_back({{"theta", p.theta}, {"level", p.level}, {"point", ea::vector_to_json(p.point)}});
    emit_json(cfg, {{"points", rows}});
  } else {
    emit(cfg, ea::eigenset_csv(pts));
  }
  return kOk;
}

int cmd_betamap(const Config& cfg) {
  const ea::OperatorSet ops = load_set(cfg);
  const ea::RVector axes = ea::parse_vector(cfg.axes);
  const ea::RVector range = ea::parse_vector(cfg.beta_range);
  if (range.size() != 2 || !(range(1) > range(0))) throw ea::DomainError("--beta-range must be lo,hi with lo < hi");
  if (cfg.points < 2) throw ea::DomainError("--points must be >= 2");
  if (axes.size() < 1 || axes.size() > 2) throw ea::DomainError("--axes takes one or two 1-based operator indices");
  std::vector<ea::Index> ax;
  for (ea::Index k = 0; k < axes.size(); ++k) {
    const double a = axes(k);
    if (a != std::floor(a) || a < 1 || a > static_cast<double>(ops.size()))
      throw ea::DomainError("--axes index out of range");
    ax.push_back(static_cast<ea::Index>(a) - 1);
  }
  const std::size_t per_axis = static_cast<std::size_t>(cfg.points);
  const std::size_t total = ax.size() == 1 ? per_axis : per_axis * per_axis;
  auto grid = [&](std::size_t k) {
    return range(0) + (range(1) - range(0)) * static_cast<double>(k) / static_cast<double>(per_axis - 1);
  };
  std::vector<ea::RVector> betas(total), values(total);
  ea::parallel_for(total, cfg.threads, [&](std::size_t k) {
    ea::RVector beta = ea::RVector::Zero(ops.size());
    beta(ax[0]) = grid(ax.size() == 1 ? k : k / per_axis);
    if (ax.size() == 2) beta(ax[1]) = grid(k % per_axis);
    values[k] = ea::expectation_map(beta, ops);
    betas[k] = std::move(beta);
  });
  std::string csv;
  for (auto a : ax) csv += "beta" + std::to_string(a + 1) + ",";
  for (ea::Index i = 0; i < ops.size(); ++i) csv += "E" + std::to_string(i + 1) + (i + 1 < ops.size() ? "," : "\n");
  for (std::size_t k = 0; k < total; ++k) {
    for (auto a : ax) csv += ea::format_number(betas[k](a)) + ",";
    for (ea::Index i = 0; i < ops.size(); ++i)
      csv += ea::format_number(values[k](i)) + (i + 1 < ops.size() ? "," : "\n");
  }
  emit(cfg, csv);
  return kOk;
}

int cmd_solve(const Config& cfg) {
  const ea::OperatorSet ops = load_set(cfg);
  ea::RVector target = require_target(cfg);
  if (target.size() == ops.size()) target -= ops.offsets();
  const ea::FlowResult r = ea::solve(ops, target, flow_params(cfg));
  log(Level::Info, "classification " + std::string(ea::to_string(r.classification)));
  ea::Json out = flow_json(r, target + ops.offsets());
  out["expectations"] = ea::vector_to_json(r.expectations_final + ops.offsets());
  emit_json(cfg, out);
  return exit_for(r.classification);
}

int cmd_family(const Config& cfg) {
  const ea::OperatorSet ops = load_set(cfg);
  ea::RVector target = require_target(cfg);
  if (target.size() == ops.size()) target -= ops.offsets();
  const ea::StateFamily fam = ea::state_family(ops, target, flow_params(cfg));
  ea::Json out;
  out["classification"] = "Interior";
  out["beta"] = ea::vector_to_json(fam.beta);
  out["state"] = ea::complex_matrix_to_json(fam.center.matrix());
  out["perp_dimension"] = fam.perp_basis.size();
  ea::Json intervals = ea::Json::array();
  for (const auto& [lo, hi] : fam.intervals) intervals.push_back(ea::Json::array({lo, hi}));
  out["intervals"] = intervals;
  ea::Json basis = ea::Json::array();
  for (const auto& p : fam.perp_basis) basis.push_back(ea::complex_matrix_to_json(p.matrix()));
  out["perp_basis"] = basis;
  emit_json(cfg, out);
  return kOk;
}

int cmd_marginal(const Config& cfg) {
  if (cfg.input.empty()) throw ea::DomainError("--input is required");
  const ea::Json doc = ea::parse_json(ea::read_file(cfg.input), cfg.input);
  if (!doc.is_object() || !doc.contains("rho_a") || !doc.contains("rho_b"))
    throw ea::ParseError(cfg.input + ": expected \"rho_a\" and \"rho_b\" matrices");
  const ea::DensityMatrix a(ea::complex_matrix_from_json(doc["rho_a"], "rho_a"));
  const ea::DensityMatrix b(ea::complex_matrix_from_json(doc["rho_b"], "rho_b"));
  const ea::FlowResult r = ea::solve_marginal(a, b, flow_params(cfg));
  ea::Json out = flow_json(r, ea::marginal_target(a, b));
  out["dim_a"] = a.dim();
  out["dim_b"] = b.dim();
  if (r.state) {
    out["marginal_a"] = ea::complex_matrix_to_json(ea::partial_trace_second(r.state->matrix(), a.dim(), b.dim()));
    out["marginal_b"] = ea::complex_matrix_to_json(ea::partial_trace_first(r.state->matrix(), a.dim(), b.dim()));
  }
  emit_json(cfg, out);
  return exit_for(r.classification);
}

int cmd_certify(const Config& cfg) {
  if (cfg.dim < 2) throw ea::DomainError("--dim must be >= 2");
  const ea::BasisSet basis = ea::build_basis(cfg.dim);
  const ea::StructureTensors tensors = ea::structure_tensors(basis);
  const ea::RVector x = cfg.target.empty() ? ea::RVector::Zero(basis.size()) : ea::parse_vector(cfg.target);
  const ea::PositivityMatrix m = ea::positivity_matrix(x, tensors);
  const double min_eig = m.min_eigenvalue();
  const bool member = min_eig >= -1e-9;
  ea::Json out;
  out["dim"] = cfg.dim;
  out["x"] = ea::vector_to_json(x);
  out["min_eigenvalue"] = min_eig;
  out["member"] = member;
  if (member) {
    const ea::PurityReport p = ea::purity_report(x, basis, tensors);
    out["purity"] = {{"r_trace", p.r_trace},
                     {"r_quadratic", p.r_quadratic},
                     {"r_charpoly", p.r_charpoly},
                     {"r_subdet", p.r_subdet},
                     {"pure_quadratic", p.pure_quadratic},
                     {"pure_charpoly", p.pure_charpoly},
                     {"pure_subdet", p.pure_subdet},
                     {"pure", p.pure()}};
  } else {
    out["purity"] = nullptr;
  }
  if (cfg.with_flow) {
    const ea::Classification c = ea::classify(basis.as_operator_set(), x, flow_params(cfg));
    const bool flow_member = c == ea::Classification::Interior || c == ea::Classification::Boundary;
    out["flow_classification"] = std::string(ea::to_string(c));
    out["disagreement"] = c != ea::Classification::Inconclusive && flow_member != member;
  }
  emit_json(cfg, out);
  return kOk;
}

int cmd_hull(const Config& cfg) {
  const ea::OperatorSet ops = load_set(cfg);
  const auto dirs = ea::sphere_directions(ops.size(), cfg.dirs, cfg.seed);
  const ea::OuterHull hull = ea::sampled_outer_hull(ops, dirs, cfg.threads);
  if (cfg.format == "json" || !cfg.target.empty()) {
    ea::Json out;
    ea::Json rows = ea::Json::array();
    for (const auto& r : hull.rows()) rows.push_back({{"direction", ea::vector_to_json(r.direction)}, {"support", r.support}});
    out["rows"] = rows;
    if (!cfg.target.empty()) {
      const ea::RVector t = ea::parse_vector(cfg.target) - ops.offsets();
      out["max_violation"] = hull.max_violation(t);
      out["contains"] = hull.contains(t);
    }
    emit_json(cfg, out);
    return kOk;
  }
  std::string csv;
  for (ea::Index i = 0; i < ops.size(); ++i) csv += "d" + std::to_string(i + 1) + ",";
  csv += "support\n";
  for (const auto& r : hull.rows()) {
    for (ea::Index i = 0; i < ops.size(); ++i) csv += ea::format_number(r.direction(i)) + ",";
    csv += ea::format_number(r.support) + "\n";
  }
  emit(cfg, csv);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint expectation-value ranges of Hermitian operators"};
  app.require_subcommand(1);
  Config cfg;

  auto input = [&](CLI::App* c, bool required = true) {
    auto* o = c->add_option("--input", cfg.input, "operator-set JSON file");
    if (required) o->required();
    c->add_flag("--project-traceless", cfg.project_traceless, "split off the trace of each operator");
  };
  auto output = [&](CLI::App* c, bool formats) {
    c->add_option("--output", cfg.output, "write results here instead of standard output");
    if (formats) c->add_option("--format", cfg.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  };
  auto flow = [&](CLI::App* c) {
    c->add_option("--dt", cfg.dt, "flow time step");
    c->add_option("--max-steps", cfg.max_steps, "step budget");
    c->add_option("--delta-tol", cfg.delta_tol, "convergence threshold on |E - e|^2 / 2");
    c->add_option("--beta-cap", cfg.beta_cap, "largest |beta| before stopping");
    c->add_option("--integrator", cfg.integrator, "euler or rk4")->check(CLI::IsMember({"euler", "rk4"}));
    c->add_option("--seed", cfg.seed, "unused by the flow, accepted for uniformity");
  };

  auto* validate = app.add_subcommand("validate", "check an operator set");
  input(validate);
  output(validate, false);

  auto* boundary = app.add_subcommand("boundary", "trace the boundary of a pair");
  input(boundary);
  boundary->add_option("--dirs", cfg.dirs, "number of directions");
  boundary->add_option("--threads", cfg.threads, "worker threads");
  output(boundary, true);

  auto* eigenset = app.add_subcommand("eigenset", "all eigenvector expectation points of a pair");
  input(eigenset);
  eigenset->add_option("--dirs", cfg.dirs, "number of directions");
  eigenset->add_option("--threads", cfg.threads, "worker threads");
  output(eigenset, true);

  auto* betamap = app.add_subcommand("betamap", "expectations over a rectangular beta grid");
  input(betamap);
  betamap->add_option("--axes", cfg.axes, "one or two 1-based operator indices, e.g. 1,2");
  betamap->add_option("--beta-range", cfg.beta_range, "lo,hi for every grid axis");
  betamap->add_option("--points", cfg.points, "grid points per axis");
  betamap->add_option("--threads", cfg.threads, "worker threads");
  output(betamap, false);

  auto* solve = app.add_subcommand("solve", "find the Gibbs state for a target");
  input(solve);
  solve->add_option("--target", cfg.target, "comma-separated expectation values")->required();
  flow(solve);
  output(solve, false);

  auto* family = app.add_subcommand("family", "all states reproducing an interior target");
  input(family);
  family->add_option("--target", cfg.target, "comma-separated expectation values")->required();
  flow(family);
  output(family, false);

  auto* marginal = app.add_subcommand("marginal", "two-party marginal compatibility");
  marginal->add_option("--input", cfg.input, "JSON with rho_a and rho_b")->required();
  flow(marginal);
  output(marginal, false);

  auto* certify = app.add_subcommand("certify", "positivity and purity certificates in the full basis");
  certify->add_option("--dim", cfg.dim, "Hilbert-space dimension")->required();
  certify->add_option("--target", cfg.target, "basis coordinates x (default 0)");
  certify->add_flag("--flow", cfg.with_flow, "also classify with the flow and compare");
  flow(certify);
  output(certify, false);

  auto* hull = app.add_subcommand("hull", "sampled outer approximation for any number of operators");
  input(hull);
  hull->add_option("--dirs", cfg.dirs, "number of directions");
  hull->add_option("--seed", cfg.seed, "offset into the direction sequence");
  hull->add_option("--target", cfg.target, "point to test against the half-spaces");
  hull->add_option("--threads", cfg.threads, "worker threads");
  output(hull, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (cfg.threads < 1) throw ea::DomainError("--threads must be >= 1");
    if (*validate) return cmd_validate(cfg);
    if (*boundary) return cmd_boundary(cfg);
    if (*eigenset) return cmd_eigenset(cfg);
    if (*betamap) return cmd_betamap(cfg);
    if (*solve) return cmd_solve(cfg);
    if (*family) return cmd_family(cfg);
    if (*marginal) return cmd_marginal(cfg);
    if (*certify) return cmd_certify(cfg);
    if (*hull) return cmd_hull(cfg);
  } catch (const ea::ParseError& e) {
    log(Level::Error, e.what());
    return kParse;
  } catch (const ea::ValidationError& e) {
    log(Level::Error, e.what());
    return kValidation;
  } catch (const ea::DomainError& e) {
    log(Level::Error, e.what());
    return kDomain;
  } catch (const ea::PreconditionError& e) {
    log(Level::Error, e.what());
    return kPrecondition;
  } catch (const ea::UnsupportedError& e) {
    log(Level::Error, e.what());
    return kUnsupported;
  } catch (const ea::NumericalError& e) {
    log(Level::Error, e.what());
    return kNumerical;
  } catch (const ea::Error& e) {
    log(Level::Error, e.what());
    return kIo;
  }
  return kUsage;
}
