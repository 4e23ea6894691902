#include "expectation_atlas/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "expectation_atlas/errors.hpp"

namespace expectation_atlas {

std::string_view to_string(Integrator integrator) {
  return integrator == Integrator::Euler ? "euler" : "rk4";
}

std::string_view to_string(Classification classification) {
  switch (classification) {
    case Classification::Interior: return "Interior";
    case Classification::Boundary: return "Boundary";
    case Classification::Exterior: return "Exterior";
    case Classification::Inconclusive: return "Inconclusive";
  }
  return "Inconclusive";
}

std::string_view to_string(Termination termination) {
  switch (termination) {
    case Termination::Converged: return "converged";
    case Termination::BetaCap: return "beta_cap";
    case Termination::SingularJacobian: return "singular_jacobian";
    case Termination::Stalled: return "stalled";
    case Termination::MaxSteps: return "max_steps";
    case Termination::Interrupted: return "interrupted";
  }
  return "max_steps";
}

Integrator parse_integrator(std::string_view name) {
  if (name == "euler") return Integrator::Euler;
  if (name == "rk4") return Integrator::RK4;
  throw DomainError("unknown integrator '" + std::string(name) + "' (expected euler or rk4)");
}

void FlowParams::validate() const {
  if (!(dt > 0.0)) throw DomainError("FlowParams: dt must be positive");
  if (max_steps < 1) throw DomainError("FlowParams: max_steps must be positive");
  if (!(delta_tol > 0.0)) throw DomainError("FlowParams: delta_tol must be positive");
  if (beta_cap && !(*beta_cap > 0.0)) throw DomainError("FlowParams: beta_cap must be positive");
  if (!(delta_floor_rel > 0.0)) throw DomainError("FlowParams: delta_floor_rel must be positive");
  if (!(velocity_tol > 0.0)) throw DomainError("FlowParams: velocity_tol must be positive");
  if (!(max_condition > 1.0)) throw DomainError("FlowParams: max_condition must exceed 1");
}

FlowParams FlowParams::precise() {
  FlowParams p;
  p.dt = 0.05;
  p.integrator = Integrator::RK4;
  return p;
}

namespace {

struct Velocity {
  RVector value;
  double condition = std::numeric_limits<double>::infinity();
};

// Solves J v = (E - e) and returns -v, the flow velocity. J is symmetric
// negative definite away from the boundary; anything else is reported as an
// infinite condition number.
Velocity flow_velocity(const RMatrix& jac, const RVector& residual) {
  Velocity out;
  Eigen::SelfAdjointEigenSolver<RMatrix> es(jac);
  if (es.info() != Eigen::Success) return out;
  const RVector& lam = es.eigenvalues();
  if (!(lam.maxCoeff() < 0.0)) return out;
  out.condition = lam.minCoeff() / lam.maxCoeff();
  out.value = -es.eigenvectors() * (es.eigenvectors().transpose() * residual).cwiseQuotient(lam);
  if (!out.value.allFinite()) out.condition = std::numeric_limits<double>::infinity();
  return out;
}

constexpr int kStallSteps = 50;
constexpr double kSeparationTol = 1e-10;

struct Evaluation {
  ThermalResponse response;
  Velocity velocity;
  double delta = 0.0;
};

std::optional<Evaluation> evaluate(const OperatorSet& ops, const RVector& target, const RVector& beta) {
  try {
    ThermalResponse r = thermal_response(beta, ops);
    if (!r.point.expectations.allFinite() || !r.jacobian.allFinite()) return std::nullopt;
    const RVector residual = r.point.expectations - target;
    Velocity v = flow_velocity(r.jacobian, residual);
    const double delta = 0.5 * residual.squaredNorm();
    return Evaluation{std::move(r), std::move(v), delta};
  } catch (const DomainError&) {
    return std::nullopt;
  } catch (const NumericalError&) {
    return std::nullopt;
  }
}

// Decay rate -d ln Delta / dt measured over roughly the last half time unit
// of accepted samples. The exact flow has rate 2.
bool decay_continues(const std::vector<FlowSample>& traj) {
  if (traj.size() < 2) return false;
  const FlowSample& last = traj.back();
  if (last.delta == 0.0) return true;
  std::size_t k = traj.size() - 1;
  while (k > 0 && last.t - traj[k].t < 0.5) --k;
  const FlowSample& ref = traj[k];
  if (last.t <= ref.t || ref.delta <= 0.0) return false;
  const double rate = std::log(ref.delta / last.delta) / (last.t - ref.t);
  return rate >= 1.0;
}

// The Gibbs weights concentrate on the ground space of beta.O, so b = beta/|beta|
// approximates the outward normal of the face being approached. Every
// attainable x has b.x >= lambda_min(b.O); a positive gap certifies the target
// lies outside.
double separation_gap(const OperatorSet& ops, const RVector& target, const RVector& beta) {
  const double norm = beta.norm();
  if (!(norm > 0.0)) return -std::numeric_limits<double>::infinity();
  const RVector b = beta / norm;
  return eigenvalues_hermitian(ops.combination(b))(0) - b.dot(target);
}

void check_flow_inputs(const OperatorSet& ops, const RVector& target, const RVector& beta0) {
  if (target.size() != ops.size()) {
    std::ostringstream msg;
    msg << "target has length " << target.size() << " but the operator set has " << ops.size() << " operators";
    throw DomainError(msg.str());
  }
  if (beta0.size() != ops.size()) throw DomainError("initial beta length does not match the operator set");
  if (!target.allFinite()) throw DomainError("target has non-finite entries");
}

}  // namespace

FlowResult integrate_flow(const OperatorSet& ops, const RVector& target, const RVector& beta0, const FlowParams& params) {
  params.validate();
  check_flow_inputs(ops, target, beta0);

  FlowResult result;
  result.delta_tol = params.delta_tol;
  const double cap = params.beta_cap.value_or(1e3 * (1.0 + beta0.norm()));

  std::optional<Evaluation> current = evaluate(ops, target, beta0);
  if (!current) throw DomainError("thermal map cannot be evaluated at the initial beta");

  RVector beta = beta0;
  double t = 0.0;
  double dt = params.dt;
  const double delta0 = current->delta;
  int flat_steps = 0;
  result.trajectory.push_back({t, beta, current->response.point.expectations, current->delta});

  while (true) {
    const Velocity& vel = current->velocity;
    if (!(vel.condition <= params.max_condition)) {
      result.termination = Termination::SingularJacobian;
      break;
    }
    if (current->delta < params.delta_tol && vel.value.norm() <= params.velocity_tol * (1.0 + beta.norm())) {
      result.termination = Termination::Converged;
      break;
    }
    if (result.steps + result.rejected_steps >= params.max_steps) {
      result.termination = Termination::MaxSteps;
      break;
    }

    std::optional<RVector> proposal;
    if (params.integrator == Integrator::Euler) {
      proposal = beta + dt * vel.value;
    } else {
      const RVector& k1 = vel.value;
      auto stage = [&](const RVector& b) -> std::optional<RVector> {
        auto ev = evaluate(ops, target, b);
        if (!ev || !(ev->velocity.condition <= params.max_condition)) return std::nullopt;
        return ev->velocity.value;
      };
      auto k2 = stage(beta + 0.5 * dt * k1);
      auto k3 = k2 ? stage(beta + 0.5 * dt * *k2) : std::nullopt;
      auto k4 = k3 ? stage(beta + dt * *k3) : std::nullopt;
      if (k4) proposal = beta + (dt / 6.0) * (k1 + 2.0 * *k2 + 2.0 * *k3 + *k4);
    }

    if (proposal && proposal->norm() > cap) {
      result.termination = Termination::BetaCap;
      break;
    }
    std::optional<Evaluation> next = proposal ? evaluate(ops, target, *proposal) : std::nullopt;
    const bool grew = next && next->delta > current->delta && next->delta > params.delta_tol;
    if (!next || grew) {
      ++result.rejected_steps;
      dt *= 0.5;
      if (dt < params.dt * 1e-10) {
        result.termination = Termination::Stalled;
        break;
      }
      continue;
    }

    flat_steps = next->delta < current->delta * (1.0 - 1e-12) ? 0 : flat_steps + 1;
    beta = *proposal;
    t += dt;
    ++result.steps;
    current = std::move(next);
    result.trajectory.push_back({t, beta, current->response.point.expectations, current->delta});
    dt = std::min(params.dt, 2.0 * dt);
    if (params.observer && !params.observer(result.trajectory.back())) {
      result.termination = Termination::Interrupted;
      break;
    }
    if (flat_steps >= kStallSteps && current->delta >= params.delta_tol) {
      result.termination = Termination::Stalled;
      break;
    }
  }

  result.beta_final = beta;
  result.expectations_final = current->response.point.expectations;
  result.residual = current->delta;

  switch (result.termination) {
    case Termination::Converged:
      result.classification = Classification::Interior;
      result.state = current->response.point.state();
      break;
    case Termination::MaxSteps:
    case Termination::Interrupted:
      result.classification = Classification::Inconclusive;
      break;
    default: {
      const double delta = current->delta;
      if (separation_gap(ops, target, beta) > kSeparationTol * (1.0 + target.norm())) {
        result.classification = Classification::Exterior;
      } else if (delta <= params.delta_floor_rel * delta0 ||
          (delta < 1e-2 * delta0 && decay_continues(result.trajectory))) {
        result.classification = Classification::Boundary;
      } else {
        result.classification = Classification::Exterior;
      }
    }
  }
  return result;
}

FlowResult solve(const OperatorSet& ops, const RVector& target, const FlowParams& params) {
  return integrate_flow(ops, target, RVector::Zero(ops.size()), params);
}

Classification classify(const OperatorSet& ops, const RVector& target, const FlowParams& params) {
  return solve(ops, target, params).classification;
}

double exponential_decay_check(const FlowResult& result) {
  const double threshold = 10.0 * result.delta_tol;
  double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
  int count = 0;
  for (const auto& s : result.trajectory) {
    if (!(s.delta > threshold)) continue;
    const double y = std::log(s.delta);
    st += s.t;
    sy += y;
    stt += s.t * s.t;
    sty += s.t * y;
    ++count;
  }
  if (count < 10) {
    std::ostringstream msg;
    msg << "exponential_decay_check: need at least 10 samples with Delta > " << threshold << ", have " << count;
    throw DomainError(msg.str());
  }
  const double c = static_cast<double>(count);
  const double denom = c * stt - st * st;
  if (!(denom > 0.0)) throw DomainError("exponential_decay_check: samples share a single time value");
  return (c * sty - st * sy) / denom;
}

std::vector<HermitianOperator> orthogonal_complement(const OperatorSet& ops) {
  const Index n = ops.dim();
  const BasisSet basis = build_basis(n);
  const Index d = basis.size();
  RMatrix coeffs(d, ops.size());
  for (Index i = 0; i < ops.size(); ++i)
    for (Index a = 0; a < d; ++a) coeffs(a, i) = trace_product(ops.op(i).matrix(), basis.element(a).matrix());

  Eigen::HouseholderQR<RMatrix> qr(coeffs);
  const RMatrix q = qr.householderQ();
  std::vector<HermitianOperator> out;
  const double norm = 1.0 / std::sqrt(static_cast<double>(n));
  for (Index c = ops.size(); c < d; ++c) {
    CMatrix p = CMatrix::Zero(n, n);
    for (Index a = 0; a < d; ++a) p += (q(a, c) * norm) * basis.element(a).matrix();
    out.emplace_back(std::move(p));
  }
  return out;
}

StateFamily state_family(const OperatorSet& ops, const RVector& target, const FlowParams& params) {
  const FlowResult flow = solve(ops, target, params);
  if (flow.classification != Classification::Interior) {
    throw PreconditionError("state_family: target is not in the interior (flow classification " +
                            std::string(to_string(flow.classification)) + ")");
  }
  const ThermalPoint point = thermal_point(flow.beta_final, ops);
  const RVector inv_sqrt = point.weights.cwiseMax(std::numeric_limits<double>::min()).cwiseSqrt().cwiseInverse();
  const CMatrix whiten = point.eig.vectors * inv_sqrt.cast<Complex>().asDiagonal() * point.eig.vectors.adjoint();

  StateFamily fam{point.state(), flow.beta_final, orthogonal_complement(ops), {}};
  for (const auto& perp : fam.perp_basis) {
    CMatrix k = whiten * perp.matrix() * whiten;
    k = (k + k.adjoint()) * 0.5;
    const RVector mu = eigenvalues_hermitian(k);
    // center + lambda P = rho^{1/2} (1 + lambda K) rho^{1/2} is positive iff
    // 1 + lambda mu >= 0 for every eigenvalue mu of K.
    const double lo = mu.maxCoeff() > 0.0 ? std::max(-kIntervalCap, -1.0 / mu.maxCoeff()) : -kIntervalCap;
    const double hi = mu.minCoeff() < 0.0 ? std::min(kIntervalCap, -1.0 / mu.minCoeff()) : kIntervalCap;
    fam.intervals.emplace_back(lo, hi);
  }
  return fam;
}

OperatorSet marginal_operator_set(Index dim_a, Index dim_b) {
  const BasisSet ba = build_basis(dim_a);
  const BasisSet bb = build_basis(dim_b);
  const CMatrix id_a = CMatrix::Identity(dim_a, dim_a);
  const CMatrix id_b = CMatrix::Identity(dim_b, dim_b);
  std::vector<HermitianOperator> ops;
  std::vector<std::string> labels;
  for (Index i = 0; i < ba.size(); ++i) {
    ops.emplace_back(kron(ba.element(i).matrix(), id_b));
    labels.push_back("A" + std::to_string(i + 1));
  }
  for (Index j = 0; j < bb.size(); ++j) {
    ops.emplace_back(kron(id_a, bb.element(j).matrix()));
    labels.push_back("B" + std::to_string(j + 1));
  }
  return OperatorSet(std::move(ops), std::move(labels));
}

RVector marginal_target(const DensityMatrix& rho_a, const DensityMatrix& rho_b) {
  const RVector xa = coords_from_state(rho_a, build_basis(rho_a.dim()));
  const RVector xb = coords_from_state(rho_b, build_basis(rho_b.dim()));
  RVector x(xa.size() + xb.size());
  x << xa, xb;
  return x;
}

FlowResult solve_marginal(const DensityMatrix& rho_a, const DensityMatrix& rho_b, const FlowParams& params) {
  if (rho_a.dim() < 2 || rho_b.dim() < 2) throw DomainError("solve_marginal: both subsystems need dimension >= 2");
  return solve(marginal_operator_set(rho_a.dim(), rho_b.dim()), marginal_target(rho_a, rho_b), params);
}

}  // namespace expectation_atlas
