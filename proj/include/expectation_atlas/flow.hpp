#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "expectation_atlas/gibbs.hpp"
#include "expectation_atlas/linalg.hpp"

namespace expectation_atlas {

enum class Integrator { Euler, RK4 };

enum class Classification { Interior, Boundary, Exterior, Inconclusive };

// Why a flow run stopped.
enum class Termination { Converged, BetaCap, SingularJacobian, Stalled, MaxSteps, Interrupted };

std::string_view to_string(Integrator integrator);
std::string_view to_string(Classification classification);
std::string_view to_string(Termination termination);
Integrator parse_integrator(std::string_view name);

// Discretization of d beta/dt = -J^{-1} (E(beta) - e).
//
// The run stops as Interior once Delta = |E - e|^2 / 2 < delta_tol, the
// Newton velocity |J^{-1}(E - e)| has decayed below velocity_tol (1 + |beta|)
// and J is well conditioned. Near the boundary of the attainable set the
// velocity stays O(1) while J degenerates, so those runs end on the beta cap
// or the condition limit instead and are sorted into Boundary or Exterior by
// the trend of Delta.
struct FlowSample;

struct FlowParams {
  double dt = 0.4;
  int max_steps = 2000;
  double delta_tol = 1e-24;
  // Defaults to 1e3 (1 + |beta0|) when unset.
  std::optional<double> beta_cap;
  Integrator integrator = Integrator::Euler;
  // Exterior requires Delta > delta_floor_rel * Delta_0 at termination.
  double delta_floor_rel = 1e-6;
  double velocity_tol = 1e-9;
  double max_condition = 1e14;
  // Called after every accepted step; returning false ends the run
  // (Termination::Interrupted, classified Inconclusive).
  std::function<bool(const FlowSample&)> observer;

  void validate() const;

  // RK4 with dt = 0.05.
  static FlowParams precise();
};

struct FlowSample {
  double t = 0.0;
  RVector beta;
  RVector expectations;
  double delta = 0.0;
};

struct FlowResult {
  Classification classification = Classification::Inconclusive;
  Termination termination = Termination::MaxSteps;
  RVector beta_final;
  RVector expectations_final;
  std::optional<DensityMatrix> state;
  std::vector<FlowSample> trajectory;
  double residual = 0.0;   // final Delta
  double delta_tol = 0.0;  // copied from the parameters
  int steps = 0;           // accepted steps
  int rejected_steps = 0;  // steps undone because Delta grew
};

FlowResult integrate_flow(const OperatorSet& ops, const RVector& target, const RVector& beta0, const FlowParams& params);

// integrate_flow from beta0 = 0.
FlowResult solve(const OperatorSet& ops, const RVector& target, const FlowParams& params = {});
Classification classify(const OperatorSet& ops, const RVector& target, const FlowParams& params = {});

// Least-squares slope of ln Delta against t over trajectory samples with
// Delta > 10 delta_tol. The continuous flow decays exactly as e^{-2t}.
double exponential_decay_check(const FlowResult& result);

// All states reproducing an interior target: the Gibbs state plus any
// admissible move in the orthogonal complement of span(S) inside the
// traceless operators.
struct StateFamily {
  DensityMatrix center;
  RVector beta;
  // Orthonormal under tr(A B); every element is traceless and orthogonal to S.
  std::vector<HermitianOperator> perp_basis;
  // center + lambda perp_k is a state iff lambda lies in intervals[k].
  std::vector<std::pair<double, double>> intervals;
};

// Cap applied to interval endpoints when a direction never leaves the cone.
inline constexpr double kIntervalCap = 1e12;

StateFamily state_family(const OperatorSet& ops, const RVector& target, const FlowParams& params = {});

// Orthonormal basis of the traceless Hermitian operators orthogonal to ops.
std::vector<HermitianOperator> orthogonal_complement(const OperatorSet& ops);

// Two-party marginal problem: S = {T^A_i (x) 1} u {1 (x) T^B_j} and the
// matching target built from the marginals.
OperatorSet marginal_operator_set(Index dim_a, Index dim_b);
RVector marginal_target(const DensityMatrix& rho_a, const DensityMatrix& rho_b);
FlowResult solve_marginal(const DensityMatrix& rho_a, const DensityMatrix& rho_b, const FlowParams& params = {});

}  // namespace expectation_atlas
