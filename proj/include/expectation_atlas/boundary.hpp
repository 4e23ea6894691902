#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "expectation_atlas/linalg.hpp"

namespace expectation_atlas {

// Intersection of the supporting hyperplane e.x = lambda_min(e.O) with the
// attainable set.
struct BoundaryFace {
  RVector direction;  // unit vector e
  double theta = 0.0; // angle of e when n = 2, otherwise 0
  double support = 0.0;
  Index ground_dim = 1;
  // ground_dim == 1: the single face point. n == 2 with ground_dim > 1: the two
  // segment endpoints in counter-clockwise boundary order. Deeper recursion
  // (FaceOptions) appends the refined point for n > 2.
  std::vector<RVector> points;
  // Compressions pi O_i pi onto the ground space, in an orthonormal ground
  // basis (ground_dim x ground_dim). Empty when ground_dim == 1. The joint
  // range of these matrices is the face itself.
  std::vector<HermitianOperator> projected_ops;
};

struct FaceOptions {
  // 1 keeps degenerate faces as projected operator sets (plus exact endpoints
  // for n = 2). Larger values refine a degenerate face along the supplied
  // tie-break directions until the ground space is one-dimensional.
  int max_depth = 1;
  std::vector<RVector> tie_breaks;
};

// lambda_min(sum_i e_i O_i) after normalizing e.
double support_value(const RVector& direction, const OperatorSet& ops);

BoundaryFace face(const RVector& direction, const OperatorSet& ops, const FaceOptions& options = {});

// Sweeps e_theta = (cos theta, sin theta), theta = 2 pi k / num_dirs, over a
// pair of operators. `threads` > 1 splits the sweep; output order is fixed.
std::vector<BoundaryFace> trace_boundary(const OperatorSet& ops, int num_dirs, int threads = 1);

// Outer polyhedral approximation from sampled supporting half-spaces.
// contains(x) == false certifies that x is not attainable.
class OuterHull {
 public:
  struct Row {
    RVector direction;
    double support;
  };

  explicit OuterHull(std::vector<Row> rows) : rows_(std::move(rows)) {}

  bool contains(const RVector& x, double tol = 1e-9) const;
  // max over rows of lambda_min(e) - e.x; positive means a violated half-space.
  double max_violation(const RVector& x) const;
  const std::vector<Row>& rows() const { return rows_; }

 private:
  std::vector<Row> rows_;
};

OuterHull sampled_outer_hull(const OperatorSet& ops, std::span<const RVector> directions, int threads = 1);

// Deterministic, roughly uniform unit vectors in R^n: uniform angles for n = 2,
// otherwise a Halton sequence (skipping `seed` points) pushed through the
// normal quantile function and normalized.
std::vector<RVector> sphere_directions(Index n, int count, std::uint64_t seed = 0);

// Vertices of the attainable polytope of a commuting set: the joint eigenvalue
// vectors, duplicates within 1e-9 merged, in order of first appearance along a
// generic combination's spectrum.
std::vector<RVector> commuting_polytope(const OperatorSet& ops, double tol = 1e-10);

// Largest ||[O_i, O_j]||_F over pairs.
double max_commutator_norm(const OperatorSet& ops);

struct EigensetPoint {
  RVector direction;
  double theta = 0.0;
  Index level = 0;  // eigenvalue index, 0 = ground
  RVector point;    // v_k^dagger O v_k
};

std::vector<EigensetPoint> eigenset(const OperatorSet& ops, int num_dirs, int threads = 1);

}  // namespace expectation_atlas
