#pragma once

#include <vector>

#include "expectation_atlas/linalg.hpp"

namespace expectation_atlas {

// M_ij(x) = Z^k_ij x_k + gee_ij - x_i x_j over a full basis. x is attainable
// exactly when M(x) is positive semidefinite.
struct PositivityMatrix {
  CMatrix entries;

  double min_eigenvalue() const;
};

PositivityMatrix positivity_matrix(const RVector& x, const StructureTensors& tensors);
bool is_member_positivity(const RVector& x, const StructureTensors& tensors, double tol = 1e-9);

// (dO1)^2 (dO2)^2 - |<i[O1,O2]>/2|^2 - |<{O1,O2}>/2 - <O1><O2>|^2, never
// negative for a valid state.
double uncertainty_residual(const DensityMatrix& rho, const HermitianOperator& o1, const HermitianOperator& o2);

inline constexpr double kPurityTol = 1e-8;

struct PurityReport {
  // |sum_a x_a^2 - (N - 1)| and max_a |(1 - 2/N) x_a - s_abc x_b x_c|.
  double r_trace = 0.0;
  double r_quadratic = 0.0;
  // |e_k| for k = 2..N, where e_k are the elementary symmetric functions of the
  // spectrum; a pure state has characteristic polynomial lambda^{N-1}(lambda - 1).
  std::vector<double> r_charpoly;
  // Largest |2 x 2 minor| of rho.
  double r_subdet = 0.0;

  bool pure_quadratic = false;
  bool pure_charpoly = false;
  bool pure_subdet = false;

  bool verdicts_agree() const { return pure_quadratic == pure_charpoly && pure_charpoly == pure_subdet; }
  bool pure() const { return pure_quadratic && pure_charpoly && pure_subdet; }
  double max_charpoly() const;
};

PurityReport purity_report(const RVector& x, const BasisSet& basis, const StructureTensors& tensors,
                           double tol = kPurityTol);
PurityReport purity_report(const DensityMatrix& rho, const BasisSet& basis, const StructureTensors& tensors,
                           double tol = kPurityTol);

}  // namespace expectation_atlas
