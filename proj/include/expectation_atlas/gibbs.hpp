#pragma once

#include <vector>

#include "expectation_atlas/linalg.hpp"

namespace expectation_atlas {

// Largest |beta| accepted by the thermal map; beyond it the Gibbs weights are
// saturated in double precision and a DomainError is raised.
inline constexpr double kBetaSaturation = 1e6;

// Everything the thermal map needs at one point beta, built from a single
// eigendecomposition of M = sum_i beta_i O_i. Exponentials are shifted by the
// smallest eigenvalue so nothing overflows.
struct ThermalPoint {
  EigenDecomposition eig;
  RVector weights;       // Gibbs probabilities exp(-lambda_k) / Z, in eigen order
  double log_z = 0.0;    // ln tr exp(-M)
  RVector expectations;  // E_i = tr(O_i rho_beta)

  DensityMatrix state() const { return DensityMatrix::from_spectrum(eig.vectors, weights); }
};

ThermalPoint thermal_point(const RVector& beta, const OperatorSet& ops);

// E and the Jacobian J_ij = dE_j / d beta_i at one point.
struct ThermalResponse {
  ThermalPoint point;
  RMatrix jacobian;
};

ThermalResponse thermal_response(const RVector& beta, const OperatorSet& ops);

double log_partition(const RVector& beta, const OperatorSet& ops);
DensityMatrix gibbs_state(const RVector& beta, const OperatorSet& ops);
RVector expectation_map(const RVector& beta, const OperatorSet& ops);
RMatrix jacobian(const RVector& beta, const OperatorSet& ops);

// Divided difference of exp(-x):
//   (e^{-a} - e^{-b}) / (b - a)  for |a - b| >= degeneracy,
//   e^{-b}                       otherwise.
double thermal_kernel(double a, double b, double degeneracy);

// Von Neumann entropy -sum p ln p, with 0 ln 0 = 0.
double entropy(const DensityMatrix& rho);

}  // namespace expectation_atlas
