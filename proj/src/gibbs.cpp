#include "expectation_atlas/gibbs.hpp"

#include <cmath>
#include <sstream>

#include "expectation_atlas/errors.hpp"

namespace expectation_atlas {

namespace {

void check_beta(const RVector& beta, const OperatorSet& ops) {
  if (beta.size() != ops.size()) {
    std::ostringstream msg;
    msg << "beta has length " << beta.size() << " but the operator set has " << ops.size() << " operators";
    throw DomainError(msg.str());
  }
  if (!beta.allFinite()) throw DomainError("beta has non-finite entries");
  if (beta.norm() > kBetaSaturation) {
    std::ostringstream msg;
    msg << "|beta| = " << beta.norm() << " exceeds the saturation limit " << kBetaSaturation;
    throw DomainError(msg.str());
  }
}

// Diagonal entries <k|O|k> for every eigenvector column k.
RVector eigen_diagonal(const CMatrix& vectors, const CMatrix& op) {
  const CMatrix ov = op * vectors;
  return vectors.conjugate().cwiseProduct(ov).colwise().sum().real().transpose();
}

ThermalPoint build_point(EigenDecomposition eig, const OperatorSet& ops, const std::vector<CMatrix>* rotated) {
  ThermalPoint pt;
  const double lmin = eig.values(0);
  RVector w = (-(eig.values.array() - lmin)).exp();
  const double z_shifted = w.sum();
  pt.log_z = -lmin + std::log(z_shifted);
  pt.weights = w / z_shifted;
  pt.expectations.resize(ops.size());
  for (Index i = 0; i < ops.size(); ++i) {
    if (rotated != nullptr) {
      pt.expectations(i) = pt.weights.dot((*rotated)[static_cast<std::size_t>(i)].diagonal().real());
    } else {
      pt.expectations(i) = pt.weights.dot(eigen_diagonal(eig.vectors, ops.op(i).matrix()));
    }
  }
  pt.eig = std::move(eig);
  return pt;
}

}  // namespace

double thermal_kernel(double a, double b, double degeneracy) {
  const double gap = b - a;
  if (std::abs(gap) < degeneracy) return std::exp(-b);
  // e^{-a} (1 - e^{-gap}) / gap, written with expm1 to stay accurate for small gaps.
  return std::exp(-a) * (-std::expm1(-gap)) / gap;
}

ThermalPoint thermal_point(const RVector& beta, const OperatorSet& ops) {
  check_beta(beta, ops);
  return build_point(eig_hermitian_unchecked(ops.combination(beta)), ops, nullptr);
}

ThermalResponse thermal_response(const RVector& beta, const OperatorSet& ops) {
  check_beta(beta, ops);
  EigenDecomposition eig = eig_hermitian_unchecked(ops.combination(beta));
  const Index n = ops.size();
  const Index dim = ops.dim();

  std::vector<CMatrix> rotated;
  rotated.reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    CMatrix r = eig.vectors.adjoint() * (ops.op(i).matrix() * eig.vectors);
    rotated.push_back(std::move(r));
  }

  // Kernel matrix h(lambda_m, lambda_n) on shifted eigenvalues, divided by the
  // shifted partition function. Shifting all eigenvalues by c multiplies both
  // h and Z by e^{-c}, so the ratio is unchanged.
  const double lmin = eig.values(0);
  const double degeneracy = degeneracy_threshold(eig.spectral_norm());
  const RVector shifted = eig.values.array() - lmin;
  const double z_shifted = (-shifted.array()).exp().sum();
  RMatrix kernel(dim, dim);
  for (Index m = 0; m < dim; ++m)
    for (Index k = 0; k < dim; ++k) kernel(m, k) = thermal_kernel(shifted(m), shifted(k), degeneracy) / z_shifted;

  ThermalResponse out{build_point(std::move(eig), ops, &rotated), RMatrix(n, n)};
  const RVector& e = out.point.expectations;
  for (Index i = 0; i < n; ++i) {
    const CMatrix weighted = rotated[static_cast<std::size_t>(i)].cwiseProduct(kernel.cast<Complex>());
    for (Index j = i; j < n; ++j) {
      // sum_mn <m|O_i|n><n|O_j|m> h_mn = sum_mn A^i_mn conj(A^j_mn) h_mn
      const double s = (weighted.cwiseProduct(rotated[static_cast<std::size_t>(j)].conjugate())).sum().real();
      out.jacobian(i, j) = out.jacobian(j, i) = -s + e(i) * e(j);
    }
  }
  return out;
}

double log_partition(const RVector& beta, const OperatorSet& ops) {
  check_beta(beta, ops);
  const RVector lambda = eigenvalues_hermitian(ops.combination(beta));
  const double lmin = lambda.minCoeff();
  return -lmin + std::log((-(lambda.array() - lmin)).exp().sum());
}

DensityMatrix gibbs_state(const RVector& beta, const OperatorSet& ops) { return thermal_point(beta, ops).state(); }

RVector expectation_map(const RVector& beta, const OperatorSet& ops) { return thermal_point(beta, ops).expectations; }

RMatrix jacobian(const RVector& beta, const OperatorSet& ops) { return thermal_response(beta, ops).jacobian; }

double entropy(const DensityMatrix& rho) {
  const RVector p = eigenvalues_hermitian(rho.matrix());
  double s = 0.0;
  for (Index k = 0; k < p.size(); ++k) {
    if (p(k) > 0.0) s -= p(k) * std::log(p(k));
  }
  return s;
}

}  // namespace expectation_atlas
