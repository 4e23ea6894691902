#include "expectation_atlas/certificates.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "expectation_atlas/errors.hpp"

namespace expectation_atlas {

namespace {

void check_length(const RVector& x, Index size, const char* what) {
  if (x.size() != size) {
    std::ostringstream msg;
    msg << what << ": coordinate vector has length " << x.size() << ", expected " << size;
    throw DomainError(msg.str());
  }
}

PurityReport report_from(const RVector& x, const CMatrix& rho, const StructureTensors& tensors, double tol) {
  const Index n = tensors.size();
  const Index dim = tensors.dim();
  const double nd = static_cast<double>(dim);
  PurityReport r;

  r.r_trace = std::abs(x.squaredNorm() - (nd - 1.0));
  for (Index a = 0; a < n; ++a) {
    double q = 0.0;
    for (Index b = 0; b < n; ++b) {
      if (x(b) == 0.0) continue;
      for (Index c = 0; c < n; ++c) q += tensors.s(a, b, c) * x(b) * x(c);
    }
    r.r_quadratic = std::max(r.r_quadratic, std::abs((1.0 - 2.0 / nd) * x(a) - q));
  }

  // power sums, then Newton's identities
  std::vector<double> p(static_cast<std::size_t>(dim) + 1, 0.0);
  CMatrix power = rho;
  for (Index m = 1; m <= dim; ++m) {
    if (m > 1) power = power * rho;
    p[static_cast<std::size_t>(m)] = power.trace().real();
  }
  std::vector<double> e(static_cast<std::size_t>(dim) + 1, 0.0);
  e[0] = 1.0;
  for (Index k = 1; k <= dim; ++k) {
    double acc = 0.0;
    for (Index i = 1; i <= k; ++i) {
      const double sign = (i % 2 == 1) ? 1.0 : -1.0;
      acc += sign * e[static_cast<std::size_t>(k - i)] * p[static_cast<std::size_t>(i)];
    }
    e[static_cast<std::size_t>(k)] = acc / static_cast<double>(k);
  }
  for (Index k = 2; k <= dim; ++k) r.r_charpoly.push_back(std::abs(e[static_cast<std::size_t>(k)]));

  for (Index i = 0; i < dim; ++i)
    for (Index j = i + 1; j < dim; ++j)
      for (Index k = 0; k < dim; ++k)
        for (Index l = k + 1; l < dim; ++l)
          r.r_subdet = std::max(r.r_subdet, std::abs(rho(i, k) * rho(j, l) - rho(i, l) * rho(j, k)));

  r.pure_quadratic = r.r_trace < tol && r.r_quadratic < tol;
  r.pure_charpoly = r.max_charpoly() < tol;
  r.pure_subdet = r.r_subdet < tol;
  return r;
}

}  // namespace

double PositivityMatrix::min_eigenvalue() const { return eigenvalues_hermitian(entries)(0); }

PositivityMatrix positivity_matrix(const RVector& x, const StructureTensors& tensors) {
  const Index n = tensors.size();
  check_length(x, n, "positivity_matrix");
  CMatrix m(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) {
      Complex z = 0.0;
      for (Index k = 0; k < n; ++k) z += tensors.zee(k, i, j) * x(k);
      m(i, j) = z + tensors.gee()(i, j) - x(i) * x(j);
    }
  return {(m + m.adjoint()) * 0.5};
}

bool is_member_positivity(const RVector& x, const StructureTensors& tensors, double tol) {
  return positivity_matrix(x, tensors).min_eigenvalue() >= -tol;
}

double uncertainty_residual(const DensityMatrix& rho, const HermitianOperator& o1, const HermitianOperator& o2) {
  if (o1.dim() != rho.dim() || o2.dim() != rho.dim())
    throw DomainError("uncertainty_residual: operator and state dimensions differ");
  const CMatrix& r = rho.matrix();
  const CMatrix& a = o1.matrix();
  const CMatrix& b = o2.matrix();
  const double ea = trace_product(r, a);
  const double eb = trace_product(r, b);
  const double va = trace_product(r, a * a) - ea * ea;
  const double vb = trace_product(r, b * b) - eb * eb;
  const Complex comm = (r * (a * b - b * a)).trace() * Complex(0.0, 0.5);
  const double anti = 0.5 * trace_product(r, a * b + b * a) - ea * eb;
  return va * vb - std::norm(comm) - anti * anti;
}

double PurityReport::max_charpoly() const {
  return r_charpoly.empty() ? 0.0 : *std::max_element(r_charpoly.begin(), r_charpoly.end());
}

PurityReport purity_report(const RVector& x, const BasisSet& basis, const StructureTensors& tensors, double tol) {
  check_length(x, basis.size(), "purity_report");
  const HermitianOperator rho = state_from_coords(x, basis);
  if (eigenvalues_hermitian(rho.matrix())(0) < -1e-10)
    throw DomainError("purity_report: coordinates do not describe a positive state");
  return report_from(x, rho.matrix(), tensors, tol);
}

PurityReport purity_report(const DensityMatrix& rho, const BasisSet& basis, const StructureTensors& tensors,
                           double tol) {
  if (rho.dim() != basis.dim()) throw DomainError("purity_report: state and basis dimensions differ");
  return report_from(coords_from_state(rho, basis), rho.matrix(), tensors, tol);
}

}  // namespace expectation_atlas
