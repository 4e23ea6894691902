#include "expectation_atlas/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "expectation_atlas/errors.hpp"

namespace expectation_atlas {

namespace {

void require_square(const CMatrix& m, const char* what) {
  if (m.rows() == 0 || m.rows() != m.cols()) {
    std::ostringstream msg;
    msg << what << ": expected a non-empty square matrix, got " << m.rows() << "x" << m.cols();
    throw ValidationError(msg.str());
  }
}

bool is_hermitian(const CMatrix& m) {
  const double scale = m.norm();
  const double asym = (m - m.adjoint()).norm();
  return asym <= kHermitianTol * std::max(scale, 1e-300) || asym == 0.0;
}

void fix_phases(CMatrix& vectors) {
  for (Index c = 0; c < vectors.cols(); ++c) {
    Index best = 0;
    double best_mag = -1.0;
    for (Index r = 0; r < vectors.rows(); ++r) {
      const double mag = std::abs(vectors(r, c));
      // Small relative slack so that numerically tied components resolve to
      // the lowest index on every run.
      if (mag > best_mag * (1.0 + 1e-10)) {
        best_mag = mag;
        best = r;
      }
    }
    if (best_mag > 0.0) {
      const Complex phase = std::conj(vectors(best, c)) / best_mag;
      vectors.col(c) *= phase;
      vectors(best, c) = Complex(std::abs(vectors(best, c)), 0.0);
    }
  }
}

Complex trace_of_product(const CMatrix& a, const CMatrix& b) {
  return a.cwiseProduct(b.transpose()).sum();
}

}  // namespace

double degeneracy_threshold(double spectral_norm) { return 1e-9 * std::max(1.0, spectral_norm); }

HermitianOperator::HermitianOperator(CMatrix entries) {
  require_square(entries, "HermitianOperator");
  if (!entries.allFinite()) throw ValidationError("HermitianOperator: non-finite entries");
  if (!is_hermitian(entries)) throw ValidationError("HermitianOperator: matrix is not Hermitian");
  m_ = (entries + entries.adjoint()) * 0.5;
}

HermitianOperator HermitianOperator::identity(Index dim) {
  if (dim < 1) throw DomainError("identity: dim must be >= 1");
  return HermitianOperator(CMatrix::Identity(dim, dim));
}

HermitianOperator HermitianOperator::diagonal(const RVector& values) {
  return HermitianOperator(values.cast<Complex>().asDiagonal().toDenseMatrix());
}

DensityMatrix::DensityMatrix(CMatrix entries) {
  require_square(entries, "DensityMatrix");
  if (!entries.allFinite()) throw ValidationError("DensityMatrix: non-finite entries");
  if (!is_hermitian(entries)) throw ValidationError("DensityMatrix: matrix is not Hermitian");
  entries = (entries + entries.adjoint()) * 0.5;
  const double tr = entries.trace().real();
  if (std::abs(tr - 1.0) > 1e-12) {
    std::ostringstream msg;
    msg << "DensityMatrix: trace " << tr << " differs from 1";
    throw ValidationError(msg.str());
  }
  const double min_eig = eigenvalues_hermitian(entries).minCoeff();
  if (min_eig < -1e-10) {
    std::ostringstream msg;
    msg << "DensityMatrix: negative eigenvalue " << min_eig;
    throw ValidationError(msg.str());
  }
  m_ = std::move(entries);
}

DensityMatrix DensityMatrix::from_spectrum(const CMatrix& vectors, const RVector& probabilities) {
  if (vectors.cols() != probabilities.size() || vectors.rows() != vectors.cols()) {
    throw DomainError("DensityMatrix::from_spectrum: shape mismatch");
  }
  if ((probabilities.array() < 0.0).any() || std::abs(probabilities.sum() - 1.0) > 1e-12) {
    throw ValidationError("DensityMatrix::from_spectrum: weights are not a probability vector");
  }
  CMatrix rho = vectors * probabilities.cast<Complex>().asDiagonal() * vectors.adjoint();
  rho = (rho + rho.adjoint()) * 0.5;
  // Renormalize away the roundoff of the triple product.
  rho /= rho.trace().real();
  return DensityMatrix(std::move(rho), Unchecked{});
}

DensityMatrix DensityMatrix::maximally_mixed(Index dim) {
  if (dim < 1) throw DomainError("maximally_mixed: dim must be >= 1");
  return DensityMatrix(CMatrix::Identity(dim, dim) / static_cast<double>(dim), Unchecked{});
}

double EigenDecomposition::spectral_norm() const {
  if (values.size() == 0) return 0.0;
  return std::max(std::abs(values(0)), std::abs(values(values.size() - 1)));
}

Index EigenDecomposition::ground_dimension() const {
  const double thr = degeneracy_threshold(spectral_norm());
  Index m = 1;
  while (m < values.size() && values(m) - values(0) < thr) ++m;
  return m;
}

EigenDecomposition eig_hermitian(const HermitianOperator& h) { return eig_hermitian_unchecked(h.matrix()); }

EigenDecomposition eig_hermitian_unchecked(const CMatrix& h) {
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(h, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "eig_hermitian: eigensolver did not converge for a " << h.rows() << "x" << h.cols()
        << " matrix (Frobenius norm " << h.norm() << ")";
    throw NumericalError(msg.str());
  }
  EigenDecomposition out{solver.eigenvalues(), solver.eigenvectors()};
  fix_phases(out.vectors);
  return out;
}

RVector eigenvalues_hermitian(const CMatrix& h) {
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(h, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericalError("eigenvalues_hermitian: eigensolver did not converge");
  return solver.eigenvalues();
}

OperatorSet::OperatorSet(std::vector<HermitianOperator> ops, std::vector<std::string> labels)
    : ops_(std::move(ops)), labels_(std::move(labels)) {
  if (ops_.empty()) throw ValidationError("OperatorSet: at least one operator is required");
  const Index n = size();
  const Index dim = ops_.front().dim();
  for (Index i = 0; i < n; ++i) {
    const auto& o = ops_[static_cast<std::size_t>(i)];
    if (o.dim() != dim) {
      std::ostringstream msg;
      msg << "OperatorSet: operator " << i << " has dim " << o.dim() << ", expected " << dim;
      throw ValidationError(msg.str());
    }
    if (std::abs(o.trace()) > 1e-12 * static_cast<double>(dim)) {
      std::ostringstream msg;
      msg << "OperatorSet: operator " << i << " has trace " << o.trace()
          << " (traceless operators required; use project_traceless)";
      throw ValidationError(msg.str());
    }
  }
  if (labels_.empty()) {
    for (Index i = 0; i < n; ++i) labels_.push_back("O" + std::to_string(i + 1));
  } else if (static_cast<Index>(labels_.size()) != n) {
    throw ValidationError("OperatorSet: label count does not match operator count");
  }
  gram_.resize(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = i; j < n; ++j) {
      gram_(i, j) = gram_(j, i) = trace_product(op(i).matrix(), op(j).matrix());
    }
  }
  const RVector gram_eigs = Eigen::SelfAdjointEigenSolver<RMatrix>(gram_, Eigen::EigenvaluesOnly).eigenvalues();
  if (!(gram_eigs(0) >= 1e-10 * gram_eigs(n - 1)) || gram_eigs(n - 1) <= 0.0) {
    std::ostringstream msg;
    msg << "OperatorSet: operators are linearly dependent (Gram eigenvalues " << gram_eigs(0) << " .. "
        << gram_eigs(n - 1) << ")";
    throw ValidationError(msg.str());
  }
  offsets_ = RVector::Zero(n);
}

OperatorSet OperatorSet::project_traceless(std::vector<HermitianOperator> ops, std::vector<std::string> labels) {
  RVector offsets(static_cast<Index>(ops.size()));
  std::vector<HermitianOperator> traceless;
  traceless.reserve(ops.size());
  for (std::size_t i = 0; i < ops.size(); ++i) {
    const double c = ops[i].trace() / static_cast<double>(ops[i].dim());
    offsets(static_cast<Index>(i)) = c;
    CMatrix m = ops[i].matrix();
    m.diagonal().array() -= c;
    traceless.emplace_back(std::move(m));
  }
  OperatorSet out(std::move(traceless), std::move(labels));
  out.offsets_ = offsets;
  return out;
}

CMatrix OperatorSet::combination(const RVector& coeffs) const {
  if (coeffs.size() != size()) {
    std::ostringstream msg;
    msg << "OperatorSet::combination: expected " << size() << " coefficients, got " << coeffs.size();
    throw DomainError(msg.str());
  }
  CMatrix out = CMatrix::Zero(dim(), dim());
  for (Index i = 0; i < size(); ++i) {
    if (coeffs(i) != 0.0) out += coeffs(i) * op(i).matrix();
  }
  return out;
}

OperatorSet OperatorSet::scaled(double c) const {
  std::vector<HermitianOperator> ops;
  for (const auto& o : ops_) ops.emplace_back(c * o.matrix());
  OperatorSet out(std::move(ops), labels_);
  out.offsets_ = c * offsets_;
  return out;
}

BasisSet::BasisSet(Index dim, std::vector<HermitianOperator> elements) : dim_(dim), elements_(std::move(elements)) {}

OperatorSet BasisSet::as_operator_set() const {
  std::vector<std::string> labels;
  for (Index a = 0; a < size(); ++a) labels.push_back("T" + std::to_string(a + 1));
  return OperatorSet(elements_, std::move(labels));
}

BasisSet build_basis(Index dim) {
  if (dim < 2) throw DomainError("build_basis: dimension must be >= 2");
  const double scale = std::sqrt(static_cast<double>(dim) / 2.0);
  std::vector<HermitianOperator> elements;
  elements.reserve(static_cast<std::size_t>(dim * dim - 1));
  for (Index j = 0; j < dim; ++j) {
    for (Index k = j + 1; k < dim; ++k) {
      CMatrix g = CMatrix::Zero(dim, dim);
      g(j, k) = g(k, j) = scale;
      elements.emplace_back(std::move(g));
    }
  }
  for (Index j = 0; j < dim; ++j) {
    for (Index k = j + 1; k < dim; ++k) {
      CMatrix g = CMatrix::Zero(dim, dim);
      g(j, k) = Complex(0.0, -scale);
      g(k, j) = Complex(0.0, scale);
      elements.emplace_back(std::move(g));
    }
  }
  for (Index l = 1; l < dim; ++l) {
    const double ld = static_cast<double>(l);
    const double norm = scale * std::sqrt(2.0 / (ld * (ld + 1.0)));
    CMatrix g = CMatrix::Zero(dim, dim);
    for (Index i = 0; i < l; ++i) g(i, i) = norm;
    g(l, l) = -ld * norm;
    elements.emplace_back(std::move(g));
  }
  return BasisSet(dim, std::move(elements));
}

StructureTensors::StructureTensors(Index dim, Index size, std::vector<double> s, std::vector<Complex> zee, RMatrix gee)
    : dim_(dim), size_(size), s_(std::move(s)), zee_(std::move(zee)), gee_(std::move(gee)) {}

StructureTensors structure_tensors(const BasisSet& basis) {
  const Index d = basis.size();
  const double n = static_cast<double>(basis.dim());
  const auto usize = static_cast<std::size_t>(d * d * d);
  std::vector<double> s(usize);
  std::vector<Complex> zee(usize);
  RMatrix gee(d, d);

  // triple(i, j, k) = tr(T_i T_j T_k)
  std::vector<Complex> triple(usize);
  for (Index i = 0; i < d; ++i) {
    for (Index j = 0; j < d; ++j) {
      const CMatrix prod = basis.element(i).matrix() * basis.element(j).matrix();
      gee(i, j) = prod.trace().real() / n;
      for (Index k = 0; k < d; ++k) {
        triple[static_cast<std::size_t>((i * d + j) * d + k)] = trace_of_product(prod, basis.element(k).matrix());
      }
    }
  }
  for (Index i = 0; i < d; ++i) {
    for (Index j = 0; j < d; ++j) {
      for (Index k = 0; k < d; ++k) {
        const Complex t = triple[static_cast<std::size_t>((i * d + j) * d + k)];
        // Dual basis of an orthogonal basis with tr(T_a T_b) = N delta_ab is T_a / N.
        zee[static_cast<std::size_t>((k * d + i) * d + j)] = t / n;
        // tr({T_a,T_b}T_c) = 2 Re tr(T_a T_b T_c)
        s[static_cast<std::size_t>((i * d + j) * d + k)] = t.real() / (n * n);
      }
    }
  }
  return StructureTensors(basis.dim(), d, std::move(s), std::move(zee), std::move(gee));
}

double reconstruction_residual(const BasisSet& basis, const StructureTensors& tensors) {
  const Index d = basis.size();
  double worst = 0.0;
  for (Index i = 0; i < d; ++i) {
    for (Index j = 0; j < d; ++j) {
      CMatrix r = basis.element(i).matrix() * basis.element(j).matrix();
      r.diagonal().array() -= tensors.gee()(i, j);
      for (Index k = 0; k < d; ++k) r -= tensors.zee(k, i, j) * basis.element(k).matrix();
      worst = std::max(worst, r.norm());
    }
  }
  return worst;
}

HermitianOperator state_from_coords(const RVector& x, const BasisSet& basis) {
  if (x.size() != basis.size()) {
    std::ostringstream msg;
    msg << "state_from_coords: expected " << basis.size() << " coordinates, got " << x.size();
    throw DomainError(msg.str());
  }
  const Index n = basis.dim();
  CMatrix rho = CMatrix::Identity(n, n);
  for (Index a = 0; a < x.size(); ++a) rho += x(a) * basis.element(a).matrix();
  return HermitianOperator(rho / static_cast<double>(n));
}

RVector coords_from_matrix(const CMatrix& rho, const BasisSet& basis) {
  if (rho.rows() != basis.dim() || rho.cols() != basis.dim()) {
    throw DomainError("coords_from_state: state and basis dimensions differ");
  }
  RVector x(basis.size());
  for (Index a = 0; a < basis.size(); ++a) x(a) = trace_product(rho, basis.element(a).matrix());
  return x;
}

RVector coords_from_state(const DensityMatrix& rho, const BasisSet& basis) {
  return coords_from_matrix(rho.matrix(), basis);
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

HermitianOperator kron(const HermitianOperator& a, const HermitianOperator& b) {
  return HermitianOperator(kron(a.matrix(), b.matrix()));
}

CMatrix partial_trace_second(const CMatrix& rho, Index na, Index nb) {
  if (rho.rows() != na * nb || rho.cols() != na * nb) throw DomainError("partial_trace: dimension mismatch");
  CMatrix out = CMatrix::Zero(na, na);
  for (Index a = 0; a < na; ++a)
    for (Index ap = 0; ap < na; ++ap)
      for (Index b = 0; b < nb; ++b) out(a, ap) += rho(a * nb + b, ap * nb + b);
  return out;
}

CMatrix partial_trace_first(const CMatrix& rho, Index na, Index nb) {
  if (rho.rows() != na * nb || rho.cols() != na * nb) throw DomainError("partial_trace: dimension mismatch");
  CMatrix out = CMatrix::Zero(nb, nb);
  for (Index b = 0; b < nb; ++b)
    for (Index bp = 0; bp < nb; ++bp)
      for (Index a = 0; a < na; ++a) out(b, bp) += rho(a * nb + b, a * nb + bp);
  return out;
}

namespace {

CMatrix gaussian_matrix(Index rows, Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  CMatrix g(rows, cols);
  for (Index c = 0; c < cols; ++c)
    for (Index r = 0; r < rows; ++r) {
      const double re = normal(rng);
      const double im = normal(rng);
      g(r, c) = Complex(re, im);
    }
  return g;
}

}  // namespace

HermitianOperator random_hermitian(Index dim, std::uint64_t seed) {
  if (dim < 1) throw DomainError("random_hermitian: dim must be >= 1");
  const CMatrix a = gaussian_matrix(dim, dim, seed);
  return HermitianOperator((a + a.adjoint()) * 0.5);
}

DensityMatrix random_density(Index dim, std::uint64_t seed, Index rank) {
  if (dim < 1) throw DomainError("random_density: dim must be >= 1");
  if (rank < 1 || rank > dim) {
    std::ostringstream msg;
    msg << "random_density: rank " << rank << " outside [1, " << dim << "]";
    throw DomainError(msg.str());
  }
  const CMatrix g = gaussian_matrix(dim, rank, seed);
  // Orthonormalize the columns so the spectrum is exact and rank is exact.
  Eigen::HouseholderQR<CMatrix> qr(g);
  const CMatrix q = qr.householderQ() * CMatrix::Identity(dim, rank);
  const CMatrix r = qr.matrixQR().topRows(rank).triangularView<Eigen::Upper>();
  // G G^dagger = Q (R R^dagger) Q^dagger; diagonalize the small rank x rank core.
  const CMatrix core = r * r.adjoint();
  Eigen::SelfAdjointEigenSolver<CMatrix> small(core);
  RVector p = small.eigenvalues().cwiseMax(0.0);
  p /= p.sum();
  CMatrix vecs = CMatrix::Zero(dim, dim);
  vecs.leftCols(rank) = q * small.eigenvectors();
  RVector probs = RVector::Zero(dim);
  probs.head(rank) = p;
  // Remaining columns are irrelevant (zero weight) but from_spectrum expects a
  // square matrix.
  return DensityMatrix::from_spectrum(vecs, probs);
}

double trace_product(const CMatrix& a, const CMatrix& b) { return trace_of_product(a, b).real(); }

}  // namespace expectation_atlas
