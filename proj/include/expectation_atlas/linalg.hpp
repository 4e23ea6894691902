#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace expectation_atlas {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;
using Index = Eigen::Index;

// Relative Frobenius tolerance for accepting a matrix as Hermitian.
inline constexpr double kHermitianTol = 1e-12;

// Two eigenvalues of an operator with spectral norm `norm` are treated as equal
// when they differ by less than this.
double degeneracy_threshold(double spectral_norm);

// Hermitian N x N matrix. The stored entries are exactly Hermitian: inputs
// within tolerance are symmetrized on construction.
class HermitianOperator {
 public:
  explicit HermitianOperator(CMatrix entries);

  static HermitianOperator identity(Index dim);
  static HermitianOperator diagonal(const RVector& values);

  Index dim() const { return m_.rows(); }
  const CMatrix& matrix() const { return m_; }
  double trace() const { return m_.trace().real(); }
  double frobenius_norm() const { return m_.norm(); }

 private:
  CMatrix m_;
};

// Unit-trace positive semidefinite Hermitian matrix.
class DensityMatrix {
 public:
  // Validates Hermiticity, unit trace and a minimum eigenvalue >= -1e-10.
  explicit DensityMatrix(CMatrix entries);

  // Builds V diag(p) V^dagger for orthonormal columns V and a probability
  // vector p. Valid by construction, so no spectral check is performed.
  static DensityMatrix from_spectrum(const CMatrix& vectors, const RVector& probabilities);

  static DensityMatrix maximally_mixed(Index dim);

  Index dim() const { return m_.rows(); }
  const CMatrix& matrix() const { return m_; }
  HermitianOperator as_operator() const { return HermitianOperator(m_); }

 private:
  struct Unchecked {};
  DensityMatrix(CMatrix entries, Unchecked) : m_(std::move(entries)) {}
  CMatrix m_;
};

struct EigenDecomposition {
  RVector values;   // ascending
  CMatrix vectors;  // orthonormal columns

  double spectral_norm() const;
  // Number of eigenvalues degenerate with the smallest one.
  Index ground_dimension() const;
};

// Eigendecomposition of a Hermitian matrix. Each eigenvector is rotated so
// that its first largest-magnitude component is real and positive.
EigenDecomposition eig_hermitian(const HermitianOperator& h);
// Same as above for a matrix the caller guarantees is Hermitian (only the
// lower triangle is read).
EigenDecomposition eig_hermitian_unchecked(const CMatrix& h);

RVector eigenvalues_hermitian(const CMatrix& h);

// Ordered set of traceless, linearly independent Hermitian operators on a
// common space, together with their Gram matrix tr(O_i O_j).
class OperatorSet {
 public:
  explicit OperatorSet(std::vector<HermitianOperator> ops, std::vector<std::string> labels = {});

  // Accepts operators with nonzero trace by splitting O_i = O_i' + c_i 1 and
  // keeping the traceless parts. The offsets c_i are retained; expectation
  // values of the original operators are those of O_i' shifted by c_i.
  static OperatorSet project_traceless(std::vector<HermitianOperator> ops,
                                       std::vector<std::string> labels = {});

  Index size() const { return static_cast<Index>(ops_.size()); }
  Index dim() const { return ops_.front().dim(); }
  const HermitianOperator& op(Index i) const { return ops_[static_cast<std::size_t>(i)]; }
  const std::vector<HermitianOperator>& ops() const { return ops_; }
  const RMatrix& gram() const { return gram_; }
  const std::vector<std::string>& labels() const { return labels_; }
  const RVector& offsets() const { return offsets_; }

  // sum_i coeffs_i O_i
  CMatrix combination(const RVector& coeffs) const;
  // Scaled copy {c O_i}; offsets scale too.
  OperatorSet scaled(double c) const;

 private:
  std::vector<HermitianOperator> ops_;
  std::vector<std::string> labels_;
  RMatrix gram_;
  RVector offsets_;
};

// Generalized Gell-Mann basis of the traceless Hermitian matrices, scaled so
// that tr(T_a T_b) = N delta_ab. Ordering: symmetric off-diagonal elements for
// pairs (j, k), j < k, in row-major order; then the antisymmetric ones in the
// same pair order (-i at (j, k), +i at (k, j)); then the N - 1 diagonal ones
// diag(1, ..., 1, -l, 0, ..., 0) for l = 1, ..., N - 1. At N = 2 this is
// (sigma_x, sigma_y, sigma_z).
class BasisSet {
 public:
  BasisSet(Index dim, std::vector<HermitianOperator> elements);

  Index dim() const { return dim_; }
  Index size() const { return static_cast<Index>(elements_.size()); }
  const HermitianOperator& element(Index a) const { return elements_[static_cast<std::size_t>(a)]; }
  const std::vector<HermitianOperator>& elements() const { return elements_; }

  OperatorSet as_operator_set() const;

 private:
  Index dim_;
  std::vector<HermitianOperator> elements_;
};

BasisSet build_basis(Index dim);

// Structure constants of a BasisSet:
//   T_i T_j = Z^k_ij T_k + gee_ij 1,         gee_ij = tr(T_i T_j) / N
//   s_abc   = tr({T_a, T_b} T_c) / (2 N^2),  totally symmetric,
// so that (1/2){T_a, T_b} = delta_ab 1 + N s_abc T_c.
class StructureTensors {
 public:
  StructureTensors(Index dim, Index size, std::vector<double> s, std::vector<Complex> zee, RMatrix gee);

  Index dim() const { return dim_; }
  Index size() const { return size_; }
  double s(Index a, Index b, Index c) const { return s_[flat(a, b, c)]; }
  // Z^k_ij
  Complex zee(Index k, Index i, Index j) const { return zee_[flat(k, i, j)]; }
  const RMatrix& gee() const { return gee_; }

 private:
  std::size_t flat(Index a, Index b, Index c) const {
    return static_cast<std::size_t>((a * size_ + b) * size_ + c);
  }
  Index dim_;
  Index size_;
  std::vector<double> s_;
  std::vector<Complex> zee_;
  RMatrix gee_;
};

StructureTensors structure_tensors(const BasisSet& basis);

// max_ij || T_i T_j - Z^k_ij T_k - gee_ij 1 ||_F
double reconstruction_residual(const BasisSet& basis, const StructureTensors& tensors);

// (1/N)(1 + sum_a x_a T_a). Hermitian with unit trace, not necessarily positive.
HermitianOperator state_from_coords(const RVector& x, const BasisSet& basis);
// x_a = tr(rho T_a)
RVector coords_from_state(const DensityMatrix& rho, const BasisSet& basis);
RVector coords_from_matrix(const CMatrix& rho, const BasisSet& basis);

HermitianOperator kron(const HermitianOperator& a, const HermitianOperator& b);
CMatrix kron(const CMatrix& a, const CMatrix& b);

// tr_B and tr_A of an operator on C^{na} (x) C^{nb}.
CMatrix partial_trace_second(const CMatrix& rho, Index na, Index nb);
CMatrix partial_trace_first(const CMatrix& rho, Index na, Index nb);

// GUE sample: (A + A^dagger)/2 with A having iid standard complex normal entries.
HermitianOperator random_hermitian(Index dim, std::uint64_t seed);
// Normalized Wishart sample G G^dagger / tr with G of shape dim x rank.
DensityMatrix random_density(Index dim, std::uint64_t seed, Index rank);
// Haar-random pure state |psi><psi|.
inline DensityMatrix random_pure_state(Index dim, std::uint64_t seed) { return random_density(dim, seed, 1); }

double trace_product(const CMatrix& a, const CMatrix& b);  // Re tr(a b)

}  // namespace expectation_atlas
