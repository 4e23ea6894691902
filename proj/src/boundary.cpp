#include "expectation_atlas/boundary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>

#include <boost/math/special_functions/erf.hpp>

#include "expectation_atlas/errors.hpp"
#include "expectation_atlas/parallel.hpp"

namespace expectation_atlas {

namespace {

RVector unit_direction(const RVector& direction, const OperatorSet& ops) {
  if (direction.size() != ops.size()) {
    std::ostringstream msg;
    msg << "direction has length " << direction.size() << " but the operator set has " << ops.size() << " operators";
    throw DomainError(msg.str());
  }
  const double norm = direction.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) throw DomainError("direction must be a non-zero finite vector");
  return direction / norm;
}

RVector expectation_in(const CMatrix& v, const std::vector<CMatrix>& ops) {
  RVector x(static_cast<Index>(ops.size()));
  for (std::size_t i = 0; i < ops.size(); ++i) x(static_cast<Index>(i)) = (v.adjoint() * ops[i] * v)(0, 0).real();
  return x;
}

CMatrix combine(const std::vector<CMatrix>& ops, const RVector& coeffs) {
  CMatrix out = CMatrix::Zero(ops.front().rows(), ops.front().cols());
  for (std::size_t i = 0; i < ops.size(); ++i) out += coeffs(static_cast<Index>(i)) * ops[i];
  return out;
}

std::vector<CMatrix> compress(const std::vector<CMatrix>& ops, const CMatrix& basis) {
  std::vector<CMatrix> out;
  out.reserve(ops.size());
  for (const auto& o : ops) {
    CMatrix p = basis.adjoint() * o * basis;
    out.push_back((p + p.adjoint()) * 0.5);
  }
  return out;
}

// Lexicographic refinement of a degenerate face: minimize along each tie-break
// direction in turn inside the current ground space.
std::optional<RVector> refine(std::vector<CMatrix> ops, const std::vector<RVector>& tie_breaks, int depth) {
  for (int level = 0; level < depth && static_cast<std::size_t>(level) < tie_breaks.size(); ++level) {
    const RVector& d = tie_breaks[static_cast<std::size_t>(level)];
    if (d.size() != static_cast<Index>(ops.size())) throw DomainError("face: tie-break direction has wrong length");
    const EigenDecomposition eig = eig_hermitian_unchecked(combine(ops, d));
    const Index m = eig.ground_dimension();
    if (m == 1) return expectation_in(eig.vectors.col(0), ops);
    ops = compress(ops, eig.vectors.leftCols(m));
  }
  if (ops.front().rows() == 1) return expectation_in(CMatrix::Identity(1, 1), ops);
  return std::nullopt;
}

}  // namespace

double support_value(const RVector& direction, const OperatorSet& ops) {
  const RVector e = unit_direction(direction, ops);
  return eigenvalues_hermitian(ops.combination(e))(0);
}

BoundaryFace face(const RVector& direction, const OperatorSet& ops, const FaceOptions& options) {
  const RVector e = unit_direction(direction, ops);
  const EigenDecomposition eig = eig_hermitian_unchecked(ops.combination(e));

  BoundaryFace f;
  f.direction = e;
  f.theta = ops.size() == 2 ? std::atan2(e(1), e(0)) : 0.0;
  f.support = eig.values(0);
  f.ground_dim = eig.ground_dimension();

  std::vector<CMatrix> full;
  full.reserve(static_cast<std::size_t>(ops.size()));
  for (const auto& o : ops.ops()) full.push_back(o.matrix());

  if (f.ground_dim == 1) {
    f.points.push_back(expectation_in(eig.vectors.col(0), full));
    return f;
  }

  const std::vector<CMatrix> projected = compress(full, eig.vectors.leftCols(f.ground_dim));
  for (const auto& p : projected) f.projected_ops.emplace_back(p);

  if (ops.size() == 2) {
    // The face is a segment on the line e.x = support; its extent along the
    // tangent is the spectrum of the compressed tangent operator.
    const RVector tangent{{-e(1), e(0)}};
    const RVector spec = eigenvalues_hermitian(combine(projected, tangent));
    const double lo = spec(0);
    const double hi = spec(spec.size() - 1);
    f.points.push_back(f.support * e + hi * tangent);
    f.points.push_back(f.support * e + lo * tangent);
  } else if (options.max_depth > 1) {
    if (auto p = refine(projected, options.tie_breaks, options.max_depth - 1)) f.points.push_back(*p);
  }
  return f;
}

std::vector<BoundaryFace> trace_boundary(const OperatorSet& ops, int num_dirs, int threads) {
  if (ops.size() != 2) {
    std::ostringstream msg;
    msg << "trace_boundary supports exactly 2 operators, got " << ops.size()
        << "; use sampled_outer_hull for higher-dimensional sets";
    throw UnsupportedError(msg.str());
  }
  if (num_dirs < 8) throw DomainError("trace_boundary: num_dirs must be >= 8");
  std::vector<BoundaryFace> faces(static_cast<std::size_t>(num_dirs));
  parallel_for(faces.size(), threads, [&](std::size_t k) {
    const double theta = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(num_dirs);
    BoundaryFace f = face(RVector{{std::cos(theta), std::sin(theta)}}, ops);
    f.theta = theta;
    faces[k] = std::move(f);
  });
  return faces;
}

bool OuterHull::contains(const RVector& x, double tol) const { return max_violation(x) <= tol; }

double OuterHull::max_violation(const RVector& x) const {
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& row : rows_) {
    if (row.direction.size() != x.size()) throw DomainError("OuterHull: point has wrong length");
    worst = std::max(worst, row.support - row.direction.dot(x));
  }
  return worst;
}

OuterHull sampled_outer_hull(const OperatorSet& ops, std::span<const RVector> directions, int threads) {
  if (directions.empty()) throw DomainError("sampled_outer_hull: no directions");
  std::vector<OuterHull::Row> rows(directions.size());
  parallel_for(rows.size(), threads, [&](std::size_t k) {
    const RVector e = unit_direction(directions[k], ops);
    rows[k] = {e, support_value(e, ops)};
  });
  return OuterHull(std::move(rows));
}

std::vector<RVector> sphere_directions(Index n, int count, std::uint64_t seed) {
  if (n < 1) throw DomainError("sphere_directions: dimension must be >= 1");
  if (count < 1) throw DomainError("sphere_directions: count must be >= 1");
  std::vector<RVector> out;
  out.reserve(static_cast<std::size_t>(count));
  if (n == 1) {
    for (int k = 0; k < count; ++k) out.push_back(RVector::Constant(1, k % 2 == 0 ? 1.0 : -1.0));
    return out;
  }
  if (n == 2) {
    for (int k = 0; k < count; ++k) {
      const double theta = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(count);
      out.push_back(RVector{{std::cos(theta), std::sin(theta)}});
    }
    return out;
  }
  std::vector<std::uint64_t> primes;
  for (std::uint64_t c = 2; static_cast<Index>(primes.size()) < n; ++c) {
    bool prime = true;
    for (auto p : primes) {
      if (p * p > c) break;
      if (c % p == 0) {
        prime = false;
        break;
      }
    }
    if (prime) primes.push_back(c);
  }
  for (std::uint64_t index = seed + 1; static_cast<int>(out.size()) < count; ++index) {
    RVector v(n);
    for (Index a = 0; a < n; ++a) {
      const std::uint64_t base = primes[static_cast<std::size_t>(a)];
      double f = 1.0, u = 0.0;
      for (std::uint64_t i = index; i > 0; i /= base) {
        f /= static_cast<double>(base);
        u += f * static_cast<double>(i % base);
      }
      v(a) = std::sqrt(2.0) * boost::math::erf_inv(2.0 * u - 1.0);
    }
    const double norm = v.norm();
    if (norm > 1e-12) out.push_back(v / norm);
  }
  return out;
}

double max_commutator_norm(const OperatorSet& ops) {
  double worst = 0.0;
  for (Index i = 0; i < ops.size(); ++i)
    for (Index j = i + 1; j < ops.size(); ++j) {
      const CMatrix& a = ops.op(i).matrix();
      const CMatrix& b = ops.op(j).matrix();
      worst = std::max(worst, (a * b - b * a).norm());
    }
  return worst;
}

std::vector<RVector> commuting_polytope(const OperatorSet& ops, double tol) {
  const double comm = max_commutator_norm(ops);
  if (!(comm < tol)) {
    std::ostringstream msg;
    msg << "commuting_polytope: operators do not commute (max ||[O_i, O_j]||_F = " << comm << ", tolerance " << tol
        << ")";
    throw PreconditionError(msg.str());
  }
  std::mt19937_64 rng(0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> normal(0.0, 1.0);
  RVector coeffs(ops.size());
  for (Index i = 0; i < ops.size(); ++i) coeffs(i) = normal(rng);
  const EigenDecomposition eig = eig_hermitian_unchecked(ops.combination(coeffs));

  std::vector<CMatrix> full;
  for (const auto& o : ops.ops()) full.push_back(o.matrix());
  std::vector<RVector> vertices;
  for (Index k = 0; k < eig.vectors.cols(); ++k) {
    RVector p = expectation_in(eig.vectors.col(k), full);
    const bool seen = std::any_of(vertices.begin(), vertices.end(),
                                  [&](const RVector& q) { return (q - p).cwiseAbs().maxCoeff() < 1e-9; });
    if (!seen) vertices.push_back(std::move(p));
  }
  return vertices;
}

std::vector<EigensetPoint> eigenset(const OperatorSet& ops, int num_dirs, int threads) {
  if (ops.size() != 2) {
    std::ostringstream msg;
    msg << "eigenset supports exactly 2 operators, got " << ops.size()
        << "; use sampled_outer_hull for higher-dimensional sets";
    throw UnsupportedError(msg.str());
  }
  if (num_dirs < 1) throw DomainError("eigenset: num_dirs must be >= 1");
  const Index dim = ops.dim();
  std::vector<CMatrix> full;
  for (const auto& o : ops.ops()) full.push_back(o.matrix());

  std::vector<EigensetPoint> points(static_cast<std::size_t>(num_dirs * dim));
  parallel_for(static_cast<std::size_t>(num_dirs), threads, [&](std::size_t k) {
    const double theta = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(num_dirs);
    const RVector e{{std::cos(theta), std::sin(theta)}};
    const EigenDecomposition eig = eig_hermitian_unchecked(ops.combination(e));
    for (Index level = 0; level < dim; ++level) {
      points[k * static_cast<std::size_t>(dim) + static_cast<std::size_t>(level)] =
          EigensetPoint{e, theta, level, expectation_in(eig.vectors.col(level), full)};
    }
  });
  return points;
}

}  // namespace expectation_atlas
