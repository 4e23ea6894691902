#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "expectation_atlas/boundary.hpp"
#include "expectation_atlas/errors.hpp"
#include "helpers.hpp"

using namespace expectation_atlas;

TEST_CASE("sweep over two Paulis traces the unit circle") {
  const BasisSet b = build_basis(2);
  const OperatorSet xy({b.element(0), b.element(1)});
  for (const auto& f : trace_boundary(xy, 72)) {
    REQUIRE(f.points.size() == 1);
    CHECK(std::abs(f.points[0].norm() - 1.0) < 1e-12);
    CHECK((f.points[0] + f.direction).norm() < 1e-12);
  }
}

TEST_CASE("degenerate face of the three-level example") {
  const OperatorSet ops = test_support::load_ops("defops.json");
  const BoundaryFace f = face(RVector{{1.0, 0.0}}, ops);
  CHECK(f.ground_dim == 2);
  CHECK(f.support == doctest::Approx(-1.0));
  REQUIRE(f.points.size() == 2);
  CHECK((f.points[0] - RVector{{-1.0, 1.0}}).norm() < 1e-12);
  CHECK((f.points[1] - RVector{{-1.0, -1.0}}).norm() < 1e-12);
  CHECK(f.projected_ops.size() == 2);

  // ground vector of O2 is (-sqrt2, 1, 1)/2
  const BoundaryFace g = face(RVector{{0.0, 2.0}}, ops);
  REQUIRE(g.points.size() == 1);
  CHECK((g.points[0] - RVector{{-0.25, -std::sqrt(2.0)}}).norm() < 1e-12);
}

TEST_CASE("sampled states never cross a supporting line") {
  const OperatorSet ops = test_support::load_ops("defops.json");
  const auto faces = trace_boundary(ops, 64);
  for (std::uint64_t s = 0; s < 50; ++s) {
    const RVector x = test_support::expectations(random_density(3, s, 1 + s % 3).matrix(), ops);
    for (const auto& f : faces) CHECK(f.direction.dot(x) >= f.support - 1e-12);
  }
}

TEST_CASE("threaded sweep matches the serial one") {
  const OperatorSet ops = test_support::load_ops("defops.json");
  const auto a = trace_boundary(ops, 40, 1);
  const auto b = trace_boundary(ops, 40, 3);
  REQUIRE(a.size() == b.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    REQUIRE(a[k].points.size() == b[k].points.size());
    for (std::size_t p = 0; p < a[k].points.size(); ++p) CHECK(a[k].points[p] == b[k].points[p]);
  }
}

TEST_CASE("sweep needs a pair and enough directions") {
  const OperatorSet paulis = build_basis(2).as_operator_set();
  CHECK_THROWS_AS(trace_boundary(paulis, 36), UnsupportedError);
  CHECK_THROWS_AS(eigenset(paulis, 36), UnsupportedError);
  const OperatorSet ops = test_support::load_ops("defops.json");
  CHECK_THROWS_AS(trace_boundary(ops, 4), DomainError);
  CHECK_THROWS_AS(face(RVector::Zero(2), ops), DomainError);
}

TEST_CASE("outer hull of the Bloch ball") {
  const OperatorSet paulis = build_basis(2).as_operator_set();
  const auto dirs = sphere_directions(3, 200);
  for (const auto& d : dirs) CHECK(d.norm() == doctest::Approx(1.0));
  const OuterHull hull = sampled_outer_hull(paulis, dirs);
  CHECK_FALSE(hull.contains(RVector{{0.0, 0.0, 1.5}}));
  CHECK(hull.contains(RVector{{0.2, -0.1, 0.3}}));
  CHECK(hull.max_violation(RVector::Zero(3)) == doctest::Approx(-1.0));
  for (std::uint64_t s = 0; s < 20; ++s)
    CHECK(hull.contains(coords_from_state(random_pure_state(2, s), build_basis(2))));
}

TEST_CASE("face refinement picks a point on a degenerate face") {
  // three commuting diagonal operators on C^4 with a two-fold ground space along e1
  const OperatorSet ops({HermitianOperator::diagonal(RVector{{-1.0, -1.0, 1.0, 1.0}}),
                         HermitianOperator::diagonal(RVector{{1.0, -1.0, 1.0, -1.0}}),
                         HermitianOperator::diagonal(RVector{{1.0, -1.0, -1.0, 1.0}})});
  FaceOptions opt;
  opt.max_depth = 2;
  opt.tie_breaks = {RVector{{0.0, 1.0, 0.0}}};
  const BoundaryFace f = face(RVector{{1.0, 0.0, 0.0}}, ops, opt);
  CHECK(f.ground_dim == 2);
  REQUIRE(f.points.size() == 1);
  CHECK((f.points[0] - RVector{{-1.0, -1.0, -1.0}}).norm() < 1e-12);
}

TEST_CASE("commuting pair gives the polytope of joint eigenvalues") {
  const OperatorSet ops = test_support::load_ops("commuting.json");
  auto v = commuting_polytope(ops);
  REQUIRE(v.size() == 3);
  std::sort(v.begin(), v.end(), [](const RVector& a, const RVector& b) { return a(0) < b(0); });
  CHECK((v[0] - RVector{{-1.0, 1.0}}).norm() < 1e-12);
  CHECK((v[1] - RVector{{0.0, -2.0}}).norm() < 1e-12);
  CHECK((v[2] - RVector{{1.0, 1.0}}).norm() < 1e-12);
  const OperatorSet paulis = build_basis(2).as_operator_set();
  CHECK_THROWS_AS(commuting_polytope(paulis), PreconditionError);
  CHECK(max_commutator_norm(paulis) == doctest::Approx(std::sqrt(8.0)));
}

TEST_CASE("eigenset of a commuting pair repeats the vertices") {
  const OperatorSet ops = test_support::load_ops("commuting.json");
  const auto pts = eigenset(ops, 16);
  CHECK(pts.size() == 16 * 3);
  const auto verts = commuting_polytope(ops);
  for (const auto& p : pts) {
    double best = 1e9;
    for (const auto& v : verts) best = std::min(best, (p.point - v).norm());
    CHECK(best < 1e-12);
  }
}
