#include "altproj/hilbert.hpp"

#include "../oracles.hpp"

#include <doctest.h>

#include <random>

using namespace altproj;

TEST_SUITE("hilbert") {

TEST_CASE("projector agrees with the normal-equation projector") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const Index d = 2 + trial % 6;
    const Index r = 1 + trial % d;
    const Matrix A = oracle::random_matrix(d, r, rng);
    const Subspace s = Subspace::from_columns(A);
    REQUIRE(s.rank() == r);
    CHECK((s.projector() - oracle::gram_projector(A)).cwiseAbs().maxCoeff() < 1e-10);
    const Vector x = oracle::random_vector(d, rng);
    CHECK((s.project(x) + s.residual(x) - x).norm() < 1e-12 * (1 + x.norm()));
    CHECK(distance(s, x) == doctest::Approx(s.residual(x).norm()).epsilon(1e-14));
  }
}

TEST_CASE("orthonormal basis and complement") {
  std::mt19937_64 rng(3);
  const Matrix A = oracle::random_matrix(5, 2, rng);
  const Subspace s = Subspace::from_columns(A);
  const Matrix& B = s.basis();
  CHECK((B.transpose() * B - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);
  const Subspace c = complement(s);
  CHECK(c.rank() == 3);
  CHECK((s.projector() + c.projector() - Matrix::Identity(5, 5)).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((B.transpose() * c.basis()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("rank-deficient spanning sets") {
  Matrix A(3, 3);
  A << 1, 2, 3,
       0, 0, 0,
       1, 2, 3.0000000000001;
  CHECK(Subspace::from_columns(A).rank() == 1);
  std::vector<Vector> v{Vector::Unit(4, 0), Vector::Unit(4, 1), Vector::Unit(4, 0) + Vector::Unit(4, 1)};
  CHECK(subspace_from_spanning(v, 4).rank() == 2);
  CHECK(Subspace::from_columns(Matrix::Zero(3, 2)).rank() == 0);
}

TEST_CASE("zero and full subspaces") {
  const Vector x = (Vector(3) << 1, -2, 3).finished();
  const Subspace z(3);
  CHECK(z.is_zero());
  CHECK(z.project(x).norm() == 0.0);
  CHECK(distance(z, x) == doctest::Approx(x.norm()));
  const Subspace f = Subspace::full(3);
  CHECK((f.project(x) - x).norm() < 1e-15);
  CHECK(complement(f).rank() == 0);
  CHECK_THROWS_AS(Subspace(0), PreconditionError);
}

TEST_CASE("from_orthonormal validates") {
  Matrix b(2, 1);
  b << 1, 1;
  CHECK_THROWS_AS(Subspace::from_orthonormal(b), PreconditionError);
  b /= std::sqrt(2.0);
  CHECK_NOTHROW(Subspace::from_orthonormal(b));
}

TEST_CASE("stable norm survives tiny and huge scales") {
  Vector x(3);
  x << 3e-200, 4e-200, 0;
  CHECK(stable_norm(x) == doctest::Approx(5e-200).epsilon(1e-14));
  x << 3e200, 4e200, 0;
  CHECK(stable_norm(x) == doctest::Approx(5e200).epsilon(1e-14));
  CHECK(stable_norm(Vector()) == 0.0);
}

TEST_CASE("families need a trivial intersection") {
  Matrix e1 = Matrix::Zero(2, 1);
  e1(0, 0) = 1;
  const Subspace l(Subspace::from_orthonormal(e1));
  CHECK_THROWS_AS(SubspaceFamily({l, l}), PreconditionError);
  CHECK_THROWS_AS(SubspaceFamily({l}), PreconditionError);
  CHECK_THROWS_AS(SubspaceFamily({l, Subspace::full(3)}), PreconditionError);

  Matrix e2 = Matrix::Zero(2, 1);
  e2(1, 0) = 1;
  const SubspaceFamily f({l, Subspace::from_orthonormal(e2)});
  CHECK(f.size() == 2);
  CHECK(f.member(2).basis()(1, 0) == 1.0);
  CHECK(f.complement_of(1).basis().cwiseAbs()(1, 0) == doctest::Approx(1.0));
  CHECK_THROWS_AS(f.member(0), PreconditionError);
  CHECK_THROWS_AS(f.member(3), PreconditionError);
  CHECK(f.stacked_complements().cols() == 2);
  CHECK(sum_of_complements_is_full(f));
}

TEST_CASE("complement sum test on raw spans") {
  // Two planes in R^3 sharing a line: the complements span only a plane.
  std::vector<Subspace> planes{Subspace::from_columns((Matrix(3, 2) << 1, 0, 0, 1, 0, 0).finished()),
                               Subspace::from_columns((Matrix(3, 2) << 1, 0, 0, 0, 0, 1).finished())};
  CHECK_FALSE(sum_of_complements_is_full(planes));
  const Vector along = (Vector(3) << 1, 0, 0).finished();   // in the common line
  const Vector across = (Vector(3) << 0, 1, 1).finished();  // in the complement sum
  CHECK(complement_sum_residual(planes, along) == doctest::Approx(1.0));
  CHECK(complement_sum_residual(planes, across) < 1e-12);
}

TEST_CASE("subspace sum") {
  std::vector<Subspace> parts{Subspace::from_columns(Vector::Unit(4, 0)),
                              Subspace::from_columns(Vector::Unit(4, 1)),
                              Subspace::from_columns(Vector::Unit(4, 0) + Vector::Unit(4, 1))};
  CHECK(subspace_sum(parts).rank() == 2);
}

TEST_CASE("dimension and finiteness checks") {
  const Subspace s = Subspace::from_columns(Vector::Unit(3, 0));
  CHECK_THROWS_AS(s.project(Vector::Ones(2)), PreconditionError);
  Vector bad = Vector::Ones(3);
  bad(1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(require_finite(bad, "x"), PreconditionError);
  CHECK_THROWS_AS(require_dim(bad, 2, "x"), PreconditionError);
}

}
