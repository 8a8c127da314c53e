#include "altproj/constructions.hpp"
#include "altproj/quantities.hpp"

#include "../oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace altproj;

namespace {

Subspace line(double angle) {
  return Subspace::from_columns((Vector(2) << std::cos(angle), std::sin(angle)).finished());
}

std::vector<Matrix> member_bases(const SubspaceFamily& f) {
  std::vector<Matrix> out;
  for (const auto& m : f.members()) out.push_back(m.basis());
  return out;
}

std::vector<Matrix> complement_bases(const SubspaceFamily& f) {
  std::vector<Matrix> out;
  for (const auto& c : f.complements()) out.push_back(c.basis());
  return out;
}

}  // namespace

TEST_SUITE("quantities") {

TEST_CASE("Friedrichs number of two lines is the cosine of their angle") {
  for (double theta : {M_PI / 6, M_PI / 4, M_PI / 3, 0.01, M_PI / 2}) {
    const SubspaceFamily f({line(0.3), line(0.3 + theta)});
    CHECK(std::abs(friedrichs_number(f) - std::cos(theta)) < 1e-10);
  }
}

TEST_CASE("Friedrichs number matches the sampled Rayleigh quotient") {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const Index d = 3 + static_cast<Index>(s % 2);
    const std::size_t K = 2 + s % 2;
    const SubspaceFamily f = random_family(d, K, 40 + s);
    const double c = friedrichs_number(f);
    const double sampled = oracle::friedrichs_by_sampling(member_bases(f), s);
    CHECK(sampled <= c + 1e-12);
    CHECK(std::abs(sampled - c) < 1e-3);
    CHECK(c < 1.0);
  }
}

TEST_CASE("Friedrichs number ignores zero members and rejects all-zero families") {
  const SubspaceFamily f({line(0.0), line(M_PI / 3), Subspace(2)});
  // With c = lambda_max / (K - 1) and K = 3 the pair contributes cos(pi/3) / 2.
  CHECK(friedrichs_number(f) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK_THROWS_AS(friedrichs_number(SubspaceFamily({Subspace(2), Subspace(2)})), PreconditionError);
}

TEST_CASE("rho on the circle agrees with a dense scan and is bracketed") {
  for (double theta : {0.2, M_PI / 5, M_PI / 3, M_PI / 2}) {
    const SubspaceFamily f({line(0.1), line(0.1 + theta)});
    const SphereEstimate e = rho_estimate(f, RhoMode::full_sphere, {.seed = 1});
    const double scan = oracle::circle_scan(complement_bases(f));
    REQUIRE(std::isfinite(e.lower_bound));
    CHECK(e.lower_bound <= scan + 1e-9);
    CHECK(e.value >= e.lower_bound);
    // The scan overshoots the minimum by at most pi / 200000 on a kink of slope <= 1.
    CHECK(e.value <= scan + 1e-12);
    CHECK(scan - e.value < 1.6e-5);
    CHECK(std::abs(e.witness.norm() - 1.0) < 1e-12);
    // Two lines: the bisector of the obtuse angle gives sin(theta/2) or cos(theta/2).
    CHECK(e.value == doctest::Approx(std::min(std::sin(theta / 2), std::cos(theta / 2))).epsilon(1e-6));
  }
}

TEST_CASE("rho of two orthogonal axes is 1/sqrt(2)") {
  const SubspaceFamily f({line(0.0), line(M_PI / 2)});
  const QuantityReport q = measure(f, {.seed = 3});
  CHECK(q.rho.value == doctest::Approx(M_SQRT1_2).epsilon(1e-9));
  CHECK(q.rho.lower_bound == doctest::Approx(M_SQRT1_2).epsilon(1e-9));
  CHECK(q.rho_star.value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(q.friedrichs_c == doctest::Approx(0.0));
  CHECK(q.rho_star_lower_bound == doctest::Approx(1.0));
}

TEST_CASE("measure orders rho <= rho* and respects the rho* lower bound") {
  for (std::uint64_t s = 0; s < 15; ++s) {
    const SubspaceFamily f = random_family(3 + static_cast<Index>(s % 3), 2 + s % 3, 500 + s);
    const QuantityReport q = measure(f, {.restarts = 8, .seed = s});
    CHECK(q.rho.value <= q.rho_star.value + 1e-15);
    CHECK(q.rho_star.value >= q.rho_star_lower_bound - 1e-6);
    CHECK(q.rho.value > 0.0);
    CHECK(q.rho_star.witness_member >= 1);
  }
}

TEST_CASE("rho search is deterministic in the seed") {
  const SubspaceFamily f = random_family(5, 3, 77);
  const SphereEstimate a = rho_estimate(f, RhoMode::full_sphere, {.restarts = 6, .seed = 12});
  const SphereEstimate b = rho_estimate(f, RhoMode::full_sphere, {.restarts = 6, .seed = 12});
  CHECK(a.value == b.value);
  CHECK((a.witness.array() == b.witness.array()).all());
}

TEST_CASE("K = 2 random families never exceed 1/sqrt(2)") {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const SubspaceFamily f = random_family(2 + static_cast<Index>(s % 4), 2, 900 + s);
    const SphereEstimate e = rho_estimate(f, RhoMode::full_sphere, {.restarts = 8, .seed = s});
    CHECK(e.value <= M_SQRT1_2 + 1e-6);
  }
}

TEST_CASE("dictionary rho") {
  std::vector<Vector> atoms{(Vector(2) << 1, 0).finished(), (Vector(2) << 0, 1).finished()};
  const DictionaryRho r = dictionary_rho(Dictionary(atoms), {.seed = 2});
  CHECK(r.spanning);
  CHECK(r.value == doctest::Approx(M_SQRT1_2).epsilon(1e-9));
  CHECK(r.lower_bound == doctest::Approx(M_SQRT1_2).epsilon(1e-9));

  std::vector<Vector> flat{Vector::Unit(3, 0), Vector::Unit(3, 1)};
  const DictionaryRho z = dictionary_rho(Dictionary(flat), {.seed = 2});
  CHECK_FALSE(z.spanning);
  CHECK(z.value == 0.0);
  CHECK(std::abs(std::abs(z.witness(2)) - 1.0) < 1e-12);
}

TEST_CASE("greedy direction is the normalized remotest residual") {
  const SubspaceFamily f({line(0.0), line(M_PI / 2), line(M_PI / 4)});
  const Vector x = (Vector(2) << 2.0, 0.5).finished();
  const GreedyDirection g = greedy_direction(f, x);
  CHECK(g.achieving_index == 2);
  CHECK(g.rho_x == doctest::Approx(2.0 / x.norm()));
  CHECK(std::abs(g.g.norm() - 1.0) < 1e-14);
  CHECK(g.g(0) == doctest::Approx(1.0));
}

TEST_CASE("one-cycle decomposition reproduces |Ty|^2 = |y|^2 (1 - nu^2)") {
  std::mt19937_64 rng(21);
  for (std::uint64_t s = 0; s < 20; ++s) {
    const SubspaceFamily f = random_family(5, 3, 300 + s);
    const Vector y = oracle::random_vector(5, rng);
    const NuResult r = nu_decomposition(f, y);
    Vector ty = y;
    for (const auto& m : f.members()) ty = m.project(ty);
    CHECK((r.image - ty).norm() < 1e-12);
    CHECK(ty.squaredNorm() == doctest::Approx(y.squaredNorm() * (1 - r.nu * r.nu)).epsilon(1e-12));
    REQUIRE(r.v.size() == 3);
    for (std::size_t j = 0; j < 3; ++j) {
      CHECK(f.members()[j].project(r.v[j]).norm() < 1e-12 * (1 + y.norm()));
    }
    CHECK(r.nu >= 0.0);
    CHECK(r.nu <= 1.0);
  }
}

TEST_CASE("orthogonal axes: nu of (1,2) is 1") {
  const SubspaceFamily f({line(0.0), line(M_PI / 2)});
  const NuResult r = nu_decomposition(f, (Vector(2) << 1, 2).finished());
  CHECK(r.nu == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(r.image.norm() < 1e-15);
}

}
