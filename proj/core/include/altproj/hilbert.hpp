#pragma once

/// @file hilbert.hpp
/// Dense subspace algebra in R^d: subspaces stored by orthonormal basis,
/// orthogonal projection, complements, distances, and families of subspaces
/// with trivial intersection.

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace altproj {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Named numerical tolerances. Every certification report echoes the ones it used.
namespace tolerances {
inline constexpr double kOrthonormality = 1e-12;  ///< basis unit norm / pairwise inner products
inline constexpr double kRank = 1e-10;            ///< relative singular value cutoff
inline constexpr double kIdentity = 1e-10;        ///< P_S + P_{S^perp} = I, entrywise
inline constexpr double kTieBreak = 1e-12;        ///< relative argmax ties
inline constexpr double kMembership = 1e-8;       ///< least-squares residual for membership in a span
}  // namespace tolerances

/// Thrown when an input violates a documented precondition.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Euclidean norm that stays accurate for vectors far below sqrt(DBL_MIN).
double stable_norm(const Vector& x);

void require_finite(const Vector& x, const char* what);
void require_dim(const Vector& x, Index dim, const char* what);

class Subspace {
 public:
  /// Zero subspace of R^ambient_dim.
  explicit Subspace(Index ambient_dim);

  /// Orthonormal basis of span(columns); numerical rank counts singular values above
  /// tol * sigma_max.
  static Subspace from_columns(const Matrix& spanning, double tol = tolerances::kRank);

  /// Adopts `basis` (columns) as is after checking orthonormality to kOrthonormality.
  static Subspace from_orthonormal(Matrix basis);

  static Subspace full(Index ambient_dim);

  Index ambient_dim() const { return ambient_dim_; }
  Index rank() const { return basis_.cols(); }
  bool is_zero() const { return basis_.cols() == 0; }
  /// d x r, orthonormal columns.
  const Matrix& basis() const { return basis_; }
  double tol() const { return tol_; }

  Vector project(const Vector& x) const;
  /// x - Px, i.e. the projection onto the orthogonal complement.
  Vector residual(const Vector& x) const;
  Matrix projector() const;

 private:
  Subspace(Matrix basis, double tol);

  Index ambient_dim_ = 0;
  Matrix basis_;
  double tol_ = tolerances::kRank;
};

Subspace subspace_from_spanning(std::span<const Vector> vectors, Index ambient_dim,
                                double tol = tolerances::kRank);

Vector project(const Subspace& s, const Vector& x);
Subspace complement(const Subspace& s);
/// |x - Px|, computed from the residual directly rather than via Pythagoras.
double distance(const Subspace& s, const Vector& x);

/// Orthonormal basis of L_1 + ... + L_K (any list of subspaces, same ambient dimension).
Subspace subspace_sum(std::span<const Subspace> parts, double tol = tolerances::kRank);

/// K >= 2 subspaces of a common R^d whose intersection is {0}; complements are cached.
class SubspaceFamily {
 public:
  explicit SubspaceFamily(std::vector<Subspace> members, double tol = tolerances::kRank);

  Index ambient_dim() const { return ambient_dim_; }
  std::size_t size() const { return members_.size(); }
  const std::vector<Subspace>& members() const { return members_; }
  const std::vector<Subspace>& complements() const { return complements_; }
  /// 1-based label, matching L_1..L_K.
  const Subspace& member(int label) const;
  const Subspace& complement_of(int label) const;
  double tol() const { return tol_; }

  /// d x (sum of complement ranks): the complement bases side by side.
  Matrix stacked_complements() const;

 private:
  Index ambient_dim_ = 0;
  std::vector<Subspace> members_;
  std::vector<Subspace> complements_;
  double tol_;
};

/// Numerical rank of the stacked complement bases equals d. In finite dimension the
/// complement sum is closed, so this decides the exponential branch of the dichotomy.
bool sum_of_complements_is_full(const SubspaceFamily& family, double tol = tolerances::kRank);
bool sum_of_complements_is_full(std::span<const Subspace> members, double tol = tolerances::kRank);

/// Distance from y to L_1^perp + ... + L_K^perp.
double complement_sum_residual(std::span<const Subspace> members, const Vector& y);

}  // namespace altproj
