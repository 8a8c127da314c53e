#include "altproj/hilbert.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <string>

namespace altproj {

double stable_norm(const Vector& x) { return x.size() == 0 ? 0.0 : x.stableNorm(); }

void require_finite(const Vector& x, const char* what) {
  if (!x.allFinite()) throw PreconditionError(std::string(what) + ": non-finite coordinate");
}

void require_dim(const Vector& x, Index dim, const char* what) {
  if (x.size() != dim) {
    throw PreconditionError(std::string(what) + ": dimension mismatch (got " +
                            std::to_string(x.size()) + ", expected " + std::to_string(dim) + ")");
  }
}

Subspace::Subspace(Index ambient_dim) : ambient_dim_(ambient_dim), basis_(ambient_dim, 0) {
  if (ambient_dim <= 0) throw PreconditionError("Subspace: ambient dimension must be positive");
}

Subspace::Subspace(Matrix basis, double tol)
    : ambient_dim_(basis.rows()), basis_(std::move(basis)), tol_(tol) {}

Subspace Subspace::from_columns(const Matrix& spanning, double tol) {
  if (spanning.rows() <= 0) throw PreconditionError("Subspace: ambient dimension must be positive");
  if (!(tol > 0.0)) throw PreconditionError("Subspace: tolerance must be positive");
  if (!spanning.allFinite()) throw PreconditionError("Subspace: non-finite spanning vector");
  if (spanning.cols() == 0) return Subspace(Matrix(spanning.rows(), 0), tol);

  Eigen::BDCSVD<Matrix> svd(spanning, Eigen::ComputeThinU);
  const auto& sigma = svd.singularValues();
  const double cutoff = tol * sigma(0);
  Index rank = 0;
  if (sigma(0) > 0.0) {
    while (rank < sigma.size() && sigma(rank) > cutoff) ++rank;
  }
  Matrix basis = svd.matrixU().leftCols(rank);
  return Subspace(std::move(basis), tol);
}

Subspace Subspace::from_orthonormal(Matrix basis) {
  if (basis.rows() <= 0) throw PreconditionError("Subspace: ambient dimension must be positive");
  if (!basis.allFinite()) throw PreconditionError("Subspace: non-finite basis vector");
  if (basis.cols() > basis.rows()) throw PreconditionError("Subspace: more basis vectors than dimensions");
  if (basis.cols() > 0) {
    const Matrix gram = basis.transpose() * basis;
    const double err = (gram - Matrix::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
    if (err > tolerances::kOrthonormality) {
      throw PreconditionError("Subspace: basis is not orthonormal (max Gram error " +
                              std::to_string(err) + ")");
    }
  }
  return Subspace(std::move(basis), tolerances::kRank);
}

Subspace Subspace::full(Index ambient_dim) {
  if (ambient_dim <= 0) throw PreconditionError("Subspace: ambient dimension must be positive");
  return Subspace(Matrix::Identity(ambient_dim, ambient_dim), tolerances::kRank);
}

Vector Subspace::project(const Vector& x) const {
  require_dim(x, ambient_dim_, "project");
  if (basis_.cols() == 0) return Vector::Zero(ambient_dim_);
  return basis_ * (basis_.transpose() * x);
}

Vector Subspace::residual(const Vector& x) const { return x - project(x); }

Matrix Subspace::projector() const { return basis_ * basis_.transpose(); }

Subspace subspace_from_spanning(std::span<const Vector> vectors, Index ambient_dim, double tol) {
  Matrix spanning(ambient_dim, static_cast<Index>(vectors.size()));
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    require_dim(vectors[i], ambient_dim, "subspace_from_spanning");
    require_finite(vectors[i], "subspace_from_spanning");
    spanning.col(static_cast<Index>(i)) = vectors[i];
  }
  return Subspace::from_columns(spanning, tol);
}

Vector project(const Subspace& s, const Vector& x) { return s.project(x); }

Subspace complement(const Subspace& s) {
  const Index d = s.ambient_dim();
  const Index r = s.rank();
  if (r == 0) return Subspace::full(d);
  if (r == d) return Subspace(d);
  Eigen::HouseholderQR<Matrix> qr(s.basis());
  const Matrix q = qr.householderQ() * Matrix::Identity(d, d);
  return Subspace::from_orthonormal(q.rightCols(d - r));
}

double distance(const Subspace& s, const Vector& x) { return stable_norm(s.residual(x)); }

namespace {

Matrix stack_bases(std::span<const Subspace> parts) {
  Index d = parts.empty() ? 0 : parts.front().ambient_dim();
  Index cols = 0;
  for (const auto& p : parts) {
    if (p.ambient_dim() != d) throw PreconditionError("subspaces live in different ambient spaces");
    cols += p.rank();
  }
  Matrix out(d, cols);
  Index at = 0;
  for (const auto& p : parts) {
    out.middleCols(at, p.rank()) = p.basis();
    at += p.rank();
  }
  return out;
}

Index numerical_rank(const Matrix& m, double tol) {
  if (m.cols() == 0 || m.rows() == 0) return 0;
  Eigen::BDCSVD<Matrix> svd(m);
  const auto& sigma = svd.singularValues();
  if (sigma(0) == 0.0) return 0;
  Index rank = 0;
  while (rank < sigma.size() && sigma(rank) > tol * sigma(0)) ++rank;
  return rank;
}

std::vector<Subspace> complements_of(std::span<const Subspace> members) {
  std::vector<Subspace> out;
  out.reserve(members.size());
  for (const auto& m : members) out.push_back(complement(m));
  return out;
}

}  // namespace

Subspace subspace_sum(std::span<const Subspace> parts, double tol) {
  if (parts.empty()) throw PreconditionError("subspace_sum: empty list");
  return Subspace::from_columns(stack_bases(parts), tol);
}

SubspaceFamily::SubspaceFamily(std::vector<Subspace> members, double tol)
    : members_(std::move(members)), tol_(tol) {
  if (members_.size() < 2) throw PreconditionError("SubspaceFamily: need at least two subspaces");
  ambient_dim_ = members_.front().ambient_dim();
  for (const auto& m : members_) {
    if (m.ambient_dim() != ambient_dim_) {
      throw PreconditionError("SubspaceFamily: members live in different ambient spaces");
    }
  }
  complements_ = complements_of(members_);
  if (numerical_rank(stack_bases(complements_), tol_) != ambient_dim_) {
    throw PreconditionError("SubspaceFamily: members have a nontrivial common intersection");
  }
}

const Subspace& SubspaceFamily::member(int label) const {
  if (label < 1 || static_cast<std::size_t>(label) > members_.size()) {
    throw PreconditionError("SubspaceFamily: label out of range");
  }
  return members_[static_cast<std::size_t>(label - 1)];
}

const Subspace& SubspaceFamily::complement_of(int label) const {
  if (label < 1 || static_cast<std::size_t>(label) > complements_.size()) {
    throw PreconditionError("SubspaceFamily: label out of range");
  }
  return complements_[static_cast<std::size_t>(label - 1)];
}

Matrix SubspaceFamily::stacked_complements() const { return stack_bases(complements_); }

bool sum_of_complements_is_full(const SubspaceFamily& family, double tol) {
  return numerical_rank(family.stacked_complements(), tol) == family.ambient_dim();
}

bool sum_of_complements_is_full(std::span<const Subspace> members, double tol) {
  if (members.empty()) return false;
  const auto comps = complements_of(members);
  return numerical_rank(stack_bases(comps), tol) == members.front().ambient_dim();
}

double complement_sum_residual(std::span<const Subspace> members, const Vector& y) {
  if (members.empty()) throw PreconditionError("complement_sum_residual: empty list");
  const auto comps = complements_of(members);
  return distance(subspace_sum(comps), y);
}

}  // namespace altproj
