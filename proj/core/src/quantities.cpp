#include "altproj/quantities.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace altproj {

double friedrichs_number(const SubspaceFamily& family) {
  const auto& members = family.members();
  const std::size_t K = members.size();
  Index total = 0;
  std::vector<Index> offset(K);
  for (std::size_t k = 0; k < K; ++k) {
    offset[k] = total;
    total += members[k].rank();
  }
  if (total == 0) throw PreconditionError("friedrichs_number: every member has rank zero");

  Matrix m = Matrix::Zero(total, total);
  for (std::size_t j = 0; j < K; ++j) {
    for (std::size_t k = j + 1; k < K; ++k) {
      if (members[j].rank() == 0 || members[k].rank() == 0) continue;
      const Matrix cross = members[j].basis().transpose() * members[k].basis();
      m.block(offset[j], offset[k], cross.rows(), cross.cols()) = cross;
      m.block(offset[k], offset[j], cross.cols(), cross.rows()) = cross.transpose();
    }
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(m, Eigen::EigenvaluesOnly);
  const double lambda_max = eig.eigenvalues().maxCoeff();
  return std::clamp(lambda_max / static_cast<double>(K - 1), 0.0, 1.0);
}

GreedyDirection greedy_direction(const SubspaceFamily& family, const Vector& x) {
  require_dim(x, family.ambient_dim(), "greedy_direction");
  const double xn = stable_norm(x);
  if (xn == 0.0) throw PreconditionError("greedy_direction: x must be nonzero");
  const RemotestChoice choice = remotest_choice(family, x);
  const double dist = choice.distances[static_cast<std::size_t>(choice.index - 1)];
  if (dist == 0.0) throw PreconditionError("greedy_direction: x lies in every member");
  GreedyDirection out;
  out.g = family.member(choice.index).residual(x) / dist;
  out.rho_x = dist / xn;
  out.achieving_index = choice.index;
  return out;
}

NuResult nu_decomposition(const SubspaceFamily& family, const Vector& y) {
  require_dim(y, family.ambient_dim(), "nu_decomposition");
  const double yn = stable_norm(y);
  if (yn == 0.0) throw PreconditionError("nu_decomposition: y must be nonzero");
  NuResult out;
  out.v.reserve(family.size());
  Vector w = y;
  Vector stacked(static_cast<Index>(family.size()));
  for (std::size_t j = 0; j < family.size(); ++j) {
    Vector next = family.members()[j].project(w);
    out.v.push_back(w - next);
    stacked(static_cast<Index>(j)) = stable_norm(out.v.back());
    w = std::move(next);
  }
  out.nu = stable_norm(stacked) / yn;
  out.image = std::move(w);
  return out;
}

}  // namespace altproj
