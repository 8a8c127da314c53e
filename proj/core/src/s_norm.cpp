// s(y) = min sum_k |z_k| subject to A z = y, A = [C_1 ... C_K] the stacked complement
// bases (|y_k| = |z_k| since each C_k is orthonormal). Solved on y/|y| and rescaled.
//
// Dual: max <y,u> subject to |C_k^T u| <= 1. Any feasible u is a certificate.

#include "altproj/quantities.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>

namespace altproj {
namespace {

struct Blocks {
  std::vector<Index> offset;
  std::vector<Index> size;
  Index total = 0;
};

Blocks block_layout(const SubspaceFamily& family) {
  Blocks b;
  for (const auto& c : family.complements()) {
    b.offset.push_back(b.total);
    b.size.push_back(c.rank());
    b.total += c.rank();
  }
  return b;
}

double group_norm_sum(const Vector& z, const Blocks& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < b.size.size(); ++k) s += z.segment(b.offset[k], b.size[k]).norm();
  return s;
}

class Problem {
 public:
  Problem(const SubspaceFamily& family, const Vector& yhat)
      : family_(family), blocks_(block_layout(family)), a_(family.stacked_complements()),
        yhat_(yhat), chol_(a_ * a_.transpose()) {
    if (chol_.info() != Eigen::Success) throw std::runtime_error("s_norm: complement Gram matrix is singular");
  }

  const Blocks& blocks() const { return blocks_; }
  const Matrix& a() const { return a_; }

  /// Nearest point of {A z = yhat} to v.
  Vector restore_feasibility(const Vector& v) const {
    return v + a_.transpose() * chol_.solve(yhat_ - a_ * v);
  }

  /// Feasible dual point from a candidate multiplier lambda ~ A^T u.
  Vector dual_from_multiplier(const Vector& lambda) const { return scale_dual(chol_.solve(a_ * lambda)); }

  Vector scale_dual(Vector u) const {
    double worst = 1.0;
    for (const auto& c : family_.complements()) {
      if (c.rank() > 0) worst = std::max(worst, (c.basis().transpose() * u).norm());
    }
    return u / worst;
  }

  double primal(const Vector& z) const { return group_norm_sum(z, blocks_); }
  double dual(const Vector& u) const { return yhat_.dot(u); }

  /// Newton iteration on sum_a t_a P_a^perp u = yhat, |C_a^T u| = 1 over the active blocks.
  bool newton_polish(const Vector& z0, const Vector& u0, Vector& z_out, Vector& u_out) const {
    const auto& comps = family_.complements();
    std::vector<std::size_t> active;
    for (std::size_t k = 0; k < comps.size(); ++k) {
      if (blocks_.size[k] > 0 && z0.segment(blocks_.offset[k], blocks_.size[k]).norm() > 1e-10) {
        active.push_back(k);
      }
    }
    if (active.empty()) return false;
    const Index d = yhat_.size();
    const Index na = static_cast<Index>(active.size());
    Vector u = u0;
    Vector t(na);
    for (Index i = 0; i < na; ++i) {
      const std::size_t k = active[static_cast<std::size_t>(i)];
      t(i) = z0.segment(blocks_.offset[k], blocks_.size[k]).norm();
    }
    Vector f(d + na);
    Matrix jac(d + na, d + na);
    for (int it = 0; it < 40; ++it) {
      f.head(d) = -yhat_;
      jac.setZero();
      for (Index i = 0; i < na; ++i) {
        const Matrix& c = comps[active[static_cast<std::size_t>(i)]].basis();
        const Vector cu = c.transpose() * u;
        const Vector pu = c * cu;
        f.head(d) += t(i) * pu;
        f(d + i) = 0.5 * (cu.squaredNorm() - 1.0);
        jac.topLeftCorner(d, d) += t(i) * (c * c.transpose());
        jac.block(0, d + i, d, 1) = pu;
        jac.block(d + i, 0, 1, d) = pu.transpose();
      }
      if (!f.allFinite()) return false;
      if (f.norm() < 1e-15) break;
      const Vector step = jac.colPivHouseholderQr().solve(-f);
      if (!step.allFinite()) return false;
      u += step.head(d);
      t += step.tail(na);
    }
    if (!(f.norm() < 1e-12) || (t.array() < 0.0).any()) return false;
    z_out = Vector::Zero(blocks_.total);
    for (Index i = 0; i < na; ++i) {
      const std::size_t k = active[static_cast<std::size_t>(i)];
      z_out.segment(blocks_.offset[k], blocks_.size[k]) = t(i) * (comps[k].basis().transpose() * u);
    }
    z_out = restore_feasibility(z_out);
    u_out = scale_dual(u);
    return true;
  }

 private:
  const SubspaceFamily& family_;
  Blocks blocks_;
  Matrix a_;
  Vector yhat_;
  Eigen::LLT<Matrix> chol_;
};

SNormResult finish(const SubspaceFamily& family, const Blocks& b, const Vector& z, const Vector& u,
                   double yn, double primal_hat, double dual_hat, const SNormOptions& options) {
  SNormResult r;
  r.tol = options.tol;
  const auto& comps = family.complements();
  r.decomposition.reserve(comps.size());
  for (std::size_t k = 0; k < comps.size(); ++k) {
    if (b.size[k] == 0) {
      r.decomposition.push_back(Vector::Zero(family.ambient_dim()));
    } else {
      r.decomposition.push_back(yn * (comps[k].basis() * z.segment(b.offset[k], b.size[k])));
    }
  }
  r.value = yn * primal_hat;
  r.dual_value = yn * dual_hat;
  r.dual_vector = u;
  r.gap = r.value - r.dual_value;
  r.certified = r.gap <= options.tol * (1.0 + yn);
  return r;
}

}  // namespace

SNormResult s_norm(const SubspaceFamily& family, const Vector& y, const SNormOptions& options) {
  require_dim(y, family.ambient_dim(), "s_norm");
  require_finite(y, "s_norm");
  if (!(options.tol > 0.0)) throw PreconditionError("s_norm: tol must be positive");
  if (options.check_every == 0) throw PreconditionError("s_norm: check_every must be >= 1");
  const Index d = family.ambient_dim();
  const std::size_t K = family.size();
  const double yn = stable_norm(y);

  if (yn == 0.0) {
    SNormResult r;
    r.decomposition.assign(K, Vector::Zero(d));
    r.dual_vector = Vector::Zero(d);
    r.certified = true;
    r.method = "trivial";
    r.tol = options.tol;
    return r;
  }
  if (complement_sum_residual(family.members(), y) > tolerances::kMembership * std::max(1.0, yn)) {
    throw PreconditionError("s_norm: y is not in the sum of the complements");
  }

  const Vector yhat = y / yn;
  for (std::size_t k = 0; k < K; ++k) {
    const Subspace& c = family.complements()[k];
    if (c.rank() > 0 && stable_norm(yhat - c.project(yhat)) <= 1e-13) {
      SNormResult r;
      r.decomposition.assign(K, Vector::Zero(d));
      r.decomposition[k] = y;
      r.value = yn;
      r.dual_vector = yhat;
      r.dual_value = yn;
      r.certified = true;
      r.method = "single_term";
      r.tol = options.tol;
      return r;
    }
  }

  Problem prob(family, yhat);
  const Blocks& b = prob.blocks();
  const Matrix& a = prob.a();

  if (b.total == d) {
    // Direct sum: z is unique. A^T u = (z_k / |z_k|)_k makes <y,u> = sum |z_k| exactly.
    const Eigen::PartialPivLU<Matrix> lu(a);
    const Vector z = prob.restore_feasibility(lu.solve(yhat));
    Vector sign = Vector::Zero(b.total);
    for (std::size_t k = 0; k < K; ++k) {
      const double nk = z.segment(b.offset[k], b.size[k]).norm();
      if (nk > 0.0) sign.segment(b.offset[k], b.size[k]) = z.segment(b.offset[k], b.size[k]) / nk;
    }
    const Vector u = prob.scale_dual(lu.transpose().solve(sign));
    SNormResult r = finish(family, b, z, u, yn, prob.primal(z), prob.dual(u), options);
    r.method = "direct_sum";
    return r;
  }

  // ADMM on min sum |w_k| s.t. z = w, A z = yhat, with scaled multiplier mu.
  Vector w = prob.restore_feasibility(Vector::Zero(b.total));
  Vector z = w;
  Vector mu = Vector::Zero(b.total);
  double rho = 1.0;
  Vector best_z = z;
  Vector best_u = prob.scale_dual(yhat);
  double best_primal = prob.primal(z);
  double best_dual = prob.dual(best_u);
  std::string method = "admm";
  std::size_t it = 0;
  bool polished = false;

  auto consider = [&](const Vector& zc, const Vector& uc, bool from_newton) {
    const double p = prob.primal(zc), q = prob.dual(uc);
    if (p < best_primal) {
      best_primal = p;
      best_z = zc;
      if (from_newton) method = "admm+newton";
    }
    if (q > best_dual) {
      best_dual = q;
      best_u = uc;
    }
  };

  for (it = 1; it <= options.max_iterations; ++it) {
    z = prob.restore_feasibility(w - mu);
    const Vector w_prev = w;
    const Vector v = z + mu;
    for (std::size_t k = 0; k < K; ++k) {
      if (b.size[k] == 0) continue;
      const auto seg = v.segment(b.offset[k], b.size[k]);
      const double nv = seg.norm();
      const double shrink = nv > 1.0 / rho ? 1.0 - 1.0 / (rho * nv) : 0.0;
      w.segment(b.offset[k], b.size[k]) = shrink * seg;
    }
    mu += z - w;

    if (it % options.check_every != 0) continue;
    const Vector u = prob.dual_from_multiplier(rho * mu);
    consider(z, u, false);
    consider(prob.restore_feasibility(w), u, false);
    double gap = best_primal - best_dual;
    if (gap > options.tol && gap < 1e-3 && !polished) {
      Vector zn, un;
      if (prob.newton_polish(w, best_u, zn, un)) consider(zn, un, true);
      gap = best_primal - best_dual;
      // One polish per stretch of ADMM; retried after the active set has had time to move.
      polished = gap > options.tol;
    }
    if (polished && it % (50 * options.check_every) == 0) polished = false;
    if (gap <= options.tol) break;

    const double r_primal = (z - w).norm();
    const double r_dual = rho * (w - w_prev).norm();
    if (r_primal > 10.0 * r_dual) {
      rho *= 2.0;
      mu /= 2.0;
    } else if (r_dual > 10.0 * r_primal) {
      rho /= 2.0;
      mu *= 2.0;
    }
  }

  SNormResult r = finish(family, b, best_z, best_u, yn, best_primal, best_dual, options);
  r.iterations = std::min(it, options.max_iterations);
  r.method = method;
  return r;
}

}  // namespace altproj
