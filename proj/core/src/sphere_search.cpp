// Minimization of f(z) = max_k |Q_k z| over the unit sphere. Every sphere constant in
// quantities.hpp has this form:
//   rho     Q_k = C_k^T            (C_k orthonormal basis of L_k^perp)
//   rho*    Q_k = C_k^T B_m        (z ranges over the unit sphere of L_m)
//   rho(D)  Q_g = g^T              (one row per atom)
// Each |Q_k z| is Lipschitz with constant ||Q_k||, so on a circle the infimum is
// bracketed by branch and bound; elsewhere we report the best point found.

#include "altproj/quantities.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <queue>
#include <random>

namespace altproj {
namespace {

class MaxNorm {
 public:
  explicit MaxNorm(std::vector<Matrix> q) : q_(std::move(q)) {
    dim_ = q_.empty() ? 0 : q_.front().cols();
    for (const auto& m : q_) {
      if (m.rows() == 0) continue;
      Eigen::JacobiSVD<Matrix> svd(m);
      lipschitz_ = std::max(lipschitz_, svd.singularValues()(0));
    }
    if (dim_ <= 3) {
      for (const auto& m : q_) {
        Eigen::Matrix3d g = Eigen::Matrix3d::Zero();
        g.topLeftCorner(dim_, dim_) = m.transpose() * m;
        gram3_.push_back(g);
      }
    }
  }

  Index dim() const { return dim_; }
  double lipschitz() const { return lipschitz_; }
  std::size_t parts() const { return q_.size(); }

  double value(const Vector& z, std::vector<double>* per_part = nullptr) const {
    if (per_part) per_part->resize(q_.size());
    double best = 0.0;
    for (std::size_t k = 0; k < q_.size(); ++k) {
      const double v = q_[k].rows() == 0 ? 0.0 : (q_[k] * z).norm();
      if (per_part) (*per_part)[k] = v;
      best = std::max(best, v);
    }
    return best;
  }

  /// Fast path for grids on 2-spheres.
  double value3(const Eigen::Vector3d& z) const {
    double best = 0.0;
    for (const auto& g : gram3_) best = std::max(best, z.dot(g * z));
    return std::sqrt(std::max(best, 0.0));
  }

  Vector gradient(std::size_t k, const Vector& z, double part_value) const {
    return q_[k].transpose() * (q_[k] * z) / part_value;
  }

 private:
  std::vector<Matrix> q_;
  std::vector<Eigen::Matrix3d> gram3_;
  Index dim_ = 0;
  double lipschitz_ = 0.0;
};

// Euclidean projection onto the probability simplex.
Vector project_simplex(const Vector& v) {
  std::vector<double> u(v.data(), v.data() + v.size());
  std::sort(u.begin(), u.end(), std::greater<>());
  double cum = 0.0, theta = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    cum += u[i];
    const double t = (cum - 1.0) / static_cast<double>(i + 1);
    if (u[i] - t > 0.0) theta = t;
  }
  return (v.array() - theta).cwiseMax(0.0).matrix();
}

// Minimum-norm point of conv{g_i}.
Vector min_norm_hull(const std::vector<Vector>& g) {
  if (g.size() == 1) return g.front();
  if (g.size() == 2) {
    const Vector diff = g[0] - g[1];
    const double dd = diff.squaredNorm();
    const double t = dd == 0.0 ? 0.5 : std::clamp(-g[1].dot(diff) / dd, 0.0, 1.0);
    return t * g[0] + (1.0 - t) * g[1];
  }
  const Index m = static_cast<Index>(g.size());
  Matrix cols(g.front().size(), m);
  for (Index i = 0; i < m; ++i) cols.col(i) = g[static_cast<std::size_t>(i)];
  const Matrix gram = cols.transpose() * cols;
  if (m <= 6) {
    // Exact: the minimizer is the affine min-norm point of some face with nonnegative weights.
    Vector best = g.front();
    double best_sq = best.squaredNorm();
    for (unsigned mask = 1; mask < (1u << m); ++mask) {
      std::vector<Index> idx;
      for (Index i = 0; i < m; ++i) {
        if (mask & (1u << i)) idx.push_back(i);
      }
      const Index s = static_cast<Index>(idx.size());
      Matrix kkt = Matrix::Zero(s + 1, s + 1);
      for (Index a = 0; a < s; ++a) {
        for (Index b = 0; b < s; ++b) kkt(a, b) = gram(idx[a], idx[b]);
        kkt(a, s) = kkt(s, a) = 1.0;
      }
      Vector rhs = Vector::Zero(s + 1);
      rhs(s) = 1.0;
      const auto lu = kkt.fullPivLu();
      if (!lu.isInvertible()) continue;
      const Vector sol = lu.solve(rhs);
      if ((sol.head(s).array() < -1e-14).any()) continue;
      Vector p = Vector::Zero(cols.rows());
      for (Index a = 0; a < s; ++a) p += sol(a) * cols.col(idx[a]);
      const double sq = p.squaredNorm();
      if (sq < best_sq) {
        best_sq = sq;
        best = std::move(p);
      }
    }
    return best;
  }
  const double step = 1.0 / std::max(gram.trace(), 1e-300);
  Vector lambda = Vector::Constant(m, 1.0 / static_cast<double>(m));
  for (int it = 0; it < 400; ++it) lambda = project_simplex(lambda - step * (gram * lambda));
  return cols * lambda;
}

struct Local {
  double value;
  Vector z;
  long iterations = 0;
  long evaluations = 0;
};

Local descend(const MaxNorm& f, Vector z, int max_iterations, double step) {
  z.normalize();
  std::vector<double> parts;
  double fz = f.value(z, &parts);
  Local out{fz, z};
  out.evaluations = 1;
  const double lip = std::max(f.lipschitz(), 1e-300);
  std::vector<double> trial_parts;
  std::vector<Vector> grads;
  double checkpoint = fz;
  for (int it = 0; it < max_iterations && fz > 0.0; ++it) {
    ++out.iterations;
    if (it > 0 && it % 100 == 0) {
      if (checkpoint - fz <= 1e-15 * fz) break;
      checkpoint = fz;
    }
    grads.clear();
    const double band = step * lip;
    for (std::size_t k = 0; k < parts.size(); ++k) {
      if (parts[k] > 0.0 && parts[k] >= fz - band) {
        Vector gk = f.gradient(k, z, parts[k]);
        gk -= gk.dot(z) * z;
        grads.push_back(std::move(gk));
      }
    }
    const Vector d = min_norm_hull(grads);
    const double dn = d.norm();
    if (dn > 1e-15) {
      Vector trial = z - step * d / dn;
      trial.normalize();
      const double ft = f.value(trial, &trial_parts);
      ++out.evaluations;
      if (ft < fz) {
        z = std::move(trial);
        fz = ft;
        parts.swap(trial_parts);
        step = std::min(step * 1.5, 0.5);
        continue;
      }
    }
    step *= 0.5;
    if (step < 1e-14) break;
  }
  out.value = fz;
  out.z = std::move(z);
  return out;
}

struct Cell {
  double a, b, fa, fb, lb;
  bool operator>(const Cell& o) const { return lb > o.lb; }
};

// Two-sided bracket of min f on the unit circle (f is even, so theta in [0, pi]).
struct CircleBracket {
  double lower, upper, theta;
  long evaluations;
};

CircleBracket circle_branch_and_bound(const MaxNorm& f, double h) {
  const double lip = std::max(f.lipschitz(), 1e-300);
  auto eval = [&](double t) {
    Vector z(2);
    z << std::cos(t), std::sin(t);
    return f.value(z);
  };
  constexpr double kTol = 1e-12;
  constexpr long kMaxEvaluations = 4'000'000;
  const int n = std::max(8, static_cast<int>(std::ceil(std::numbers::pi / h)));
  const double width = std::numbers::pi / n;
  std::vector<double> fv(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) fv[static_cast<std::size_t>(i)] = eval(i * width);
  long evals = n + 1;
  double ub = fv[0], best_t = 0.0;
  for (int i = 0; i <= n; ++i) {
    if (fv[static_cast<std::size_t>(i)] < ub) {
      ub = fv[static_cast<std::size_t>(i)];
      best_t = i * width;
    }
  }
  std::priority_queue<Cell, std::vector<Cell>, std::greater<>> heap;
  auto push = [&](double a, double b, double fa, double fb) {
    const double lb = 0.5 * (fa + fb) - 0.5 * lip * (b - a);
    if (lb < ub - kTol) heap.push({a, b, fa, fb, lb});
  };
  for (int i = 0; i < n; ++i) {
    push(i * width, (i + 1) * width, fv[static_cast<std::size_t>(i)], fv[static_cast<std::size_t>(i) + 1]);
  }
  double lower = ub - kTol;
  while (!heap.empty()) {
    const Cell c = heap.top();
    heap.pop();
    if (c.lb >= ub - kTol) {
      lower = std::min(c.lb, ub);
      break;
    }
    if (evals >= kMaxEvaluations) {
      lower = c.lb;
      break;
    }
    const double mid = 0.5 * (c.a + c.b);
    const double fm = eval(mid);
    ++evals;
    if (fm < ub) {
      ub = fm;
      best_t = mid;
    }
    push(c.a, mid, c.fa, fm);
    push(mid, c.b, fm, c.fb);
    if (heap.empty()) lower = ub - kTol;
  }
  return {std::max(0.0, std::min(lower, ub)), ub, best_t, evals};
}

struct GridPoint {
  double value;
  Vector z;
  long evaluations;
};

GridPoint sphere_grid(const MaxNorm& f, double h) {
  GridPoint best{std::numeric_limits<double>::infinity(), Vector::Zero(3), 0};
  const int rings = static_cast<int>(std::ceil((std::numbers::pi / 2) / h));
  for (int i = 0; i <= rings; ++i) {
    const double polar = std::min(i * h, std::numbers::pi / 2);
    const double s = std::sin(polar), c = std::cos(polar);
    const int around = std::max(1, static_cast<int>(std::ceil(2 * std::numbers::pi * s / h)));
    for (int j = 0; j < around; ++j) {
      const double az = 2 * std::numbers::pi * j / around;
      const Eigen::Vector3d z(s * std::cos(az), s * std::sin(az), c);
      const double v = f.value3(z);
      ++best.evaluations;
      if (v < best.value) {
        best.value = v;
        best.z = z;
      }
    }
  }
  return best;
}

Vector random_unit(Index n, std::uint64_t seed, std::uint64_t stream_a, std::uint64_t stream_b) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream_a), static_cast<std::uint32_t>(stream_b)};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> normal;
  Vector z(n);
  do {
    for (Index i = 0; i < n; ++i) z(i) = normal(rng);
  } while (z.norm() == 0.0);
  return z.normalized();
}

SphereEstimate minimize_on_sphere(const MaxNorm& f, const SphereSearchOptions& options,
                                  const std::vector<Vector>& candidates, std::uint64_t stream) {
  if (options.restarts < 1) throw PreconditionError("sphere search: restarts must be >= 1");
  SphereEstimate out;
  out.restarts = options.restarts;
  out.seed = options.seed;
  out.value = std::numeric_limits<double>::infinity();
  const Index n = f.dim();

  auto offer = [&](double v, const Vector& z) {
    // Strict improvement keeps the earliest start on ties, independent of evaluation order.
    if (v < out.value) {
      out.value = v;
      out.witness = z;
    }
  };

  if (n == 1) {
    Vector z = Vector::Ones(1);
    out.value = f.value(z);
    out.witness = z;
    out.lower_bound = out.value;
    out.evaluations = 1;
    return out;
  }

  double local_step = 0.1;
  if (options.grid && n == 2) {
    const CircleBracket br = circle_branch_and_bound(f, options.grid_step);
    Vector z(2);
    z << std::cos(br.theta), std::sin(br.theta);
    offer(br.upper, z);
    out.lower_bound = br.lower;
    out.evaluations += br.evaluations;
    out.grid_refined = true;
  } else if (options.grid && n == 3) {
    GridPoint gp = sphere_grid(f, options.grid_step);
    out.evaluations += gp.evaluations;
    Local loc = descend(f, gp.z, options.iterations, options.grid_step);
    out.evaluations += loc.evaluations;
    out.iterations += loc.iterations;
    offer(gp.value, gp.z);
    offer(loc.value, loc.z);
    out.grid_refined = true;
    local_step = options.grid_step;
  }

  for (const auto& c : candidates) {
    if (c.size() != n || c.norm() == 0.0) continue;
    Vector z = c.normalized();
    offer(f.value(z), z);
    Local loc = descend(f, z, options.iterations, local_step);
    out.evaluations += loc.evaluations + 1;
    out.iterations += loc.iterations;
    offer(loc.value, loc.z);
  }
  for (int r = 0; r < options.restarts; ++r) {
    Local loc = descend(f, random_unit(n, options.seed, stream, static_cast<std::uint64_t>(r)),
                        options.iterations, 0.1);
    out.evaluations += loc.evaluations;
    out.iterations += loc.iterations;
    offer(loc.value, loc.z);
  }
  if (out.witness.size() == n) out.witness.normalize();
  // The bracket is computed in floating point; keep it consistent with the attained value.
  if (std::isfinite(out.lower_bound)) out.lower_bound = std::min(out.lower_bound, out.value);
  return out;
}

std::vector<Vector> principal_bisectors(const SubspaceFamily& family) {
  std::vector<Vector> out;
  const auto& m = family.members();
  for (std::size_t j = 0; j < m.size(); ++j) {
    for (std::size_t k = j + 1; k < m.size(); ++k) {
      if (m[j].rank() == 0 || m[k].rank() == 0) continue;
      Eigen::JacobiSVD<Matrix> svd(m[j].basis().transpose() * m[k].basis(),
                                   Eigen::ComputeFullU | Eigen::ComputeFullV);
      Vector xj = m[j].basis() * svd.matrixU().col(0);
      Vector xk = m[k].basis() * svd.matrixV().col(0);
      if (xj.dot(xk) < 0) xk = -xk;
      Vector b = xj + xk;
      if (b.norm() > 0) out.push_back(b.normalized());
    }
  }
  return out;
}

}  // namespace

SphereEstimate rho_estimate(const SubspaceFamily& family, RhoMode mode,
                            const SphereSearchOptions& options,
                            const std::vector<Vector>& extra_starts) {
  const auto& comps = family.complements();
  SphereSearchOptions opts = options;
  opts.grid = options.grid && family.ambient_dim() <= 3;
  if (mode == RhoMode::full_sphere) {
    std::vector<Matrix> q;
    for (const auto& c : comps) q.push_back(c.basis().transpose());
    std::vector<Vector> starts = principal_bisectors(family);
    starts.insert(starts.end(), extra_starts.begin(), extra_starts.end());
    return minimize_on_sphere(MaxNorm(std::move(q)), opts, starts, 0);
  }

  SphereEstimate best;
  best.value = std::numeric_limits<double>::infinity();
  long evals = 0, iters = 0;
  bool grid = false;
  for (std::size_t m = 0; m < family.size(); ++m) {
    const Subspace& member = family.members()[m];
    if (member.rank() == 0) continue;
    std::vector<Matrix> q;
    for (std::size_t k = 0; k < comps.size(); ++k) {
      if (k != m) q.push_back(comps[k].basis().transpose() * member.basis());
    }
    std::vector<Vector> starts;
    for (const auto& s : extra_starts) {
      if (s.size() == family.ambient_dim()) starts.push_back(member.basis().transpose() * s);
    }
    SphereEstimate e = minimize_on_sphere(MaxNorm(std::move(q)), opts, starts, m + 1);
    evals += e.evaluations;
    iters += e.iterations;
    grid = grid || e.grid_refined;
    if (e.value < best.value) {
      const double lb = best.lower_bound;
      best = e;
      best.lower_bound = lb;
      best.witness = member.basis() * e.witness;
      best.witness_member = static_cast<int>(m) + 1;
    }
    if (std::isnan(e.lower_bound)) {
      best.lower_bound = std::numeric_limits<double>::quiet_NaN();
    }
  }
  if (best.witness.size() == 0) throw PreconditionError("rho_estimate: every member has rank zero");
  // A certified lower bound for rho* needs one for every member sphere.
  bool all_bounded = opts.grid;
  double lower = std::numeric_limits<double>::infinity();
  for (std::size_t m = 0; m < family.size() && all_bounded; ++m) {
    const Subspace& member = family.members()[m];
    if (member.rank() == 0) continue;
    if (member.rank() > 2) all_bounded = false;
  }
  if (all_bounded) {
    for (std::size_t m = 0; m < family.size(); ++m) {
      const Subspace& member = family.members()[m];
      if (member.rank() == 0) continue;
      std::vector<Matrix> q;
      for (std::size_t k = 0; k < comps.size(); ++k) {
        if (k != m) q.push_back(comps[k].basis().transpose() * member.basis());
      }
      MaxNorm f(std::move(q));
      if (member.rank() == 1) {
        lower = std::min(lower, f.value(Vector::Ones(1)));
      } else {
        lower = std::min(lower, circle_branch_and_bound(f, opts.grid_step).lower);
      }
    }
    best.lower_bound = std::min(lower, best.value);
  } else {
    best.lower_bound = std::numeric_limits<double>::quiet_NaN();
  }
  best.evaluations = evals;
  best.iterations = iters;
  best.grid_refined = grid;
  best.restarts = options.restarts;
  best.seed = options.seed;
  return best;
}

DictionaryRho dictionary_rho(const Dictionary& dictionary, const SphereSearchOptions& options) {
  DictionaryRho out;
  const Index d = dictionary.ambient_dim();
  const Subspace span = subspace_from_spanning(dictionary.atoms(), d);
  if (span.rank() < d) {
    const Subspace normal = complement(span);
    out.spanning = false;
    out.value = 0.0;
    out.lower_bound = 0.0;
    out.witness = normal.basis().col(0);
    out.restarts = 0;
    out.seed = options.seed;
    return out;
  }
  std::vector<Matrix> q;
  for (const auto& g : dictionary.atoms()) q.push_back(g.transpose());
  SphereSearchOptions opts = options;
  opts.grid = options.grid && d <= 3;
  SphereEstimate e = minimize_on_sphere(MaxNorm(std::move(q)), opts, {}, 0);
  static_cast<SphereEstimate&>(out) = e;
  return out;
}

QuantityReport measure(const SubspaceFamily& family, const SphereSearchOptions& options) {
  QuantityReport r;
  r.family_size = family.size();
  for (std::size_t k = 0; k < family.size(); ++k) {
    if (family.members()[k].rank() == 0) r.zero_rank_members.push_back(static_cast<int>(k) + 1);
  }
  r.friedrichs_c = friedrichs_number(family);
  r.rho_star_lower_bound = (1.0 - r.friedrichs_c) / static_cast<double>(family.size() - 1);
  r.rho_star = rho_estimate(family, RhoMode::restricted, options);
  r.rho = rho_estimate(family, RhoMode::full_sphere, options, {r.rho_star.witness});
  if (r.rho.value > r.rho_star.value) {
    r.rho.value = r.rho_star.value;
    r.rho.witness = r.rho_star.witness;
  }
  return r;
}

}  // namespace altproj
