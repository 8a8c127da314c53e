#pragma once

// Reference computations for the tests. Each one takes a route unrelated to the library's
// own algorithm: normal equations instead of QR/SVD, dense scans instead of descent,
// random hill climbing instead of eigensolvers.

#include "altproj/hilbert.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <vector>

namespace oracle {

using altproj::Index;
using altproj::Matrix;
using altproj::Vector;

/// A (A^T A)^{-1} A^T for full-column-rank A.
inline Matrix gram_projector(const Matrix& A) {
  const Matrix G = A.transpose() * A;
  return A * G.ldlt().solve(A.transpose());
}

inline Matrix random_matrix(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
  return m;
}

inline Vector random_vector(Index d, std::mt19937_64& rng) {
  return random_matrix(d, 1, rng).col(0);
}

/// Orthonormal basis of the orthogonal complement of span(A), by Gram-Schmidt against the
/// standard basis.
inline Matrix complement_basis(const Matrix& A) {
  const Index d = A.rows();
  std::vector<Vector> q;
  auto absorb = [&](Vector v) {
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& u : q) v -= u.dot(v) * u;
    return v;
  };
  for (Index j = 0; j < A.cols(); ++j) {
    Vector v = absorb(A.col(j));
    if (v.norm() > 1e-10) q.push_back(v / v.norm());
  }
  const std::size_t r = q.size();
  for (Index i = 0; i < d; ++i) {
    Vector v = absorb(Vector::Unit(d, i));
    if (v.norm() > 1e-8) q.push_back(v / v.norm());
  }
  Matrix c(d, static_cast<Index>(q.size() - r));
  for (std::size_t k = r; k < q.size(); ++k) c.col(static_cast<Index>(k - r)) = q[k];
  return c;
}

/// Generalized Friedrichs number as a maximized Rayleigh quotient:
/// sup sum_{j != k} <x_j, x_k> / ((K-1) sum |x_j|^2) over x_j in L_j, by random
/// sampling followed by accept-if-better random perturbation.
inline double friedrichs_by_sampling(const std::vector<Matrix>& bases, std::uint64_t seed,
                                     int samples = 400, int climbs = 40000) {
  const std::size_t K = bases.size();
  std::vector<Index> offs{0};
  for (const auto& b : bases) offs.push_back(offs.back() + b.cols());
  const Index n = offs.back();
  auto quotient = [&](const Vector& z) {
    Vector s = Vector::Zero(bases[0].rows());
    double sq = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      const Vector xk = bases[k] * z.segment(offs[k], bases[k].cols());
      s += xk;
      sq += xk.squaredNorm();
    }
    // sum_{j != k} <x_j, x_k> = |sum x_k|^2 - sum |x_k|^2
    return (s.squaredNorm() - sq) / (static_cast<double>(K - 1) * sq);
  };
  std::mt19937_64 rng(seed);
  Vector best = random_vector(n, rng);
  double fbest = quotient(best);
  for (int i = 1; i < samples; ++i) {
    Vector z = random_vector(n, rng);
    const double f = quotient(z);
    if (f > fbest) fbest = f, best = z;
  }
  best.normalize();
  double step = 0.3;
  std::normal_distribution<double> normal;
  for (int i = 0; i < climbs; ++i) {
    Vector z = best;
    for (Index j = 0; j < n; ++j) z(j) += step * normal(rng);
    z.normalize();
    const double f = quotient(z);
    if (f > fbest) {
      fbest = f, best = z;
    } else if (i % 200 == 199) {
      step = std::max(step * 0.7, 1e-7);
    }
  }
  return fbest;
}

/// min over the unit circle of max_k |C_k^T x| by a uniform scan; the true minimum lies
/// within lipschitz * pi / n below the returned value.
inline double circle_scan(const std::vector<Matrix>& complements, int n = 200000) {
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const double t = M_PI * i / n;
    const Vector x = (Vector(2) << std::cos(t), std::sin(t)).finished();
    double m = 0.0;
    for (const auto& c : complements) m = std::max(m, (c.transpose() * x).norm());
    best = std::min(best, m);
  }
  return best;
}

/// Minimum of a convex function of one variable by golden-section search on [lo, hi].
inline double golden_min(const std::function<double(double)>& f, double lo, double hi, int iters = 300) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < iters; ++i) {
    if (fc < fd) {
      b = d, d = c, fd = fc;
      c = b - g * (b - a), fc = f(c);
    } else {
      a = c, c = d, fc = fd;
      d = a + g * (b - a), fd = f(d);
    }
  }
  return std::min(fc, fd);
}

/// s(y) for two lines l1, l2 in R^3: y = y1 + y2 with y_k orthogonal to l_k is a
/// one-parameter family along w = l1 x l2, so s is a 1-D convex minimization.
inline double s_two_lines_r3(const Vector& l1, const Vector& l2, const Vector& y) {
  const Eigen::Vector3d n1 = l1.normalized(), n2 = l2.normalized();
  const Eigen::Vector3d w = n1.cross(n2).normalized();
  // Particular solution from [P1 P2] z = y.
  Eigen::Matrix3d P1 = Eigen::Matrix3d::Identity() - n1 * n1.transpose();
  Eigen::Matrix3d P2 = Eigen::Matrix3d::Identity() - n2 * n2.transpose();
  Eigen::Matrix<double, 3, 6> A;
  A << P1, P2;
  const Eigen::Matrix<double, 6, 1> z = A.completeOrthogonalDecomposition().solve(Eigen::Vector3d(y));
  const Eigen::Vector3d y1 = P1 * z.head<3>(), y2 = P2 * z.tail<3>();
  const double scale = y.norm() + y1.norm() + y2.norm() + 1.0;
  auto f = [&](double t) { return (y1 + t * w).norm() + (y2 - t * w).norm(); };
  return golden_min(f, -4 * scale, 4 * scale);
}

/// c_n at equality in c_{n+1} = c_n (1 - c_n / A).
inline std::vector<double> sequence_at_equality(double A, double c1, std::size_t n) {
  std::vector<double> c(n);
  c[0] = c1;
  for (std::size_t i = 1; i < n; ++i) c[i] = c[i - 1] * (1.0 - c[i - 1] / A);
  return c;
}

/// Random sequence satisfying c_1 <= A and 0 <= c_{n+1} <= c_n (1 - c_n / A).
inline std::vector<double> sequence_below_envelope(double A, std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> c(n);
  c[0] = A * u(rng);
  for (std::size_t i = 1; i < n; ++i) {
    // Mostly near the upper envelope, where the bound is tight.
    const double frac = u(rng) < 0.8 ? 1.0 - 1e-3 * u(rng) : u(rng);
    c[i] = c[i - 1] * (1.0 - c[i - 1] / A) * frac;
  }
  return c;
}

}  // namespace oracle
