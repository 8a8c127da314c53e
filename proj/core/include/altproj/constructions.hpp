#pragma once

/// @file constructions.hpp
/// Concrete families and starting points: orthogonal 2-dimensional blocks with small
/// angles (slow alternating convergence), the three planes in R^4 whose remotest index
/// sequence follows a rotation of the circle, four lines in R^2 separating remotest
/// from alternating projections, a slow-decay starting point, and random families.

#include "altproj/hilbert.hpp"

#include <array>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace altproj {

// ---------------------------------------------------------------------------
// Orthogonal blocks

/// Block m occupies coordinates (2m-2, 2m-1) and carries e1 = (1,0), e2 = (cos a, sin a),
/// y1 = (0,1) orthogonal to e1 and y2 = (sin a, -cos a) orthogonal to e2.
struct BlockConstruction {
  std::vector<double> angles;  ///< a_m in (0, pi/2]
  std::vector<double> coeffs;  ///< c_m > 0
  /// Decay parameter of the preset (a_m = 1/m, c_m = m^(-1/2-eps)); NaN for custom blocks.
  double epsilon = std::numeric_limits<double>::quiet_NaN();

  std::size_t blocks() const { return angles.size(); }
  void validate() const;

  static BlockConstruction preset(double epsilon = 0.25, std::size_t blocks = 400);
};

struct BlockInstance {
  SubspaceFamily family;  ///< L1 = span{e1 of every block}, L2 = span{e2 of every block}
  Vector x0;              ///< sum_m c_m (y1 + y2), an element of L1^perp + L2^perp
  /// Bound on the squared norm dropped by truncating the preset to M blocks,
  /// M^(-2-2eps)/(2+2eps); NaN for custom blocks.
  double tail_bound;
};

BlockInstance block_family(const BlockConstruction& cfg);

/// |T^n x0|^2 = sum_m c_m^2 sin^2 a_m cos^(4n-2) a_m for T = P2 P1, compensated sum. n >= 1.
double block_cyclic_norm_sq(const BlockConstruction& cfg, std::size_t n);
double block_cyclic_norm(const BlockConstruction& cfg, std::size_t n);

// ---------------------------------------------------------------------------
// Three planes in R^4 = R^2 + R^2

struct BakersParams {
  double alpha = 0.0, beta = 0.0, gamma = 0.0, delta = 0.0;
  double a = 0.0;        ///< ln(cos^2 beta / cos^2 gamma)
  double b = 0.0;        ///< ln(cos^2 delta / cos^2 alpha)
  double lambda0 = 0.0;  ///< ln(eta / xi) of the starting point
  /// cos^2 of (alpha, beta, gamma, delta) as numerators over a common denominator, when
  /// the angles were given that way; denominator 0 otherwise.
  std::array<long, 4> cos2_numerators{};
  long cos2_denominator = 0;

  static BakersParams from_angles(double alpha, double beta, double gamma, double delta, double lambda0);
  /// cos^2 = n_i / den for alpha, beta, gamma, delta.
  static BakersParams from_rational_cos2(std::array<long, 4> numerators, long denominator, double lambda0);
  /// cos^2 = 1/11, 3/11, 2/11, 4/11 for alpha, beta, gamma, delta.
  static BakersParams preset(double lambda0);
};

struct BakersConditions {
  bool ordering = false;        ///< alpha > gamma > beta > delta > alpha/2
  double balance_defect = 0.0;  ///< |cos^2 delta - cos^2 gamma - cos^2 beta + cos^2 alpha|
  bool balance = false;         ///< balance_defect <= 1e-12
  bool rational = false;        ///< cos^2 ratios known to be rational (ratios r1, r2)
  bool no_common_power = false; ///< r1^m != r2^n for all m, n >= 1 (requires `rational`)
  bool shifts_ordered = false;  ///< b > a > 0
  std::array<long, 2> r1{};     ///< cos^2 alpha / cos^2 delta in lowest terms
  std::array<long, 2> r2{};     ///< cos^2 gamma / cos^2 beta in lowest terms
  bool all() const { return ordering && balance && rational && no_common_power && shifts_ordered; }
};

BakersConditions check_conditions(const BakersParams& p);

/// True iff p1/q1 and p2/q2 (positive, lowest terms) have no equal positive powers.
bool rational_powers_never_coincide(long p1, long q1, long p2, long q2);

struct PlanesInstance {
  SubspaceFamily family;       ///< L_j = span{e_j, u_j}
  BakersParams params;
  std::array<Vector, 3> e;     ///< first R^2: e1, e2 at alpha, e3 at beta
  std::array<Vector, 3> u;     ///< second R^2: u1, u2 at delta, u3 at gamma
  Vector x0;                   ///< xi e1 + eta u1
};

/// Golden ratio, the default eta with xi = 1.
inline constexpr double kGoldenRatio = 1.6180339887498948482;

PlanesInstance planes_family(const BakersParams& params, double xi, double eta);
/// The preset cosines with x0 = e1 + phi u1.
PlanesInstance planes_preset(double xi = 1.0, double eta = kGoldenRatio);

struct BakersOrbit {
  /// lambda_k = lambda0 - l_k a + m_k b, evaluated from the integer counts.
  std::vector<double> lambda;
  std::vector<long> a_count, b_count;
  /// Predicted remotest label at step 2k: 3 if lambda_k > 0, 2 if lambda_k < 0.
  std::vector<int> even_indices;
  /// Some |lambda_k| < 1e-12 (a tie the floating-point model cannot resolve).
  bool tie = false;

  /// Label predicted at step n: even_indices[n/2] for even n, 1 for odd n.
  int predicted_index(std::size_t step) const;
};

/// Orbit of t -> t - a (t >= 0), t + b (t < 0), k = 0..n-1.
BakersOrbit bakers_orbit(const BakersParams& p, std::size_t n);

// ---------------------------------------------------------------------------
// Four lines in R^2

/// Lines spanned by (1,0), (0,1), (1,1), (1,eps-1); eps in (0, 0.5).
SubspaceFamily four_lines_family(double eps);

// ---------------------------------------------------------------------------
// Slow decay under remotest projections

class TruncationError : public std::runtime_error {
 public:
  TruncationError(const std::string& what, std::size_t required_blocks)
      : std::runtime_error(what), required_blocks_(required_blocks) {}
  std::size_t required_blocks() const { return required_blocks_; }

 private:
  std::size_t required_blocks_;
};

struct SlowWitness {
  Vector x0;
  double scale = 1.0;                  ///< x0 = scale * sum_n w_n / n (targets divided by it)
  std::vector<std::size_t> m;          ///< chosen m_n, n = 1..levels
  std::vector<std::size_t> blocks;     ///< 1-based block hosting w_n
  std::vector<double> incoherence;     ///< sin(a_b / 2) for the chosen blocks, <= 1/m_n
};

/// Starting point for which the remotest residuals on block_family(cfg) stay above
/// target[n-1] for n = 1..horizon. w_n is the bisector of e1, e2 in a block whose
/// half-angle sine is at most 1/m_n, and 4n(M_n - 1) <= m_n where M_n is the first
/// index after which the (scaled) target stays below 1/(2n+2). The smallest such
/// increasing m_n is used. Throws TruncationError when cfg has too few suitable blocks.
SlowWitness slow_witness(const BlockConstruction& cfg, std::span<const double> target, std::size_t horizon);

// ---------------------------------------------------------------------------
// Random families

/// K random subspaces of R^d (Haar-distributed bases) with trivial intersection.
/// Ranks are drawn uniformly from 1..d-1 unless given; draws are repeated until the
/// complements span R^d.
SubspaceFamily random_family(Index d, std::size_t K, std::uint64_t seed,
                             const std::vector<Index>& ranks = {});

/// Standard normal direction, normalized; deterministic in (d, seed).
Vector random_unit_vector(Index d, std::uint64_t seed);

}  // namespace altproj
