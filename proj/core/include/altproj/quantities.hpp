#pragma once

/// @file quantities.hpp
/// Constants and directional quantities that drive the convergence rates of the
/// projection engines: the generalized Friedrichs number c, the sphere constants
/// rho and rho*, the dictionary constant rho(D), the sum-of-norms s(y) over the
/// complements, the greedy direction g(x) with its cosine rho(x), and the one-cycle
/// decomposition behind nu(y).

#include "altproj/hilbert.hpp"
#include "altproj/iterates.hpp"

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace altproj {

/// c = lambda_max(M) / (K - 1), M the zero-diagonal block matrix with blocks B_j^T B_k.
/// Zero-rank members contribute nothing; a family of only zero-rank members is rejected.
double friedrichs_number(const SubspaceFamily& family);

enum class RhoMode {
  full_sphere,  ///< rho: inf over S(H) of max_k dist(x, L_k)
  restricted,   ///< rho*: the same infimum over S(H) intersected with the union of the L_k
};

struct SphereEstimate {
  double value = 0.0;       ///< best objective found: an upper bound on the infimum
  Vector witness;           ///< unit vector achieving `value`
  /// Certified lower bound, available when the search sphere is a circle
  /// (Lipschitz branch and bound); NaN otherwise.
  double lower_bound = std::numeric_limits<double>::quiet_NaN();
  int restarts = 0;
  long evaluations = 0;
  long iterations = 0;
  std::uint64_t seed = 0;
  bool grid_refined = false;
  int witness_member = 0;   ///< restricted mode: 1-based member containing the witness
};

struct SphereSearchOptions {
  int restarts = 16;
  std::uint64_t seed = 0;
  int iterations = 4000;     ///< local descent iterations per start
  double grid_step = 1e-3;   ///< angular grid step on circles and 2-spheres
  bool grid = true;          ///< grid refinement, applied when the ambient dimension is <= 3
};

/// Multi-start projected (epsilon-)subgradient descent of max_k dist(x, L_k) on the unit
/// sphere, plus a deterministic grid when the sphere is low dimensional.
SphereEstimate rho_estimate(const SubspaceFamily& family, RhoMode mode,
                            const SphereSearchOptions& options = {},
                            const std::vector<Vector>& extra_starts = {});

struct DictionaryRho : SphereEstimate {
  bool spanning = true;  ///< false: rho(D) = 0, witness is a unit normal to span(D)
};

/// rho(D) = inf over the sphere of max_g |<x,g>|, estimated from above; exact (two-sided)
/// in R^2.
DictionaryRho dictionary_rho(const Dictionary& dictionary, const SphereSearchOptions& options = {});

struct QuantityReport {
  std::size_t family_size = 0;
  double friedrichs_c = 0.0;
  SphereEstimate rho;
  SphereEstimate rho_star;
  std::vector<int> zero_rank_members;
  /// (1 - c) / (K - 1), an exact lower bound for rho*.
  double rho_star_lower_bound = 0.0;
};

/// c, rho and rho* together. Any rho* witness is a feasible point for rho, so the
/// reported rho never exceeds the reported rho*.
QuantityReport measure(const SubspaceFamily& family, const SphereSearchOptions& options = {});

struct SNormOptions {
  double tol = 1e-8;                 ///< target gap relative to (1 + |y|)
  std::size_t max_iterations = 100000;
  std::size_t check_every = 20;
};

struct SNormResult {
  double value = 0.0;                 ///< sum |y_k| of the returned decomposition
  std::vector<Vector> decomposition;  ///< y_k in L_k^perp with sum y_k = y
  double dual_value = 0.0;            ///< <y, u> with |P_k^perp u| <= 1 for all k
  Vector dual_vector;
  double gap = 0.0;                   ///< value - dual_value
  bool certified = false;             ///< gap <= tol * (1 + |y|)
  std::size_t iterations = 0;
  std::string method;                 ///< trivial, single_term, direct_sum, admm, admm+newton
  double tol = 0.0;
};

/// s(y) = inf { |y_1| + ... + |y_K| : y = y_1 + ... + y_K, y_k in L_k^perp }.
/// Primal iterate by ADMM on z = (z_k), y_k = C_k z_k; the dual multiplier gives a
/// feasible u and the lower bound <y,u>. Returns the best pair found; `certified` is
/// false when the iteration cap is hit first.
SNormResult s_norm(const SubspaceFamily& family, const Vector& y, const SNormOptions& options = {});

struct GreedyDirection {
  Vector g;                 ///< unit vector in L_k^perp maximizing <x, .> over D_L
  double rho_x = 0.0;       ///< <x, g> / |x|
  int achieving_index = 0;  ///< 1-based k with g in L_k^perp; equals the remotest label
};

GreedyDirection greedy_direction(const SubspaceFamily& family, const Vector& x);

struct NuResult {
  std::vector<Vector> v;  ///< v_j = P_j^perp P_{j-1} ... P_1 y
  double nu = 0.0;        ///< (sum |v_j|^2)^{1/2} / |y|
  Vector image;           ///< T y = y - v_1 - ... - v_K
};

NuResult nu_decomposition(const SubspaceFamily& family, const Vector& y);

}  // namespace altproj
