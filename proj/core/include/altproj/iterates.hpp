#pragma once

/// @file iterates.hpp
/// Projection engines: cyclic (alternating) products, remotest projections, and the
/// pure/weak greedy algorithm over a finite dictionary or over the dictionary D_L of
/// unit vectors in the union of the complements L_k^perp.
///
/// Subspace labels are 1-based throughout (L_1..L_K), so index sequences read the
/// same as the mathematics.

#include "altproj/hilbert.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace altproj {

enum class PolicyKind { cyclic, remotest, explicit_schedule };

std::string to_string(PolicyKind kind);
PolicyKind policy_kind_from_string(const std::string& name);

struct Policy {
  PolicyKind kind = PolicyKind::cyclic;
  /// Labels in 1..K; required iff kind == explicit_schedule. Cycled when shorter than the run.
  std::vector<int> schedule;

  static Policy cyclic() { return {PolicyKind::cyclic, {}}; }
  static Policy remotest() { return {PolicyKind::remotest, {}}; }
  static Policy explicit_schedule(std::vector<int> labels) {
    return {PolicyKind::explicit_schedule, std::move(labels)};
  }

  void validate(std::size_t family_size) const;
};

/// How a trajectory was produced; greedy runs record |<x_n, g_{n+1}>| as step distances.
enum class EngineKind { projection, greedy_dictionary, greedy_induced };

struct Trajectory {
  EngineKind engine = EngineKind::projection;
  Policy policy;
  std::size_t family_size = 0;  ///< K, or the number of atoms for explicit dictionaries
  Index ambient_dim = 0;

  std::vector<Vector> iterates;     ///< x_0..x_N; empty when storage was disabled
  std::vector<double> norms;        ///< |x_0|..|x_N|
  std::vector<int> indices;         ///< label chosen at step n (maps x_n to x_{n+1})
  std::vector<double> step_dists;   ///< dist(x_n, L_{i(n)}), or |<x_n,g_{n+1}>| for greedy

  bool stopped_early = false;  ///< |x_n| <= stop_norm before n_steps
  bool underflow = false;      ///< halted on a subnormal norm

  std::size_t steps() const { return indices.size(); }

  /// |T^n x_0| for the cyclic product T = P_K...P_1: every K-th norm.
  std::vector<double> per_T_norms() const;
  /// T^n x_0, requires stored iterates.
  std::vector<Vector> per_T_iterates() const;
};

struct RunOptions {
  std::size_t n_steps = 100;
  double stop_norm = 1e-300;
  bool store_iterates = true;
};

struct RemotestChoice {
  int index = 1;                   ///< 1-based label of the remotest subspace
  std::vector<double> distances;   ///< dist(x, L_k), k = 1..K
};

/// argmax_k dist(x, L_k); ties (within kTieBreak * |x| of the max) go to the lowest label.
RemotestChoice remotest_choice(std::span<const Subspace> members, const Vector& x);
RemotestChoice remotest_choice(const SubspaceFamily& family, const Vector& x);

/// One projection per step under `policy`. The span overload accepts subspaces without
/// the trivial-intersection invariant (used to study invariant subspaces of the engine).
Trajectory run(std::span<const Subspace> members, const Vector& x0, const Policy& policy,
               const RunOptions& options);
Trajectory run(const SubspaceFamily& family, const Vector& x0, const Policy& policy,
               const RunOptions& options);

enum class DictionaryProvenance { explicit_atoms, induced };

/// Finite set of unit vectors in R^d.
class Dictionary {
 public:
  explicit Dictionary(std::vector<Vector> atoms,
                      DictionaryProvenance provenance = DictionaryProvenance::explicit_atoms);

  /// The complement basis vectors of a family: a finite subset of D_L.
  static Dictionary from_complement_bases(const SubspaceFamily& family);

  const std::vector<Vector>& atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }
  Index ambient_dim() const { return ambient_dim_; }
  DictionaryProvenance provenance() const { return provenance_; }
  bool spans_ambient(double tol = tolerances::kRank) const;

 private:
  std::vector<Vector> atoms_;
  Index ambient_dim_ = 0;
  DictionaryProvenance provenance_;
};

/// Weakness parameter t_n for step n (0-based). An empty list means PGA (t = 1); a short
/// list repeats its last entry.
double weakness_at(std::span<const double> weakness, std::size_t step);
void validate_weakness(std::span<const double> weakness);

/// PGA/WGA over a finite dictionary: x_{n+1} = x_n - <x_n,g>g. Among atoms passing the
/// weakness threshold the max scorer is taken (lowest index on ties), so WGA and PGA
/// select the same atom; the weakness sequence matters only for the rate bound.
Trajectory greedy_run(const Dictionary& dictionary, const Vector& x0,
                      std::span<const double> weakness, const RunOptions& options);

/// Greedy algorithm over D_L. The best atom of D_L is P_k^perp x / |P_k^perp x| for the
/// remotest k, so each step is exactly the remotest projection step.
Trajectory greedy_run(const SubspaceFamily& family, const Vector& x0,
                      std::span<const double> weakness, const RunOptions& options);

}  // namespace altproj
