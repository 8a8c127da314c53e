#include "altproj/iterates.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>

namespace altproj {

std::string to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::cyclic: return "cyclic";
    case PolicyKind::remotest: return "remotest";
    case PolicyKind::explicit_schedule: return "explicit";
  }
  return "unknown";
}

PolicyKind policy_kind_from_string(const std::string& name) {
  if (name == "cyclic") return PolicyKind::cyclic;
  if (name == "remotest") return PolicyKind::remotest;
  if (name == "explicit") return PolicyKind::explicit_schedule;
  throw PreconditionError("unknown policy '" + name + "'");
}

void Policy::validate(std::size_t family_size) const {
  if (kind != PolicyKind::explicit_schedule) {
    if (!schedule.empty()) throw PreconditionError("Policy: schedule given for a non-explicit policy");
    return;
  }
  if (schedule.empty()) throw PreconditionError("Policy: explicit schedule is empty");
  for (int label : schedule) {
    if (label < 1 || static_cast<std::size_t>(label) > family_size) {
      throw PreconditionError("Policy: schedule label " + std::to_string(label) + " out of range");
    }
  }
}

std::vector<double> Trajectory::per_T_norms() const {
  std::vector<double> out;
  if (family_size == 0) return out;
  for (std::size_t n = 0; n < norms.size(); n += family_size) out.push_back(norms[n]);
  return out;
}

std::vector<Vector> Trajectory::per_T_iterates() const {
  if (iterates.empty()) throw PreconditionError("Trajectory: iterates were not stored");
  std::vector<Vector> out;
  for (std::size_t n = 0; n < iterates.size(); n += family_size) out.push_back(iterates[n]);
  return out;
}

namespace {

std::size_t pick_lowest_within(std::span<const double> scores, double tie_band) {
  const double best = *std::max_element(scores.begin(), scores.end());
  for (std::size_t k = 0; k < scores.size(); ++k) {
    if (scores[k] >= best - tie_band) return k;
  }
  return 0;
}

struct StepOutcome {
  Vector next;
  int label;
  double step_dist;
};

StepOutcome remotest_step(std::span<const Subspace> members, const Vector& x) {
  const double xn = stable_norm(x);
  std::vector<Vector> projections;
  std::vector<double> dists;
  projections.reserve(members.size());
  dists.reserve(members.size());
  for (const auto& m : members) {
    projections.push_back(m.project(x));
    dists.push_back(stable_norm(x - projections.back()));
  }
  const std::size_t k = pick_lowest_within(dists, tolerances::kTieBreak * xn);
  return {std::move(projections[k]), static_cast<int>(k) + 1, dists[k]};
}

class Recorder {
 public:
  Recorder(Trajectory& t, const RunOptions& options) : t_(t), options_(options) {}

  void start(const Vector& x0) {
    t_.norms.push_back(stable_norm(x0));
    if (options_.store_iterates) t_.iterates.push_back(x0);
  }

  /// Records one step; returns false when the run must halt.
  bool push(StepOutcome&& step) {
    const double n = stable_norm(step.next);
    t_.indices.push_back(step.label);
    t_.step_dists.push_back(step.step_dist);
    t_.norms.push_back(n);
    if (options_.store_iterates) t_.iterates.push_back(std::move(step.next));
    return !halt(n);
  }

  bool halt(double norm) {
    if (norm <= options_.stop_norm) {
      t_.stopped_early = true;
      return true;
    }
    if (norm < DBL_MIN) {
      t_.underflow = true;
      t_.stopped_early = true;
      return true;
    }
    return false;
  }

 private:
  Trajectory& t_;
  const RunOptions& options_;
};

void check_members(std::span<const Subspace> members, const Vector& x0) {
  if (members.empty()) throw PreconditionError("run: no subspaces");
  for (const auto& m : members) {
    if (m.ambient_dim() != members.front().ambient_dim()) {
      throw PreconditionError("run: subspaces live in different ambient spaces");
    }
  }
  require_dim(x0, members.front().ambient_dim(), "run");
  require_finite(x0, "run");
}

void check_options(const RunOptions& options) {
  if (options.n_steps < 1) throw PreconditionError("run: n_steps must be >= 1");
  if (!(options.stop_norm >= 0.0)) throw PreconditionError("run: stop_norm must be >= 0");
}

}  // namespace

RemotestChoice remotest_choice(std::span<const Subspace> members, const Vector& x) {
  if (members.empty()) throw PreconditionError("remotest_choice: no subspaces");
  RemotestChoice out;
  out.distances.reserve(members.size());
  for (const auto& m : members) {
    require_dim(x, m.ambient_dim(), "remotest_choice");
    out.distances.push_back(distance(m, x));
  }
  out.index = static_cast<int>(pick_lowest_within(out.distances,
                                                  tolerances::kTieBreak * stable_norm(x))) + 1;
  return out;
}

RemotestChoice remotest_choice(const SubspaceFamily& family, const Vector& x) {
  return remotest_choice(family.members(), x);
}

Trajectory run(std::span<const Subspace> members, const Vector& x0, const Policy& policy,
               const RunOptions& options) {
  check_members(members, x0);
  check_options(options);
  policy.validate(members.size());

  Trajectory t;
  t.engine = EngineKind::projection;
  t.policy = policy;
  t.family_size = members.size();
  t.ambient_dim = x0.size();
  Recorder rec(t, options);
  rec.start(x0);
  if (rec.halt(t.norms.front())) return t;

  Vector x = x0;
  const std::size_t K = members.size();
  for (std::size_t n = 0; n < options.n_steps; ++n) {
    StepOutcome step;
    if (policy.kind == PolicyKind::remotest) {
      step = remotest_step(members, x);
    } else {
      const int label = policy.kind == PolicyKind::cyclic
                            ? static_cast<int>(n % K) + 1
                            : policy.schedule[n % policy.schedule.size()];
      const auto& m = members[static_cast<std::size_t>(label - 1)];
      Vector next = m.project(x);
      const double d = stable_norm(x - next);
      step = {std::move(next), label, d};
    }
    x = step.next;
    if (!rec.push(std::move(step))) break;
  }
  return t;
}

Trajectory run(const SubspaceFamily& family, const Vector& x0, const Policy& policy,
               const RunOptions& options) {
  return run(std::span<const Subspace>(family.members()), x0, policy, options);
}

Dictionary::Dictionary(std::vector<Vector> atoms, DictionaryProvenance provenance)
    : atoms_(std::move(atoms)), provenance_(provenance) {
  if (atoms_.empty()) throw PreconditionError("Dictionary: empty dictionary");
  ambient_dim_ = atoms_.front().size();
  if (ambient_dim_ <= 0) throw PreconditionError("Dictionary: atoms must be nonempty vectors");
  for (const auto& g : atoms_) {
    require_dim(g, ambient_dim_, "Dictionary");
    require_finite(g, "Dictionary");
    if (std::abs(stable_norm(g) - 1.0) > tolerances::kOrthonormality) {
      throw PreconditionError("Dictionary: atom is not a unit vector");
    }
  }
}

Dictionary Dictionary::from_complement_bases(const SubspaceFamily& family) {
  std::vector<Vector> atoms;
  for (const auto& c : family.complements()) {
    for (Index j = 0; j < c.rank(); ++j) atoms.emplace_back(c.basis().col(j));
  }
  return Dictionary(std::move(atoms), DictionaryProvenance::induced);
}

bool Dictionary::spans_ambient(double tol) const {
  return subspace_from_spanning(atoms_, ambient_dim_, tol).rank() == ambient_dim_;
}

double weakness_at(std::span<const double> weakness, std::size_t step) {
  if (weakness.empty()) return 1.0;
  return weakness[std::min(step, weakness.size() - 1)];
}

void validate_weakness(std::span<const double> weakness) {
  for (double t : weakness) {
    if (!(t > 0.0 && t <= 1.0)) throw PreconditionError("weakness parameter outside (0,1]");
  }
}

Trajectory greedy_run(const Dictionary& dictionary, const Vector& x0,
                      std::span<const double> weakness, const RunOptions& options) {
  require_dim(x0, dictionary.ambient_dim(), "greedy_run");
  require_finite(x0, "greedy_run");
  check_options(options);
  validate_weakness(weakness);

  Trajectory t;
  t.engine = EngineKind::greedy_dictionary;
  t.family_size = dictionary.size();
  t.ambient_dim = x0.size();
  Recorder rec(t, options);
  rec.start(x0);
  if (rec.halt(t.norms.front())) return t;

  const auto& atoms = dictionary.atoms();
  std::vector<double> scores(atoms.size());
  std::vector<double> inner(atoms.size());
  Vector x = x0;
  for (std::size_t n = 0; n < options.n_steps; ++n) {
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      inner[i] = atoms[i].dot(x);
      scores[i] = std::abs(inner[i]);
    }
    const double sup = *std::max_element(scores.begin(), scores.end());
    const double threshold = weakness_at(weakness, n) * sup;
    // Threshold passers only; the canonical pick is the best of them.
    std::vector<double> passing(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) passing[i] = scores[i] >= threshold ? scores[i] : -1.0;
    const std::size_t k = pick_lowest_within(passing, tolerances::kTieBreak * stable_norm(x));
    Vector next = x - inner[k] * atoms[k];
    x = next;
    if (!rec.push({std::move(next), static_cast<int>(k) + 1, scores[k]})) break;
  }
  return t;
}

Trajectory greedy_run(const SubspaceFamily& family, const Vector& x0,
                      std::span<const double> weakness, const RunOptions& options) {
  check_members(family.members(), x0);
  check_options(options);
  validate_weakness(weakness);

  Trajectory t;
  t.engine = EngineKind::greedy_induced;
  t.policy = Policy::remotest();
  t.family_size = family.size();
  t.ambient_dim = x0.size();
  Recorder rec(t, options);
  rec.start(x0);
  if (rec.halt(t.norms.front())) return t;

  Vector x = x0;
  for (std::size_t n = 0; n < options.n_steps; ++n) {
    StepOutcome step = remotest_step(family.members(), x);
    x = step.next;
    if (!rec.push(std::move(step))) break;
  }
  return t;
}

}  // namespace altproj
