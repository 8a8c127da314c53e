#include "altproj/serialization.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace altproj {
namespace {

class Fnv1a {
 public:
  void bytes(const void* p, std::size_t n) {
    const auto* c = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h_ ^= c[i];
      h_ *= 0x100000001b3ULL;
    }
  }
  template <class T>
  void value(T v) {
    bytes(&v, sizeof v);
  }
  std::uint64_t digest() const { return h_; }

 private:
  std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

// NaN and infinities have no JSON form; they become null.
json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json numbers(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(number(x));
  return a;
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

json to_json(const Vector& v) {
  json a = json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(number(v(i)));
  return a;
}

Vector vector_from_json(const json& j) {
  if (!j.is_array()) throw PreconditionError("vector: expected an array of numbers");
  Vector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw PreconditionError("vector: expected an array of numbers");
    v(static_cast<Index>(i)) = j[i].get<double>();
  }
  require_finite(v, "vector");
  return v;
}

json to_json(const Subspace& s) {
  json basis = json::array();
  for (Index c = 0; c < s.rank(); ++c) basis.push_back(to_json(Vector(s.basis().col(c))));
  return {{"ambient_dim", s.ambient_dim()}, {"basis", basis}};
}

Subspace subspace_from_json(const json& j, Index default_dim) {
  if (!j.is_object()) throw PreconditionError("subspace: expected an object");
  Index d = default_dim;
  if (j.contains("ambient_dim")) {
    if (!j["ambient_dim"].is_number_integer() || j["ambient_dim"].get<long>() < 1) {
      throw PreconditionError("subspace: ambient_dim must be a positive integer");
    }
    d = j["ambient_dim"].get<Index>();
  }
  const bool has_basis = j.contains("basis"), has_span = j.contains("spanning");
  if (has_basis == has_span) throw PreconditionError("subspace: give exactly one of basis or spanning");
  const json& rows = has_basis ? j["basis"] : j["spanning"];
  if (!rows.is_array()) throw PreconditionError("subspace: basis must be an array of vectors");
  std::vector<Vector> vecs;
  for (const auto& r : rows) vecs.push_back(vector_from_json(r));
  if (d == 0) {
    if (vecs.empty()) throw PreconditionError("subspace: ambient_dim required for an empty basis");
    d = vecs.front().size();
  }
  for (const auto& v : vecs) require_dim(v, d, "subspace");
  if (has_span) return subspace_from_spanning(vecs, d);
  if (vecs.empty()) return Subspace(d);
  Matrix b(d, static_cast<Index>(vecs.size()));
  for (std::size_t c = 0; c < vecs.size(); ++c) b.col(static_cast<Index>(c)) = vecs[c];
  return Subspace::from_orthonormal(std::move(b));
}

json to_json(const SubspaceFamily& f) {
  json members = json::array();
  for (const auto& m : f.members()) members.push_back(to_json(m));
  return {{"ambient_dim", f.ambient_dim()}, {"K", f.size()}, {"members", members}};
}

SubspaceFamily family_from_json(const json& j) {
  if (!j.is_object() || !j.contains("members") || !j["members"].is_array()) {
    throw PreconditionError("family: expected an object with a members array");
  }
  Index d = 0;
  if (j.contains("ambient_dim")) {
    if (!j["ambient_dim"].is_number_integer()) throw PreconditionError("family: ambient_dim must be an integer");
    d = j["ambient_dim"].get<Index>();
  }
  std::vector<Subspace> members;
  for (const auto& m : j["members"]) members.push_back(subspace_from_json(m, d));
  return SubspaceFamily(std::move(members));
}

std::string family_hash(const SubspaceFamily& f) {
  Fnv1a h;
  h.value(static_cast<std::int64_t>(f.ambient_dim()));
  for (const auto& m : f.members()) {
    h.value(static_cast<std::int64_t>(m.rank()));
    const Matrix& b = m.basis();
    h.bytes(b.data(), static_cast<std::size_t>(b.size()) * sizeof(double));
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h.digest()));
  return buf;
}

json tolerances_json() {
  return {{"orthonormality", tolerances::kOrthonormality},
          {"rank", tolerances::kRank},
          {"identity", tolerances::kIdentity},
          {"tie_break", tolerances::kTieBreak},
          {"membership", tolerances::kMembership}};
}

json to_json(const Trajectory& t, const std::string& family_hash_hex) {
  const char* engine = t.engine == EngineKind::projection        ? "projection"
                       : t.engine == EngineKind::greedy_induced  ? "greedy_induced"
                                                                 : "greedy_dictionary";
  json policy = {{"kind", to_string(t.policy.kind)}};
  if (!t.policy.schedule.empty()) policy["schedule"] = t.policy.schedule;
  return {{"schema_version", kSchemaVersion},
          {"engine", engine},
          {"policy", policy},
          {"family_size", t.family_size},
          {"ambient_dim", t.ambient_dim},
          {"family_hash", family_hash_hex},
          {"steps", t.steps()},
          {"stopped_early", t.stopped_early},
          {"underflow", t.underflow},
          {"tolerances", tolerances_json()},
          {"norms", numbers(t.norms)},
          {"indices", t.indices},
          {"step_dists", numbers(t.step_dists)}};
}

void write_trajectory_csv(std::ostream& os, const Trajectory& t) {
  os << "n,norm,index,step_dist\n";
  os << "0," << format_double(t.norms.front()) << ",,\n";
  for (std::size_t n = 1; n < t.norms.size(); ++n) {
    os << n << ',' << format_double(t.norms[n]) << ',' << t.indices[n - 1] << ','
       << format_double(t.step_dists[n - 1]) << '\n';
  }
}

json to_json(const SphereEstimate& e) {
  json j = {{"value", number(e.value)},
            {"witness", to_json(e.witness)},
            {"lower_bound", number(e.lower_bound)},
            {"restarts", e.restarts},
            {"evaluations", e.evaluations},
            {"iterations", e.iterations},
            {"seed", e.seed},
            {"grid_refined", e.grid_refined}};
  if (e.witness_member > 0) j["witness_member"] = e.witness_member;
  return j;
}

json to_json(const DictionaryRho& e) {
  json j = to_json(static_cast<const SphereEstimate&>(e));
  j["spanning"] = e.spanning;
  return j;
}

json to_json(const QuantityReport& q) {
  return {{"K", q.family_size},
          {"friedrichs_c", number(q.friedrichs_c)},
          {"rho", to_json(q.rho)},
          {"rho_star", to_json(q.rho_star)},
          {"rho_star_lower_bound", number(q.rho_star_lower_bound)},
          {"zero_rank_members", q.zero_rank_members}};
}

json to_json(const SNormResult& r) {
  json dec = json::array();
  for (const auto& y : r.decomposition) dec.push_back(to_json(y));
  return {{"value", number(r.value)},   {"dual_value", number(r.dual_value)},
          {"gap", number(r.gap)},       {"certified", r.certified},
          {"iterations", r.iterations}, {"method", r.method},
          {"tol", r.tol},               {"decomposition", dec},
          {"dual_vector", to_json(r.dual_vector)}};
}

json to_json(const GreedyDirection& g) {
  return {{"g", to_json(g.g)}, {"rho_x", number(g.rho_x)}, {"achieving_index", g.achieving_index}};
}

json to_json(const NuResult& r) {
  json v = json::array();
  for (const auto& x : r.v) v.push_back(to_json(x));
  return {{"nu", number(r.nu)}, {"v", v}, {"image", to_json(r.image)}};
}

json to_json(const CheckResult& c) {
  return {{"name", c.name},
          {"paper_ref", c.statement},
          {"tolerance", number(c.tolerance)},
          {"max_violation", number(c.max_violation)},
          {"worst_step", c.worst_step},
          {"evaluated", c.evaluated},
          {"pass", c.pass}};
}

json to_json(const CertificationReport& r) {
  json checks = json::array();
  for (const auto& c : r.checks) checks.push_back(to_json(c));
  return {{"schema_version", kSchemaVersion}, {"pass", r.all_pass()}, {"checks", checks}};
}

json to_json(const RateFit& f) {
  return {{"slope", number(f.slope)},
          {"intercept", number(f.intercept)},
          {"r_squared", number(f.r_squared)},
          {"points", f.points},
          {"power_law", f.power_law}};
}

json to_json(const RateReport& r) {
  return {{"K", r.K},
          {"friedrichs_c", number(r.friedrichs_c)},
          {"rho_star_lower_bound", number(r.rho_star_lower_bound)},
          {"remotest_factor", number(r.remotest_factor)},
          {"alternating_factor", number(r.alternating_factor)},
          {"empirical_max_factor", number(r.empirical_max_factor)},
          {"empirical_mean_factor", number(r.empirical_mean_factor)}};
}

json to_json(const DecayLedger& l) {
  return {{"K", l.K},
          {"alpha", number(l.alpha_exp)},
          {"exponent", number(l.exponent)},
          {"s_ub", number(l.s_ub)},
          {"s_lb", number(l.s_lb)},
          {"c_x0", number(l.c_x0)},
          {"cycles", l.nu.size()},
          {"truncated", l.truncated},
          {"a", numbers(l.a)},
          {"b", numbers(l.b)},
          {"nu", numbers(l.nu)}};
}

json to_json(const BakersAgreement& b) {
  return {{"steps_compared", b.steps_compared},
          {"first_mismatch", b.first_mismatch},
          {"odd_steps_are_one", b.odd_steps_are_one},
          {"tie", b.tie}};
}

}  // namespace altproj
