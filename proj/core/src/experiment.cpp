#include "altproj/experiment.hpp"

#include "altproj/certify.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace altproj {
namespace {

namespace fs = std::filesystem;

constexpr std::uint64_t kX0Stream = 0x9e3779b97f4a7c15ULL;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ConfigError(where + ": " + what);
}

void only_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  for (const auto& [key, _] : j.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      fail(where, "unknown key \"" + key + "\"");
    }
  }
}

const json* find(const json& j, const char* key) {
  const auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

std::uint64_t as_uint(const json& v, const std::string& where) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<long long>() >= 0) return static_cast<std::uint64_t>(v.get<long long>());
  fail(where, "expected a nonnegative integer");
}

std::uint64_t uint_or(const json& j, const char* key, std::uint64_t def, const std::string& where) {
  const json* v = find(j, key);
  return v ? as_uint(*v, where + "." + key) : def;
}

double as_double(const json& v, const std::string& where) {
  if (!v.is_number()) fail(where, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) fail(where, "expected a finite number");
  return x;
}

double double_or(const json& j, const char* key, double def, const std::string& where) {
  const json* v = find(j, key);
  return v ? as_double(*v, where + "." + key) : def;
}

bool bool_or(const json& j, const char* key, bool def, const std::string& where) {
  const json* v = find(j, key);
  if (!v) return def;
  if (!v->is_boolean()) fail(where + "." + key, "expected true or false");
  return v->get<bool>();
}

std::vector<double> doubles(const json& v, const std::string& where) {
  if (!v.is_array()) fail(where, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(as_double(v[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

Vector vector_of(const json& v, const std::string& where) {
  const auto d = doubles(v, where);
  if (d.empty()) fail(where, "expected a nonempty vector");
  return Eigen::Map<const Vector>(d.data(), static_cast<Index>(d.size()));
}

std::vector<std::string> names(const json& v, const std::string& where, const std::vector<std::string>& allowed) {
  if (!v.is_array()) fail(where, "expected an array of names");
  std::vector<std::string> out;
  for (const auto& e : v) {
    if (!e.is_string()) fail(where, "expected an array of names");
    const auto s = e.get<std::string>();
    if (std::find(allowed.begin(), allowed.end(), s) == allowed.end()) fail(where, "unknown name \"" + s + "\"");
    if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(s);
  }
  return out;
}

bool wants(const std::vector<std::string>& list, const char* name) {
  return std::find(list.begin(), list.end(), name) != list.end();
}

// ---------------------------------------------------------------------------
// Constructions

struct Built {
  SubspaceFamily family;
  Vector default_x0;  // empty when the construction has none
  json params;        // resolved parameters
  std::string description;
  std::optional<BlockConstruction> blocks;
  std::optional<PlanesInstance> planes;
  double tail_bound = std::numeric_limits<double>::quiet_NaN();
};

SubspaceFamily axes_family(Index d) {
  std::vector<Subspace> members;
  for (Index k = 0; k < d; ++k) {
    Matrix b = Matrix::Zero(d, 1);
    b(k, 0) = 1.0;
    members.push_back(Subspace::from_orthonormal(std::move(b)));
  }
  return SubspaceFamily(std::move(members));
}

BlockConstruction block_config(const json& p, const std::string& where) {
  only_keys(p, where, {"epsilon", "blocks", "angles", "coeffs"});
  const bool custom = p.contains("angles") || p.contains("coeffs");
  if (custom) {
    if (!p.contains("angles") || !p.contains("coeffs")) fail(where, "angles and coeffs go together");
    if (p.contains("epsilon") || p.contains("blocks")) fail(where, "epsilon/blocks cannot be combined with angles");
    BlockConstruction cfg;
    cfg.angles = doubles(p["angles"], where + ".angles");
    cfg.coeffs = doubles(p["coeffs"], where + ".coeffs");
    try {
      cfg.validate();
    } catch (const PreconditionError& e) {
      fail(where, e.what());
    }
    return cfg;
  }
  const double eps = double_or(p, "epsilon", 0.25, where);
  const auto M = uint_or(p, "blocks", 400, where);
  if (!(eps > 0.0)) fail(where + ".epsilon", "must be positive");
  if (M < 1 || M > 100000) fail(where + ".blocks", "must lie in 1..100000");
  return BlockConstruction::preset(eps, static_cast<std::size_t>(M));
}

Built build(const ExperimentConfig& c) {
  const json& p = c.construction_params;
  const std::string where = "construction.params";
  Built b{axes_family(2), Vector(), json::object(), "", {}, {}};
  if (c.construction == "orthogonal_axes") {
    only_keys(p, where, {"dim"});
    const auto d = uint_or(p, "dim", 2, where);
    if (d < 2 || d > 1000) fail(where + ".dim", "must lie in 2..1000");
    b.family = axes_family(static_cast<Index>(d));
    b.default_x0 = Vector::LinSpaced(static_cast<Index>(d), 1.0, static_cast<double>(d));
    b.params = {{"dim", d}};
    b.description = "coordinate axes L_k = span{e_k}";
  } else if (c.construction == "four_lines") {
    only_keys(p, where, {"eps"});
    const double eps = double_or(p, "eps", 0.1, where);
    if (!(eps > 0.0 && eps < 0.5)) fail(where + ".eps", "must lie in (0, 0.5)");
    b.family = four_lines_family(eps);
    b.default_x0 = Vector::Ones(2);
    b.params = {{"eps", eps}};
    b.description = "lines spanned by (1,0), (0,1), (1,1), (1,eps-1); start on the third line";
  } else if (c.construction == "theorem3" || c.construction == "block") {
    const BlockConstruction cfg = block_config(p, where);
    BlockInstance inst = block_family(cfg);
    b.family = std::move(inst.family);
    b.default_x0 = std::move(inst.x0);
    b.tail_bound = inst.tail_bound;
    b.params = {{"blocks", cfg.blocks()}};
    if (std::isnan(cfg.epsilon)) {
      b.params["angles"] = cfg.angles;
      b.params["coeffs"] = cfg.coeffs;
    } else {
      b.params["epsilon"] = cfg.epsilon;
    }
    b.description = "orthogonal 2-dimensional blocks with angles a_m, start sum c_m (y1 + y2)";
    b.blocks = cfg;
  } else if (c.construction == "theorem5") {
    only_keys(p, where, {"xi", "eta", "cos2_numerators", "cos2_denominator"});
    const double xi = double_or(p, "xi", 1.0, where), eta = double_or(p, "eta", kGoldenRatio, where);
    if (!(xi > 0.0 && eta > 0.0)) fail(where, "xi and eta must be positive");
    std::array<long, 4> num{1, 3, 2, 4};
    long den = 11;
    if (p.contains("cos2_numerators") || p.contains("cos2_denominator")) {
      if (!p.contains("cos2_numerators") || !p.contains("cos2_denominator")) {
        fail(where, "cos2_numerators and cos2_denominator go together");
      }
      const json& n = p["cos2_numerators"];
      if (!n.is_array() || n.size() != 4) fail(where + ".cos2_numerators", "expected four integers");
      for (std::size_t i = 0; i < 4; ++i) {
        num[i] = static_cast<long>(as_uint(n[i], where + ".cos2_numerators"));
        if (num[i] < 1) fail(where + ".cos2_numerators", "must be positive");
      }
      den = static_cast<long>(as_uint(p["cos2_denominator"], where + ".cos2_denominator"));
      for (long v : num) {
        if (v >= den) fail(where, "each numerator must be below the denominator");
      }
    }
    try {
      b.planes = planes_family(BakersParams::from_rational_cos2(num, den, std::log(eta / xi)), xi, eta);
    } catch (const PreconditionError& e) {
      fail(where, e.what());
    }
    b.family = b.planes->family;
    b.default_x0 = b.planes->x0;
    b.params = {{"xi", xi}, {"eta", eta}, {"cos2_numerators", num}, {"cos2_denominator", den}};
    b.description = "three planes in R^4; the remotest labels follow a baker's-map orbit";
  } else if (c.construction == "random") {
    only_keys(p, where, {"dim", "K", "ranks"});
    const auto d = uint_or(p, "dim", 4, where), K = uint_or(p, "K", 2, where);
    if (d < 2 || d > 200) fail(where + ".dim", "must lie in 2..200");
    if (K < 2 || K > 50) fail(where + ".K", "must lie in 2..50");
    std::vector<Index> ranks;
    if (const json* r = find(p, "ranks")) {
      if (!r->is_array() || r->size() != K) fail(where + ".ranks", "expected one rank per member");
      for (const auto& v : *r) ranks.push_back(static_cast<Index>(as_uint(v, where + ".ranks")));
    }
    try {
      b.family = random_family(static_cast<Index>(d), static_cast<std::size_t>(K), *c.seed, ranks);
    } catch (const PreconditionError& e) {
      fail(where, e.what());
    } catch (const std::runtime_error& e) {
      fail(where, e.what());
    }
    b.params = {{"dim", d}, {"K", K}};
    if (!ranks.empty()) b.params["ranks"] = ranks;
    b.description = "random subspaces with Haar-distributed bases";
  } else {  // inline
    try {
      b.family = family_from_json(c.inline_family);
    } catch (const std::exception& e) {
      fail("construction.family", e.what());
    }
    b.description = "inline family";
  }
  return b;
}

Vector start_vector(const ExperimentConfig& c, const Built& b, std::optional<SlowWitness>& witness) {
  const Index d = b.family.ambient_dim();
  Vector x0;
  if (c.x0_mode == "explicit") {
    x0 = c.x0;
  } else if (c.x0_mode == "random") {
    x0 = random_unit_vector(d, *c.seed ^ kX0Stream);
  } else if (c.x0_mode == "slow_witness") {
    if (!b.blocks) fail("x0", "slow_witness needs a block construction");
    std::vector<double> target(c.slow_witness_horizon);
    for (std::size_t n = 1; n <= target.size(); ++n) target[n - 1] = 1.0 / std::log(static_cast<double>(n) + 2.0);
    try {
      witness = slow_witness(*b.blocks, target, target.size());
    } catch (const TruncationError& e) {
      fail("x0", std::string(e.what()) + " (needs " + std::to_string(e.required_blocks()) + " blocks)");
    }
    x0 = witness->x0;
  } else {
    if (b.default_x0.size() == 0) fail("x0", "this construction has no default start; give a vector or \"random\"");
    x0 = b.default_x0;
  }
  if (x0.size() != d) {
    fail("x0", "dimension " + std::to_string(x0.size()) + " does not match the ambient dimension " +
                   std::to_string(d));
  }
  return x0;
}

// ---------------------------------------------------------------------------
// Output

void write_text(const fs::path& path, const std::string& text, std::vector<fs::path>& files) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << text;
  if (!os) throw std::runtime_error("write failed: " + path.string());
  files.push_back(path);
}

void write_json(const fs::path& path, const json& j, std::vector<fs::path>& files) {
  write_text(path, j.dump(2) + "\n", files);
}

json scalar(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

CheckResult orbit_period_check(const PlanesInstance& inst) {
  constexpr std::size_t window = 500, max_period = 20;
  const BakersOrbit orbit = bakers_orbit(inst.params, window);
  const std::size_t p = eventual_period(orbit.even_indices, max_period);
  CheckResult c;
  c.name = "orbit_not_periodic";
  c.statement = "no eventual period <= 20 in the first 500 even-step labels of the orbit";
  c.observe(p == 0 ? 0.0 : 1.0, p == 0 ? -1 : static_cast<long>(p));
  if (orbit.tie) c.observe(1.0, -1);
  c.evaluated = window;
  return c;
}

std::vector<double> closed_form_norms(const BlockConstruction& cfg, std::size_t first, std::size_t last) {
  std::vector<double> v;
  v.reserve(last - first + 1);
  for (std::size_t n = first; n <= last; ++n) v.push_back(block_cyclic_norm(cfg, n));
  return v;
}

}  // namespace

// ---------------------------------------------------------------------------

Mode mode_from_string(const std::string& name) {
  if (name == "construct") return Mode::construct;
  if (name == "simulate") return Mode::simulate;
  if (name == "measure") return Mode::measure;
  if (name == "certify") return Mode::certify;
  throw ConfigError("unknown mode \"" + name + "\"");
}

std::string to_string(Mode mode) {
  switch (mode) {
    case Mode::construct: return "construct";
    case Mode::simulate: return "simulate";
    case Mode::measure: return "measure";
    case Mode::certify: return "certify";
  }
  return "certify";
}

const std::vector<std::string>& quantity_names() {
  static const std::vector<std::string> v{"friedrichs",    "rho",         "rho_star",
                                          "s_norm",        "nu",          "greedy_direction",
                                          "bounds",        "dictionary_rho", "closed_form_rate",
                                          "trajectory_rate"};
  return v;
}

const std::vector<std::string>& certification_names() {
  static const std::vector<std::string> v{"step_identities", "bakers_agreement", "block_closed_form",
                                          "sqrt_rate",       "s_monotone",       "decay_ledger",
                                          "bound_report",    "greedy_rate",      "quantity_chain"};
  return v;
}

json load_json_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot read config " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  try {
    return json::parse(ss.str());
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

ExperimentConfig parse_config(const json& j) {
  if (!j.is_object()) fail("config", "expected a JSON object");
  only_keys(j, "config", {"schema_version", "construction", "x0", "policy", "n_steps", "stop_norm",
                          "store_iterates", "quantities", "certify", "seed", "search", "s_norm",
                          "rate_window", "output", "out"});
  ExperimentConfig c;
  c.source = j;
  if (const json* v = find(j, "schema_version")) {
    if (as_uint(*v, "schema_version") != static_cast<std::uint64_t>(kSchemaVersion)) {
      fail("schema_version", "unsupported version");
    }
  }
  if (const json* v = find(j, "seed")) c.seed = as_uint(*v, "seed");

  const json* cons = find(j, "construction");
  if (!cons) fail("config", "construction is required");
  static const std::set<std::string> presets{"orthogonal_axes", "four_lines", "theorem3", "block",
                                             "theorem5",        "random",     "inline"};
  if (cons->is_string()) {
    c.construction = cons->get<std::string>();
  } else if (cons->is_object()) {
    only_keys(*cons, "construction", {"name", "params", "family", "dictionary"});
    if (const json* n = find(*cons, "name")) {
      if (!n->is_string()) fail("construction.name", "expected a string");
      c.construction = n->get<std::string>();
    } else if (cons->contains("family")) {
      c.construction = "inline";
    } else {
      fail("construction", "name is required");
    }
    if (const json* p = find(*cons, "params")) {
      if (!p->is_object()) fail("construction.params", "expected an object");
      c.construction_params = *p;
    }
    if (const json* f = find(*cons, "family")) c.inline_family = *f;
    if (const json* d = find(*cons, "dictionary")) {
      if (!d->is_object()) fail("construction.dictionary", "expected an object with atoms");
      only_keys(*d, "construction.dictionary", {"atoms"});
      const json* atoms = find(*d, "atoms");
      if (!atoms || !atoms->is_array() || atoms->empty()) fail("construction.dictionary", "atoms must be a nonempty array");
      std::vector<Vector> a;
      for (std::size_t i = 0; i < atoms->size(); ++i) {
        Vector g = vector_of((*atoms)[i], "construction.dictionary.atoms[" + std::to_string(i) + "]");
        const double n = stable_norm(g);
        if (!(n > 0.0)) fail("construction.dictionary", "atoms must be nonzero");
        a.push_back(g / n);
      }
      c.dictionary_atoms = std::move(a);
    }
  } else {
    fail("construction", "expected a preset name or an object");
  }
  if (!presets.count(c.construction)) fail("construction", "unknown construction \"" + c.construction + "\"");
  if (c.construction == "inline" && c.inline_family.is_null()) fail("construction", "inline needs a family");
  if (c.construction != "inline" && !c.inline_family.is_null()) fail("construction", "family is only for inline");
  if (c.construction == "random" && !c.seed) fail("seed", "required for the random construction");

  if (const json* x = find(j, "x0")) {
    if (x->is_string()) {
      c.x0_mode = x->get<std::string>();
      if (c.x0_mode != "default" && c.x0_mode != "random") fail("x0", "expected a vector, \"default\" or \"random\"");
    } else if (x->is_object()) {
      only_keys(*x, "x0", {"slow_witness"});
      const json* sw = find(*x, "slow_witness");
      if (!sw || !sw->is_object()) fail("x0", "expected {\"slow_witness\": {\"horizon\": n}}");
      only_keys(*sw, "x0.slow_witness", {"horizon"});
      c.x0_mode = "slow_witness";
      c.slow_witness_horizon = uint_or(*sw, "horizon", 50, "x0.slow_witness");
      if (c.slow_witness_horizon < 1 || c.slow_witness_horizon > 100000) fail("x0.slow_witness.horizon", "must lie in 1..100000");
    } else {
      c.x0_mode = "explicit";
      c.x0 = vector_of(*x, "x0");
    }
  }
  if (c.x0_mode == "random" && !c.seed) fail("seed", "required for a random x0");

  if (const json* p = find(j, "policy")) {
    std::string kind;
    const json* sched = nullptr;
    const json* weak = nullptr;
    if (p->is_string()) {
      kind = p->get<std::string>();
    } else if (p->is_object()) {
      only_keys(*p, "policy", {"kind", "schedule", "weakness"});
      const json* k = find(*p, "kind");
      if (!k || !k->is_string()) fail("policy.kind", "expected a string");
      kind = k->get<std::string>();
      sched = find(*p, "schedule");
      weak = find(*p, "weakness");
    } else {
      fail("policy", "expected a name or an object");
    }
    if (kind == "greedy") {
      c.greedy = true;
      if (sched) fail("policy.schedule", "only for explicit schedules");
      if (weak) c.weakness = doubles(*weak, "policy.weakness");
      try {
        validate_weakness(c.weakness);
      } catch (const PreconditionError& e) {
        fail("policy.weakness", e.what());
      }
    } else {
      if (weak) fail("policy.weakness", "only for the greedy policy");
      try {
        c.policy.kind = policy_kind_from_string(kind);
      } catch (const std::exception&) {
        fail("policy", "unknown policy \"" + kind + "\"");
      }
      if (sched) {
        if (!sched->is_array()) fail("policy.schedule", "expected an array of labels");
        for (const auto& v : *sched) c.policy.schedule.push_back(static_cast<int>(as_uint(v, "policy.schedule")));
      }
    }
  }
  if (c.dictionary_atoms && !c.greedy) fail("construction.dictionary", "a dictionary needs the greedy policy");

  c.run.n_steps = uint_or(j, "n_steps", 100, "config");
  if (c.run.n_steps > 100000000) fail("n_steps", "at most 1e8");
  c.run.stop_norm = double_or(j, "stop_norm", 1e-300, "config");
  if (c.run.stop_norm < 0.0) fail("stop_norm", "must be nonnegative");
  c.run.store_iterates = bool_or(j, "store_iterates", true, "config");

  if (const json* q = find(j, "quantities")) c.quantities = names(*q, "quantities", quantity_names());
  if (const json* q = find(j, "certify")) c.certify = names(*q, "certify", certification_names());

  if (const json* s = find(j, "search")) {
    if (!s->is_object()) fail("search", "expected an object");
    only_keys(*s, "search", {"restarts", "iterations", "grid", "grid_step"});
    c.search.restarts = static_cast<int>(uint_or(*s, "restarts", 16, "search"));
    c.search.iterations = static_cast<int>(uint_or(*s, "iterations", 4000, "search"));
    c.search.grid = bool_or(*s, "grid", true, "search");
    c.search.grid_step = double_or(*s, "grid_step", 1e-3, "search");
    if (c.search.restarts < 1 || c.search.restarts > 100000) fail("search.restarts", "must lie in 1..100000");
    if (!(c.search.grid_step > 0.0 && c.search.grid_step <= 0.1)) fail("search.grid_step", "must lie in (0, 0.1]");
  }
  if (const json* s = find(j, "s_norm")) {
    if (!s->is_object()) fail("s_norm", "expected an object");
    only_keys(*s, "s_norm", {"tol", "max_iterations"});
    c.s_norm.tol = double_or(*s, "tol", 1e-8, "s_norm");
    c.s_norm.max_iterations = uint_or(*s, "max_iterations", 100000, "s_norm");
    if (!(c.s_norm.tol > 0.0)) fail("s_norm.tol", "must be positive");
  }
  if (const json* w = find(j, "rate_window")) {
    if (!w->is_array() || w->size() != 2) fail("rate_window", "expected [first, last]");
    c.rate_first = as_uint((*w)[0], "rate_window[0]");
    c.rate_last = as_uint((*w)[1], "rate_window[1]");
    if (c.rate_first < 1 || c.rate_last < c.rate_first + 9) fail("rate_window", "needs 1 <= first and at least 10 points");
    if (c.rate_last > 10000000) fail("rate_window", "last at most 1e7");
  }
  if (const json* o = find(j, "output")) {
    if (!o->is_object()) fail("output", "expected an object");
    only_keys(*o, "output", {"dir"});
    const json* d = find(*o, "dir");
    if (!d || !d->is_string()) fail("output.dir", "expected a path");
    c.out_dir = d->get<std::string>();
  }
  if (const json* o = find(j, "out")) {
    if (!o->is_string()) fail("out", "expected a path");
    c.out_dir = o->get<std::string>();
  }
  if (c.out_dir.empty()) fail("output.dir", "must be nonempty");

  const bool randomized = wants(c.quantities, "rho") || wants(c.quantities, "rho_star") ||
                          wants(c.quantities, "dictionary_rho") || wants(c.certify, "quantity_chain") ||
                          wants(c.certify, "greedy_rate");
  if (randomized && !c.seed) fail("seed", "required when a randomized estimator is requested");
  if (c.seed) c.search.seed = *c.seed;

  const bool blocks = c.construction == "theorem3" || c.construction == "block";
  if (wants(c.certify, "bakers_agreement") && c.construction != "theorem5") {
    fail("certify", "bakers_agreement needs the theorem5 construction");
  }
  if ((wants(c.certify, "block_closed_form") || wants(c.quantities, "closed_form_rate")) && !blocks) {
    fail("certify", "block_closed_form and closed_form_rate need a block construction");
  }
  if (c.x0_mode == "slow_witness" && !blocks) fail("x0", "slow_witness needs a block construction");
  return c;
}

ExperimentResult run_experiment(const ExperimentConfig& c, Mode mode) {
  // Everything that can be rejected is rejected before the output directory exists.
  Built b = build(c);
  std::optional<SlowWitness> witness;
  const Vector x0 = start_vector(c, b, witness);
  const std::size_t K = b.family.size();
  const Index d = b.family.ambient_dim();
  std::optional<Dictionary> dict;
  if (c.dictionary_atoms) {
    for (const auto& g : *c.dictionary_atoms) {
      if (g.size() != d) fail("construction.dictionary", "atom dimension does not match the family");
    }
    dict.emplace(*c.dictionary_atoms);
  }
  if (!c.greedy) {
    try {
      c.policy.validate(K);
    } catch (const PreconditionError& e) {
      fail("policy", e.what());
    }
  }
  const bool cyclic = !c.greedy && c.policy.kind == PolicyKind::cyclic;
  const bool remotest_like = c.greedy ? !dict : c.policy.kind == PolicyKind::remotest;
  if (wants(c.certify, "block_closed_form") && !cyclic) fail("certify", "block_closed_form needs the cyclic policy");
  if (wants(c.certify, "bakers_agreement") && !(remotest_like && c.run.store_iterates)) {
    fail("certify", "bakers_agreement needs a remotest run with stored iterates");
  }
  if ((wants(c.certify, "sqrt_rate") || wants(c.certify, "s_monotone")) && !(K == 2 && remotest_like)) {
    fail("certify", "sqrt_rate and s_monotone need K = 2 and the remotest policy");
  }
  if (wants(c.certify, "s_monotone") && !c.run.store_iterates) fail("certify", "s_monotone needs stored iterates");
  if (wants(c.certify, "greedy_rate") && !c.greedy) fail("certify", "greedy_rate needs the greedy policy");

  ExperimentResult res;
  const fs::path& out = c.out_dir;
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw std::runtime_error("cannot create " + out.string() + ": " + ec.message());

  const std::string hash = family_hash(b.family);
  json& summary = res.summary;
  summary = {{"schema_version", kSchemaVersion},
             {"mode", to_string(mode)},
             {"construction", c.construction},
             {"family_hash", hash},
             {"K", K},
             {"ambient_dim", d}};
  if (c.seed) summary["seed"] = *c.seed;

  json quantities = {{"schema_version", kSchemaVersion}, {"family_hash", hash}};
  CertificationReport report;
  json details = json::object();

  try {
    json fam = {{"schema_version", kSchemaVersion},
                {"construction", c.construction},
                {"origin", {{"construction", c.construction}, {"description", b.description}}},
                {"params", b.params},
                {"family_hash", hash},
                {"family", to_json(b.family)},
                {"x0", to_json(x0)},
                {"complement_sum_full", sum_of_complements_is_full(b.family)}};
    if (std::isfinite(b.tail_bound)) fam["tail_bound"] = b.tail_bound;
    if (b.planes) {
      const BakersParams& p = b.planes->params;
      const BakersConditions cond = check_conditions(p);
      fam["bakers"] = {{"a", p.a},
                       {"b", p.b},
                       {"lambda0", p.lambda0},
                       {"conditions",
                        {{"ordering", cond.ordering},
                         {"balance", cond.balance},
                         {"rational", cond.rational},
                         {"no_common_power", cond.no_common_power},
                         {"shifts_ordered", cond.shifts_ordered}}}};
    }
    if (witness) {
      fam["slow_witness"] = {{"horizon", c.slow_witness_horizon},
                             {"scale", witness->scale},
                             {"m", witness->m},
                             {"blocks", witness->blocks}};
    }
    if (dict) {
      json atoms = json::array();
      for (const auto& g : dict->atoms()) atoms.push_back(to_json(g));
      fam["dictionary"] = {{"atoms", atoms}, {"spanning", dict->spans_ambient()}};
    }
    write_json(out / "family.json", fam, res.files);
    if (mode == Mode::construct) return res;

    std::optional<Trajectory> traj;
    if (mode != Mode::measure) {
      if (c.greedy && dict) {
        traj = greedy_run(*dict, x0, c.weakness, c.run);
      } else if (c.greedy) {
        traj = greedy_run(b.family, x0, c.weakness, c.run);
      } else {
        traj = run(b.family, x0, c.policy, c.run);
      }
      std::ostringstream csv;
      write_trajectory_csv(csv, *traj);
      write_text(out / "trajectory.csv", csv.str(), res.files);
      write_json(out / "trajectory.json", to_json(*traj, hash), res.files);
      summary["steps"] = traj->steps();
      summary["final_norm"] = scalar(traj->norms.back());
      summary["stopped_early"] = traj->stopped_early;
      if (mode == Mode::simulate) return res;
    }

    // Quantities. measure mode defaults to the constants of the family.
    std::vector<std::string> q = c.quantities;
    if (mode == Mode::measure && q.empty()) q = {"friedrichs", "rho", "rho_star"};
    if (!traj) {
      std::erase(q, std::string("bounds"));
      std::erase(q, std::string("trajectory_rate"));
    }
    const bool need_measure = wants(q, "rho") || wants(q, "rho_star") || wants(c.certify, "quantity_chain");
    std::optional<QuantityReport> qr;
    if (need_measure) qr = measure(b.family, c.search);
    if (wants(q, "friedrichs")) {
      const double fc = qr ? qr->friedrichs_c : friedrichs_number(b.family);
      quantities["friedrichs_c"] = fc;
      summary["friedrichs_c"] = fc;
    }
    if (qr) {
      quantities["rho_star_lower_bound"] = qr->rho_star_lower_bound;
      summary["rho_star_lower_bound"] = qr->rho_star_lower_bound;
    }
    if (wants(q, "rho")) {
      quantities["rho"] = to_json(qr->rho);
      summary["rho"] = qr->rho.value;
      summary["rho_lower_bound"] = scalar(qr->rho.lower_bound);
    }
    if (wants(q, "rho_star")) {
      quantities["rho_star"] = to_json(qr->rho_star);
      summary["rho_star"] = qr->rho_star.value;
    }
    std::optional<SNormResult> sx0;
    if (wants(q, "s_norm")) {
      sx0 = s_norm(b.family, x0, c.s_norm);
      quantities["s_norm"] = to_json(*sx0);
      summary["s_norm"] = sx0->value;
      summary["s_norm_gap"] = sx0->gap;
      summary["s_norm_certified"] = sx0->certified;
    }
    if (wants(q, "nu")) {
      const NuResult nr = nu_decomposition(b.family, x0);
      quantities["nu"] = to_json(nr);
      summary["nu"] = nr.nu;
    }
    if (wants(q, "greedy_direction")) {
      const GreedyDirection g = greedy_direction(b.family, x0);
      quantities["greedy_direction"] = to_json(g);
      summary["rho_x"] = g.rho_x;
    }
    std::optional<DictionaryRho> drho;
    if (wants(q, "dictionary_rho") || (wants(c.certify, "greedy_rate") && dict)) {
      drho = dictionary_rho(dict ? *dict : Dictionary::from_complement_bases(b.family), c.search);
      if (wants(q, "dictionary_rho")) {
        quantities["dictionary_rho"] = to_json(*drho);
        summary["dictionary_rho"] = drho->value;
      }
    }
    if (wants(q, "bounds")) {
      const RateReport rr = bound_report(b.family, &*traj);
      quantities["bounds"] = to_json(rr);
      summary["remotest_factor"] = rr.remotest_factor;
      summary["alternating_factor"] = rr.alternating_factor;
      summary["empirical_max_factor"] = scalar(rr.empirical_max_factor);
    }
    if (wants(q, "closed_form_rate")) {
      const auto v = closed_form_norms(*b.blocks, c.rate_first, c.rate_last);
      std::vector<double> n(v.size());
      for (std::size_t i = 0; i < n.size(); ++i) n[i] = static_cast<double>(c.rate_first + i);
      const RateFit fit = rate_fit(n, v);
      quantities["closed_form_rate"] = to_json(fit);
      quantities["closed_form_rate"]["window"] = {c.rate_first, c.rate_last};
      summary["closed_form_slope"] = fit.slope;
      summary["closed_form_r_squared"] = fit.r_squared;
    }
    if (wants(q, "trajectory_rate")) {
      const std::vector<double> norms = cyclic ? traj->per_T_norms() : traj->norms;
      const std::size_t last = std::min(c.rate_last, norms.size() - 1);
      if (last >= c.rate_first + 9) {
        const RateFit fit = rate_fit(norms, c.rate_first, last);
        quantities["trajectory_rate"] = to_json(fit);
        quantities["trajectory_rate"]["window"] = {c.rate_first, last};
        summary["trajectory_slope"] = scalar(fit.slope);
        summary["trajectory_r_squared"] = scalar(fit.r_squared);
      } else {
        quantities["trajectory_rate"] = {{"error", "window shorter than 10 points"}};
      }
    }
    write_json(out / "quantities.json", quantities, res.files);
    if (mode == Mode::measure) return res;

    // Certifications.
    for (const auto& name : c.certify) {
      if (name == "step_identities") {
        report.merge(step_identities(*traj, dict ? nullptr : &b.family));
      } else if (name == "bakers_agreement") {
        const BakersAgreement ba = bakers_agreement(*b.planes, *traj);
        report.add(ba.indices);
        report.add(ba.recurrence);
        CheckResult odd;
        odd.name = "odd_steps_label_one";
        odd.statement = "i(n) = 1 for every odd n";
        odd.observe(ba.odd_steps_are_one ? 0.0 : 1.0, -1);
        odd.evaluated = ba.steps_compared;
        report.add(odd);
        report.add(orbit_period_check(*b.planes));
        details["bakers_agreement"] = to_json(ba);
      } else if (name == "block_closed_form") {
        report.add(block_closed_form_check(*b.blocks, *traj));
      } else if (name == "sqrt_rate") {
        if (traj->steps() >= 1 && traj->norms[1] > 0.0) {
          Vector x1 = traj->iterates.size() > 1 ? traj->iterates[1] : Vector();
          if (x1.size() == 0) {
            RunOptions one = c.run;
            one.n_steps = 1;
            x1 = run(b.family, x0, Policy::remotest(), one).iterates.back();
          }
          const SNormResult s1 = s_norm(b.family, x1, c.s_norm);
          report.add(sqrt_rate_check(*traj, s1.value));
          details["sqrt_rate"] = {{"s_ub_x1", s1.value}, {"certified", s1.certified}};
        } else {
          report.add(sqrt_rate_check(*traj, 0.0));
        }
      } else if (name == "s_monotone") {
        const SAlongTrajectory sa = s_along_trajectory(b.family, *traj, c.s_norm);
        report.add(sa.monotone);
        report.add(sa.direction);
      } else if (name == "decay_ledger") {
        const DecayLedger l = decay_ledger(b.family, x0, c.run.n_steps, c.s_norm);
        report.merge(l.report);
        details["decay_ledger"] = {{"K", l.K},          {"exponent", l.exponent}, {"s_ub", l.s_ub},
                                   {"s_lb", l.s_lb},    {"c_x0", l.c_x0},         {"cycles", l.nu.size()},
                                   {"truncated", l.truncated},
                                   {"final_a", l.a.empty() ? json(nullptr) : scalar(l.a.back())}};
      } else if (name == "bound_report") {
        report.merge(bound_report(b.family, &*traj).report);
      } else if (name == "greedy_rate") {
        // A certified lower bound on rho(D) exists on circles; elsewhere 0 keeps the check sound.
        double lb = 0.0;
        if (drho && std::isfinite(drho->lower_bound)) lb = drho->lower_bound;
        if (!dict) {
          const SphereEstimate r = rho_estimate(b.family, RhoMode::full_sphere, c.search);
          if (std::isfinite(r.lower_bound)) lb = r.lower_bound;
        }
        report.merge(greedy_rate_check(*traj, lb, c.weakness));
        details["greedy_rate"] = {{"rho_lower_bound", lb}};
      } else if (name == "quantity_chain") {
        report.merge(quantity_chain(*qr));
      }
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    res.error = e.what();
    res.exit_code = exit_code::failed;
  }

  if (mode == Mode::certify) {
    json cert = to_json(report);
    cert["family_hash"] = hash;
    cert["requested"] = c.certify;
    cert["details"] = details;
    if (!res.error.empty()) {
      cert["error"] = res.error;
      cert["pass"] = false;
    }
    write_json(out / "certification.json", cert, res.files);
    if (res.exit_code == exit_code::ok && !report.all_pass()) res.exit_code = exit_code::failed;
    summary["pass"] = res.exit_code == exit_code::ok;
    json failed = json::array();
    for (const auto& chk : report.checks) {
      if (!chk.pass) failed.push_back(chk.name);
    }
    summary["failed_checks"] = failed;
  }
  if (!res.error.empty()) summary["error"] = res.error;
  summary["exit_code"] = res.exit_code;
  if (mode == Mode::certify) {
    json s = summary;
    s["config"] = c.source;
    write_json(out / "summary.json", s, res.files);
  }
  return res;
}

}  // namespace altproj
