#include "altproj/certify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace altproj {
namespace {

CheckResult make_check(std::string name, std::string statement, double tol) {
  CheckResult c;
  c.name = std::move(name);
  c.statement = std::move(statement);
  c.tolerance = tol;
  return c;
}

double sq(double v) { return v * v; }

}  // namespace

void CheckResult::observe(double v, long n) {
  ++evaluated;
  if (worst_step < 0 || v > max_violation || (std::isnan(v) && !std::isnan(max_violation))) {
    max_violation = v;
    worst_step = n;
  }
  if (!(v <= tolerance)) pass = false;
}

bool CertificationReport::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

void CertificationReport::merge(const CertificationReport& other) {
  checks.insert(checks.end(), other.checks.begin(), other.checks.end());
}

const CheckResult* CertificationReport::find(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

CertificationReport step_identities(const Trajectory& t, const SubspaceFamily* family, double tol) {
  if (family && (family->size() != t.family_size || family->ambient_dim() != t.ambient_dim)) {
    throw PreconditionError("step_identities: trajectory was not produced on this family");
  }
  if (t.norms.size() != t.steps() + 1 || t.step_dists.size() != t.steps()) {
    throw PreconditionError("step_identities: inconsistent trajectory record");
  }
  CheckResult mono = make_check("monotone_norms", "|x_{n+1}| <= |x_n|, relative to |x_n|", 1e-12);
  CheckResult pyth = make_check("pythagoras",
                                "|x_{n+1}|^2 + step_dist_n^2 = |x_n|^2, relative to |x_n|^2", tol);
  for (std::size_t n = 0; n < t.steps(); ++n) {
    const double a = t.norms[n], b = t.norms[n + 1];
    if (a == 0.0) {
      mono.observe(b, static_cast<long>(n));
      continue;
    }
    mono.observe((b - a) / a, static_cast<long>(n));
    pyth.observe(std::abs(sq(b / a) + sq(t.step_dists[n] / a) - 1.0), static_cast<long>(n));
  }
  CertificationReport r;
  r.add(std::move(mono));
  r.add(std::move(pyth));

  if (family && t.engine == EngineKind::projection && t.policy.kind == PolicyKind::cyclic &&
      !t.iterates.empty()) {
    CheckResult cyc = make_check("cycle_identity", "|Ty|^2 = |y|^2 (1 - nu(y)^2) per cycle, relative to |y|^2", tol);
    const std::size_t K = family->size();
    for (std::size_t j = 0; (j + 1) * K < t.norms.size(); ++j) {
      const Vector& y = t.iterates[j * K];
      const double yn = t.norms[j * K];
      if (yn == 0.0) break;
      const NuResult nu = nu_decomposition(*family, y);
      const double a1 = t.norms[(j + 1) * K] / yn;
      cyc.observe(std::abs(sq(a1) - (1.0 - sq(nu.nu))), static_cast<long>(j));
    }
    r.add(std::move(cyc));
  }
  return r;
}

SequenceBoundResult sequence_bound_check(std::span<const double> c, double A, double tol) {
  if (!(A > 0.0)) throw PreconditionError("sequence_bound_check: A must be positive");
  SequenceBoundResult r;
  const double slack = tol * A;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const long n = static_cast<long>(i) + 1;
    bool ok = c[i] >= 0.0;
    if (i == 0) ok = ok && c[0] <= A + slack;
    if (i + 1 < c.size()) ok = ok && c[i + 1] <= c[i] * (1.0 - c[i] / A) + slack;
    if (!ok && r.hypothesis) {
      r.hypothesis = false;
      r.first_hypothesis_failure = n;
    }
    r.max_ratio = std::max(r.max_ratio, static_cast<double>(n) * c[i] / A);
    if (!(c[i] <= A / static_cast<double>(n) + slack) && r.conclusion) {
      r.conclusion = false;
      r.first_conclusion_failure = n;
    }
  }
  return r;
}

double decay_exponent(std::size_t K) {
  const double k = static_cast<double>(K);
  return 1.0 / (4.0 * k * std::sqrt(k) + 2.0);
}

DecayLedger decay_ledger(const SubspaceFamily& family, const Vector& x0, std::size_t n_cycles,
                         const SNormOptions& s_options) {
  require_dim(x0, family.ambient_dim(), "decay_ledger");
  if (n_cycles < 1) throw PreconditionError("decay_ledger: n_cycles must be >= 1");
  const double x0n = stable_norm(x0);
  if (x0n == 0.0) throw PreconditionError("decay_ledger: x0 must be nonzero");
  if (complement_sum_residual(family.members(), x0) > tolerances::kMembership * std::max(1.0, x0n)) {
    throw PreconditionError("decay_ledger: x0 is not in the sum of the complements");
  }
  const SNormResult s = s_norm(family, x0, s_options);
  if (!s.certified) throw std::runtime_error("decay_ledger: s-norm of x0 was not certified");

  DecayLedger L;
  L.K = family.size();
  const double K = static_cast<double>(L.K);
  L.alpha_exp = std::pow(K, -1.5);
  L.exponent = decay_exponent(L.K);
  L.s_ub = s.value;
  L.s_lb = s.dual_value;
  const double al = L.alpha_exp;
  L.c_x0 = std::pow(x0n, 2.0 / (2.0 + al)) * std::pow(L.s_ub, al / (2.0 + al)) * std::pow(K, al / (2.0 + al));

  // One cycle of the engine on the unit vector y_n = T^n x0 / a_n; the scale lives in log a_n.
  std::vector<double> cycle;  // |T y_n|, computed by the engine
  L.log_a.push_back(std::log(x0n));
  L.b.push_back(L.s_ub);
  Vector y = x0 / x0n;
  RunOptions ro;
  ro.n_steps = L.K;
  ro.stop_norm = 0.0;
  ro.store_iterates = true;
  for (std::size_t n = 0; n < n_cycles; ++n) {
    const NuResult nu = nu_decomposition(family, y);
    const Trajectory t = run(family, y, Policy::cyclic(), ro);
    const double an = std::exp(L.log_a.back());
    L.nu.push_back(nu.nu);
    cycle.push_back(t.norms.back());
    L.b.push_back(L.b.back() + std::sqrt(K) * an * nu.nu);
    if (t.steps() < L.K || t.norms.back() == 0.0) {
      L.log_a.push_back(-std::numeric_limits<double>::infinity());
      L.truncated = true;
      break;
    }
    L.log_a.push_back(L.log_a.back() + std::log(t.norms.back()));
    y = t.iterates.back() / t.norms.back();
  }
  for (double la : L.log_a) L.a.push_back(std::exp(la));

  CheckResult one = make_check("one_step_identity", "a_{n+1}^2 = a_n^2 (1 - nu_n^2), relative to a_n^2", 1e-9);
  CheckResult mono_a = make_check("a_nonincreasing", "a_{n+1} <= a_n, relative to a_n", 1e-12);
  CheckResult mono_b = make_check("b_nondecreasing", "b_{n+1} >= b_n", 0.0);
  CheckResult prod = make_check("product_bound", "a_n^2 b_n^alpha <= a_0^2 b_0^alpha, relative", 1e-9);
  CheckResult prod_step = make_check(
      "product_step", "a_{n+1}^2 b_{n+1}^alpha <= a_n^2 b_n^alpha (1 - nu_n^4), relative to a_n^2 b_n^alpha", 1e-9);
  CheckResult ratio = make_check("ratio_bound", "a_n^2 / b_n^2 <= K^2 / n for n >= 1", 1e-9);
  CheckResult nu_lb = make_check("nu_lower_bound", "nu_n >= a_n / (K b_n)", 1e-9);
  CheckResult fin = make_check("final_bound", "a_n <= c(x0) n^(-1/(4 K sqrt(K) + 2)) for n >= 1", 1e-9);

  for (std::size_t n = 0; n < L.nu.size(); ++n) {
    const long ln = static_cast<long>(n);
    const double r = cycle[n], bn = L.b[n], bn1 = L.b[n + 1], nun = L.nu[n];
    one.observe(std::abs(sq(r) - (1.0 - sq(nun))), ln);
    mono_a.observe(r - 1.0, ln);
    mono_b.observe(bn - bn1, ln);
    prod_step.observe(sq(r) * std::pow(bn1 / bn, al) - (1.0 - std::pow(nun, 4)), ln);
    nu_lb.observe(std::exp(L.log_a[n] - std::log(K * bn)) - nun, ln);
  }
  for (std::size_t n = 0; n < L.log_a.size(); ++n) {
    const long ln = static_cast<long>(n);
    const double la = L.log_a[n], lb = std::log(L.b[n]);
    prod.observe(std::expm1(2.0 * (la - L.log_a[0]) + al * (lb - std::log(L.b[0]))), ln);
    if (n >= 1) {
      const double nd = static_cast<double>(n);
      ratio.observe(std::exp(2.0 * (la - lb)) - sq(K) / nd, ln);
      fin.observe(L.a[n] - L.c_x0 * std::pow(nd, -L.exponent), ln);
    }
  }
  for (auto* c : {&one, &mono_a, &mono_b, &prod, &prod_step, &ratio, &nu_lb, &fin}) L.report.add(std::move(*c));
  return L;
}

RateFit rate_fit(std::span<const double> n, std::span<const double> values) {
  if (n.size() != values.size()) throw PreconditionError("rate_fit: n and values differ in length");
  if (n.size() < 10) throw PreconditionError("rate_fit: at least 10 points required");
  const std::size_t m = n.size();
  std::vector<double> x(m), y(m);
  for (std::size_t i = 0; i < m; ++i) {
    if (!(n[i] > 0.0)) throw PreconditionError("rate_fit: sample positions must be positive");
    if (!(values[i] > 0.0)) throw PreconditionError("rate_fit: nonpositive value in the window");
    x[i] = std::log(n[i]);
    y[i] = std::log(values[i]);
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(m);
  my /= static_cast<double>(m);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += sq(x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += sq(y[i] - my);
  }
  if (sxx == 0.0) throw PreconditionError("rate_fit: sample positions must be distinct");
  RateFit f;
  f.points = m;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < m; ++i) ss_res += sq(y[i] - (f.intercept + f.slope * x[i]));
  f.r_squared = syy == 0.0 ? 1.0 : 1.0 - ss_res / syy;
  f.power_law = f.r_squared > 0.99;
  return f;
}

RateFit rate_fit(std::span<const double> norms, std::size_t first, std::size_t last) {
  if (first < 1) throw PreconditionError("rate_fit: window must start at n >= 1");
  if (last < first || last >= norms.size()) throw PreconditionError("rate_fit: window outside the data");
  std::vector<double> n;
  for (std::size_t i = first; i <= last; ++i) n.push_back(static_cast<double>(i));
  return rate_fit(n, norms.subspan(first, last - first + 1));
}

RateReport bound_report(const SubspaceFamily& family, const Trajectory* t) {
  RateReport r;
  r.K = family.size();
  const double K = static_cast<double>(r.K);
  r.friedrichs_c = friedrichs_number(family);
  r.rho_star_lower_bound = (1.0 - r.friedrichs_c) / (K - 1.0);
  r.remotest_factor = std::sqrt(std::max(0.0, 1.0 - sq(r.rho_star_lower_bound)));
  r.alternating_factor = std::sqrt(1.0 - sq((1.0 - r.friedrichs_c) / (4.0 * K)));

  CheckResult order = make_check("factor_order", "remotest factor <= alternating factor", 0.0);
  order.observe(r.remotest_factor - r.alternating_factor, 0);
  r.report.add(std::move(order));

  if (!t) return r;
  if (t->family_size != r.K || t->ambient_dim != family.ambient_dim()) {
    throw PreconditionError("bound_report: trajectory was not produced on this family");
  }
  std::vector<double> ratios;
  if (t->policy.kind == PolicyKind::remotest) {
    CheckResult step = make_check("remotest_step_bound", "|x_{n+1}| <= (1 - rho*_lb^2)^(1/2) |x_n| for n >= 1", 1e-9);
    for (std::size_t n = 1; n + 1 < t->norms.size(); ++n) {
      if (t->norms[n] == 0.0) break;
      const double q = t->norms[n + 1] / t->norms[n];
      ratios.push_back(q);
      step.observe(q - r.remotest_factor, static_cast<long>(n));
    }
    r.report.add(std::move(step));
  } else if (t->policy.kind == PolicyKind::cyclic) {
    CheckResult cyc = make_check("alternating_bound",
                                 "|T^n x0| <= (1 - ((1-c)/(4K))^2)^(n/2) |x0|, relative to |x0|", 1e-9);
    const std::vector<double> a = t->per_T_norms();
    for (std::size_t n = 1; n < a.size() && a[0] > 0.0; ++n) {
      if (a[n - 1] > 0.0) ratios.push_back(a[n] / a[n - 1]);
      cyc.observe((a[n] - a[0] * std::pow(r.alternating_factor, static_cast<double>(n))) / a[0],
                  static_cast<long>(n));
    }
    r.report.add(std::move(cyc));
  }
  if (!ratios.empty()) {
    r.empirical_max_factor = *std::max_element(ratios.begin(), ratios.end());
    double log_sum = 0.0;
    std::size_t count = 0;
    for (double q : ratios) {
      if (q > 0.0) {
        log_sum += std::log(q);
        ++count;
      }
    }
    r.empirical_mean_factor = count ? std::exp(log_sum / static_cast<double>(count)) : 0.0;
  }
  return r;
}

CertificationReport greedy_rate_check(const Trajectory& t, double rho_lb, std::span<const double> weakness,
                                      double tol) {
  if (!(rho_lb >= 0.0 && rho_lb <= 1.0)) throw PreconditionError("greedy_rate_check: rho_lb outside [0,1]");
  validate_weakness(weakness);
  const double x0 = t.norms.front();
  const double scale = std::max(1.0, x0 * x0);
  CheckResult step = make_check("greedy_step_bound", "|x_{k+1}|^2 <= |x_k|^2 (1 - t_k^2 rho_lb^2)", tol * scale);
  CheckResult total = make_check("greedy_product_bound", "|x_n| <= |x_0| prod_k (1 - t_k^2 rho_lb^2)^(1/2)",
                                 tol * std::max(1.0, x0));
  double prod = 1.0;
  for (std::size_t k = 0; k + 1 < t.norms.size(); ++k) {
    const double tk = weakness_at(weakness, k);
    const double f = 1.0 - sq(tk * rho_lb);
    step.observe(sq(t.norms[k + 1]) - sq(t.norms[k]) * f, static_cast<long>(k));
    prod *= std::sqrt(f);
    total.observe(t.norms[k + 1] - x0 * prod, static_cast<long>(k + 1));
  }
  CertificationReport r;
  r.add(std::move(step));
  r.add(std::move(total));
  return r;
}

CheckResult sqrt_rate_check(const Trajectory& t, double s_ub_x1, double tol) {
  CheckResult c = make_check("sqrt_rate", "|x_n| <= s(x_1) / sqrt(n) for n >= 1", tol);
  for (std::size_t n = 1; n < t.norms.size(); ++n) {
    c.observe(t.norms[n] - s_ub_x1 / std::sqrt(static_cast<double>(n)), static_cast<long>(n));
  }
  return c;
}

SAlongTrajectory s_along_trajectory(const SubspaceFamily& family, const Trajectory& t,
                                    const SNormOptions& options) {
  if (family.size() != 2) throw PreconditionError("s_along_trajectory: requires K = 2");
  if (t.iterates.empty()) throw PreconditionError("s_along_trajectory: iterates were not stored");
  SAlongTrajectory out;
  out.monotone = make_check("s_monotone", "s(x_{n+1}) <= s(x_n) for n >= 1, primal values, relative to 1 + |x_n|",
                            2.0 * options.tol);
  out.direction = make_check("direction_cosine", "rho(x_n) s(x_n) >= |x_n|", 1e-6);
  for (std::size_t n = 1; n < t.iterates.size(); ++n) {
    const Vector& x = t.iterates[n];
    const double xn = t.norms[n];
    if (xn == 0.0) break;
    const SNormResult s = s_norm(family, x, options);
    out.primal.push_back(s.value);
    out.dual.push_back(s.dual_value);
    out.certified.push_back(s.certified);
    const GreedyDirection g = greedy_direction(family, x);
    out.direction.observe(xn - g.rho_x * s.value, static_cast<long>(n));
    if (out.primal.size() >= 2) {
      const double prev = out.primal[out.primal.size() - 2];
      out.monotone.observe((s.value - prev) / (1.0 + t.norms[n - 1]), static_cast<long>(n - 1));
    }
  }
  return out;
}

CheckResult block_closed_form_check(const BlockConstruction& cfg, const Trajectory& t, double tol) {
  CheckResult c = make_check("block_closed_form",
                             "|T^n x0|^2 = sum_m c_m^2 sin^2 a_m cos^(4n-2) a_m, relative", tol);
  const std::vector<double> a = t.per_T_norms();
  for (std::size_t n = 1; n < a.size(); ++n) {
    const double exact = block_cyclic_norm(cfg, n);
    c.observe(exact == 0.0 ? a[n] : std::abs(a[n] - exact) / exact, static_cast<long>(n));
  }
  return c;
}

BakersAgreement bakers_agreement(const PlanesInstance& inst, const Trajectory& t, double norm_floor) {
  if (t.family_size != 3 || t.ambient_dim != 4) {
    throw PreconditionError("bakers_agreement: trajectory was not produced on the R^4 planes");
  }
  BakersAgreement r;
  r.indices = make_check("bakers_indices", "remotest label i(n) equals the orbit prediction while |x_n| >= floor", 0.0);
  r.recurrence = make_check(
      "pair_recurrence", "(xi_{k+1}, eta_{k+1}) = (xi_k cos^2, eta_k cos^2) by label, relative", 1e-12);
  const BakersOrbit orbit = bakers_orbit(inst.params, t.steps() / 2 + 1);
  r.tie = orbit.tie;
  std::size_t mismatches = 0;
  for (std::size_t n = 0; n < t.steps(); ++n) {
    if (t.norms[n] < norm_floor) break;
    ++r.steps_compared;
    const int got = t.indices[n];
    if (got != orbit.predicted_index(n)) {
      ++mismatches;
      if (r.first_mismatch < 0) r.first_mismatch = static_cast<long>(n);
    }
    if (n % 2 == 1 && got != 1) r.odd_steps_are_one = false;
    r.indices.observe(static_cast<double>(mismatches), static_cast<long>(n));
  }

  const auto& p = inst.params;
  double ca2, cb2, cg2, cd2;
  if (p.cos2_denominator > 0) {
    const double den = static_cast<double>(p.cos2_denominator);
    ca2 = static_cast<double>(p.cos2_numerators[0]) / den;
    cb2 = static_cast<double>(p.cos2_numerators[1]) / den;
    cg2 = static_cast<double>(p.cos2_numerators[2]) / den;
    cd2 = static_cast<double>(p.cos2_numerators[3]) / den;
  } else {
    ca2 = sq(std::cos(p.alpha));
    cb2 = sq(std::cos(p.beta));
    cg2 = sq(std::cos(p.gamma));
    cd2 = sq(std::cos(p.delta));
  }
  if (!t.iterates.empty()) {
    for (std::size_t k = 0; 2 * k + 2 < t.iterates.size(); ++k) {
      if (t.norms[2 * k + 2] < norm_floor) break;
      const Vector& x = t.iterates[2 * k];
      const Vector& y = t.iterates[2 * k + 2];
      const bool three = t.indices[2 * k] == 3;
      const double fx = three ? cb2 : ca2;
      const double fy = three ? cg2 : cd2;
      const double ex = x(0) * fx, ey = x(2) * fy;
      const double v = std::max(std::abs(y(0) - ex) / std::abs(ex), std::abs(y(2) - ey) / std::abs(ey));
      r.recurrence.observe(v, static_cast<long>(k));
    }
  }
  return r;
}

std::size_t eventual_period(std::span<const int> seq, std::size_t max_period) {
  const std::size_t W = seq.size();
  for (std::size_t p = 1; p <= max_period && p < W; ++p) {
    std::size_t k0 = 0;
    for (std::size_t k = W - p; k-- > 0;) {
      if (seq[k] != seq[k + p]) {
        k0 = k + 1;
        break;
      }
    }
    if (k0 <= W / 2) return p;
  }
  return 0;
}

CertificationReport quantity_chain(const QuantityReport& q, double tol) {
  CertificationReport r;
  CheckResult lb = make_check("rho_star_lower_bound", "rho* >= (1 - c) / (K - 1), estimator value", tol);
  lb.observe(q.rho_star_lower_bound - q.rho_star.value, 0);
  CheckResult order = make_check("rho_below_rho_star", "rho <= rho*, estimator values", 1e-8);
  order.observe(q.rho.value - q.rho_star.value, 0);
  CheckResult c = make_check("friedrichs_below_one", "c < 1 for a family with trivial intersection", 0.0);
  c.observe(q.friedrichs_c >= 1.0 ? 1.0 : 0.0, 0);
  r.add(std::move(lb));
  r.add(std::move(order));
  r.add(std::move(c));
  return r;
}

}  // namespace altproj
