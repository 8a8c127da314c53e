// Acceptance run: one PASS/FAIL line per criterion, runtime limits included.
// Exit code 0 only when every criterion passes.

#include "altproj/certify.hpp"
#include "altproj/constructions.hpp"
#include "altproj/iterates.hpp"
#include "altproj/quantities.hpp"

#include "../oracles.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace altproj;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream notes;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      if (!pass) notes << "; ";
      notes << "FAILED " << what;
      pass = false;
    }
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

Subspace line2(double angle) {
  return Subspace::from_columns((Vector(2) << std::cos(angle), std::sin(angle)).finished());
}

// ---------------------------------------------------------------------------

void three_planes(Outcome& o) {
  const PlanesInstance inst = planes_preset();
  const Trajectory t = run(inst.family, inst.x0, Policy::remotest(), {.n_steps = 2000, .stop_norm = 0.0});
  const BakersAgreement a = bakers_agreement(inst, t, 1e-280);
  o.require(a.steps_compared >= 400, "fewer than 400 steps above 1e-280");
  o.require(a.first_mismatch == -1, "index mismatch at step " + std::to_string(a.first_mismatch));
  o.require(a.odd_steps_are_one, "an odd step chose a label other than 1");
  o.require(!a.tie, "orbit hit a tie");
  o.require(a.recurrence.pass, "pair recurrence");
  const BakersOrbit orbit = bakers_orbit(inst.params, 500);
  const std::size_t p = eventual_period(orbit.even_indices, 20);
  o.require(p == 0, "even-step indices have period " + std::to_string(p));
  o.notes << (o.pass ? "" : "; ") << a.steps_compared << " steps matched";
}

void block_rate(Outcome& o) {
  const BlockConstruction cfg = BlockConstruction::preset(0.25, 400);
  const BlockInstance inst = block_family(cfg);

  // (i) simulation against the closed form.
  const Trajectory cyc = run(inst.family, inst.x0, Policy::cyclic(), {.n_steps = 200, .store_iterates = false});
  const CheckResult cf = block_closed_form_check(cfg, cyc, 1e-10);
  o.require(cf.pass && cf.evaluated == 100, "closed form (max rel " + std::to_string(cf.max_violation) + ")");

  // (ii) fitted exponent of the closed form over [1e3, 1e5].
  std::vector<double> n, v;
  for (std::size_t k = 1000; k <= 100000; ++k) {
    n.push_back(static_cast<double>(k));
    v.push_back(block_cyclic_norm(cfg, k));
  }
  const RateFit fit = rate_fit(n, v);
  char buf[160];
  std::snprintf(buf, sizeof buf, "slope %.4f R2 %.4f", fit.slope, fit.r_squared);
  o.require(fit.slope >= -0.63 && fit.slope <= -0.50, std::string("fitted slope outside [-0.63, -0.50]: ") + buf);
  o.require(fit.r_squared > 0.99, std::string("R2 <= 0.99: ") + buf);

  // (iii) remotest residuals against s_ub(x_1) / sqrt(n).
  const Trajectory rem = run(inst.family, inst.x0, Policy::remotest(), {.n_steps = 10000, .store_iterates = false});
  const Trajectory first = run(inst.family, inst.x0, Policy::remotest(), {.n_steps = 1});
  const SNormResult s1 = s_norm(inst.family, first.iterates[1]);
  o.require(s1.certified, "s(x_1) not certified");
  o.require(rem.steps() == 10000, "remotest run shorter than 1e4 steps");
  const CheckResult sq = sqrt_rate_check(rem, s1.value, 1e-9);
  o.require(sq.pass, "sqrt rate at step " + std::to_string(sq.worst_step));
  if (o.pass) o.notes << buf << ", s_ub(x1) " << s1.value;
}

void decay_ledgers(Outcome& o) {
  std::mt19937_64 rng(2024);
  std::size_t ledgers = 0, truncated = 0, shortest = 10000;
  for (std::size_t K = 2; K <= 4; ++K) {
    for (std::uint64_t s = 0; s < 20; ++s) {
      const Index d = static_cast<Index>(2 * K);
      const SubspaceFamily f = random_family(d, K, 1000 * K + s);
      const Vector x0 = oracle::random_vector(d, rng);
      const DecayLedger l = decay_ledger(f, x0, 10000);
      ++ledgers;
      if (l.truncated) ++truncated;
      if (!l.truncated) shortest = std::min(shortest, l.nu.size());
      for (const auto& c : l.report.checks) {
        o.require(c.pass, c.name + " K=" + std::to_string(K) + " family " + std::to_string(s));
      }
    }
  }
  o.require(shortest == 10000, "a ledger ended after " + std::to_string(shortest) + " cycles");
  o.notes << (o.pass ? "" : "; ") << ledgers << " ledgers of " << shortest << "+ cycles, " << truncated
          << " reached exact zero";
}

void constants(Outcome& o) {
  for (double theta : {M_PI / 6, M_PI / 4, M_PI / 3}) {
    const double c = friedrichs_number(SubspaceFamily({line2(0.3), line2(0.3 + theta)}));
    o.require(std::abs(c - std::cos(theta)) <= 1e-10, "friedrichs two lines");
  }
  double worst_sampling = 0.0;
  for (std::uint64_t s = 0; s < 50; ++s) {
    const Index d = 2 + static_cast<Index>(s % 4);
    const SubspaceFamily f = random_family(d, 2 + s % 3, 500 + s);
    std::vector<Matrix> bases;
    for (const auto& m : f.members()) bases.push_back(m.basis());
    const double gap = std::abs(friedrichs_number(f) - oracle::friedrichs_by_sampling(bases, s));
    worst_sampling = std::max(worst_sampling, gap);
  }
  o.require(worst_sampling <= 1e-3, "sampling oracle gap " + std::to_string(worst_sampling));
  for (std::uint64_t s = 0; s < 100; ++s) {
    const Index d = 2 + static_cast<Index>(s % 5);
    const SubspaceFamily f = random_family(d, 2 + s % 3, 900 + s);
    const QuantityReport q = measure(f, {.restarts = 8, .seed = s});
    o.require(quantity_chain(q, 1e-6).all_pass(), "rho* chain on family " + std::to_string(s));
  }
  double worst_rho = 0.0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    const Index d = 2 + static_cast<Index>(s % 6);
    const SubspaceFamily f = random_family(d, 2, 1300 + s);
    worst_rho = std::max(worst_rho, rho_estimate(f, RhoMode::full_sphere, {.restarts = 8, .seed = s}).value);
  }
  o.require(worst_rho <= M_SQRT1_2 + 1e-6, "K=2 rho " + std::to_string(worst_rho));
  if (o.pass) o.notes << "sampling gap " << worst_sampling << ", max K=2 rho " << worst_rho;
}

void s_norm_solver(Outcome& o) {
  std::mt19937_64 rng(99);
  double worst_gap = 0.0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    const Index d = 2 + static_cast<Index>(s % 9);
    const SubspaceFamily f = random_family(d, 2 + s % 3, 2000 + s);
    const Vector y = oracle::random_vector(d, rng);
    const SNormResult r = s_norm(f, y);
    o.require(r.certified, "instance " + std::to_string(s) + " not certified");
    o.require(r.gap <= 1e-8 * (1 + y.norm()), "gap on instance " + std::to_string(s));
    o.require(r.value >= y.norm() - 1e-10, "s(y) < |y| on instance " + std::to_string(s));
    worst_gap = std::max(worst_gap, r.gap / (1 + y.norm()));
  }
  // K = 2 lines: in R^2 the decomposition is forced, in R^3 it moves along l1 x l2.
  for (int trial = 0; trial < 50; ++trial) {
    const Vector a = oracle::random_vector(2, rng), b = oracle::random_vector(2, rng), y = oracle::random_vector(2, rng);
    Matrix N(2, 2);
    N.col(0) = (Vector(2) << -a(1), a(0)).finished().normalized();
    N.col(1) = (Vector(2) << -b(1), b(0)).finished().normalized();
    const double exact = N.fullPivLu().solve(y).cwiseAbs().sum();
    const double v = s_norm(SubspaceFamily({Subspace::from_columns(a), Subspace::from_columns(b)}), y).value;
    o.require(std::abs(v - exact) <= 1e-6, "two lines in R^2");
  }
  for (int trial = 0; trial < 50; ++trial) {
    const Vector a = oracle::random_vector(3, rng), b = oracle::random_vector(3, rng), y = oracle::random_vector(3, rng);
    const double v = s_norm(SubspaceFamily({Subspace::from_columns(a), Subspace::from_columns(b)}), y).value;
    o.require(std::abs(v - oracle::s_two_lines_r3(a, b, y)) <= 1e-6, "two lines in R^3");
  }
  // rho(x) s(x) >= |x| on the block construction and on random families.
  const BlockInstance blocks = block_family(BlockConstruction::preset(0.25, 30));
  for (int trial = 0; trial < 50; ++trial) {
    const SubspaceFamily f = trial % 2 == 0 ? blocks.family : random_family(6, 3, 3000 + static_cast<std::uint64_t>(trial));
    const Vector x = oracle::random_vector(f.ambient_dim(), rng);
    const SNormResult r = s_norm(f, x);
    o.require(r.certified, "direction check: s not certified");
    o.require(greedy_direction(f, x).rho_x * r.value >= x.norm() - 1e-6, "rho(x) s(x) < |x|");
  }
  for (std::uint64_t s = 0; s < 10; ++s) {
    const SubspaceFamily f = random_family(5, 2, 4000 + s);
    const Trajectory t = run(f, oracle::random_vector(5, rng), Policy::remotest(), {.n_steps = 60});
    if (t.steps() < 2) continue;
    const SAlongTrajectory sa = s_along_trajectory(f, t);
    o.require(sa.monotone.pass, "s not monotone along a K=2 run");
    o.require(sa.direction.pass, "direction bound along a K=2 run");
  }
  if (o.pass) o.notes << "worst relative gap " << worst_gap;
}

void dichotomy(Outcome& o) {
  const SubspaceFamily f = four_lines_family(0.1);
  const Vector x0 = (Vector(2) << 1, 1).finished();
  const Trajectory c = run(f, x0, Policy::explicit_schedule({1, 2}), {.n_steps = 4});
  o.require(c.norms.size() >= 3 && c.norms[2] == 0.0, "one cycle of (1,2) is not exactly zero");
  const Trajectory r = run(f, x0, Policy::remotest(), {.n_steps = 100});
  o.require(r.steps() == 100, "remotest stopped early");
  for (std::size_t n = 0; n < r.steps(); ++n) {
    if (r.indices[n] != (n % 2 == 0 ? 4 : 3) || !(r.norms[n + 1] > 0.0)) {
      o.require(false, "four lines remotest pattern at step " + std::to_string(n));
      break;
    }
  }
  const BlockConstruction cfg = BlockConstruction::preset(0.25, 400);
  std::vector<double> target(50);
  for (std::size_t n = 1; n <= 50; ++n) target[n - 1] = 1.0 / std::log(n + 2.0);
  const SlowWitness w = slow_witness(cfg, target, 50);
  const Trajectory t = run(block_family(cfg).family, w.x0, Policy::remotest(), {.n_steps = 50, .store_iterates = false});
  double margin = INFINITY;
  for (std::size_t n = 1; n <= 50; ++n) margin = std::min(margin, t.norms[n] - target[n - 1]);
  o.require(t.steps() == 50 && margin >= 0.0, "slow witness falls below 1/ln(n+2)");
  if (o.pass) o.notes << "slow witness min margin " << margin;
}

void sequence_bound(Outcome& o) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> len(1, 1000);
  std::uniform_real_distribution<double> amp(0.01, 100.0);
  std::size_t hypothesis_ok = 0;
  for (int i = 0; i < 10000; ++i) {
    const double A = amp(rng);
    const auto c = oracle::sequence_below_envelope(A, static_cast<std::size_t>(len(rng)), rng);
    const SequenceBoundResult r = sequence_bound_check(c, A);
    if (r.hypothesis) ++hypothesis_ok;
    o.require(r.hypothesis && r.conclusion, "random sequence " + std::to_string(i));
    if (!o.pass) return;
  }
  const auto eq = oracle::sequence_at_equality(1.0, 1.0, 1000000);
  const SequenceBoundResult r = sequence_bound_check(eq, 1.0);
  o.require(r.holds(), "equality sequence fails at " + std::to_string(r.first_conclusion_failure));
  if (o.pass) o.notes << hypothesis_ok << " sequences, equality max n c_n / A " << r.max_ratio;
}

void engine_identities(Outcome& o) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> dim(2, 8), members(2, 5), kind(0, 2);
  double worst_membership = 0.0;
  for (int i = 0; i < 200; ++i) {
    const Index d = dim(rng);
    const std::size_t K = static_cast<std::size_t>(members(rng));
    const SubspaceFamily f = random_family(d, K, 5000 + static_cast<std::uint64_t>(i));
    const Vector x0 = oracle::random_vector(d, rng);
    Policy p;
    switch (kind(rng)) {
      case 0: p = Policy::cyclic(); break;
      case 1: p = Policy::remotest(); break;
      default: {
        std::uniform_int_distribution<int> label(1, static_cast<int>(K));
        std::vector<int> sched(7);
        for (auto& l : sched) l = label(rng);
        p = Policy::explicit_schedule(sched);
      }
    }
    const Trajectory t = run(f, x0, p, {.n_steps = 150});
    const CertificationReport r = step_identities(t, &f, 1e-9);
    o.require(r.find("monotone_norms")->pass, "monotone norms, triple " + std::to_string(i));
    o.require(r.find("pythagoras")->pass, "pythagoras, triple " + std::to_string(i));

    const Trajectory rem = run(f, x0, Policy::remotest(), {.n_steps = 150});
    const Trajectory gre = greedy_run(f, x0, {}, {.n_steps = 150});
    bool same = rem.indices == gre.indices && rem.norms == gre.norms && rem.iterates.size() == gre.iterates.size();
    for (std::size_t n = 0; same && n < rem.iterates.size(); ++n) {
      same = (rem.iterates[n].array() == gre.iterates[n].array()).all();
    }
    o.require(same, "remotest and greedy over D_L differ, triple " + std::to_string(i));

    // Members sharing a line: x0 in the complement sum stays there.
    const Index dd = d + 1;
    const Vector common = oracle::random_vector(dd, rng);
    std::vector<Subspace> shared;
    for (std::size_t k = 0; k < K; ++k) {
      std::uniform_int_distribution<int> extra(0, static_cast<int>(dd) - 2);
      Matrix b(dd, 1 + extra(rng));
      b.col(0) = common;
      for (Index j = 1; j < b.cols(); ++j) b.col(j) = oracle::random_vector(dd, rng);
      shared.push_back(Subspace::from_columns(b));
    }
    Vector y = Vector::Zero(dd);
    for (const auto& m : shared) y += m.residual(oracle::random_vector(dd, rng));
    if (complement_sum_residual(shared, y) >= 1e-8 * y.norm()) continue;
    const Trajectory ts = run(shared, y, p.kind == PolicyKind::explicit_schedule ? Policy::cyclic() : p,
                              {.n_steps = 150});
    for (const auto& x : ts.iterates) {
      worst_membership = std::max(worst_membership, complement_sum_residual(shared, x) / y.norm());
    }
  }
  o.require(worst_membership < 1e-7, "membership residual " + std::to_string(worst_membership));
  if (o.pass) o.notes << "worst relative membership residual " << worst_membership;
}

struct Criterion {
  const char* id;
  const char* title;
  double limit_seconds;  ///< 0: no limit
  std::function<void(Outcome&)> body;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {"AC1", "three planes: remotest indices follow the shift-map orbit", 1.0, three_planes},
      {"AC2", "block construction: closed form, fitted exponent, square-root bound", 30.0, block_rate},
      {"AC3", "one-cycle decay ledger on random families", 60.0, decay_ledgers},
      {"AC4", "Friedrichs number and sphere constants", 0.0, constants},
      {"AC5", "sum-of-norms solver", 0.0, s_norm_solver},
      {"AC6", "four lines and the slow witness", 0.0, dichotomy},
      {"AC7", "sequence bound c_n <= A / n", 0.0, sequence_bound},
      {"AC8", "engine identities and invariant complement sums", 0.0, engine_identities},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    Outcome o;
    const auto t0 = Clock::now();
    try {
      c.body(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    const double dt = seconds_since(t0);
    if (c.limit_seconds > 0 && dt >= c.limit_seconds) {
      o.require(false, "runtime " + std::to_string(dt) + " s over the " + std::to_string(c.limit_seconds) + " s limit");
    }
    if (!o.pass) ++failures;
    std::printf("%s %s  %s [%.2f s] %s\n", c.id, o.pass ? "PASS" : "FAIL", c.title, dt, o.notes.str().c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
