#pragma once

/// @file certify.hpp
/// Checks of rate inequalities and exact identities along concrete trajectories.
/// Each check records the inequality it tests, the tolerance, the largest violation
/// and where it occurred.

#include "altproj/constructions.hpp"
#include "altproj/hilbert.hpp"
#include "altproj/iterates.hpp"
#include "altproj/quantities.hpp"

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace altproj {

struct CheckResult {
  std::string name;
  std::string statement;       ///< the inequality or identity being checked
  double tolerance = 0.0;
  double max_violation = 0.0;  ///< largest (lhs - rhs) seen, scaled as documented per check
  long worst_step = -1;        ///< step index of max_violation, -1 if none
  std::size_t evaluated = 0;   ///< number of instances checked
  bool pass = true;

  /// Records violation v at step n; pass becomes false once v > tolerance.
  void observe(double v, long n);
};

struct CertificationReport {
  std::vector<CheckResult> checks;
  bool all_pass() const;
  void add(CheckResult c) { checks.push_back(std::move(c)); }
  void merge(const CertificationReport& other);
  const CheckResult* find(const std::string& name) const;
};

/// Monotone norms, Pythagoras per projection or greedy step (relative to |x_n|^2), and
/// for cyclic runs with stored iterates |Ty|^2 = |y|^2 (1 - nu(y)^2) per full cycle.
/// `family` may be null for greedy runs on explicit dictionaries.
CertificationReport step_identities(const Trajectory& t, const SubspaceFamily* family,
                                    double tol = 1e-9);

struct SequenceBoundResult {
  bool hypothesis = true;   ///< c_n >= 0, c_1 <= A, c_{n+1} <= c_n (1 - c_n / A)
  bool conclusion = true;   ///< c_n <= A / n for all n
  long first_hypothesis_failure = -1;  ///< 1-based n
  long first_conclusion_failure = -1;
  double max_ratio = 0.0;   ///< max n c_n / A
  bool holds() const { return hypothesis && conclusion; }
};

/// c[0] is c_1. Comparisons allow slack tol * A.
SequenceBoundResult sequence_bound_check(std::span<const double> c, double A, double tol = 1e-12);

struct DecayLedger {
  std::size_t K = 0;
  std::vector<double> a;   ///< |T^n x0|, may underflow to 0 long before n_cycles
  std::vector<double> log_a;
  std::vector<double> b;   ///< b_0 = s_ub(x0), b_{n+1} = b_n + sqrt(K) a_n nu_n
  std::vector<double> nu;  ///< nu(T^n x0)
  double alpha_exp = 0.0;  ///< K^(-3/2)
  double exponent = 0.0;   ///< 1 / (4 K sqrt(K) + 2)
  double s_ub = 0.0;       ///< certified primal value for s(x0)
  double s_lb = 0.0;       ///< dual value for s(x0)
  double c_x0 = 0.0;       ///< |x0|^(2/(2+alpha)) s_ub^(alpha/(2+alpha)) K^(alpha/(2+alpha))
  bool truncated = false;  ///< T^n x0 became exactly 0 before n_cycles
  CertificationReport report;
};

/// Runs n_cycles applications of T = P_K ... P_1 from x0 and checks the chain
/// a_{n+1}^2 = a_n^2 (1 - nu_n^2), a_{n+1}^2 b_{n+1}^alpha <= a_n^2 b_n^alpha (1 - nu_n^4),
/// a_n^2 / b_n^2 <= K^2 / n, nu_n >= a_n / (K b_n), and a_n <= c_x0 n^(-exponent).
/// Every cycle starts from the unit vector T^n x0 / a_n and a_n is kept as a logarithm,
/// so the checks run for all n_cycles even after |T^n x0| leaves the double range.
/// Requires x0 in the complement sum and a certified s-norm at x0.
DecayLedger decay_ledger(const SubspaceFamily& family, const Vector& x0, std::size_t n_cycles,
                         const SNormOptions& s_options = {});

/// 1 / (4 K sqrt(K) + 2).
double decay_exponent(std::size_t K);

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::size_t points = 0;
  /// R^2 > 0.99: only then is the slope read as a power-law exponent.
  bool power_law = false;
};

/// Least squares of log value against log n. norms[n] is the value at n; the window is
/// n in [first, last], first >= 1, at least 10 points, all values positive.
RateFit rate_fit(std::span<const double> norms, std::size_t first, std::size_t last);
RateFit rate_fit(std::span<const double> n, std::span<const double> values);

struct RateReport {
  std::size_t K = 0;
  double friedrichs_c = 0.0;
  double rho_star_lower_bound = 0.0;  ///< (1 - c) / (K - 1)
  double remotest_factor = 0.0;       ///< (1 - rho_star_lb^2)^(1/2)
  double alternating_factor = 0.0;    ///< (1 - ((1 - c) / (4K))^2)^(1/2)
  /// Largest observed per-step ratio |x_{n+1}| / |x_n| (remotest, n >= 1) or per-cycle
  /// ratio (cyclic); NaN when no trajectory was given.
  double empirical_max_factor = std::numeric_limits<double>::quiet_NaN();
  double empirical_mean_factor = std::numeric_limits<double>::quiet_NaN();
  CertificationReport report;
};

/// Predicted per-step factors. With a trajectory, also checks the matching bound:
/// remotest |x_{n+1}| <= remotest_factor |x_n| for n >= 1, cyclic |T^n x0| <= alternating_factor^n |x0|.
RateReport bound_report(const SubspaceFamily& family, const Trajectory* t = nullptr);

/// Greedy runs on a dictionary with rho_lb <= rho(D):
/// |x_{k+1}|^2 <= |x_k|^2 (1 - t_k^2 rho_lb^2) and |x_n| <= |x0| prod (1 - t_k^2 rho_lb^2)^(1/2).
CertificationReport greedy_rate_check(const Trajectory& t, double rho_lb,
                                      std::span<const double> weakness = {}, double tol = 1e-9);

/// K = 2 remotest runs: |x_n| <= s_ub(x_1) / sqrt(n) + tol for 1 <= n.
CheckResult sqrt_rate_check(const Trajectory& t, double s_ub_x1, double tol = 1e-9);

struct SAlongTrajectory {
  std::vector<double> primal;  ///< s_ub(x_n), n = first..last
  std::vector<double> dual;
  std::vector<bool> certified;
  CheckResult monotone;        ///< s_ub(x_{n+1}) <= s_ub(x_n) + 2 tol (1 + |x_n|), n >= 1
  CheckResult direction;       ///< rho(x_n) s_ub(x_n) >= |x_n| - 1e-6
};

/// Certified s-norms along the stored iterates x_1..x_N of a K = 2 remotest run.
SAlongTrajectory s_along_trajectory(const SubspaceFamily& family, const Trajectory& t,
                                    const SNormOptions& options = {});

/// Cyclic run on block_family(cfg) against the closed form, relative, n = 1..per_T_norms().size()-1.
CheckResult block_closed_form_check(const BlockConstruction& cfg, const Trajectory& t, double tol = 1e-10);

struct BakersAgreement {
  std::size_t steps_compared = 0;       ///< steps with |x_n| >= norm_floor
  long first_mismatch = -1;
  bool odd_steps_are_one = true;
  bool tie = false;
  CheckResult indices;                  ///< simulated label vs orbit prediction
  CheckResult recurrence;               ///< (xi_k, eta_k) vs the per-pair recurrence, relative
};

/// Compares a remotest run on planes_family against bakers_orbit step by step while
/// |x_n| >= norm_floor. Requires stored iterates for the recurrence check.
BakersAgreement bakers_agreement(const PlanesInstance& inst, const Trajectory& t, double norm_floor = 1e-280);

/// Smallest p <= max_period such that seq[k + p] == seq[k] for every k >= k0 with some
/// k0 <= seq.size() / 2; 0 when there is none.
std::size_t eventual_period(std::span<const int> seq, std::size_t max_period);

/// (1 - c) / (K - 1) <= rho*_est + tol and rho_est <= rho*_est + 1e-8.
CertificationReport quantity_chain(const QuantityReport& q, double tol = 1e-6);

}  // namespace altproj
