#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pcgrad/problems.hpp"
#include "pcgrad/vecmath.hpp"

namespace pcgrad {

// Margin tolerance shared by the inequality checks below.
inline constexpr double kMarginTolerance = 1e-9;

struct TrialRecord {
  std::int64_t index = 0;
  std::uint64_t inputs_hash = 0;
  bool applicable = false;
  bool pass = true;
  double margin = std::numeric_limits<double>::quiet_NaN();
};

// Aggregated verdict of one randomized sweep. `violations` counts applicable
// trials whose margin fell below the sweep's tolerance; `worst_margin` is the
// smallest margin seen among applicable trials (NaN when none were).
struct TheoremReport {
  std::string theorem_id;
  std::int64_t trials = 0;
  std::int64_t applicable = 0;
  std::int64_t violations = 0;
  double worst_margin = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t seed = 0;
  std::map<std::string, double> stats;
  std::vector<TrialRecord> records;

  nlohmann::ordered_json to_json() const;
};

// ---------------------------------------------------------------------------
// Single-instance checks

// One projected step on a two-task problem with Lipschitz metadata: returns
// (bound RHS) - L(theta+), where the bound is
//   L(theta) - t/2 (1 - cos^2 phi) |g|^2          when the tasks conflict,
//   L(theta) - t |g|^2 + L t^2/2 |g|^2            otherwise (plain descent),
// with g the summed gradient. Requires 0 < t <= 1/L.
double check_theorem1_decrease(const MultiTaskProblem& problem, const Vec& theta,
                               double t, std::uint64_t step_seed = 0);

// Verdict shared by the conditional-improvement checks: `margin` is
// L(theta_mt) - L(theta_pc) and is only asserted when `applicable`.
struct ConditionalVerdict {
  bool applicable = false;
  double margin = std::numeric_limits<double>::quiet_NaN();
  double cos_phi = std::numeric_limits<double>::quiet_NaN();
  double phi = std::numeric_limits<double>::quiet_NaN();
  double xi = std::numeric_limits<double>::quiet_NaN();
  double ell = std::numeric_limits<double>::quiet_NaN();
  double lipschitz = std::numeric_limits<double>::quiet_NaN();
  double t_threshold = std::numeric_limits<double>::quiet_NaN();
  bool branch1 = false;  // -phi <= cos < 0, ell <= xi L, t <= T*
  bool branch2 = false;  // cos <= -phi, ell >= xi L, t >= T*
  bool surrogate_nonneg = false;  // t (coeff t - numterm) >= 0
};

// Sufficient conditions: (a) cos <= -phi, (b) ell >= xi L, (c) t >= 2/(ell - xi L).
// ell is exact on quadratics: g^T A g / |g|^2 with A the summed Hessian.
ConditionalVerdict check_theorem2_sufficient(const QuadraticProblem& problem,
                                             const Vec& theta, double t);

// Two-branch if-and-only-if conditions; sufficiency is asserted on true
// losses, the necessity direction is only recorded (surrogate_nonneg).
ConditionalVerdict check_theorem3_iff(const QuadraticProblem& problem,
                                      const Vec& theta, double t);

// Multi-task non-increase gated on cos(g, g_pc) >= 1/2 at t <= 1/L.
struct GateVerdict {
  bool applicable = false;
  double cos_gate = std::numeric_limits<double>::quiet_NaN();
  double margin = std::numeric_limits<double>::quiet_NaN();  // L(theta) - L(theta+)
};
GateVerdict check_corollary_ntasks(const MultiTaskProblem& problem, const Vec& theta,
                                   double t, std::uint64_t seed = 0);

// Stationarity rate over a finished projected-descent trajectory:
//   min_k |g_k|^2 <= 2 (L(theta_0) - floor) / (K (1 - alpha^2) t)
// with alpha the smallest pairwise cosine seen (NaN entries skipped).
struct PropositionVerdict {
  bool stalled = false;  // alpha <= -1: staying put is permitted, nothing asserted
  double alpha = std::numeric_limits<double>::quiet_NaN();
  double min_grad_sq = std::numeric_limits<double>::quiet_NaN();
  double bound = std::numeric_limits<double>::quiet_NaN();
  double margin_rel = std::numeric_limits<double>::quiet_NaN();
  bool pass = false;
};
PropositionVerdict check_proposition_nonconvex(const std::vector<double>& grad_sq,
                                               const std::vector<double>& cos_phi,
                                               double loss_start, double loss_floor,
                                               double t, std::int64_t k_steps);

// Momentum run with the per-step conflict-adjusted schedule on a two-task
// strongly convex quadratic with a shared minimizer. Checks, per step, the
// stacked-error contraction ratio against rho_k = (sqrt(kappa_k)-1)/(sqrt(kappa_k)+1)
// and, separately, the spectral radius of the realized step matrix (the
// latter is what the schedule actually controls).
struct HeavyBallVerdict {
  std::int64_t steps = 0;
  std::int64_t step_violations = 0;      // stacked-norm ratio > rho_k + tol
  double worst_margin = std::numeric_limits<double>::infinity();  // min rho_k - ratio
  std::int64_t spectral_violations = 0;  // spectral radius > rho_k + tol
  double final_error = std::numeric_limits<double>::quiet_NaN();
  std::int64_t skipped = 0;              // degenerate-gradient steps (plain fallback)
  std::int64_t conflicted = 0;
};
HeavyBallVerdict check_heavyball_contraction(const QuadraticProblem& problem,
                                             const Vec& theta0, int steps,
                                             bool squared_schedule = true);

// Line-integrated directional curvature between iterates, closed form for
// quadratics: g(theta)^T A g(theta), independent of theta_prime.
double curvature_integral_quadratic(const MultiTaskProblem& problem, const Vec& theta,
                                    const Vec& theta_prime);

// Central-difference check of the summed analytic gradient. Per coordinate,
// |numeric - analytic| / max(1, |numeric|, |analytic|); returns the maximum.
double finite_difference_max_rel_error(const MultiTaskProblem& problem,
                                       const Vec& theta, double eps = 1e-6);

// ---------------------------------------------------------------------------
// Randomized sweeps. Trials use seeds derived from (seed, sweep tag, index),
// so reports are identical for any thread count.

struct SweepOptions {
  std::uint64_t seed = 0;
  std::int64_t trials = 0;  // 0 keeps the sweep's acceptance-scale default
  int threads = 1;
  bool squared_schedule = true;  // momentum step-size form
  bool keep_records = true;
};

TheoremReport sweep_theorem1(const SweepOptions& opts);     // default 1000 instances
TheoremReport sweep_theorem2(const SweepOptions& opts);     // default 100000 trials
TheoremReport sweep_theorem3(const SweepOptions& opts);     // default 100000 trials
TheoremReport sweep_corollary1(const SweepOptions& opts);   // default 10000 trials
TheoremReport sweep_proposition1(const SweepOptions& opts); // default 100 seeds
TheoremReport sweep_heavyball(const SweepOptions& opts);    // default 100 instances
TheoremReport sweep_curvature(const SweepOptions& opts);    // default 1000 trials

// All seven sweeps in a fixed order.
std::vector<TheoremReport> run_verification_suite(const SweepOptions& opts);

}  // namespace pcgrad
