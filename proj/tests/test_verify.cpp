#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "pcgrad/problems.hpp"
#include "pcgrad/surgery.hpp"
#include "pcgrad/verify.hpp"
#include "test_support.hpp"

using namespace pcgrad;
using test_support::vec;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

QuadraticTask isotropic(double a, const Vec& center) {
  QuadraticTask t;
  t.A = a * Mat::Identity(center.size(), center.size());
  t.center = center;
  t.mu = a;
  t.lam = a;
  return t;
}

// Two isotropic tasks whose gradients at theta = 0 are exactly g1 and g2.
QuadraticProblem pair_problem(const Vec& g1, const Vec& g2, double a1, double a2) {
  return QuadraticProblem({isotropic(a1, Vec(-g1 / a1)), isotropic(a2, Vec(-g2 / a2))},
                          "constructed");
}

// Gradients with the requested norms and angle (second one irrational in
// general, so downstream expectations must be recomputed from measurements).
Vec angled(double cos_t, double n, int dim) {
  Vec g = Vec::Zero(dim);
  g[0] = n * cos_t;
  g[1] = n * std::sqrt(1.0 - cos_t * cos_t);
  return g;
}

// The margin the conditional theorems predict exactly on isotropic pairs.
double predicted_margin(const Vec& g1, const Vec& g2, double lips, double t) {
  const double c = cosine(g1, g2);
  const double phi = magnitude_similarity(g1, g2);
  const double xi = curvature_bounding_measure(g1, g2);
  const double nsq = g1.squaredNorm() + g2.squaredNorm();
  const double gsq = (g1 + g2).squaredNorm();
  const double numterm = c * nsq * (c + phi);
  const double coeff = 0.5 * gsq * (lips - xi * lips);  // ell == L, isotropic
  return t * (coeff * t - numterm);
}

}  // namespace

// ---------------------------------------------------------------------------

TEST_CASE("single-step decrease bound: exact corners and both branches") {
  SUBCASE("common minimizer: zero gradients give a zero margin") {
    const Vec c = vec({1.0, -2.0});
    QuadraticProblem p({isotropic(1.0, c), isotropic(1.0, c)}, "twin");
    CHECK(check_theorem1_decrease(p, c, 0.5) == 0.0);
  }

  SUBCASE("exact opposition: the projected step stays put, bound is the loss") {
    QuadraticProblem p = pair_problem(vec({-2, 0}), vec({2, 0}), 1.0, 1.0);
    CHECK(check_theorem1_decrease(p, Vec::Zero(2), 0.5) == 0.0);
  }

  SUBCASE("aligned anisotropic tasks: descent-lemma slack is L gsq - g A g") {
    QuadraticTask t1;
    t1.A = Mat::Zero(2, 2);
    t1.A(0, 0) = 1.0;
    t1.A(1, 1) = 3.0;
    t1.center = Vec::Zero(2);
    t1.mu = 1.0;
    t1.lam = 3.0;
    QuadraticProblem p({t1, t1}, "aligned");
    const double lips = *p.lipschitz_total();
    CHECK(lips == 6.0);
    const Vec theta = vec({1, 1});
    const Vec g = p.total_grad(theta);            // (2, 6)
    const double gsq = g.squaredNorm();           // 40
    const double gag = g.dot(p.total_hessian() * g);  // 224
    const double t = 1.0 / lips;
    const double expect = 0.5 * t * t * (lips * gsq - gag);
    CHECK(check_theorem1_decrease(p, theta, t) ==
          doctest::Approx(expect).epsilon(1e-12));
  }

  SUBCASE("conflicting tasks: the projected loss obeys the conflict bound") {
    // integer-exact pair: norms 5 and 10, cos = -0.8 exactly
    const Vec g1 = vec({5, 0});
    const Vec g2 = vec({-8, 6});
    QuadraticProblem p = pair_problem(g1, g2, 0.5, 0.5);  // total Hessian I
    const double t = 0.5;
    const double c = cosine(g1, g2);
    const double gsq = (g1 + g2).squaredNorm();           // 45
    const double diffsq = (g1 - g2).squaredNorm();        // 205
    // L(th) - L(th - t pc) with |pc|^2 = (1-c^2) diffsq and g.pc = gsq here
    const double gain = t * gsq - 0.5 * t * t * (1.0 - c * c) * diffsq;
    const double expect = gain - 0.5 * t * (1.0 - c * c) * gsq;
    CHECK(check_theorem1_decrease(p, Vec::Zero(2), t) ==
          doctest::Approx(expect).epsilon(1e-12));
  }

  SUBCASE("error paths") {
    Didactic2d d;  // two tasks but no Lipschitz metadata
    CHECK_THROWS_AS(check_theorem1_decrease(d, Didactic2d::default_init(), 0.01),
                    UnsupportedProblem);
    const auto three = quadratic_family(2, 3, 3, 0.5, 2.0);
    CHECK_THROWS_AS(check_theorem1_decrease(three, Vec::Zero(3), 0.01),
                    UnsupportedProblem);
    QuadraticProblem p = pair_problem(vec({1, 0}), vec({0, 1}), 1.0, 1.0);
    CHECK_THROWS_AS(check_theorem1_decrease(p, Vec::Zero(2), 0.0), ConfigError);
    CHECK_THROWS_AS(check_theorem1_decrease(p, Vec::Zero(2), -0.1), ConfigError);
    CHECK_THROWS_AS(check_theorem1_decrease(p, Vec::Zero(2), 1.01 / 2.0), ConfigError);
  }
}

// ---------------------------------------------------------------------------

TEST_CASE("sufficient conditions: margin equals the closed-form prediction") {
  // cos -0.9 at norms 1:3 -> phi = 0.6, xi ~ 0.636, ell = L = 1.5, T* ~ 3.66
  const Vec g1 = angled(1.0, 1.0, 4);
  const Vec g2 = angled(-0.9, 3.0, 4);
  QuadraticProblem p = pair_problem(g1, g2, 0.7, 0.8);
  const double t = 5.0;

  const ConditionalVerdict v = check_theorem2_sufficient(p, Vec::Zero(4), t);
  REQUIRE(v.applicable);
  CHECK(v.branch2);
  CHECK_FALSE(v.branch1);
  CHECK(v.surrogate_nonneg);
  CHECK(v.cos_phi == doctest::Approx(-0.9).epsilon(1e-12));
  CHECK(v.phi == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(v.ell == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(v.lipschitz == doctest::Approx(1.5).epsilon(1e-12));
  const double xi = curvature_bounding_measure(g1, g2);
  CHECK(v.xi == doctest::Approx(xi).epsilon(1e-12));
  CHECK(v.t_threshold ==
        doctest::Approx(2.0 / (v.ell - xi * v.lipschitz)).epsilon(1e-12));
  CHECK(t >= v.t_threshold);
  // true-loss improvement equals t (coeff t - numterm) exactly on isotropic pairs
  CHECK(v.margin == doctest::Approx(predicted_margin(g1, g2, 1.5, t)).epsilon(1e-9));
  CHECK(v.margin > 0.0);

  SUBCASE("below the step threshold the conditions do not fire") {
    const ConditionalVerdict small = check_theorem2_sufficient(p, Vec::Zero(4), 0.1);
    CHECK_FALSE(small.applicable);
    CHECK(std::isnan(small.margin));
  }

  SUBCASE("agreeing gradients are out of scope") {
    QuadraticProblem q = pair_problem(angled(1.0, 1.0, 2), angled(0.5, 2.0, 2), 1.0, 1.0);
    const ConditionalVerdict w = check_theorem2_sufficient(q, Vec::Zero(2), 1.0);
    CHECK_FALSE(w.applicable);
  }

  SUBCASE("degenerate geometries raise") {
    QuadraticProblem opp = pair_problem(vec({1, 0}), vec({-1, 0}), 1.0, 1.0);
    CHECK_THROWS_AS(check_theorem2_sufficient(opp, Vec::Zero(2), 1.0), DegenerateSum);
    const Vec c = vec({1.0, 1.0});
    QuadraticProblem zero({isotropic(1.0, c), isotropic(1.0, c)}, "twin");
    CHECK_THROWS_AS(check_theorem2_sufficient(zero, c, 1.0), DegenerateGradient);
    CHECK_THROWS_AS(check_theorem2_sufficient(opp, Vec::Zero(2), 0.0), ConfigError);
  }
}

// ---------------------------------------------------------------------------

TEST_CASE("two-branch conditions: both branches and the boundary") {
  SUBCASE("dominant conflict lands in the second branch") {
    const Vec g1 = angled(1.0, 1.0, 4);
    const Vec g2 = angled(-0.9, 3.0, 4);
    QuadraticProblem p = pair_problem(g1, g2, 0.7, 0.8);
    const ConditionalVerdict v = check_theorem3_iff(p, Vec::Zero(4), 5.0);
    REQUIRE(v.applicable);
    CHECK(v.branch2);
    CHECK_FALSE(v.branch1);
    CHECK(v.margin == doctest::Approx(predicted_margin(g1, g2, 1.5, 5.0)).epsilon(1e-9));
  }

  SUBCASE("mild conflict at equal norms lands in the first branch") {
    // equal norms: phi = 1, xi = (1-c)^2 > 1, T* = 1/(2-c) = 0.4 at c = -0.5
    const Vec g1 = angled(1.0, 1.0, 2);
    const Vec g2 = angled(-0.5, 1.0, 2);
    QuadraticProblem p = pair_problem(g1, g2, 1.0, 1.0);
    const double t = 0.2;  // half of T*
    const ConditionalVerdict v = check_theorem3_iff(p, Vec::Zero(2), t);
    REQUIRE(v.applicable);
    CHECK(v.branch1);
    CHECK_FALSE(v.branch2);
    CHECK(v.t_threshold == doctest::Approx(0.4).epsilon(1e-9));
    CHECK(v.margin == doctest::Approx(predicted_margin(g1, g2, 2.0, t)).epsilon(1e-9));
    CHECK(v.margin > 0.0);

    // above T* the first branch switches off
    const ConditionalVerdict w = check_theorem3_iff(p, Vec::Zero(2), 0.6);
    CHECK_FALSE(w.applicable);
    CHECK_FALSE(w.surrogate_nonneg);
  }

  SUBCASE("exact boundary cos = -phi: no branch applies and the gap closes") {
    // integer-exact: norms 5 and 10 give phi = 0.8 and cos = -0.8 exactly,
    // so the interaction term vanishes and T* collapses to zero.
    const Vec g1 = vec({5, 0});
    const Vec g2 = vec({-8, 6});
    QuadraticProblem p = pair_problem(g1, g2, 0.5, 0.5);  // total Hessian I
    const double t = 0.7;
    const ConditionalVerdict v = check_theorem3_iff(p, Vec::Zero(2), t);
    CHECK_FALSE(v.applicable);
    CHECK_FALSE(v.branch1);
    CHECK_FALSE(v.branch2);
    CHECK(v.cos_phi == -v.phi);
    CHECK(v.t_threshold == 0.0);
    CHECK(v.xi > 1.0);
    // the true losses still differ by exactly t^2 coeff (negative here)
    const double coeff = 0.5 * (g1 + g2).squaredNorm() * (1.0 - v.xi);
    const Vec theta_mt = -t * (g1 + g2);
    const Vec theta_pc = Vec(-t * two_task_closed_form(g1, g2));
    const double diff = p.total_loss(theta_mt) - p.total_loss(theta_pc);
    CHECK(diff == doctest::Approx(t * t * coeff).epsilon(1e-9));
    CHECK(diff < 0.0);
  }
}

// ---------------------------------------------------------------------------

TEST_CASE("many-task gate: aligned geometry passes, settings are validated") {
  std::vector<QuadraticTask> tasks;
  for (int i = 0; i < 3; ++i) {
    Vec c = Vec::Zero(3);
    c[i] = 2.0;
    tasks.push_back(isotropic(1.0, c));
  }
  QuadraticProblem p(std::move(tasks), "axes");
  const double t = 1.0 / *p.lipschitz_total();

  const GateVerdict v = check_corollary_ntasks(p, Vec::Zero(3), t, 11);
  REQUIRE(v.applicable);  // orthogonal gradients: surgery output is the sum itself
  CHECK(v.cos_gate == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(v.margin > 0.0);

  CHECK_THROWS_AS(check_corollary_ntasks(p, Vec::Zero(3), 0.0, 11), ConfigError);
  CHECK_THROWS_AS(check_corollary_ntasks(p, Vec::Zero(3), 1.01 * t, 11), ConfigError);
  Didactic2d d;
  CHECK_THROWS_AS(check_corollary_ntasks(d, Didactic2d::default_init(), 0.01, 11),
                  UnsupportedProblem);
}

// ---------------------------------------------------------------------------

TEST_CASE("stationarity rate: closed-form verdicts") {
  SUBCASE("zero-gradient trajectory at the floor is the all-zero corner") {
    const auto v = check_proposition_nonconvex({0.0}, {0.5}, 2.0, 2.0, 0.1, 1);
    CHECK_FALSE(v.stalled);
    CHECK(v.alpha == 0.5);
    CHECK(v.bound == 0.0);
    CHECK(v.min_grad_sq == 0.0);
    CHECK(v.margin_rel == 0.0);
    CHECK(v.pass);
  }

  SUBCASE("hand-computed bound") {
    const auto v = check_proposition_nonconvex({4.0, 1.0}, {0.5, -0.5}, 10.0, 0.0, 0.1, 2);
    CHECK(v.alpha == -0.5);
    CHECK(v.min_grad_sq == 1.0);
    const double bound = 2.0 * 10.0 / (2.0 * 0.75 * 0.1);  // 133.33..
    CHECK(v.bound == doctest::Approx(bound).epsilon(1e-15));
    CHECK(v.pass);
    CHECK(v.margin_rel == doctest::Approx((bound - 1.0) / bound).epsilon(1e-12));
  }

  SUBCASE("a trajectory violating the rate is reported as a failure") {
    const auto v = check_proposition_nonconvex({100.0, 200.0}, {0.0, 0.0}, 1.0, 0.0, 1.0, 2);
    CHECK(v.bound == 1.0);
    CHECK_FALSE(v.pass);
    CHECK(v.margin_rel == doctest::Approx(-99.0).epsilon(1e-12));
  }

  SUBCASE("exact opposition anywhere stalls the certificate") {
    const auto v = check_proposition_nonconvex({4.0, 1.0}, {-1.0, 0.3}, 10.0, 0.0, 0.1, 2);
    CHECK(v.stalled);
    CHECK(v.alpha == -1.0);
    CHECK(std::isnan(v.bound));
    CHECK_FALSE(v.pass);  // nothing asserted: the verdict carries no claim
  }

  SUBCASE("nan cosines are skipped, all-nan is degenerate") {
    const auto v = check_proposition_nonconvex({4.0, 1.0}, {kNaN, 0.2}, 10.0, 0.0, 0.1, 2);
    CHECK(v.alpha == 0.2);
    CHECK_THROWS_AS(check_proposition_nonconvex({4.0}, {kNaN}, 10.0, 0.0, 0.1, 1),
                    DegenerateGradient);
  }

  SUBCASE("settings are validated") {
    CHECK_THROWS_AS(check_proposition_nonconvex({}, {}, 1.0, 0.0, 0.1, 0), ConfigError);
    CHECK_THROWS_AS(check_proposition_nonconvex({1.0}, {0.0, 0.0}, 1.0, 0.0, 0.1, 1),
                    ConfigError);
    CHECK_THROWS_AS(check_proposition_nonconvex({1.0}, {0.0}, 1.0, 0.0, 0.0, 1),
                    ConfigError);
  }
}

// ---------------------------------------------------------------------------

namespace {

QuadraticTask diag_task(double h1, double h2) {
  QuadraticTask t;
  t.A = Mat::Zero(2, 2);
  t.A(0, 0) = h1;
  t.A(1, 1) = h2;
  t.center = Vec::Zero(2);
  t.mu = std::min(h1, h2);
  t.lam = std::max(h1, h2);
  return t;
}

}  // namespace

TEST_CASE("momentum contraction: spectral radius holds, stacked norm does not") {
  SUBCASE("identical tasks") {
    QuadraticProblem p({diag_task(1, 4), diag_task(1, 4)}, "twin");
    const auto v = check_heavyball_contraction(p, vec({1, 1}), 60);
    CHECK(v.steps == 60);
    CHECK(v.conflicted == 0);
    // contraction at rho = 1/3 drives the gradients below the degeneracy
    // cutoff well before step 60, so the tail of the run is skipped
    CHECK(v.skipped > 0);
    CHECK(v.skipped < 60);
    CHECK(v.spectral_violations == 0);
    CHECK(v.final_error < 1e-8);
    // the per-step stacked-norm ratio exceeds rho on the first step from rest
    CHECK(v.step_violations >= 1);
    CHECK(v.worst_margin < -0.3);
  }

  SUBCASE("crossed curvatures never conflict and contract at exactly rho") {
    QuadraticProblem p({diag_task(1, 4), diag_task(4, 1)}, "crossed");
    const auto v = check_heavyball_contraction(p, vec({1, 1}), 60);
    CHECK(v.conflicted == 0);
    CHECK(v.spectral_violations == 0);
    CHECK(v.final_error < 1e-8);
    CHECK(v.step_violations >= 1);
  }

  SUBCASE("starting at the minimizer terminates immediately") {
    QuadraticProblem p({diag_task(1, 4), diag_task(4, 1)}, "crossed");
    const auto v = check_heavyball_contraction(p, Vec::Zero(2), 60);
    CHECK(v.final_error == 0.0);
    CHECK(v.step_violations == 0);
    CHECK(v.spectral_violations == 0);
  }

  SUBCASE("requirements: two tasks, shared minimizer, strong convexity") {
    const auto three = quadratic_family(5, 2, 3, 0.5, 2.0);
    CHECK_THROWS_AS(check_heavyball_contraction(three, Vec::Zero(2), 10),
                    UnsupportedProblem);
    const auto split = quadratic_family(5, 2, 2, 0.5, 2.0);  // distinct centers
    CHECK_THROWS_AS(check_heavyball_contraction(split, Vec::Zero(2), 10),
                    UnsupportedProblem);
    QuadraticProblem flat({diag_task(0, 1), diag_task(1, 1)}, "flat");
    CHECK_THROWS_AS(check_heavyball_contraction(flat, vec({1, 1}), 10),
                    UnsupportedProblem);
  }

  SUBCASE("the un-squared step schedule is unstable") {
    SweepOptions opts;
    opts.trials = 10;
    opts.squared_schedule = false;
    const TheoremReport rep = sweep_heavyball(opts);
    CHECK(rep.violations >= 1);
  }

  SUBCASE("sweep: spectral radius clean, final errors tiny, per-step red") {
    SweepOptions opts;
    opts.trials = 10;
    const TheoremReport rep = sweep_heavyball(opts);
    CHECK(rep.violations == 10);  // every run trips the per-step stacked bound
    CHECK(rep.stats.at("spectral_violations") == 0.0);
    CHECK(rep.stats.at("final_error_max") < 1e-8);
  }
}

// ---------------------------------------------------------------------------

TEST_CASE("integrated curvature: closed form against a quadrature oracle") {
  SUBCASE("hand values") {
    QuadraticProblem p = pair_problem(vec({1, 0}), vec({0, 1}), 0.5, 0.5);
    // total Hessian is I and total gradient at theta is theta + (1,1)
    const Vec theta = vec({2, 3});
    const Vec g = p.total_grad(theta);
    CHECK(curvature_integral_quadratic(p, theta, vec({9, -9})) == g.squaredNorm());
    // independent of the segment endpoint
    CHECK(curvature_integral_quadratic(p, theta, vec({0, 0})) ==
          curvature_integral_quadratic(p, theta, vec({-5, 5})));
    // zero at the summed minimizer
    const Vec star = *p.total_minimizer();
    CHECK(curvature_integral_quadratic(p, star, theta) == 0.0);
  }

  SUBCASE("midpoint quadrature of finite-difference curvature agrees") {
    const auto p = quadratic_family(19, 5, 2, 0.3, 2.5);
    rng::SplitMix64 r(77);
    const Vec theta = test_support::gaussian(r, 5, 2.0);
    const Vec theta_prime = test_support::gaussian(r, 5, 2.0);
    const Vec g = p.total_grad(theta);

    const double h = 1e-3;
    double acc = 0.0;
    const int kNodes = 64;
    for (int k = 0; k < kNodes; ++k) {
      const double s = (k + 0.5) / kNodes;
      const Vec mid = theta + s * (theta_prime - theta);
      const Vec hv = (p.total_grad(mid + h * g) - p.total_grad(mid - h * g)) / (2.0 * h);
      acc += g.dot(hv);
    }
    const double oracle = acc / kNodes;
    const double val = curvature_integral_quadratic(p, theta, theta_prime);
    CHECK(std::abs(val - oracle) <= 1e-10 * std::max(1.0, std::abs(oracle)));
  }

  SUBCASE("requirements") {
    Didactic2d d;
    CHECK_THROWS_AS(curvature_integral_quadratic(d, Didactic2d::default_init(),
                                                 Vec::Zero(2)),
                    UnsupportedProblem);
    QuadraticProblem p = pair_problem(vec({1, 0}), vec({0, 1}), 1.0, 1.0);
    CHECK_THROWS_AS(curvature_integral_quadratic(p, Vec::Zero(2), Vec::Zero(3)),
                    DimensionMismatch);
  }
}

// ---------------------------------------------------------------------------

TEST_CASE("finite-difference agreement on every analytic problem family") {
  const auto quad = quadratic_family(31, 6, 3, 0.2, 3.0);
  rng::SplitMix64 r(123);
  CHECK(finite_difference_max_rel_error(quad, test_support::gaussian(r, 6, 2.0)) < 1e-8);

  const auto sine = sine_quadratic_family(32, 4, 2);
  CHECK(finite_difference_max_rel_error(sine, test_support::gaussian(r, 4, 1.5)) < 1e-7);

  Didactic2d d;
  CHECK(finite_difference_max_rel_error(d, Didactic2d::default_init()) < 1e-8);

  CHECK_THROWS_AS(finite_difference_max_rel_error(d, Didactic2d::default_init(), 0.0),
                  ConfigError);
}

// ---------------------------------------------------------------------------

TEST_CASE("sweeps: clean verdicts at reduced scale") {
  SweepOptions opts;

  opts.trials = 50;
  const TheoremReport t1 = sweep_theorem1(opts);
  CHECK(t1.theorem_id == "theorem1");
  CHECK(t1.trials == 50);
  CHECK(t1.applicable == 50);
  CHECK(t1.violations == 0);
  CHECK(t1.worst_margin >= -1e-9);

  opts.trials = 100;
  const TheoremReport t2 = sweep_theorem2(opts);
  CHECK(t2.violations == 0);
  CHECK(t2.applicable >= 20);  // the constructed seed instances all fire

  opts.trials = 200;
  const TheoremReport cor = sweep_corollary1(opts);
  CHECK(cor.violations == 0);
  CHECK(cor.stats.at("gate_fraction") > 0.9);

  opts.trials = 20;
  const TheoremReport prop = sweep_proposition1(opts);
  CHECK(prop.violations == 0);

  opts.trials = 100;
  const TheoremReport curv = sweep_curvature(opts);
  CHECK(curv.violations == 0);
  CHECK(curv.stats.at("rel_tolerance") == 1e-10);
}

TEST_CASE("sweeps: reports are identical for any thread count") {
  SweepOptions a;
  a.trials = 200;
  a.threads = 1;
  SweepOptions b = a;
  b.threads = 3;
  CHECK(sweep_theorem3(a).to_json().dump() == sweep_theorem3(b).to_json().dump());

  SUBCASE("record keeping honors the flag") {
    const TheoremReport kept = sweep_theorem3(a);
    CHECK(kept.records.size() == 200);
    a.keep_records = false;
    const TheoremReport dropped = sweep_theorem3(a);
    CHECK(dropped.records.empty());
    CHECK(kept.to_json().dump() == dropped.to_json().dump());  // json omits records
  }
}

TEST_CASE("the full verification suite runs in a fixed order") {
  SweepOptions opts;
  opts.trials = 10;
  opts.keep_records = false;
  const auto reports = run_verification_suite(opts);
  REQUIRE(reports.size() == 7);
  CHECK(reports[0].theorem_id == "theorem1");
  CHECK(reports[1].theorem_id == "theorem2");
  CHECK(reports[2].theorem_id == "theorem3");
  CHECK(reports[3].theorem_id == "corollary1");
  CHECK(reports[4].theorem_id == "proposition1");
  CHECK(reports[5].theorem_id == "theorem4_heavy_ball");
  CHECK(reports[6].theorem_id == "curvature_estimator");
  for (const auto& r : reports) CHECK(r.trials == 10);
}
