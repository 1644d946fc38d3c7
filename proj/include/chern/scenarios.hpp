#pragma once

// Problem builders and end-to-end pipelines shared by the CLI and the
// acceptance runner.

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "chern/barriers.hpp"
#include "chern/diagnostics.hpp"
#include "chern/monotone.hpp"

namespace chern {

inline double poincare_profile(double r) { return std::log(2.0 / (1.0 - r * r)); }
inline double ball_profile(double r) { return 2.0 * std::log(2.0 / (1.0 - r * r)); }

/// base + height·(1 − (r/ρ)²)² on r < ρ, base elsewhere.
inline SpatialFunction bump_curvature(double base, double height, double rho) {
  return SpatialFunction::radial([=](double r) {
    if (r >= rho) return base;
    const double s = 1.0 - (r / rho) * (r / rho);
    return base + height * s * s;
  });
}

/// −1 + (1 + κ)q(r) with q ≡ 1 on r ≤ ρ/2 and q ≡ 0 on r ≥ ρ.
inline SpatialFunction plateau_curvature(double kappa, double rho) {
  return SpatialFunction::radial([=](double r) { return -1.0 + (1.0 + kappa) * smoothstep_cutoff(r, 0.5 * rho, rho); });
}

inline Bounds make_bounds(double a, double b, double C1, double C2, double D) {
  Bounds out;
  out.a = a;
  out.b = b;
  out.C1 = C1;
  out.C2 = C2;
  out.D = D;
  return out;
}

/// Flat disk with K ≡ −2: the solution is the Poincaré factor log(2/(1−r²)).
inline CurvatureProblem poincare_recovery_problem() { return {model_metric(ModelKind::flat, 1), 0.0, -2.0, {}}; }

/// Flat ℂ² with K = 4r² − 8: the solution is 2 log(2/(1−r²)).
inline CurvatureProblem ball_recovery_problem() {
  return {model_metric(ModelKind::flat, 2), 0.0, SpatialFunction::radial([](double r) { return 4.0 * r * r - 8.0; }),
          {}};
}

/// S ≡ −2, K = −4 + 3(1 − (r/0.3)²)² inside r < 0.3, −4 outside.
inline CurvatureProblem bump_test_problem(int n) {
  return {model_metric(ModelKind::flat, n), -2.0, bump_curvature(-4.0, 3.0, 0.3), make_bounds(2, 2, 2, 2, 0.3)};
}

/// Poincaré disk (S ≡ −2) with K = −1 + 0.9(1 − (r/0.3)²)².
inline CurvatureProblem disk_bump_problem() {
  return {model_metric(ModelKind::poincare_disk, 1), -2.0, bump_curvature(-1.0, 0.9, 0.3), make_bounds(1, 1, 2, 2, 0.3)};
}

// ---------------------------------------------------------------------------

struct RecoveryRun {
  DomainSolution solution;
  DiscreteField exact;
  double sup_error = 0.0;
  BarrierReport lower_report;
  BarrierReport upper_report;
};

/// Solves with Dirichlet data from `exact` between u₋ = exact − offset and the
/// constant u₊ = max of exact over the boundary nodes.
inline RecoveryRun recover_exact(const CurvatureProblem& p, const Grid& g, const SpatialFunction& exact,
                                 const SolveOptions& opt = {}, double offset = 0.1) {
  RecoveryRun out;
  out.exact = exact.sample(g);
  double top = -HUGE_VAL;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g.boundary(i)) top = std::max(top, out.exact[i]);
  }
  const Barriers b{out.exact.map([offset](double v) { return v - offset; }), DiscreteField(g, top)};
  out.lower_report = verify_subsolution(b.lower, p);
  out.upper_report = verify_supersolution(b.upper, p);
  if (!out.lower_report.passed() || !out.upper_report.passed()) {
    throw BarrierConstructionError("recovery barriers fail their checks");
  }
  out.solution = solve_on_domain(p, b, BoundaryPolicy::prescribed(exact), opt);
  out.sup_error = sup_difference(out.solution.u, out.exact);
  return out;
}

// ---------------------------------------------------------------------------

struct BarrierPair {
  LowerConstant lower;
  UpperBump upper;
  BarrierReport lower_report;
  Barriers barriers;
};

/// Constant lower barrier and bump upper barrier on one grid, both verified.
inline BarrierPair build_barriers(const CurvatureProblem& p, const Grid& g, UpperVariant variant = UpperVariant::theorem) {
  BarrierPair out;
  out.lower = lower_constant(p, g);
  const DiscreteField lo(g, out.lower.value);
  out.lower_report = verify_subsolution(lo, p);
  out.lower_report.params = {{"value", out.lower.value}, {"a_tilde_sq", out.lower.a_tilde_sq}};
  if (!out.lower_report.passed()) {
    throw BarrierConstructionError("lower constant fails the subsolution check (min margin " +
                                   std::to_string(out.lower_report.min_margin) + ")");
  }
  out.upper = construct_upper_bump(p, g, variant);
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g.active(i) && out.upper.u_plus[i] < out.lower.value) {
      throw BarrierConstructionError("upper bump lies below the lower constant");
    }
  }
  out.barriers = {lo, out.upper.u_plus};
  return out;
}

struct BarrierExhaustionRun {
  BarrierPair pair;
  ExhaustionResult result;
};

inline BarrierExhaustionRun barrier_exhaustion(const CurvatureProblem& p, const DomainExhaustion& ex,
                                               const ExhaustionOptions& opt,
                                               UpperVariant variant = UpperVariant::theorem) {
  BarrierExhaustionRun out;
  out.pair = build_barriers(p, ex.finest(), variant);
  out.result = exhaustion_solve(p, ex, fixed_barriers(out.pair.barriers), opt);
  return out;
}

/// The constructed pair against the pair widened by ±1; both share the
/// nodewise midpoint on every boundary.
inline UniquenessResult widened_uniqueness(const CurvatureProblem& p, const DomainExhaustion& ex,
                                           const ExhaustionOptions& opt) {
  const BarrierPair pair = build_barriers(p, ex.finest());
  const Barriers wide{pair.barriers.lower.map([](double v) { return v - 1.0; }),
                      pair.barriers.upper.map([](double v) { return v + 1.0; })};
  ExhaustionOptions o = opt;
  o.boundary = BoundaryPolicy::midpoint();
  o.stop_when_stable = false;
  return uniqueness_experiment(p, ex, fixed_barriers(pair.barriers), fixed_barriers(wide), o);
}

// ---------------------------------------------------------------------------

struct UnboundedScalarRun {
  AuxiliaryPhi aux;
  CurvatureProblem changed;  // base e^{(2/n)φ}ω, scalar S₁, K ≡ −1
  double epsilon = 0.0;
  double max_S1 = 0.0;
  double lower = 0.0;
  std::vector<double> upper_constants;
  std::vector<BarrierReport> reports;
  ExhaustionResult result;
  LocalBound local;
  double region_radius = 0.0;
  std::vector<double> region_sup;  // sup over r ≤ region of each level whose domain holds the cutoff
  bool local_bound_holds = false;
};

/// Metric of Chern scalar curvature −1 when S ≤ 0 everywhere and S ≤ −b² outside D:
/// conformal change by the auxiliary φ, constant barriers per level, range
/// midpoint boundary data, and the cutoff bound on the ball of radius `region`.
inline UnboundedScalarRun unbounded_scalar_exhaustion(const CurvatureProblem& p, const DomainExhaustion& ex,
                                                      ExhaustionOptions opt, double region, double cutoff_outer) {
  const double b = require_bound(p.bounds.b, "b");
  const int n = p.n();
  const Grid& fine = ex.finest();
  UnboundedScalarRun out;
  out.aux = auxiliary_phi(p.metric, fine, p.bounds.D, b);
  CurvatureProblem base = p;
  base.K = -1.0;
  out.changed = conformal_change(base, out.aux.phi);
  const DiscreteField S1 = out.changed.S.sample(fine);
  out.max_S1 = max_value(S1);
  out.epsilon = std::exp(-2.0 / n * max_value(out.aux.phi)) * std::min(out.aux.delta, 0.5 * b * b);
  if (out.max_S1 > -out.epsilon * (1.0 - 1e-9)) {
    throw BarrierConstructionError("conformal change leaves S above -epsilon");
  }
  out.lower = n / 2.0 * std::log(out.epsilon) - 0.1;

  const BarrierProvider provider = [&](std::size_t, const Grid& g) {
    const double bk = per_domain_upper_constant(restrict(S1, g.radius()), n);
    out.upper_constants.push_back(bk);
    Barriers pair{DiscreteField(g, out.lower), DiscreteField(g, bk)};
    out.reports.push_back(verify_subsolution(pair.lower, out.changed));
    out.reports.push_back(verify_supersolution(pair.upper, out.changed));
    if (!out.reports.back().passed() || !out.reports[out.reports.size() - 2].passed()) {
      throw BarrierConstructionError("constant barriers fail on level radius " + std::to_string(g.radius()));
    }
    return pair;
  };
  opt.boundary = BoundaryPolicy::range_midpoint();
  out.result = exhaustion_solve(out.changed, ex, provider, opt);

  out.region_radius = region;
  out.local = local_upper_bound(out.changed, cutoff_function(region, cutoff_outer, fine));
  out.local_bound_holds = true;
  for (const DiscreteField& u : out.result.levels) {
    const Grid& g = u.grid();
    if (!(g.radius() > cutoff_outer + 2.0 * g.spacing())) continue;
    double sup = -HUGE_VAL;
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (g.active(i) && g.radius_at(i) <= region + 1e-12) sup = std::max(sup, u[i]);
    }
    out.region_sup.push_back(sup);
    out.local_bound_holds = out.local_bound_holds && sup <= out.local.bound + 1e-6;
  }
  if (out.region_sup.empty()) out.local_bound_holds = false;
  return out;
}

// ---------------------------------------------------------------------------

struct SignChangingRun {
  double epsilon = 0.0;
  double kappa = 0.0;
  UpperBump upper;
  LowerConstant lower;
  BarrierReport lower_report;
  bool barriers_verified = false;
  std::optional<ExhaustionResult> result;
  std::string failure;
};

/// K positive (= κ) on a small ball: ε comes from a K-independent bump
/// construction, then K = K_of(factor·ε) is checked against the same barriers
/// and solved by exhaustion when they verify.
inline SignChangingRun sign_changing_exhaustion(CurvatureProblem p, const std::function<SpatialFunction(double)>& K_of,
                                                double factor, const DomainExhaustion& ex,
                                                const ExhaustionOptions& opt) {
  const Grid& fine = ex.finest();
  const double C1 = require_bound(p.bounds.C1, "C1");
  SignChangingRun out;
  p.K = K_of(0.0);
  const UpperBump plan = construct_upper_bump(p, fine, UpperVariant::sign_changing, false);
  out.epsilon = epsilon_threshold(C1, plan.u1_max_B1, plan.C, p.n());
  out.kappa = factor * out.epsilon;
  p.K = K_of(out.kappa);
  out.upper = construct_upper_bump(p, fine, UpperVariant::sign_changing, false);
  out.lower = lower_constant(p, fine);
  const DiscreteField lo(fine, out.lower.value);
  out.lower_report = verify_subsolution(lo, p);
  if (std::abs(out.upper.C - plan.C) > 1e-12 * std::max(1.0, std::abs(plan.C))) {
    out.failure = "bump constant depends on the sign-changing amplitude";
    return out;
  }
  if (!out.upper.report.passed()) {
    out.failure = "upper bump fails the supersolution check (min margin " + std::to_string(out.upper.report.min_margin) + ")";
    return out;
  }
  if (!out.lower_report.passed()) {
    out.failure = "lower constant fails the subsolution check";
    return out;
  }
  if (min_value(out.upper.u_plus) < out.lower.value) {
    out.failure = "upper bump lies below the lower constant";
    return out;
  }
  out.barriers_verified = true;
  out.result = exhaustion_solve(p, ex, fixed_barriers({lo, out.upper.u_plus}), opt);
  return out;
}

}  // namespace chern
