#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "chern/geometry.hpp"
#include "chern/linsolve.hpp"

namespace chern {

/// Ordered pair u₋ ≤ u₊ on one grid.
struct Barriers {
  DiscreteField lower;
  DiscreteField upper;
};

enum class BoundaryKind { nodewise_midpoint, range_midpoint, prescribed };

/// Dirichlet data on ∂Ω: the nodewise barrier midpoint (u₋ + u₊)/2, the
/// constant (min u₋ + max u₊)/2, or a prescribed function.
struct BoundaryPolicy {
  BoundaryKind kind = BoundaryKind::nodewise_midpoint;
  SpatialFunction values{0.0};

  static BoundaryPolicy midpoint() { return {}; }
  static BoundaryPolicy range_midpoint() { return {BoundaryKind::range_midpoint, 0.0}; }
  static BoundaryPolicy prescribed(SpatialFunction f) { return {BoundaryKind::prescribed, std::move(f)}; }
};

struct SolveOptions {
  double tol = 1e-10;
  int max_iterations = 500;
  double linear_tol = 1e-10;
  LinearMethod method = LinearMethod::direct;
  double barrier_slack = 1e-7;
};

struct IterationRecord {
  int level = 0;
  int iter = 0;
  double sup_delta = 0.0;
  double min_increment = 0.0;
  double residual = 0.0;
  double scaled_increment = 0.0;  // min_increment / max(1, ‖v^m‖∞)
};

struct LevelRecord {
  int level = 0;
  double radius = 0.0;
  int iterations = 0;
  double lambda = 0.0;
  double residual = 0.0;
  double residual_scale = 1.0;
  double sandwich_violation = 0.0;  // max over nodes of (u₋ − u)₊ and (u − u₊)₊
  double worst_scaled_increment = 0.0;
  double probe_difference = std::numeric_limits<double>::quiet_NaN();
};

struct IterationTrace {
  std::vector<IterationRecord> iterations;
  std::vector<LevelRecord> levels;
  double wall_seconds = 0.0;

  void append(const IterationTrace& other) {
    iterations.insert(iterations.end(), other.iterations.begin(), other.iterations.end());
    levels.insert(levels.end(), other.levels.begin(), other.levels.end());
    wall_seconds += other.wall_seconds;
  }

  double worst_scaled_increment() const {
    double w = HUGE_VAL;
    for (const auto& r : iterations) w = std::min(w, r.scaled_increment);
    return w;
  }
  double worst_sandwich_violation() const {
    double w = 0.0;
    for (const auto& l : levels) w = std::max(w, l.sandwich_violation);
    return w;
  }
};

/// λ = 1 + (2/n)·max(0, −min K)·e^{(2/n) max u₊}; makes K e^{(2/n)r} − k + λr
/// nondecreasing in r for r ≤ max u₊.
inline double monotonicity_shift(const DiscreteField& K, int n, double upper_max) {
  const double negative_part = std::max(0.0, -min_value(K));
  return 1.0 + 2.0 / n * negative_part * std::exp(2.0 / n * upper_max);
}

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double clamp(double v) const { return std::clamp(v, lo, hi); }
};

/// The equation Δ^Ch u + f(x, u) = 0 with f(x, r) = K e^{(2/n)r} − S on one grid.
struct Semilinear {
  int n = 1;
  DiscreteField c;
  DiscreteField S;
  DiscreteField K;

  Semilinear(const CurvatureProblem& p, const Grid& grid)
      : n(p.n()), c(coefficient_field(p.metric, grid)), S(p.S.sample(grid)), K(p.K.sample(grid)) {}

  double f(std::size_t i, double r) const { return K[i] * std::exp(2.0 / n * r) - S[i]; }

  /// ‖Δ^Ch u + f(x, u)‖∞ over interior nodes.
  double residual(const DiscreteField& u) const {
    double res = 0.0;
    const Grid& g = u.grid();
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (g.interior(i)) res = std::max(res, std::abs(c[i] * laplacian_at(u, i) + f(i, u[i])));
    }
    return res;
  }
};

/// f(x, clamp(v)) + λ·clamp(v): the truncated, shifted right-hand side.
inline DiscreteField truncated_rhs(const Semilinear& eq, double lambda, const DiscreteField& v, Interval I) {
  DiscreteField out(v.grid());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v.grid().active(i)) continue;
    const double r = I.clamp(v[i]);
    out[i] = eq.f(i, r) + lambda * r;
  }
  return out;
}

namespace detail {

// F(a) − F(b) for the truncated rhs F, without cancellation when a ≈ b.
inline DiscreteField truncated_rhs_increment(const Semilinear& eq, double lambda, const DiscreteField& a,
                                             const DiscreteField& b, Interval I) {
  DiscreteField out(a.grid());
  const double k = 2.0 / eq.n;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!a.grid().interior(i)) continue;
    const double ra = I.clamp(a[i]);
    const double rb = I.clamp(b[i]);
    out[i] = eq.K[i] * std::exp(k * rb) * std::expm1(k * (ra - rb)) + lambda * (ra - rb);
  }
  return out;
}

inline double sandwich_violation(const DiscreteField& u, const Barriers& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (!u.grid().active(i)) continue;
    worst = std::max({worst, b.lower[i] - u[i], u[i] - b.upper[i]});
  }
  return worst;
}

}  // namespace detail

inline DiscreteField boundary_values(const Barriers& b, const BoundaryPolicy& policy) {
  const Grid& g = b.lower.grid();
  DiscreteField out(g);
  const double range_mid = 0.5 * (min_value(b.lower) + max_value(b.upper));
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!g.boundary(i)) continue;
    switch (policy.kind) {
      case BoundaryKind::nodewise_midpoint: out[i] = 0.5 * (b.lower[i] + b.upper[i]); break;
      case BoundaryKind::range_midpoint: out[i] = range_mid; break;
      case BoundaryKind::prescribed: out[i] = policy.values(g.position(i)); break;
    }
  }
  return out;
}

struct DomainSolution {
  DiscreteField u;
  IterationTrace trace;
  double lambda = 1.0;
  double residual = 0.0;
};

/// Monotone iteration from u₋ on one domain:
///   (−Δ^Ch + λ) v^m = f(x, v^{m−1}) + λ v^{m−1}, v^m = boundary data on ∂Ω.
/// Steps m ≥ 2 solve for the increment v^m − v^{m−1} with zero boundary data.
inline DomainSolution solve_on_domain(const CurvatureProblem& problem, const Barriers& barriers,
                                      const BoundaryPolicy& policy = {}, const SolveOptions& opt = {},
                                      int level = 0) {
  const auto start = std::chrono::steady_clock::now();
  const Grid& g = barriers.lower.grid();
  if (!(g == barriers.upper.grid())) throw ConfigurationError("barriers live on different grids");
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g.active(i) && barriers.lower[i] > barriers.upper[i]) {
      throw ConfigurationError("barriers are not ordered at node " + std::to_string(i));
    }
  }
  const Semilinear eq(problem, g);
  const Interval I{min_value(barriers.lower), max_value(barriers.upper)};
  const double lambda = monotonicity_shift(eq.K, eq.n, I.hi);
  const double scale = std::max(1.0, lambda);
  const ShiftedOperator op(eq.c, lambda, opt.method);
  const DiscreteField bdry = boundary_values(barriers, policy);

  DomainSolution out;
  out.lambda = lambda;
  DiscreteField prev = barriers.lower;
  DiscreteField v = op.solve(truncated_rhs(eq, lambda, prev, I), bdry, opt.linear_tol);
  double best = HUGE_VAL;
  for (int m = 1;; ++m) {
    if (m > 1) {
      const DiscreteField delta =
          op.solve(detail::truncated_rhs_increment(eq, lambda, v, prev, I), DiscreteField(g), opt.linear_tol);
      prev = v;
      v = v + delta;
    }
    IterationRecord rec;
    rec.level = level;
    rec.iter = m;
    rec.sup_delta = sup_difference(v, prev);
    rec.min_increment = HUGE_VAL;
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (g.interior(i)) rec.min_increment = std::min(rec.min_increment, v[i] - prev[i]);
    }
    rec.scaled_increment = rec.min_increment / std::max(1.0, max_abs(v));
    rec.residual = eq.residual(v);
    out.trace.iterations.push_back(rec);
    best = std::min(best, rec.residual);

    const double violation = detail::sandwich_violation(v, barriers);
    if (violation > opt.barrier_slack) {
      throw MonotonicityError("iterate left the barrier sandwich by " + std::to_string(violation) + " at iteration " +
                                  std::to_string(m),
                              violation);
    }
    if (rec.sup_delta <= opt.tol && rec.residual <= 10.0 * opt.tol * scale) {
      LevelRecord lr;
      lr.level = level;
      lr.radius = g.radius();
      lr.iterations = m;
      lr.lambda = lambda;
      lr.residual = rec.residual;
      lr.residual_scale = scale;
      lr.sandwich_violation = violation;
      double worst = HUGE_VAL;
      for (const auto& r : out.trace.iterations) worst = std::min(worst, r.scaled_increment);
      lr.worst_scaled_increment = worst;
      out.trace.levels.push_back(lr);
      out.residual = rec.residual;
      break;
    }
    if (m >= opt.max_iterations) {
      throw ConvergenceError("monotone iteration hit the cap of " + std::to_string(opt.max_iterations) +
                                 " iterations (sup delta " + std::to_string(rec.sup_delta) + ")",
                             best);
    }
  }
  out.u = std::move(v);
  out.trace.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

/// Supplies the barrier pair for exhaustion level k on its grid.
using BarrierProvider = std::function<Barriers(std::size_t level, const Grid& grid)>;

/// Barriers given once on the finest grid, restricted to each level.
inline BarrierProvider fixed_barriers(Barriers finest) {
  return [b = std::move(finest)](std::size_t, const Grid& grid) {
    return Barriers{restrict(b.lower, grid.radius()), restrict(b.upper, grid.radius())};
  };
}

struct ExhaustionOptions {
  double probe_radius = 0.0;
  double probe_tol = 1e-6;
  bool stop_when_stable = true;
  BoundaryPolicy boundary = BoundaryPolicy::midpoint();
  SolveOptions solve;
};

struct ExhaustionResult {
  DiscreteField solution;  // last level, full domain
  DiscreteField probe;     // last level restricted to the probe ball
  std::vector<DiscreteField> levels;
  std::vector<double> probe_differences;  // entry k compares level k with k−1 (NaN for k = 0)
  IterationTrace trace;
  bool stabilized = false;
  bool divergence = false;
};

/// Solves on Ω₁ ⊂⊂ Ω₂ ⊂⊂ … and tracks the solution on the probe ball.
inline ExhaustionResult exhaustion_solve(const CurvatureProblem& problem, const DomainExhaustion& exhaustion,
                                         const BarrierProvider& barriers, const ExhaustionOptions& opt) {
  if (!(opt.probe_radius < exhaustion.radius(0))) {
    throw ConfigurationError("probe radius must lie strictly inside the first exhaustion domain");
  }
  ExhaustionResult out;
  for (std::size_t k = 0; k < exhaustion.levels(); ++k) {
    const Grid grid = exhaustion.level(k);
    DomainSolution sol = solve_on_domain(problem, barriers(k, grid), opt.boundary, opt.solve, static_cast<int>(k));
    const DiscreteField probe = restrict(sol.u, opt.probe_radius);
    double diff = std::numeric_limits<double>::quiet_NaN();
    if (k > 0) diff = sup_difference(probe, out.probe);
    sol.trace.levels.back().probe_difference = diff;
    out.trace.append(sol.trace);
    out.probe_differences.push_back(diff);
    out.probe = probe;
    out.solution = sol.u;
    out.levels.push_back(std::move(sol.u));
    const std::size_t m = out.probe_differences.size();
    if (m >= 4) {
      const double a = out.probe_differences[m - 3], b = out.probe_differences[m - 2], c = out.probe_differences[m - 1];
      if (a <= b && b <= c) out.divergence = true;
    }
    if (k > 0 && diff <= opt.probe_tol) {
      out.stabilized = true;
      if (opt.stop_when_stable) break;
    }
  }
  return out;
}

}  // namespace chern
