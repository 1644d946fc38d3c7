#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "chern/geometry.hpp"
#include "chern/linsolve.hpp"

namespace chern {

struct BarrierReport {
  std::string kind;  // "sub" or "super"
  double min_margin = 0.0;
  double scale = 1.0;
  std::vector<std::size_t> violations;
  std::vector<std::pair<std::string, double>> params;

  bool passed() const { return violations.empty(); }
  double scaled_margin() const { return min_margin / scale; }
};

/// m(x) = −Δ^Ch u + S − K e^{(2/n)u} at interior nodes (0 elsewhere).
inline DiscreteField barrier_defect(const DiscreteField& u, const CurvatureProblem& p) {
  const Grid& g = u.grid();
  const DiscreteField c = coefficient_field(p.metric, g);
  const DiscreteField S = p.S.sample(g);
  const DiscreteField K = p.K.sample(g);
  DiscreteField m(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g.interior(i)) m[i] = -c[i] * laplacian_at(u, i) + S[i] - K[i] * std::exp(2.0 / p.n() * u[i]);
  }
  return m;
}

namespace detail {

inline BarrierReport verify_barrier(const DiscreteField& u, const CurvatureProblem& p, bool super) {
  const Grid& g = u.grid();
  const DiscreteField m = barrier_defect(u, p);
  const DiscreteField S = p.S.sample(g);
  const DiscreteField K = p.K.sample(g);
  BarrierReport r;
  r.kind = super ? "super" : "sub";
  double sup_s = 0.0, sup_ke = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!g.interior(i)) continue;
    sup_s = std::max(sup_s, std::abs(S[i]));
    sup_ke = std::max(sup_ke, std::abs(K[i] * std::exp(2.0 / p.n() * u[i])));
  }
  r.scale = 1.0 + sup_s + sup_ke;
  r.min_margin = HUGE_VAL;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!g.interior(i)) continue;
    const double margin = super ? m[i] : -m[i];
    r.min_margin = std::min(r.min_margin, margin);
    if (margin < -1e-9 * r.scale) r.violations.push_back(i);
  }
  return r;
}

inline double ceil_to_grid(double r, double h) { return std::ceil(r / h - 1e-9) * h; }
inline double floor_to_grid(double r, double h) { return std::floor(r / h + 1e-9) * h; }

}  // namespace detail

/// Supersolution: m ≥ −1e−9·scale at every interior node.
inline BarrierReport verify_supersolution(const DiscreteField& u, const CurvatureProblem& p) {
  return detail::verify_barrier(u, p, true);
}

/// Subsolution: m ≤ 1e−9·scale at every interior node.
inline BarrierReport verify_subsolution(const DiscreteField& u, const CurvatureProblem& p) {
  return detail::verify_barrier(u, p, false);
}

inline double require_bound(const std::optional<double>& v, const char* name) {
  if (!v) throw ConfigurationError(std::string("problem bound '") + name + "' is required");
  if (!(*v > 0.0)) throw ConfigurationError(std::string("problem bound '") + name + "' must be positive");
  return *v;
}

/// Checks declared bounds at every node: −a² ≤ K ≤ −b² outside D, −C₁ ≤ S ≤ −C₂.
inline void check_declared_bounds(const CurvatureProblem& p, const Grid& g, bool require_nonpositive_K = true) {
  const DiscreteField S = p.S.sample(g);
  const DiscreteField K = p.K.sample(g);
  const Bounds& b = p.bounds;
  const double tol = 1e-12;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!g.active(i)) continue;
    const double r = g.radius_at(i);
    if (require_nonpositive_K && K[i] > tol) throw ConfigurationError("K must be <= 0 at r = " + std::to_string(r));
    if (r >= p.bounds.D) {
      if (b.a && K[i] < -(*b.a) * (*b.a) - tol) throw ConfigurationError("K < -a^2 outside D at r = " + std::to_string(r));
      if (b.b && K[i] > -(*b.b) * (*b.b) + tol) throw ConfigurationError("K > -b^2 outside D at r = " + std::to_string(r));
    }
    if (b.C1 && S[i] < -*b.C1 - tol) throw ConfigurationError("S < -C1 at r = " + std::to_string(r));
    if (b.C2 && S[i] > -*b.C2 + tol) throw ConfigurationError("S > -C2 at r = " + std::to_string(r));
  }
}

struct LowerConstant {
  double value = 0.0;
  double a_tilde_sq = 0.0;
};

/// u₋ = (n/2) log(C₂/ã²) with ã² = max(a², −min_D K).
inline LowerConstant lower_constant(const CurvatureProblem& p, const Grid& g) {
  const double a = require_bound(p.bounds.a, "a");
  const double C2 = require_bound(p.bounds.C2, "C2");
  // sampling throws on non-finite K, so K is bounded below on the grid
  const DiscreteField K = p.K.sample(g);
  double min_D = HUGE_VAL;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g.active(i) && g.radius_at(i) < p.bounds.D) min_D = std::min(min_D, K[i]);
  }
  LowerConstant out;
  out.a_tilde_sq = std::max(a * a, std::isfinite(min_D) ? -min_D : 0.0);
  out.value = p.n() / 2.0 * std::log(C2 / out.a_tilde_sq);
  return out;
}

/// Solves −Δ^Ch u = source on the ball of radius D₂ with u = 0 on its boundary,
/// extended by zero to the whole grid.
inline DiscreteField bump_profile(const ConformalMetric& metric, const Grid& g, double D2, double source) {
  if (!(D2 < g.radius())) throw ConfigurationError("bump domain must lie strictly inside the grid");
  const Grid inner = g.restricted(D2);
  const DiscreteField c = coefficient_field(metric, inner);
  const DiscreteField u1 = ShiftedOperator(c, 0.0).solve(DiscreteField(inner, source), DiscreteField(inner));
  DiscreteField u0 = extend(u1, g, 0.0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g.active(i) && u0[i] < -1e-12 * std::max(1.0, std::abs(source))) {
      throw BarrierConstructionError("bump profile is negative at node " + std::to_string(i));
    }
  }
  return u0;
}

inline double smoothstep_cutoff(double r, double B1, double B2) {
  if (r <= B1) return 1.0;
  if (r >= B2) return 0.0;
  const double s = (r - B1) / (B2 - B1);
  return 1.0 - s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
}

/// Radial quintic cutoff: 1 on r ≤ B₁, 0 on r ≥ B₂.
inline DiscreteField cutoff_function(double B1, double B2, const Grid& g) {
  if (!(B1 + 2.0 * g.spacing() < B2)) throw ConfigurationError("cutoff radii are closer than 2h");
  return DiscreteField::sample(g, [=](Point p) { return smoothstep_cutoff(p.norm(), B1, B2); });
}

enum class UpperVariant { theorem, sign_changing };

struct UpperBump {
  DiscreteField u_plus;
  DiscreteField u0;
  DiscreteField phi;
  double C = 0.0;
  double C_prime = 0.0;
  double a_tilde_sq = 0.0;
  double D1_radius = 0.0;
  double B1 = 0.0, B2 = 0.0, D2 = 0.0;
  double u1_max_B1 = 0.0;
  BarrierReport report;
};

/// C′ = max over supp φ of |u₁Δ^Ch φ + 2⟨∇φ, ∇u₁⟩|, the pairing carrying the Chern coefficient.
inline double bump_cross_term(const ConformalMetric& metric, const DiscreteField& u0, const DiscreteField& phi) {
  const Grid& g = u0.grid();
  const DiscreteField c = coefficient_field(metric, g);
  double best = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!g.interior(i)) continue;
    const double lap_phi = c[i] * laplacian_at(phi, i);
    const double pair = c[i] * gradient_at(phi, i).dot(gradient_at(u0, i));
    if (phi[i] > 0.0 || lap_phi != 0.0) best = std::max(best, std::abs(u0[i] * lap_phi + 2.0 * pair));
  }
  return best;
}

/// u₊ = φu₀ + C from ingredients on a common grid. The sign-changing variant
/// drops the factor 2 inside the log and adds 1 instead of 0.1. With `strict`
/// unset a failed supersolution check is only recorded in the report.
inline UpperBump upper_bump(const CurvatureProblem& p, DiscreteField u0, DiscreteField phi, double a_tilde_sq,
                            UpperVariant variant, bool strict = true) {
  const double b = require_bound(p.bounds.b, "b");
  const double C1 = require_bound(p.bounds.C1, "C1");
  const double C2 = require_bound(p.bounds.C2, "C2");
  const double n = p.n();
  UpperBump out;
  out.C_prime = bump_cross_term(p.metric, u0, phi);
  out.a_tilde_sq = a_tilde_sq;
  const double lower_part = n / 2.0 * std::log(C2 / a_tilde_sq);
  if (variant == UpperVariant::theorem) {
    out.C = std::max(n / 2.0 * std::log(2.0 * (out.C_prime + C1) / (b * b)), lower_part) + 0.1;
  } else {
    out.C = std::max(n / 2.0 * std::log((out.C_prime + C1) / (b * b)), lower_part) + 1.0;
  }
  out.u_plus = combine(phi, u0, [&](double f, double u) { return f * u + out.C; });
  out.u0 = std::move(u0);
  out.phi = std::move(phi);
  out.report = verify_supersolution(out.u_plus, p);
  out.report.params = {{"C", out.C}, {"C_prime", out.C_prime}, {"a_tilde_sq", a_tilde_sq}};
  if (strict && !out.report.passed()) {
    throw BarrierConstructionError("upper bump fails the supersolution check (min margin " +
                                   std::to_string(out.report.min_margin) + ")");
  }
  return out;
}

/// Full construction: detects D₁ = {K ≥ −b²/2}, places B₁, B₂ and D₂ on the grid,
/// solves the bump problem and assembles u₊.
inline UpperBump construct_upper_bump(const CurvatureProblem& p, const Grid& g,
                                      UpperVariant variant = UpperVariant::theorem, bool strict = true) {
  const double h = g.spacing();
  const double b = require_bound(p.bounds.b, "b");
  const double C1 = require_bound(p.bounds.C1, "C1");
  const double RD = p.bounds.D;
  if (!(RD > 0.0)) throw ConfigurationError("upper bump needs a marked region D with positive radius");
  const LowerConstant lc = lower_constant(p, g);
  const DiscreteField K = p.K.sample(g);
  double rD1 = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g.active(i) && K[i] >= -0.5 * b * b) rD1 = std::max(rD1, g.radius_at(i));
  }
  double B1 = 0.0, B2 = 0.0, D2 = 0.0;
  if (variant == UpperVariant::theorem) {
    if (rD1 >= RD) throw ConfigurationError("the set {K >= -b^2/2} reaches the boundary of D");
    B1 = detail::ceil_to_grid(rD1, h) + h;
    B2 = detail::floor_to_grid(RD - h, h);
    D2 = RD + 4.0 * h;
  } else {
    B1 = detail::ceil_to_grid(RD, h) + h;
    B2 = std::max(detail::ceil_to_grid(2.0 * B1, h), B1 + 4.0 * h);
    D2 = B2 + 4.0 * h;
  }
  if (B2 - B1 < 4.0 * h * (1.0 - 1e-9)) {
    throw ConfigurationError("cutoff annulus between D1 and D is narrower than 4h; refine the grid");
  }
  const double source = variant == UpperVariant::theorem ? C1 : 2.0 * C1;
  DiscreteField u0 = bump_profile(p.metric, g, D2, source);
  DiscreteField phi = cutoff_function(B1, B2, g);
  double u1_max = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g.active(i) && g.radius_at(i) <= B1 + 1e-12) u1_max = std::max(u1_max, u0[i]);
  }
  UpperBump out = upper_bump(p, std::move(u0), std::move(phi), lc.a_tilde_sq, variant, strict);
  out.D1_radius = rD1;
  out.B1 = B1;
  out.B2 = B2;
  out.D2 = D2;
  out.u1_max_B1 = u1_max;
  out.report.params.insert(out.report.params.end(),
                           {{"B1", B1}, {"B2", B2}, {"D2", D2}, {"D1_radius", rD1}, {"u1_max_B1", u1_max}});
  return out;
}

/// ε = C₁ e^{−(2/n)(max_{B₁} u₁ + C)}.
inline double epsilon_threshold(double C1, double u1_max, double C, int n) {
  return C1 * std::exp(-2.0 / n * (u1_max + C));
}

/// b_k = (n/2) log(−min S + 1) + 0.1 over the nodes of Ω_k.
inline double per_domain_upper_constant(const DiscreteField& S, int n) {
  return n / 2.0 * std::log(std::max(0.0, -min_value(S)) + 1.0) + 0.1;
}

struct AuxiliaryPhi {
  DiscreteField phi;
  double C = 0.0;
  double delta = 0.0;        // achieved Δ^Ch φ on D
  double delta_error = 0.0;  // max |Δ^Ch φ − δ| on D
  double min_laplacian = 0.0;
  double support_radius = 0.0;
  double D1 = 0.0, D2 = 0.0;
};

/// Compactly supported φ with Δ^Ch φ = δ on D and Δ^Ch φ ≥ −b²/2 everywhere:
/// solve Δ^Ch φ₀ = δ₁ on D₂ with φ₀ = δ₂ on ∂D₂, cut φ₀ off between D₁ and D₂,
/// then rescale by b²/(2C) with C = −min Δ^Ch φ₁.
inline AuxiliaryPhi auxiliary_phi(const ConformalMetric& metric, const Grid& g, double D, double b,
                                  double delta1 = 1.0, double delta2 = 1.0) {
  if (!(delta1 > 0 && delta2 > 0 && b > 0)) throw ConfigurationError("auxiliary_phi needs positive δ₁, δ₂, b");
  const double h = g.spacing();
  const DiscreteField c = coefficient_field(metric, g);
  double width = std::max(8.0 * h, D);
  for (int attempt = 0; attempt < 2; ++attempt, width *= 2.0) {
    AuxiliaryPhi out;
    out.D1 = detail::ceil_to_grid(D, h) + 2.0 * h;
    out.D2 = detail::ceil_to_grid(out.D1 + width, h);
    if (!(out.D2 < g.radius())) throw ConfigurationError("auxiliary_phi: D2 does not fit inside the grid");
    const Grid inner = g.restricted(out.D2);
    const DiscreteField ci = restrict(c, out.D2);
    const DiscreteField phi0 = ShiftedOperator(ci, 0.0).solve(DiscreteField(inner, -delta1), DiscreteField(inner, delta2));
    const double blend_end = out.D2 - 2.0 * h;
    const DiscreteField chi = cutoff_function(out.D1, blend_end, g);
    DiscreteField phi1 = extend(phi0, g, 0.0);
    phi1 = combine(phi1, chi, [](double a, double w) { return a * w; });
    double min_lap = HUGE_VAL;
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (g.interior(i)) min_lap = std::min(min_lap, c[i] * laplacian_at(phi1, i));
    }
    out.C = std::max(-min_lap, 1e-3 * delta1);
    const double s = b * b / (2.0 * out.C);
    out.phi = s * phi1;
    out.delta = s * delta1;
    out.min_laplacian = HUGE_VAL;
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (!g.interior(i)) continue;
      const double lap = c[i] * laplacian_at(out.phi, i);
      out.min_laplacian = std::min(out.min_laplacian, lap);
      if (g.radius_at(i) < D) out.delta_error = std::max(out.delta_error, std::abs(lap - out.delta));
      if (out.phi[i] != 0.0) out.support_radius = std::max(out.support_radius, g.radius_at(i));
    }
    if (out.min_laplacian >= -0.5 * b * b - 1e-9 && out.delta_error <= 1e-8 && out.support_radius < out.D2) return out;
  }
  throw BarrierConstructionError("auxiliary_phi violates its lower Laplacian bound after widening the blend");
}

struct LocalBound {
  double C_loc = 0.0;
  double bound = 0.0;
};

/// C_loc = sup_{supp φ}(−φ²S − nφΔ^Ch φ + n⟨∇φ,∇φ⟩); any u with
/// −Δ^Ch u + S ≤ −e^{(2/n)u} has sup u ≤ (n/2) log C_loc where φ ≡ 1.
inline LocalBound local_upper_bound(const CurvatureProblem& p, const DiscreteField& phi) {
  const Grid& g = phi.grid();
  const DiscreteField c = coefficient_field(p.metric, g);
  const DiscreteField S = p.S.sample(g);
  const double n = p.n();
  LocalBound out;
  out.C_loc = -HUGE_VAL;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!g.interior(i) || phi[i] <= 0.0) continue;
    const double val = -phi[i] * phi[i] * S[i] - n * phi[i] * c[i] * laplacian_at(phi, i) +
                       n * c[i] * gradient_at(phi, i).norm_sq();
    out.C_loc = std::max(out.C_loc, val);
  }
  if (!(out.C_loc > 0.0)) throw ConfigurationError("local bound is degenerate (C_loc <= 0)");
  out.bound = n / 2.0 * std::log(out.C_loc);
  return out;
}

}  // namespace chern
