#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "chern/barriers.hpp"
#include "chern/geometry.hpp"
#include "chern/monotone.hpp"

namespace chern {

// ---------------------------------------------------------------------------
// Omori–Yau points

struct OmoriYauPoint {
  std::size_t level = 0;
  std::size_t node = 0;
  double radius = 0.0;
  double value = 0.0;
  double gradient_norm = 0.0;  // Riemannian length of ∇f
  double chern_laplacian = 0.0;
  bool gradient_ok = false;
  bool laplacian_ok = false;
  bool fallback = false;
};

struct OmoriYauSequence {
  std::vector<OmoriYauPoint> points;

  bool values_nondecreasing() const {
    for (std::size_t k = 1; k < points.size(); ++k) {
      if (points[k].value < points[k - 1].value) return false;
    }
    return true;
  }
};

/// For each sampled level m: among the top 1% of interior f values, the node of
/// largest f with |∇f| ≤ η_m; otherwise the interior argmax, flagged as fallback.
inline OmoriYauSequence omori_yau_points(const std::vector<DiscreteField>& family, const ConformalMetric& metric,
                                         const std::vector<double>& eta, const std::vector<double>& eps) {
  if (eta.size() < family.size() || eps.size() < family.size()) {
    throw ConfigurationError("omori_yau_points needs one (eta, eps) pair per level");
  }
  OmoriYauSequence seq;
  for (std::size_t m = 0; m < family.size(); ++m) {
    const DiscreteField& f = family[m];
    const Grid& g = f.grid();
    const DiscreteField c = coefficient_field(metric, g);
    std::vector<std::size_t> nodes;
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (g.interior(i)) nodes.push_back(i);
    }
    if (nodes.empty()) continue;
    std::sort(nodes.begin(), nodes.end(), [&](std::size_t a, std::size_t b) {
      return f[a] != f[b] ? f[a] > f[b] : a < b;
    });
    const std::size_t top = std::max<std::size_t>(1, nodes.size() / 100);
    auto grad_norm = [&](std::size_t i) { return std::sqrt(0.5 * c[i] * gradient_at(f, i).norm_sq()); };
    OmoriYauPoint pt;
    pt.level = m;
    pt.fallback = true;
    pt.node = nodes.front();
    for (std::size_t k = 0; k < top; ++k) {
      if (grad_norm(nodes[k]) <= eta[m]) {
        pt.node = nodes[k];
        pt.fallback = false;
        break;
      }
    }
    pt.radius = g.radius_at(pt.node);
    pt.value = f[pt.node];
    pt.gradient_norm = grad_norm(pt.node);
    pt.chern_laplacian = c[pt.node] * laplacian_at(f, pt.node);
    pt.gradient_ok = pt.gradient_norm <= eta[m];
    pt.laplacian_ok = pt.chern_laplacian <= eps[m];
    seq.points.push_back(pt);
  }
  return seq;
}

// ---------------------------------------------------------------------------
// Uniqueness

struct UniquenessResult {
  double sup_difference = 0.0;
  ExhaustionResult first;
  ExhaustionResult second;
};

/// Two exhaustion runs from different barrier pairs; sup |u₁ − u₂| on the probe ball.
inline UniquenessResult uniqueness_experiment(const CurvatureProblem& p, const DomainExhaustion& ex,
                                              const BarrierProvider& first, const BarrierProvider& second,
                                              const ExhaustionOptions& opt) {
  UniquenessResult out;
  out.first = exhaustion_solve(p, ex, first, opt);
  out.second = exhaustion_solve(p, ex, second, opt);
  if (!(out.first.probe.grid() == out.second.probe.grid())) {
    throw ConfigurationError("uniqueness runs stopped on different levels; disable early stopping");
  }
  out.sup_difference = sup_difference(out.first.probe, out.second.probe);
  return out;
}

// ---------------------------------------------------------------------------
// Nonexistence

struct DivergenceRow {
  double R = 0.0;
  double u_at_0 = 0.0;
  double decrement = std::numeric_limits<double>::quiet_NaN();
  int iterations = 0;
};

struct DivergenceTrace {
  std::vector<DivergenceRow> rows;
  std::vector<DiscreteField> solutions;
  IterationTrace trace;
  bool strictly_decreasing = false;
  bool non_flattening = false;
  std::string verdict;  // "nonexistence-consistent", "existence", "inconclusive"
};

/// Dirichlet problems −Δ^Ch u + S = K e^{(2/n)u}, u = 0 on ∂B_R, over the flat
/// radial model for each R, recording u_R(0).
///
/// u₊ = 0 is a supersolution when S ≥ K. The subsolution is
/// u₋ = q(r² − R²) − 1 with q = max(0, max(S − K e^{−2/n}))/(8n).
inline DivergenceTrace nonexistence_experiment(int n, const SpatialFunction& K, const SpatialFunction& S,
                                               const std::vector<double>& radii, double h,
                                               const SolveOptions& opt) {
  if (radii.empty()) throw ConfigurationError("nonexistence experiment needs radii");
  for (std::size_t k = 1; k < radii.size(); ++k) {
    if (!(radii[k] > radii[k - 1])) throw ConfigurationError("radii must be strictly increasing");
  }
  DivergenceTrace out;
  CurvatureProblem p{model_metric(ModelKind::flat, n), S, K, {}};
  for (std::size_t k = 0; k < radii.size(); ++k) {
    const double R = radii[k];
    const Grid g = Grid::radial(n, h, R);
    const DiscreteField Kf = K.sample(g);
    const DiscreteField Sf = S.sample(g);
    double q = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (Sf[i] < Kf[i]) throw ConfigurationError("zero is not a supersolution: S < K somewhere");
      q = std::max(q, Sf[i] - Kf[i] * std::exp(-2.0 / n));
    }
    q /= 8.0 * n;
    const double Rg = g.radius();
    Barriers b{DiscreteField::sample(g, [&](Point x) { return q * (x.norm() * x.norm() - Rg * Rg) - 1.0; }),
               DiscreteField(g, 0.0)};
    DomainSolution sol = solve_on_domain(p, b, BoundaryPolicy::prescribed(0.0), opt, static_cast<int>(k));
    DivergenceRow row;
    row.R = R;
    row.u_at_0 = sol.u[0];
    row.iterations = sol.trace.levels.back().iterations;
    if (k > 0) row.decrement = out.rows.back().u_at_0 - row.u_at_0;
    out.rows.push_back(row);
    out.trace.append(sol.trace);
    out.solutions.push_back(std::move(sol.u));
  }
  out.strictly_decreasing = out.rows.size() >= 2;
  std::vector<double> dec;
  for (std::size_t k = 1; k < out.rows.size(); ++k) {
    if (!(out.rows[k].decrement > 0.0)) out.strictly_decreasing = false;
    dec.push_back(out.rows[k].decrement);
  }
  if (!dec.empty()) {
    std::vector<double> sorted = dec;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t m = sorted.size();
    const double median = m % 2 ? sorted[m / 2] : 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]);
    out.non_flattening = median > 0.0 && std::all_of(dec.begin(), dec.end(), [&](double d) { return d >= 0.5 * median; });
  }
  double spread = 0.0;
  for (const auto& r : out.rows) spread = std::max(spread, std::abs(r.u_at_0));
  if (spread <= 1e-8) {
    out.verdict = "existence";
  } else if (out.strictly_decreasing && out.non_flattening) {
    out.verdict = "nonexistence-consistent";
  } else {
    out.verdict = "inconclusive";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Contradiction certificate

struct CertificateReport {
  double a = 0.25;
  double gradient_identity_error = 0.0;   // max |∇φ + a∇v/(v+1)^{a+1}|
  double laplacian_identity_error = 0.0;  // max |Δφ − (−aΔv/(v+1)^{a+1} + a(a+1)|∇v|²/(v+1)^{a+2})|
  double sup_K_outside = 0.0;
  std::vector<std::size_t> nodes;
  std::vector<double> L;
  std::vector<double> laplacian_phi;
  double min_L = 0.0;
  bool flagged = false;
};

/// Quantities of the nonexistence argument for v = e^{(2/n)u}, φ = (v + 1)^{−a}.
inline CertificateReport contradiction_certificate(const DiscreteField& u, const CurvatureProblem& p, double a = 0.25) {
  if (!(a > 0.0 && a < 0.5)) throw ConfigurationError("certificate exponent must lie in (0, 1/2)");
  const Grid& g = u.grid();
  const int n = p.n();
  const DiscreteField c = coefficient_field(p.metric, g);
  const DiscreteField K = p.K.sample(g);
  const DiscreteField v = u.map([n](double x) { return std::exp(2.0 / n * x); });
  const DiscreteField phi = v.map([a](double x) { return std::pow(x + 1.0, -a); });
  CertificateReport r;
  r.a = a;
  r.sup_K_outside = -HUGE_VAL;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g.active(i) && g.radius_at(i) >= p.bounds.D) r.sup_K_outside = std::max(r.sup_K_outside, K[i]);
  }
  std::vector<std::size_t> outside;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!g.interior(i)) continue;
    const double w = v[i] + 1.0;
    const Gradient gp = gradient_at(phi, i);
    const Gradient gv = gradient_at(v, i);
    const double fx = -a * gv.x / std::pow(w, a + 1.0);
    const double fy = -a * gv.y / std::pow(w, a + 1.0);
    r.gradient_identity_error = std::max(r.gradient_identity_error, std::hypot(gp.x - fx, gp.y - fy));
    const double lap_phi = c[i] * laplacian_at(phi, i);
    const double rhs = -a * c[i] * laplacian_at(v, i) / std::pow(w, a + 1.0) +
                       a * (a + 1.0) * c[i] * gv.norm_sq() / std::pow(w, a + 2.0);
    r.laplacian_identity_error = std::max(r.laplacian_identity_error, std::abs(lap_phi - rhs));
    if (g.radius_at(i) >= p.bounds.D) outside.push_back(i);
  }
  std::sort(outside.begin(), outside.end(), [&](std::size_t x, std::size_t y) {
    return v[x] != v[y] ? v[x] > v[y] : x < y;
  });
  if (outside.size() > 10) outside.resize(10);
  r.min_L = HUGE_VAL;
  for (std::size_t i : outside) {
    const double L = -(2.0 * a / n) * r.sup_K_outside * v[i] * v[i] / std::pow(v[i] + 1.0, 2.0 * a + 1.0);
    r.nodes.push_back(i);
    r.L.push_back(L);
    r.laplacian_phi.push_back(c[i] * laplacian_at(phi, i));
    r.min_L = std::min(r.min_L, L);
  }
  r.flagged = !outside.empty() && r.min_L > 0.0;
  return r;
}

// ---------------------------------------------------------------------------
// Laplacian comparison

struct ComparisonRow {
  double r = 0.0;
  double flat = 0.0;
  double bound = 0.0;
  bool dominated = false;
};

struct ComparisonReport {
  std::vector<ComparisonRow> rows;
  double h0 = 0.0;
  double h_prime0 = 0.0;
  double worst_ode_defect = 0.0;   // min over t of (h'' − G h)/max(1, G h)
  double worst_phi_increment = 0.0;  // min over t of ΔΦ/max(1, |Φ|)
  bool passed = false;
};

inline std::vector<double> log_spaced(double lo, double hi, std::size_t count) {
  std::vector<double> out(count);
  for (std::size_t k = 0; k < count; ++k) {
    out[k] = lo * std::pow(hi / lo, count == 1 ? 0.0 : static_cast<double>(k) / static_cast<double>(count - 1));
  }
  return out;
}

/// Tabulates flat Δ^Ch r = 2(2n−1)/r against 4n h'/h, and checks h(0), h'(0),
/// h'' ≥ G h and monotonicity of Φ = g h' − g' h with g = t^{(2n−1)/(2n)}.
inline ComparisonReport comparison_check(const ComparisonParams& p, const std::vector<double>& radii,
                                         double t_max = 2.0, double dt = 1e-3) {
  p.validate();
  ComparisonReport rep;
  bool ok = true;
  for (double r : radii) {
    ComparisonRow row{r, flat_chern_laplacian_of_distance(r, p.n), laplacian_comparison_bound(r, p), false};
    row.dominated = row.flat <= row.bound;
    ok = ok && row.dominated;
    rep.rows.push_back(row);
  }
  rep.h0 = comparison_h(0.0, p);
  rep.h_prime0 = (comparison_h(1e-6, p) - rep.h0) / 1e-6;
  ok = ok && rep.h0 == 0.0 && std::abs(rep.h_prime0 - 1.0) <= 1e-4;

  const auto steps = static_cast<std::size_t>(std::llround(t_max / dt));
  std::vector<double> h(steps + 1), hp(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k) {
    const double t = dt * static_cast<double>(k);
    h[k] = comparison_h(t, p);
    hp[k] = comparison_h_prime(t, p);
  }
  rep.worst_ode_defect = HUGE_VAL;
  for (std::size_t k = 1; k < steps; ++k) {
    const double t = dt * static_cast<double>(k);
    const double h2 = (h[k + 1] - 2.0 * h[k] + h[k - 1]) / (dt * dt);
    const double Gh = comparison_G(t, p) * h[k];
    rep.worst_ode_defect = std::min(rep.worst_ode_defect, (h2 - Gh) / std::max(1.0, std::abs(Gh)));
  }
  const double ex = (2.0 * p.n - 1.0) / (2.0 * p.n);
  auto Phi = [&](std::size_t k) {
    const double t = dt * static_cast<double>(k);
    return std::pow(t, ex) * hp[k] - ex * std::pow(t, ex - 1.0) * h[k];
  };
  rep.worst_phi_increment = HUGE_VAL;
  for (std::size_t k = 1; k < steps; ++k) {
    const double d = Phi(k + 1) - Phi(k);
    rep.worst_phi_increment = std::min(rep.worst_phi_increment, d / std::max(1.0, std::abs(Phi(k))));
  }
  ok = ok && rep.worst_ode_defect >= -1e-6 && rep.worst_phi_increment >= -1e-8;
  rep.passed = ok;
  return rep;
}

}  // namespace chern
