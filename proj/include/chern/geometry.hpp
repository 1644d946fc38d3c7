#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>

#include "chern/grid.hpp"
#include "chern/stencil.hpp"

namespace chern {

/// ω = e^{(2/n)φ} ω₀ over the flat base on the open ball of radius `domain_radius`.
struct ConformalMetric {
  int n = 1;
  SpatialFunction factor{0.0};
  double domain_radius = std::numeric_limits<double>::infinity();
  std::string name = "flat";
};

enum class ModelKind { flat, poincare_disk, ball_n2 };

inline ModelKind model_kind_from_string(const std::string& name) {
  if (name == "flat") return ModelKind::flat;
  if (name == "poincare_disk") return ModelKind::poincare_disk;
  if (name == "ball_n2") return ModelKind::ball_n2;
  throw ConfigurationError("unknown model '" + name + "'");
}

inline ConformalMetric model_metric(ModelKind kind, int n) {
  if (n < 1) throw ConfigurationError("complex dimension must be >= 1");
  switch (kind) {
    case ModelKind::flat:
      return {n, SpatialFunction(0.0), std::numeric_limits<double>::infinity(), "flat"};
    case ModelKind::poincare_disk:
      if (n != 1) throw ConfigurationError("poincare_disk requires n = 1");
      return {1, SpatialFunction::radial([](double r) { return std::log(2.0 / (1.0 - r * r)); }), 1.0,
              "poincare_disk"};
    case ModelKind::ball_n2:
      if (n != 2) throw ConfigurationError("ball_n2 requires n = 2");
      return {2, SpatialFunction::radial([](double r) { return 2.0 * std::log(2.0 / (1.0 - r * r)); }), 1.0,
              "ball_n2"};
  }
  throw ConfigurationError("unknown model");
}

/// Analytic Chern scalar curvature of a catalogue model.
inline SpatialFunction model_scalar(ModelKind kind, int n) {
  (void)model_metric(kind, n);
  switch (kind) {
    case ModelKind::flat: return SpatialFunction(0.0);
    case ModelKind::poincare_disk: return SpatialFunction(-2.0);
    case ModelKind::ball_n2: return SpatialFunction::radial([](double r) { return 4.0 * r * r - 8.0; });
  }
  return SpatialFunction(0.0);
}

/// Optional hypothesis constants: −a² ≤ K ≤ −b² outside the ball of radius D,
/// −C₁ ≤ S ≤ −C₂.
struct Bounds {
  std::optional<double> a, b, C1, C2;
  double D = 0.0;
};

struct CurvatureProblem {
  ConformalMetric metric;
  SpatialFunction S{0.0};
  SpatialFunction K{0.0};
  Bounds bounds;

  int n() const { return metric.n; }
};

inline void require_in_domain(const ConformalMetric& metric, const Point& p) {
  if (!(p.norm() < metric.domain_radius)) {
    throw DomainError("point at r = " + std::to_string(p.norm()) + " lies outside the " + metric.name +
                      " domain");
  }
}

/// c(x) = 2 e^{−(2/n)φ(x)}, so that Δ^Ch_ω = c·Δ_eucl.
inline double chern_laplacian_coefficient(const ConformalMetric& metric, const Point& p) {
  require_in_domain(metric, p);
  return 2.0 * std::exp(-2.0 / metric.n * metric.factor(p));
}

inline DiscreteField coefficient_field(const ConformalMetric& metric, const Grid& grid) {
  if (grid.dimension() != metric.n) throw ConfigurationError("grid and metric dimensions differ");
  DiscreteField phi = metric.factor.sample(grid);
  DiscreteField out(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!grid.active(i)) continue;
    require_in_domain(metric, grid.position(i));
    out[i] = 2.0 * std::exp(-2.0 / metric.n * phi[i]);
  }
  out.require_finite();
  return out;
}

/// Δ^Ch_ω f at interior nodes, 0 elsewhere.
inline DiscreteField chern_laplacian(const DiscreteField& f, const DiscreteField& c) {
  DiscreteField lap = laplacian_apply(f);
  return combine(c, lap, [](double ci, double li) { return ci * li; });
}

/// Chern pairing of gradients: c·∇_e a·∇_e b (so that Δ^Ch(ab) = aΔ^Ch b + bΔ^Ch a + 2·pairing).
inline DiscreteField chern_gradient_pairing(const DiscreteField& a, const DiscreteField& b, const DiscreteField& c) {
  return combine(c, gradient_dot(a, b), [](double ci, double gi) { return ci * gi; });
}

/// Riemannian |∇f|²_g for g = e^{(2/n)φ}g_eucl: (c/2)|∇_e f|².
inline DiscreteField riemannian_gradient_sq(const DiscreteField& f, const DiscreteField& c) {
  return combine(c, gradient_sq_norm(f), [](double ci, double gi) { return 0.5 * ci * gi; });
}

/// S^Ch(e^{(2/n)u}ω) = e^{−(2/n)u}(−Δ^Ch_ω u + S) at interior nodes.
/// Non-interior nodes carry e^{−(2/n)u}S so the field stays finite.
inline DiscreteField forward_chern_scalar(const DiscreteField& u, const CurvatureProblem& problem) {
  const Grid& g = u.grid();
  const bool coarse = g.kind() == GridKind::radial ? g.size() < 3 : g.side() < 3;
  if (coarse) throw ConfigurationError("grid too coarse for the stencil");
  const int n = problem.n();
  const DiscreteField c = coefficient_field(problem.metric, g);
  const DiscreteField S = problem.S.sample(g);
  DiscreteField out(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!g.active(i)) continue;
    const double lap = g.interior(i) ? laplacian_at(u, i) : 0.0;
    out[i] = std::exp(-2.0 / n * u[i]) * (-c[i] * lap + S[i]);
  }
  out.require_finite();
  return out;
}

/// The problem with base metric e^{(2/n)a}ω and base scalar forward_chern_scalar(a).
inline CurvatureProblem conformal_change(const CurvatureProblem& problem, const DiscreteField& a) {
  CurvatureProblem out = problem;
  const Grid& g = a.grid();
  out.metric.factor = SpatialFunction(problem.metric.factor.sample(g) + a);
  out.metric.name = problem.metric.name + "+conformal";
  out.S = SpatialFunction(forward_chern_scalar(a, problem));
  return out;
}

// ---------------------------------------------------------------------------
// Laplacian comparison functions

struct ComparisonParams {
  double C1 = 1.0;
  double C2 = 1.0;
  double alpha = 2.0;
  double beta = 1.0;
  int n = 1;

  void validate() const {
    if (!(C1 > 0 && C2 > 0 && alpha > 0 && beta > 0) || n < 1) {
      throw ConfigurationError("comparison parameters must be positive");
    }
  }
};

inline double comparison_G(double t, const ComparisonParams& p) {
  if (t < 0) throw DomainError("comparison_G needs t >= 0");
  return p.C1 / (4.0 * p.n) * std::pow(1.0 + t, p.alpha) + p.n * p.C2 * p.C2 / 2.0 * std::pow(1.0 + t, 2.0 * p.beta);
}

/// ∫₀ᵗ √G(s) ds by composite Simpson with panel doubling; Richardson-corrected
/// once the doubling change drops below `tol`.
inline double comparison_integral(double t, const ComparisonParams& p, double tol = 1e-8) {
  if (t < 0) throw DomainError("comparison integral needs t >= 0");
  if (t == 0) return 0.0;
  auto f = [&](double s) { return std::sqrt(comparison_G(s, p)); };
  auto simpson = [&](std::size_t panels) {
    const double h = t / static_cast<double>(panels);
    double sum = f(0.0) + f(t);
    for (std::size_t k = 1; k < panels; ++k) sum += f(h * static_cast<double>(k)) * (k % 2 == 1 ? 4.0 : 2.0);
    return sum * h / 3.0;
  };
  std::size_t panels = 64;
  double coarse = simpson(panels);
  for (int round = 0; round < 20; ++round) {
    panels *= 2;
    const double fine = simpson(panels);
    if (std::abs(fine - coarse) <= tol) return fine + (fine - coarse) / 15.0;
    coarse = fine;
  }
  return coarse;
}

inline double comparison_h(double t, const ComparisonParams& p) {
  p.validate();
  return std::expm1(comparison_integral(t, p)) / std::sqrt(comparison_G(0.0, p));
}

inline double comparison_h_prime(double t, const ComparisonParams& p) {
  p.validate();
  return std::sqrt(comparison_G(t, p)) * std::exp(comparison_integral(t, p)) / std::sqrt(comparison_G(0.0, p));
}

/// 4n h'(r)/h(r); +inf at the pole r = 0.
inline double laplacian_comparison_bound(double r, const ComparisonParams& p) {
  p.validate();
  if (r < 0) throw DomainError("comparison bound needs r >= 0");
  if (r == 0) return std::numeric_limits<double>::infinity();
  const double I = comparison_integral(r, p);
  return 4.0 * p.n * std::sqrt(comparison_G(r, p)) / -std::expm1(-I);
}

/// Δ^Ch r for the flat model: 2(2n − 1)/r.
inline double flat_chern_laplacian_of_distance(double r, int n) { return 2.0 * (2.0 * n - 1.0) / r; }

}  // namespace chern
