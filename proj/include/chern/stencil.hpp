#pragma once

#include <cmath>
#include <cstddef>

#include "chern/grid.hpp"

namespace chern {

namespace detail {

// (i + 1/2)^d - (i - 1/2)^d, summed over odd binomial terms so small i keeps full precision.
inline double shell_difference(double i, int d) {
  double sum = 0.0;
  double binom = 1.0;
  for (int k = 0; k <= d; ++k) {
    if (k > 0) binom = binom * static_cast<double>(d - k + 1) / static_cast<double>(k);
    if (k % 2 == 1) sum += binom * std::pow(i, d - k) * std::pow(0.5, k);
  }
  return 2.0 * sum;
}

}  // namespace detail

/// Off-diagonal weights of the discrete Euclidean Laplacian at a radial node:
/// (Δ_h f)_i = minus·(f_{i-1} − f_i) + plus·(f_{i+1} − f_i).
///
/// Conservative form of f'' + (d−1)/r f' with d = 2n: fluxes through the shells
/// at r = (i ± 1/2)h divided by the discrete shell volume. Reduces to the
/// centered 3-point formula for n = 1 and to 2d (f_1 − f_0)/h² at the origin.
struct RadialWeights {
  double minus = 0.0;
  double plus = 0.0;
};

inline RadialWeights radial_weights(int n, std::size_t node, double h) {
  const int d = 2 * n;
  const double h2 = h * h;
  if (node == 0) return {0.0, 2.0 * d / h2};
  const double i = static_cast<double>(node);
  const double volume = detail::shell_difference(i, d) / d;
  return {std::pow(i - 0.5, d - 1) / (volume * h2), std::pow(i + 0.5, d - 1) / (volume * h2)};
}

/// Row scaling W_i making W·(−Δ_h) symmetric on a radial grid (1 on tensor grids).
inline double symmetrizer(const Grid& grid, std::size_t node) {
  if (grid.kind() == GridKind::tensor2d) return 1.0;
  const int d = grid.real_dimension();
  if (node == 0) return std::pow(0.5, d) / d;
  return detail::shell_difference(static_cast<double>(node), d) / d;
}

/// Calls fn(neighbor, weight) for every stencil neighbour of an interior node,
/// with (Δ_h f)_node = Σ weight·(f_neighbor − f_node).
template <class Fn>
void for_each_neighbor(const Grid& grid, std::size_t node, Fn&& fn) {
  const double h = grid.spacing();
  if (grid.kind() == GridKind::radial) {
    const RadialWeights w = radial_weights(grid.dimension(), node, h);
    if (node > 0) fn(node - 1, w.minus);
    fn(node + 1, w.plus);
    return;
  }
  const double w = 1.0 / (h * h);
  const std::size_t s = grid.side();
  fn(node - 1, w);
  fn(node + 1, w);
  fn(node - s, w);
  fn(node + s, w);
}

inline double laplacian_at(const DiscreteField& f, std::size_t node) {
  double acc = 0.0;
  const double center = f[node];
  for_each_neighbor(f.grid(), node, [&](std::size_t nb, double w) { acc += w * (f[nb] - center); });
  return acc;
}

/// Discrete Euclidean Laplacian at interior nodes; other nodes hold 0.
inline DiscreteField laplacian_apply(const DiscreteField& f) {
  const Grid& g = f.grid();
  DiscreteField out(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g.interior(i)) out[i] = laplacian_at(f, i);
  }
  return out;
}

struct Gradient {
  double x = 0.0;
  double y = 0.0;
  double dot(const Gradient& o) const { return x * o.x + y * o.y; }
  double norm_sq() const { return dot(*this); }
};

/// Centered-difference gradient at an interior node. Radial grids return (f', 0)
/// with f'(0) = 0 by symmetry.
inline Gradient gradient_at(const DiscreteField& f, std::size_t node) {
  const Grid& g = f.grid();
  const double h = g.spacing();
  if (g.kind() == GridKind::radial) {
    if (node == 0) return {};
    return {(f[node + 1] - f[node - 1]) / (2.0 * h), 0.0};
  }
  const std::size_t s = g.side();
  return {(f[node + 1] - f[node - 1]) / (2.0 * h), (f[node + s] - f[node - s]) / (2.0 * h)};
}

inline DiscreteField gradient_sq_norm(const DiscreteField& f) {
  const Grid& g = f.grid();
  DiscreteField out(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g.interior(i)) out[i] = gradient_at(f, i).norm_sq();
  }
  return out;
}

/// Euclidean dot product of the stencil gradients of two fields at interior nodes.
inline DiscreteField gradient_dot(const DiscreteField& a, const DiscreteField& b) {
  const Grid& g = a.grid();
  if (!(g == b.grid())) throw ConfigurationError("gradient_dot: fields live on different grids");
  DiscreteField out(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g.interior(i)) out[i] = gradient_at(a, i).dot(gradient_at(b, i));
  }
  return out;
}

}  // namespace chern
