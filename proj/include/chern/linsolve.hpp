#pragma once

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include <cmath>
#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "chern/grid.hpp"
#include "chern/stencil.hpp"

namespace chern {

enum class LinearMethod { direct, cg };

inline LinearMethod linear_method_from_string(const std::string& name) {
  if (name == "direct") return LinearMethod::direct;
  if (name == "cg") return LinearMethod::cg;
  throw ConfigurationError("unknown linear method '" + name + "'");
}

/// (−c Δ_h + λ) v = g at interior nodes, v = boundary data on boundary nodes.
struct LinearProblem {
  DiscreteField c;
  double lambda = 0.0;
  DiscreteField g;
  DiscreteField boundary;
};

/// The Dirichlet operator −cΔ_h + λ on one grid, factored once and reused for
/// many right-hand sides.
///
/// Radial grids use a tridiagonal (Thomas) elimination. Tensor grids solve the
/// symmetric scaled system (−Δ_h + λ/c) v = g/c with a sparse LDLᵀ factorization,
/// or with Jacobi-preconditioned conjugate gradients when requested.
class ShiftedOperator {
 public:
  static constexpr int krylov_cap = 10000;

  ShiftedOperator(DiscreteField c, double lambda, LinearMethod method = LinearMethod::direct)
      : c_(std::move(c)), lambda_(lambda), method_(method) {
    const Grid& g = c_.grid();
    if (!(lambda_ >= 0.0) || !std::isfinite(lambda_)) throw ConfigurationError("shift must satisfy λ >= 0");
    unknown_.assign(g.size(), npos);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (!g.interior(i)) continue;
      if (!(c_[i] > 0.0)) throw ConfigurationError("Chern coefficient must be positive at interior nodes");
      unknown_[i] = nodes_.size();
      nodes_.push_back(i);
    }
    assert_m_matrix();
    if (g.kind() == GridKind::radial && method_ == LinearMethod::direct) {
      factor_tridiagonal();
    } else {
      assemble_symmetric();
    }
  }

  const Grid& grid() const { return c_.grid(); }
  const DiscreteField& coefficient() const { return c_; }
  double lambda() const { return lambda_; }

  /// (−cΔ_h + λ)v at interior nodes; 0 elsewhere.
  DiscreteField apply(const DiscreteField& v) const {
    DiscreteField out(grid());
    for (std::size_t i : nodes_) out[i] = -c_[i] * laplacian_at(v, i) + lambda_ * v[i];
    return out;
  }

  double relative_residual(const DiscreteField& v, const DiscreteField& g) const {
    double res = 0.0;
    double gmax = 0.0;
    double vmax = 0.0;
    for (std::size_t i : nodes_) {
      res = std::max(res, std::abs(-c_[i] * laplacian_at(v, i) + lambda_ * v[i] - g[i]));
      gmax = std::max(gmax, std::abs(g[i]));
    }
    for (std::size_t i = 0; i < grid().size(); ++i) {
      if (grid().active(i)) vmax = std::max(vmax, std::abs(v[i]));
    }
    return res / (gmax + lambda_ * vmax + 1.0);
  }

  DiscreteField solve(const DiscreteField& g, const DiscreteField& boundary, double tol = 1e-10) const {
    DiscreteField v = raw_solve(g, boundary);
    double rel = relative_residual(v, g);
    for (int pass = 0; pass < 3 && rel > tol; ++pass) {
      // iterative refinement on the residual with homogeneous boundary data
      DiscreteField r(grid());
      for (std::size_t i : nodes_) r[i] = g[i] - (-c_[i] * laplacian_at(v, i) + lambda_ * v[i]);
      const DiscreteField e = raw_solve(r, DiscreteField(grid()));
      for (std::size_t i : nodes_) v[i] += e[i];
      rel = relative_residual(v, g);
    }
    if (!(rel <= tol)) {
      throw ConvergenceError("linear solve stalled at relative residual " + std::to_string(rel), rel);
    }
    return v;
  }

 private:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
  using SpMat = Eigen::SparseMatrix<double>;

  void assert_m_matrix() const {
    const Grid& g = grid();
    for (std::size_t i : nodes_) {
      double offsum = 0.0;
      bool ok = true;
      for_each_neighbor(g, i, [&](std::size_t nb, double w) {
        ok = ok && w >= 0.0 && g.active(nb);
        offsum += c_[i] * w;
      });
      const double diag = offsum + lambda_;
      if (!ok || diag - offsum < 0.0) {
        throw ConfigurationError("assembled operator is not an M-matrix at node " + std::to_string(i));
      }
    }
  }

  void factor_tridiagonal() {
    const std::size_t m = nodes_.size();
    lower_.assign(m, 0.0);
    diag_.assign(m, 0.0);
    upper_.assign(m, 0.0);
    for (std::size_t k = 0; k < m; ++k) {
      const std::size_t i = nodes_[k];
      const RadialWeights w = radial_weights(grid().dimension(), i, grid().spacing());
      lower_[k] = -c_[i] * w.minus;
      upper_[k] = -c_[i] * w.plus;
      diag_[k] = c_[i] * (w.minus + w.plus) + lambda_;
    }
    // forward elimination, stored for reuse
    modified_.assign(m, 0.0);
    modified_[0] = diag_[0];
    for (std::size_t k = 1; k < m; ++k) modified_[k] = diag_[k] - lower_[k] * upper_[k - 1] / modified_[k - 1];
  }

  void assemble_symmetric() {
    const Grid& g = grid();
    std::vector<Eigen::Triplet<double>> entries;
    entries.reserve(nodes_.size() * 5);
    weights_.assign(nodes_.size(), 1.0);
    for (std::size_t k = 0; k < nodes_.size(); ++k) {
      const std::size_t i = nodes_[k];
      const double W = symmetrizer(g, i);
      weights_[k] = W;
      double diag = W * lambda_ / c_[i];
      for_each_neighbor(g, i, [&](std::size_t nb, double w) {
        diag += W * w;
        if (unknown_[nb] != npos) entries.emplace_back(static_cast<int>(k), static_cast<int>(unknown_[nb]), -W * w);
      });
      entries.emplace_back(static_cast<int>(k), static_cast<int>(k), diag);
    }
    matrix_ = std::make_shared<SpMat>(static_cast<Eigen::Index>(nodes_.size()), static_cast<Eigen::Index>(nodes_.size()));
    matrix_->setFromTriplets(entries.begin(), entries.end());
    if (method_ == LinearMethod::direct) {
      ldlt_ = std::make_shared<Eigen::SimplicialLDLT<SpMat, Eigen::Lower, Eigen::AMDOrdering<int>>>(*matrix_);
      if (ldlt_->info() != Eigen::Success) throw ConvergenceError("sparse factorization failed", HUGE_VAL);
    }
  }

  DiscreteField raw_solve(const DiscreteField& g, const DiscreteField& boundary) const {
    const Grid& grd = grid();
    DiscreteField v(grd);
    for (std::size_t i = 0; i < grd.size(); ++i) {
      if (grd.boundary(i)) v[i] = boundary[i];
    }
    const std::size_t m = nodes_.size();
    if (m == 0) return v;
    if (!diag_.empty()) {
      std::vector<double> rhs(m);
      for (std::size_t k = 0; k < m; ++k) rhs[k] = g[nodes_[k]];
      // the last interior row couples to the boundary node
      rhs[m - 1] -= upper_[m - 1] * v[nodes_[m - 1] + 1];
      for (std::size_t k = 1; k < m; ++k) rhs[k] -= lower_[k] / modified_[k - 1] * rhs[k - 1];
      std::vector<double> x(m);
      x[m - 1] = rhs[m - 1] / modified_[m - 1];
      for (std::size_t k = m - 1; k-- > 0;) x[k] = (rhs[k] - upper_[k] * x[k + 1]) / modified_[k];
      for (std::size_t k = 0; k < m; ++k) v[nodes_[k]] = x[k];
      return v;
    }
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(m));
    for (std::size_t k = 0; k < m; ++k) {
      const std::size_t i = nodes_[k];
      const double W = weights_[k];
      double b = W * g[i] / c_[i];
      for_each_neighbor(grd, i, [&](std::size_t nb, double w) {
        if (unknown_[nb] == npos) b += W * w * v[nb];
      });
      rhs[static_cast<Eigen::Index>(k)] = b;
    }
    Eigen::VectorXd x;
    if (ldlt_) {
      x = ldlt_->solve(rhs);
    } else {
      Eigen::ConjugateGradient<SpMat, Eigen::Lower | Eigen::Upper, Eigen::DiagonalPreconditioner<double>> cg;
      cg.setMaxIterations(krylov_cap);
      cg.setTolerance(1e-14);
      cg.compute(*matrix_);
      x = cg.solve(rhs);
      if (cg.info() != Eigen::Success && cg.iterations() >= krylov_cap) {
        throw ConvergenceError("conjugate gradients hit the 10^4 step cap", cg.error());
      }
    }
    for (std::size_t k = 0; k < m; ++k) v[nodes_[k]] = x[static_cast<Eigen::Index>(k)];
    return v;
  }

  DiscreteField c_;
  double lambda_;
  LinearMethod method_;
  std::vector<std::size_t> unknown_;
  std::vector<std::size_t> nodes_;
  std::vector<double> lower_, diag_, upper_, modified_;
  std::vector<double> weights_;
  std::shared_ptr<SpMat> matrix_;
  std::shared_ptr<Eigen::SimplicialLDLT<SpMat, Eigen::Lower, Eigen::AMDOrdering<int>>> ldlt_;
};

inline DiscreteField solve_dirichlet(const LinearProblem& p, double tol = 1e-10,
                                     LinearMethod method = LinearMethod::direct) {
  return ShiftedOperator(p.c, p.lambda, method).solve(p.g, p.boundary, tol);
}

struct MaxPrincipleReport {
  bool hypotheses_hold = false;
  bool passed = true;
  double min_value = 0.0;
  std::vector<std::size_t> violations;
};

/// With g ≥ 0, boundary data ≥ 0 and λ ≥ 0 the solution must be nonnegative.
inline MaxPrincipleReport weak_max_principle_check(const LinearProblem& p, const DiscreteField& v,
                                                   double tol = 1e-10) {
  MaxPrincipleReport report;
  const Grid& g = v.grid();
  bool hyp = p.lambda >= 0.0;
  double scale = 1.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g.interior(i)) {
      hyp = hyp && p.g[i] >= 0.0;
      scale = std::max(scale, std::abs(p.g[i]));
    }
    if (g.boundary(i)) {
      hyp = hyp && p.boundary[i] >= 0.0;
      scale = std::max(scale, std::abs(p.boundary[i]));
    }
  }
  report.hypotheses_hold = hyp;
  report.min_value = min_value(v);
  if (!hyp) return report;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g.active(i) && v[i] < -tol * scale) report.violations.push_back(i);
  }
  report.passed = report.violations.empty();
  return report;
}

}  // namespace chern
