#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "chern/geometry.hpp"
#include "chern/linsolve.hpp"

using namespace chern;

namespace {

LinearProblem flat_problem(const Grid& g, double lambda, double rhs, double boundary) {
  return {DiscreteField(g, 2.0), lambda, DiscreteField(g, rhs), DiscreteField(g, boundary)};
}

}  // namespace

TEST(Linsolve, ZeroDataGivesZero) {
  for (const Grid& g : {Grid::radial(2, 0.05, 1.0), Grid::tensor2d(0.05, 1.0)}) {
    const DiscreteField v = solve_dirichlet(flat_problem(g, 0.0, 0.0, 0.0));
    EXPECT_EQ(max_abs(v), 0.0);
  }
}

TEST(Linsolve, ShootingOracleAtOrigin) {
  // −2Δv + v = 1 on the unit disk, v = 0 on r = 1: v(0) = 1 − 1/I₀(1/√2)
  const double oracle = 0.11422975418332899;
  double prev = 0.0;
  for (double h : {0.02, 0.01, 0.005}) {
    const Grid g = Grid::radial(1, h, 1.0);
    const DiscreteField v = solve_dirichlet(flat_problem(g, 1.0, 1.0, 0.0));
    const double err = std::abs(v[0] - oracle);
    EXPECT_LT(err, 0.05 * h * h);
    if (prev > 0) { EXPECT_NEAR(prev / err, 4.0, 0.8); }
    prev = err;
  }
  const Grid t = Grid::tensor2d(0.01, 1.0);
  const DiscreteField vt = solve_dirichlet(flat_problem(t, 1.0, 1.0, 0.0));
  // staircase boundary costs one order on the tensor grid
  EXPECT_NEAR(vt[t.center()], oracle, 1e-3);
}

TEST(Linsolve, ManufacturedSolutionSecondOrder) {
  // v* = cos r, −2Δv* = 2(cos r + sin r / r) in 2D
  const auto exact = [](Point p) { return std::cos(p.norm()); };
  const auto rhs = [](Point p) {
    const double r = p.norm();
    return 2.0 * (std::cos(r) + (r > 0 ? std::sin(r) / r : 1.0));
  };
  for (GridKind kind : {GridKind::radial, GridKind::tensor2d}) {
    double prev = 0.0;
    for (double h : {0.04, 0.02, 0.01}) {
      const Grid g = kind == GridKind::radial ? Grid::radial(1, h, 1.0) : Grid::tensor2d(h, 1.0);
      LinearProblem p{DiscreteField(g, 2.0), 0.0, DiscreteField::sample(g, rhs), DiscreteField::sample(g, exact)};
      const DiscreteField v = solve_dirichlet(p);
      const double err = sup_difference(v, DiscreteField::sample(g, exact));
      if (prev > 0) { EXPECT_NEAR(prev / err, 4.0, 1.0); }
      prev = err;
    }
  }
}

TEST(Linsolve, ResidualMeetsTolerance) {
  const ConformalMetric m = model_metric(ModelKind::poincare_disk, 1);
  const DiscreteField c = coefficient_field(m, Grid::tensor2d(0.02, 0.95));
  const Grid g95 = c.grid();
  const DiscreteField rhs = DiscreteField::sample(g95, [](Point p) { return std::sin(3 * p.x) + p.y; });
  for (LinearMethod method : {LinearMethod::direct, LinearMethod::cg}) {
    const ShiftedOperator op(c, 3.0, method);
    const DiscreteField v = op.solve(rhs, DiscreteField(g95, 0.5), 1e-10);
    EXPECT_LE(op.relative_residual(v, rhs), 1e-10);
    for (std::size_t i = 0; i < g95.size(); ++i) {
      if (g95.boundary(i)) { EXPECT_EQ(v[i], 0.5); }
    }
  }
}

TEST(Linsolve, DirectAndKrylovAgree) {
  for (const Grid& g : {Grid::radial(3, 0.02, 1.0), Grid::tensor2d(0.03, 1.0)}) {
    const DiscreteField c = DiscreteField::sample(g, [](Point p) { return 1.0 + p.norm(); });
    const DiscreteField rhs = DiscreteField::sample(g, [](Point p) { return 1.0 - p.norm(); });
    const DiscreteField a = ShiftedOperator(c, 0.5, LinearMethod::direct).solve(rhs, DiscreteField(g, 1.0));
    const DiscreteField b = ShiftedOperator(c, 0.5, LinearMethod::cg).solve(rhs, DiscreteField(g, 1.0));
    EXPECT_LT(sup_difference(a, b), 1e-9);
  }
}

TEST(Linsolve, WeakMaximumPrinciple) {
  const Grid g = Grid::tensor2d(0.05, 1.0);
  const LinearProblem pos = flat_problem(g, 0.0, 1.0, 0.0);
  const MaxPrincipleReport r1 = weak_max_principle_check(pos, solve_dirichlet(pos));
  EXPECT_TRUE(r1.hypotheses_hold);
  EXPECT_TRUE(r1.passed);
  EXPECT_GE(r1.min_value, -1e-10);

  const LinearProblem harmonic = flat_problem(g, 0.0, 0.0, 1.0);
  const DiscreteField v = solve_dirichlet(harmonic);
  EXPECT_GE(min_value(v), 1 - 1e-10);
  EXPECT_LE(max_value(v), 1 + 1e-10);
}

TEST(Linsolve, ComparisonAndLinearity) {
  const Grid g = Grid::radial(2, 0.02, 1.0);
  const DiscreteField c = DiscreteField::sample(g, [](Point p) { return 2.0 / (1 + p.x * p.x); });
  const ShiftedOperator op(c, 1.5);
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  DiscreteField g1(g), g2(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    g2[i] = dist(rng) - 0.5;
    g1[i] = g2[i] + dist(rng);
  }
  const DiscreteField zero(g);
  const DiscreteField v1 = op.solve(g1, zero), v2 = op.solve(g2, zero);
  for (std::size_t i = 0; i < g.size(); ++i) { EXPECT_GE(v1[i], v2[i] - 1e-9); }
  const DiscreteField v12 = op.solve(g1 + g2, zero);
  EXPECT_LT(sup_difference(v12, v1 + v2), 1e-9);
}

TEST(Linsolve, RejectsNegativeShift) {
  const Grid g = Grid::radial(1, 0.05, 1.0);
  EXPECT_THROW(ShiftedOperator(DiscreteField(g, 2.0), -1.0), ConfigurationError);
  EXPECT_THROW(ShiftedOperator(DiscreteField(g, 0.0), 1.0), ConfigurationError);
}
