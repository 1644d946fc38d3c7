#include <gtest/gtest.h>

#include <cmath>

#include "chern/diagnostics.hpp"

using namespace chern;

TEST(OmoriYau, InteriorMaximumIsExact) {
  const Grid g = Grid::tensor2d(0.05, 1.0);
  const DiscreteField f = DiscreteField::sample(g, [](Point p) { return -p.norm() * p.norm(); });
  const OmoriYauSequence s = omori_yau_points({f}, model_metric(ModelKind::flat, 1), {1e-3}, {0.0});
  ASSERT_EQ(s.points.size(), 1u);
  EXPECT_EQ(s.points[0].node, g.center());
  EXPECT_EQ(s.points[0].gradient_norm, 0.0);
  EXPECT_NEAR(s.points[0].chern_laplacian, -8.0, 1e-9);
  EXPECT_FALSE(s.points[0].fallback);
}

TEST(OmoriYau, DistanceFunctionFlagsGradient) {
  const Grid g = Grid::tensor2d(0.05, 1.0);
  const DiscreteField f = DiscreteField::sample(g, [](Point p) { return p.norm(); });
  const OmoriYauSequence s = omori_yau_points({f}, model_metric(ModelKind::flat, 1), {0.1}, {1.0});
  ASSERT_EQ(s.points.size(), 1u);
  EXPECT_TRUE(s.points[0].fallback);
  EXPECT_FALSE(s.points[0].gradient_ok);
  EXPECT_NEAR(s.points[0].gradient_norm, 1.0, 0.05);
}

TEST(OmoriYau, BoundedFunctionOnGrowingBalls) {
  std::vector<DiscreteField> family;
  for (double R : {2.0, 4.0, 8.0, 16.0}) {
    const Grid g = Grid::radial(1, 0.02, R);
    family.push_back(DiscreteField::sample(g, [](Point p) { return -1.0 / (1.0 + p.norm() * p.norm()); }));
  }
  const std::vector<double> eta{0.5, 0.1, 0.02, 0.005};
  const std::vector<double> eps{0.5, 0.1, 0.02, 0.005};
  const OmoriYauSequence s = omori_yau_points(family, model_metric(ModelKind::flat, 1), eta, eps);
  ASSERT_EQ(s.points.size(), 4u);
  EXPECT_TRUE(s.values_nondecreasing());
  EXPECT_GT(s.points.back().value, -0.01);
  EXPECT_TRUE(s.points.back().gradient_ok);
  EXPECT_TRUE(s.points.back().laplacian_ok);
  EXPECT_THROW(omori_yau_points(family, model_metric(ModelKind::flat, 1), {0.1}, {0.1}), ConfigurationError);
}

TEST(Nonexistence, CenterValuesMatchClosedForm) {
  // exact radial solution of −2Δu = −e^{2u}, u(R) = 0 evaluated at the origin
  const std::vector<double> oracle{-0.6931471805599453, -1.2155894658615483, -1.8211416127919847,
                                   -2.4701949322890505};
  SolveOptions opt;
  opt.max_iterations = 20000;
  const DivergenceTrace t = nonexistence_experiment(1, -1.0, 0.0, {4, 8, 16, 32}, 0.02, opt);
  ASSERT_EQ(t.rows.size(), 4u);
  for (std::size_t k = 0; k < 4; ++k) { EXPECT_NEAR(t.rows[k].u_at_0, oracle[k], 1e-3); }
  EXPECT_TRUE(std::isnan(t.rows[0].decrement));
  EXPECT_TRUE(t.strictly_decreasing);
  EXPECT_TRUE(t.non_flattening);
  EXPECT_EQ(t.verdict, "nonexistence-consistent");
}

TEST(Nonexistence, NegativeScalarCurvatureGivesExistence) {
  SolveOptions opt;
  opt.max_iterations = 20000;
  const DivergenceTrace t = nonexistence_experiment(1, -1.0, -1.0, {4, 8}, 0.05, opt);
  for (const auto& u : t.solutions) { EXPECT_LT(max_abs(u), 1e-9); }
  EXPECT_EQ(t.verdict, "existence");
  EXPECT_THROW(nonexistence_experiment(1, -1.0, -2.0, {4}, 0.05, opt), ConfigurationError);
  EXPECT_THROW(nonexistence_experiment(1, -1.0, 0.0, {8, 4}, 0.05, opt), ConfigurationError);
}

TEST(Certificate, IdentitiesHoldOnDirichletSolution) {
  SolveOptions opt;
  opt.max_iterations = 20000;
  double prev_grad = HUGE_VAL, prev_lap = HUGE_VAL;
  for (double h : {0.04, 0.02}) {
    const DivergenceTrace t = nonexistence_experiment(1, -1.0, 0.0, {8}, h, opt);
    Bounds b;
    b.b = 1.0;
    b.D = 1.0;
    const CurvatureProblem p{model_metric(ModelKind::flat, 1), 0.0, -1.0, b};
    const CertificateReport r = contradiction_certificate(t.solutions[0], p);
    EXPECT_TRUE(r.flagged);
    EXPECT_EQ(r.L.size(), 10u);
    EXPECT_GT(r.min_L, 0.0);
    EXPECT_DOUBLE_EQ(r.sup_K_outside, -1.0);
    EXPECT_LT(r.gradient_identity_error, 0.01);
    EXPECT_LT(r.gradient_identity_error, prev_grad);
    EXPECT_LT(r.laplacian_identity_error, prev_lap);
    prev_grad = r.gradient_identity_error;
    prev_lap = r.laplacian_identity_error;
  }
  const Grid g = Grid::radial(1, 0.1, 1.0);
  EXPECT_THROW(contradiction_certificate(DiscreteField(g), CurvatureProblem{}, 0.6), ConfigurationError);
}

TEST(Comparison, HoldsAcrossParameters) {
  for (int n : {1, 2}) {
    for (double C : {0.5, 4.0}) {
      const ComparisonParams p{C, C, 2.0, 1.0, n};
      const ComparisonReport r = comparison_check(p, log_spaced(1e-3, 10.0, 20));
      EXPECT_TRUE(r.passed) << "n=" << n << " C=" << C;
      EXPECT_EQ(r.h0, 0.0);
      EXPECT_NEAR(r.h_prime0, 1.0, 1e-4);
      EXPECT_EQ(r.rows.size(), 20u);
    }
  }
}

TEST(Uniqueness, DifferentBarriersSameLimit) {
  const Grid fine = Grid::radial(1, 0.02, 3.0);
  const DomainExhaustion ex(fine, {1.0, 2.0, 3.0});
  ExhaustionOptions opt;
  opt.probe_radius = 0.5;
  opt.stop_when_stable = false;
  opt.boundary = BoundaryPolicy::prescribed(0.5 * std::log(2.0));
  opt.solve.tol = 1e-12;
  opt.solve.max_iterations = 5000;
  const CurvatureProblem p{model_metric(ModelKind::flat, 1), -2.0, -1.0, {}};
  const UniquenessResult r =
      uniqueness_experiment(p, ex, fixed_barriers({DiscreteField(fine, 0.0), DiscreteField(fine, 1.0)}),
                            fixed_barriers({DiscreteField(fine, -1.0), DiscreteField(fine, 2.0)}), opt);
  EXPECT_LT(r.sup_difference, 1e-8);
}
