#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "chern/grid.hpp"
#include "chern/stencil.hpp"

using namespace chern;

namespace {

double max_interior_error(const DiscreteField& approx, const DiscreteField& exact) {
  double err = 0.0;
  for (std::size_t i = 0; i < approx.size(); ++i) {
    if (approx.grid().interior(i)) err = std::max(err, std::abs(approx[i] - exact[i]));
  }
  return err;
}

}  // namespace

TEST(Grid, RadialLayout) {
  const Grid g = Grid::radial(2, 0.1, 1.0);
  EXPECT_EQ(g.size(), 11u);
  EXPECT_TRUE(g.interior(0));
  EXPECT_TRUE(g.boundary(10));
  EXPECT_DOUBLE_EQ(g.position(3).x, 0.30000000000000004);
  EXPECT_EQ(g.interior_count(), 10u);
}

TEST(Grid, TensorMask) {
  const Grid g = Grid::tensor2d(0.1, 1.0);
  std::size_t boundary = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g.interior(i)) {
      EXPECT_LT(g.radius_at(i), 1.0);
    }
    if (g.boundary(i)) {
      ++boundary;
      EXPECT_GE(g.radius_at(i), 1.0 * (1 - 1e-12));
      EXPECT_LT(g.radius_at(i), 1.0 + 0.1 * std::sqrt(2.0));
    }
  }
  EXPECT_GT(boundary, 20u);
  EXPECT_TRUE(g.interior(g.center()));
}

TEST(Grid, TooCoarseIsRejected) {
  EXPECT_THROW(Grid::radial(1, 0.2, 1.0), ConfigurationError);
  EXPECT_THROW(Grid::tensor2d(0.25, 1.0), ConfigurationError);
  EXPECT_THROW(Grid::radial(0, 0.01, 1.0), ConfigurationError);
}

TEST(Grid, RestrictRadial) {
  const Grid g = Grid::radial(1, 0.01, 1.0);
  DiscreteField f = DiscreteField::sample(g, [](Point p) { return p.x * p.x; });
  EXPECT_EQ(restrict(f, 1.0).grid(), g);
  const DiscreteField half = restrict(f, 0.5);
  EXPECT_EQ(half.size(), 51u);
  EXPECT_TRUE(half.grid().boundary(50));
  EXPECT_DOUBLE_EQ(half[50], f[50]);
  const DiscreteField twice = restrict(restrict(f, 0.7), 0.3);
  const DiscreteField once = restrict(f, 0.3);
  ASSERT_EQ(twice.size(), once.size());
  for (std::size_t i = 0; i < once.size(); ++i) { EXPECT_EQ(twice[i], once[i]); }
  EXPECT_THROW(restrict(f, 0.03), ConfigurationError);
  EXPECT_THROW(restrict(f, 1.5), ConfigurationError);
}

TEST(Grid, RestrictTensorKeepsPositions) {
  const Grid g = Grid::tensor2d(0.05, 1.0);
  const DiscreteField f = DiscreteField::sample(g, [](Point p) { return 3 * p.x - p.y; });
  const DiscreteField r = restrict(f, 0.5);
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (!r.grid().active(i)) continue;
    const Point p = r.grid().position(i);
    EXPECT_NEAR(r[i], 3 * p.x - p.y, 1e-14);
    EXPECT_LT(p.norm(), 0.5 + 0.1);
  }
  const DiscreteField twice = restrict(restrict(f, 0.8), 0.5);
  for (std::size_t i = 0; i < r.size(); ++i) { EXPECT_EQ(twice[i], r[i]); }
}

TEST(Grid, InterpolateAffineExact) {
  const Grid coarse = Grid::tensor2d(0.1, 1.0);
  const Grid fine = Grid::tensor2d(0.05, 0.9);
  const auto affine = [](Point p) { return 1.5 + 2 * p.x - 0.25 * p.y; };
  const DiscreteField f = DiscreteField::sample(coarse, affine);
  const DiscreteField g = interpolate(f, fine);
  for (std::size_t i = 0; i < fine.size(); ++i) {
    if (fine.active(i)) { EXPECT_NEAR(g[i], affine(fine.position(i)), 1e-13); }
  }
  EXPECT_EQ(interpolate(f, coarse).values()[7], f[7]);
}

TEST(Grid, InterpolateRejectsExtrapolation) {
  const DiscreteField f(Grid::radial(1, 0.1, 1.0), 1.0);
  EXPECT_THROW(interpolate(f, Grid::radial(1, 0.05, 1.2)), DomainError);
  const DiscreteField t(Grid::tensor2d(0.1, 1.0), 1.0);
  EXPECT_THROW(interpolate(t, Grid::tensor2d(0.05, 1.5)), DomainError);
}

TEST(Grid, InterpolatePoincareProfileSecondOrder) {
  const auto profile = [](Point p) { return std::log(2.0 / (1.0 - p.norm() * p.norm())); };
  double prev = 0.0;
  for (double h : {0.02, 0.01, 0.005}) {
    const DiscreteField f = DiscreteField::sample(Grid::radial(1, h, 0.9), profile);
    const Grid target = Grid::radial(1, h / 2, 0.9);
    const DiscreteField g = interpolate(f, target);
    double err = 0.0;
    for (std::size_t i = 0; i < target.size(); ++i) err = std::max(err, std::abs(g[i] - profile(target.position(i))));
    EXPECT_LT(err, 60.0 * h * h);
    if (prev > 0) { EXPECT_NEAR(prev / err, 4.0, 0.8); }
    prev = err;
  }
}

TEST(Stencil, ConstantsAndQuadratics) {
  const Grid t = Grid::tensor2d(0.05, 1.0);
  const DiscreteField q = DiscreteField::sample(t, [](Point p) { return p.x * p.x + p.y * p.y; });
  const DiscreteField lq = laplacian_apply(q);
  const DiscreteField lc = laplacian_apply(DiscreteField(t, 3.0));
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!t.interior(i)) continue;
    EXPECT_NEAR(lq[i], 4.0, 1e-10);
    EXPECT_EQ(lc[i], 0.0);
  }
  for (int n : {1, 2, 3}) {
    const Grid r = Grid::radial(n, 0.05, 1.0);
    const DiscreteField f = DiscreteField::sample(r, [](Point p) { return p.x * p.x; });
    const DiscreteField lf = laplacian_apply(f);
    for (std::size_t i = 0; i + 1 < r.size(); ++i) EXPECT_NEAR(lf[i], 4.0 * n, 1e-9) << "n=" << n << " i=" << i;
  }
}

TEST(Stencil, RadialLogProfile) {
  const auto f = [](Point p) { return std::log(1.0 - p.x * p.x); };
  const auto lap = [](Point p) { return -4.0 / std::pow(1.0 - p.x * p.x, 2); };
  double prev = 0.0;
  for (double h : {0.01, 0.005, 0.0025}) {
    const Grid g = Grid::radial(1, h, 0.9);
    const double err = max_interior_error(laplacian_apply(DiscreteField::sample(g, f)), DiscreteField::sample(g, lap));
    if (prev > 0) {
      EXPECT_GE(prev / err, 3.2);
      EXPECT_LE(prev / err, 4.8);
    }
    prev = err;
  }
}

TEST(Stencil, SecondOrderConsistency) {
  // tensor: sin(2x)cos(y), Δ = −5 sin(2x)cos(y)
  {
    double prev = 0.0;
    for (double h : {0.04, 0.02, 0.01}) {
      const Grid g = Grid::tensor2d(h, 1.0);
      const auto f = [](Point p) { return std::sin(2 * p.x) * std::cos(p.y); };
      const auto l = [](Point p) { return -5.0 * std::sin(2 * p.x) * std::cos(p.y); };
      const double err = max_interior_error(laplacian_apply(DiscreteField::sample(g, f)), DiscreteField::sample(g, l));
      if (prev > 0) {
        EXPECT_GE(prev / err, 3.2);
        EXPECT_LE(prev / err, 4.8);
      }
      prev = err;
    }
  }
  // radial: e^{−r²} in R^{2n}, Δ = (4r² − 2d) e^{−r²}
  for (int n : {1, 2, 3}) {
    double prev = 0.0;
    for (double h : {0.04, 0.02, 0.01}) {
      const Grid g = Grid::radial(n, h, 1.5);
      const double d = 2.0 * n;
      const auto f = [](Point p) { return std::exp(-p.x * p.x); };
      const auto l = [d](Point p) { return (4 * p.x * p.x - 2 * d) * std::exp(-p.x * p.x); };
      const double err = max_interior_error(laplacian_apply(DiscreteField::sample(g, f)), DiscreteField::sample(g, l));
      if (prev > 0) {
        EXPECT_GE(prev / err, 3.2) << "n=" << n;
        EXPECT_LE(prev / err, 4.8) << "n=" << n;
      }
      prev = err;
    }
  }
}

TEST(Stencil, OriginRuleMatchesSpecifiedFormula) {
  for (int n : {1, 2, 3}) {
    const Grid g = Grid::radial(n, 0.1, 1.0);
    const DiscreteField f = DiscreteField::sample(g, [](Point p) { return std::cos(p.x); });
    EXPECT_NEAR(laplacian_at(f, 0), 2.0 * 2 * n * (f[1] - f[0]) / 0.01, 1e-12);
  }
}

TEST(Stencil, RadialOriginAgreesWithTensor) {
  const auto f = [](Point p) { return std::cos(p.norm()); };
  for (double h : {0.02, 0.01}) {
    const Grid r = Grid::radial(1, h, 1.0);
    const Grid t = Grid::tensor2d(h, 1.0);
    const double lr = laplacian_at(DiscreteField::sample(r, f), 0);
    const double lt = laplacian_at(DiscreteField::sample(t, f), t.center());
    EXPECT_NEAR(lr, lt, 2.0 * h * h);
  }
}

TEST(Stencil, TensorOperatorSymmetric) {
  const Grid g = Grid::tensor2d(0.05, 1.0);
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  DiscreteField f(g), q(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g.interior(i)) {
      f[i] = dist(rng);
      q[i] = dist(rng);
    }
  }
  const DiscreteField lf = laplacian_apply(f), lq = laplacian_apply(q);
  double a = 0.0, b = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    a += lf[i] * q[i];
    b += f[i] * lq[i];
  }
  EXPECT_NEAR(a, b, 1e-12 * std::abs(a));
}

TEST(Stencil, RadialOperatorSymmetricUnderShellWeights) {
  const Grid g = Grid::radial(2, 0.05, 1.0);
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  DiscreteField f(g), q(g);
  for (std::size_t i = 0; i + 1 < g.size(); ++i) {
    f[i] = dist(rng);
    q[i] = dist(rng);
  }
  const DiscreteField lf = laplacian_apply(f), lq = laplacian_apply(q);
  double a = 0.0, b = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    a += symmetrizer(g, i) * lf[i] * q[i];
    b += symmetrizer(g, i) * f[i] * lq[i];
  }
  EXPECT_NEAR(a, b, 1e-12 * std::abs(a));
}

TEST(Stencil, Gradients) {
  const Grid t = Grid::tensor2d(0.05, 1.0);
  const DiscreteField gx = gradient_sq_norm(DiscreteField::sample(t, [](Point p) { return p.x; }));
  const DiscreteField g0 = gradient_sq_norm(DiscreteField(t, 2.0));
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!t.interior(i)) continue;
    EXPECT_NEAR(gx[i], 1.0, 1e-12);
    EXPECT_EQ(g0[i], 0.0);
  }
  const Grid r = Grid::radial(2, 0.05, 1.0);
  const DiscreteField gr = gradient_sq_norm(DiscreteField::sample(r, [](Point p) { return p.x * p.x; }));
  for (std::size_t i = 0; i + 1 < r.size(); ++i) { EXPECT_NEAR(gr[i], 4.0 * r.position(i).x * r.position(i).x, 1e-12); }
}

TEST(Exhaustion, RadiiMustBeNested) {
  const Grid g = Grid::radial(1, 0.1, 10.0);
  EXPECT_NO_THROW(DomainExhaustion(g, {2.0, 4.0, 8.0}));
  EXPECT_THROW(DomainExhaustion(g, {2.0, 2.1}), ConfigurationError);
  EXPECT_THROW(DomainExhaustion(g, {2.0, 12.0}), ConfigurationError);
  EXPECT_THROW(DomainExhaustion(g, {}), ConfigurationError);
  const DomainExhaustion ex(g, {2.0, 4.0});
  EXPECT_EQ(ex.level(0).size(), 21u);
}
