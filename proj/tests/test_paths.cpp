#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "alcontrol/paths.hpp"
#include "fixtures.hpp"

using namespace alc;
using alc::test::v;

namespace {

EPath line_path(double x0, double speed, double t0, double t1, double step)
{
  return sample_path(
    TimeGrid(t0, t1, step), [=](double t) { return v({x0 + speed * (t - t0)}); },
    [=](double, std::size_t) { return v({speed}); });
}

/// x(t) = (sin 3t, t²) on TM ℝ², a = ẋ.
EPath planar_curve(double step)
{
  return sample_path(
    TimeGrid(0.0, 1.0, step), [](double t) { return v({std::sin(3.0 * t), t * t}); },
    [](double t, std::size_t) { return v({3.0 * std::cos(3.0 * t), 2.0 * t}); });
}

}  // namespace

TEST(Admissibility, LieAlgebraChartIsAlwaysAdmissible)
{
  const auto p = sample_path(
    TimeGrid(0.0, 1.0, 0.01), [](double) { return Vec(0); },
    [](double t, std::size_t) { return v({std::sin(t), 1.0, t}); });
  EXPECT_EQ(admissibility_residual(ChartAlgebroid::so3(), p), 0.0);
}

TEST(Admissibility, UnitSpeedAndWrongSpeed)
{
  const auto tm = ChartAlgebroid::tangent_bundle(1);
  EXPECT_LT(admissibility_residual(tm, line_path(0.0, 1.0, 0.0, 1.0, 0.01)), 1e-12);
  const auto wrong = sample_path(
    TimeGrid(0.0, 1.0, 0.01), [](double t) { return v({t}); }, [](double, std::size_t) { return v({2.0}); });
  EXPECT_NEAR(admissibility_residual(tm, wrong), 1.0, 1e-12);
}

TEST(Admissibility, BreakpointsUseOneSidedStencils)
{
  const auto p = sample_path(
    TimeGrid(0.0, 2.0, 0.01, {1.0}), [](double t) { return v({t < 1.0 ? t : 1.0 + 3.0 * (t - 1.0)}); },
    [](double, std::size_t seg) { return v({seg == 0 ? 1.0 : 3.0}); });
  EXPECT_LT(admissibility_residual(ChartAlgebroid::tangent_bundle(1), p), 1e-10);
}

TEST(Compose, TwoUnitSegments)
{
  const auto p = line_path(0.0, 1.0, 0.0, 1.0, 0.1);
  const auto q = line_path(1.0, 1.0, 0.0, 1.0, 0.1);
  const auto r = compose_paths(p, q);
  EXPECT_EQ(r.t.front(), 0.0);
  EXPECT_NEAR(r.t.back(), 2.0, 1e-15);
  EXPECT_NEAR(r.x.back()[0], 2.0, 1e-15);
  ASSERT_EQ(r.grid.breakpoints().size(), 1u);
  EXPECT_EQ(r.grid.breakpoints()[0], 1.0);
  EXPECT_EQ(r.segments().size(), 2u);
  EXPECT_LT(admissibility_residual(ChartAlgebroid::tangent_bundle(1), r), 1e-12);
}

TEST(Compose, NullPathExtendsGrid)
{
  const auto p = line_path(0.0, 1.0, 0.0, 1.0, 0.1);
  const auto null = line_path(1.0, 0.0, 0.0, 0.5, 0.1);
  const auto r = compose_paths(p, null);
  EXPECT_EQ(r.size(), p.size() + null.size());
  EXPECT_NEAR(r.t.back(), 1.5, 1e-15);
  EXPECT_EQ(r.x.back(), p.x.back());
}

TEST(Compose, MismatchCarriesGap)
{
  const auto p = line_path(0.0, 1.0, 0.0, 1.0, 0.1);
  const auto q = line_path(1.5, 1.0, 0.0, 1.0, 0.1);
  try {
    compose_paths(p, q);
    FAIL() << "expected CompositionError";
  } catch (const CompositionError & e) {
    EXPECT_NEAR(e.gap(), 0.5, 1e-15);
  }
}

TEST(Reparameterize, UnitIntervalIsIdentity)
{
  const auto p = planar_curve(0.01);
  const auto r = reparameterize_unit(p);
  EXPECT_EQ(r.t, p.t);
  for (std::size_t i = 0; i < p.size(); ++i) { EXPECT_EQ(r.a[i], p.a[i]); }
}

TEST(Reparameterize, ConstantFiberScales)
{
  const auto p = line_path(0.0, 0.7, 0.0, 2.0, 0.01);
  const auto r = reparameterize_unit(p);
  EXPECT_EQ(r.t.front(), 0.0);
  EXPECT_EQ(r.t.back(), 1.0);
  for (const auto & a : r.a) { EXPECT_NEAR(a[0], 1.4, 1e-15); }
}

TEST(Reparameterize, AdmissibilityPreserved)
{
  const auto tm = ChartAlgebroid::tangent_bundle(1);
  for (double step : {0.02, 0.01}) {
    const auto p = sample_path(
      TimeGrid(1.0, 3.0, step), [](double t) { return v({t * t}); }, [](double t, std::size_t) { return v({2.0 * t}); });
    const double before = admissibility_residual(tm, p);
    const double after = admissibility_residual(tm, reparameterize_unit(p));
    EXPECT_LT(std::abs(after - 2.0 * before), 10.0 * step);
    EXPECT_LT(after, 10.0 * step);
  }
}

TEST(Reparameterize, ComposeThenReparameterize)
{
  const auto tm = ChartAlgebroid::tangent_bundle(1);
  const auto p = line_path(0.0, 1.0, 0.0, 1.0, 0.01);
  const auto q = sample_path(
    TimeGrid(0.0, 1.0, 0.01), [](double t) { return v({1.0 + t * t}); }, [](double t, std::size_t) { return v({2.0 * t}); });
  const auto r = reparameterize_unit(compose_paths(p, q));
  EXPECT_LT(admissibility_residual(tm, r), 0.05);
  EXPECT_EQ(r.segments().size(), 2u);
}

TEST(HomotopyResidual, EpsIndependentFieldIsExact)
{
  HomotopyField h;
  h.t = linspace(0.0, 1.0, 21);
  h.eps = linspace(0.0, 1.0, 5);
  for (double t : h.t) {
    h.x.emplace_back(h.eps.size(), Vec(0));
    h.a.emplace_back(h.eps.size(), v({std::cos(t), t, 1.0}));
    h.b.emplace_back(h.eps.size(), Vec::Zero(3));
  }
  const auto r = homotopy_residual(ChartAlgebroid::so3(), h);
  EXPECT_LT(r.max(), 1e-14);
}

TEST(HomotopyResidual, ShrinkConvergesUnderRefinement)
{
  const auto tm = ChartAlgebroid::tangent_bundle(2);
  const double coarse = homotopy_residual(tm, shrink_homotopy(tm, planar_curve(0.02), 17)).max();
  const double fine = homotopy_residual(tm, shrink_homotopy(tm, planar_curve(0.01), 33)).max();
  EXPECT_GE(coarse / fine, 2.0);
  EXPECT_LT(fine, 0.05);
}

TEST(HomotopyResidual, PerturbedBHasLowerBound)
{
  const auto alg = ChartAlgebroid::so3();
  const auto p = sample_path(
    TimeGrid(0.0, 1.0, 0.01), [](double) { return Vec(0); },
    [](double t, std::size_t) { return v({1.0 + t, std::sin(t), 0.5}); });
  auto h = shrink_homotopy(alg, p, 17);
  const double base = homotopy_residual(alg, h).equation;
  double bound = 0.0;
  const auto c = levi_civita();
  for (std::size_t i = 0; i < h.t.size(); ++i) {
    for (std::size_t j = 0; j < h.eps.size(); ++j) {
      h.b[i][j][0] += 1.0;
      bound = std::max(bound, c.bracket(v({1, 0, 0}), h.a[i][j]).norm());
    }
  }
  EXPECT_GE(homotopy_residual(alg, h).equation, bound - base);
  EXPECT_GT(bound, 0.5);
}

TEST(Shrink, EndSlices)
{
  const auto p = planar_curve(0.01);
  const auto h = shrink_homotopy(ChartAlgebroid::tangent_bundle(2), p, 9);
  for (std::size_t i = 0; i < h.t.size(); ++i) {
    EXPECT_EQ(h.a[i][0].norm(), 0.0);
    EXPECT_EQ(h.a[i].back(), p.a[i]);
    EXPECT_EQ(h.b[i][0], h.t[i] * p.a[0]);
  }
}

TEST(Shrink, RequiresUnitInterval)
{
  EXPECT_THROW(shrink_homotopy(ChartAlgebroid::tangent_bundle(1), line_path(0, 1, 0, 2, 0.1)), std::invalid_argument);
}

TEST(Generate, ZeroSourceGivesZero)
{
  HomotopyField src;
  src.t = linspace(0.0, 1.0, 11);
  src.eps = linspace(0.0, 1.0, 5);
  for (std::size_t i = 0; i < src.t.size(); ++i) {
    src.x.emplace_back(5, v({0.3, 0.1}));
    src.a.emplace_back(5, Vec::Zero(2));
    src.b.emplace_back(5, Vec::Zero(2));
  }
  const auto g = generate_infinitesimal_homotopy(ChartAlgebroid::tangent_bundle(2), src, std::vector<Vec>(5, Vec::Zero(2)));
  EXPECT_LT(g.chi_max, 1e-14);
  for (const auto & row : g.field.b) {
    for (const auto & b : row) { EXPECT_EQ(b.norm(), 0.0); }
  }
}

TEST(Generate, So3RotationAboutConstantVelocity)
{
  const Vec omega = v({0.3, -0.8, 0.5});
  const Vec w = v({1.0, 0.2, -0.4});
  HomotopyField src;
  src.t = TimeGrid(0.0, 1.0, 1e-3).nodes();
  src.eps = linspace(0.0, 1.0, 5);
  for (std::size_t i = 0; i < src.t.size(); ++i) {
    src.x.emplace_back(5, Vec(0));
    src.a.emplace_back(5, omega);
    src.b.emplace_back(5, Vec::Zero(3));
  }
  const auto g = generate_infinitesimal_homotopy(ChartAlgebroid::so3(), src, std::vector<Vec>(5, w));
  for (std::size_t i = 0; i < src.t.size(); i += 100) {
    const Vec expected = test::rotation(omega, -omega.norm() * src.t[i]) * w;
    EXPECT_LT((g.field.b[i][2] - expected).norm(), 1e-10);
    EXPECT_NEAR(g.field.b[i][2].norm(), w.norm(), 1e-12);
  }
}

TEST(Generate, TangentBundleRecoversEpsDerivative)
{
  const auto tm = ChartAlgebroid::tangent_bundle(2);
  const auto src = test::flow_family(2);
  const auto g = generate_infinitesimal_homotopy(tm, src, test::flow_family_b0(2));
  EXPECT_LT(g.chi_max, 1e-6);
  EXPECT_FALSE(g.chi_warning);
  EXPECT_LT(homotopy_residual(tm, g.field).max(), 1e-3);
}

TEST(Generate, ThreadedRunIsBitIdentical)
{
  const auto alg = ChartAlgebroid::atiyah(2, levi_civita());
  const auto src = test::flow_family(5, 1e-2);
  const auto b0 = test::flow_family_b0(5);
  const auto a = generate_infinitesimal_homotopy(alg, src, b0);
  const auto b = generate_infinitesimal_homotopy(alg, src, b0, {.threads = 4});
  for (std::size_t i = 0; i < src.t.size(); ++i) {
    for (std::size_t j = 0; j < src.eps.size(); ++j) { ASSERT_EQ(a.field.b[i][j], b.field.b[i][j]); }
  }
  EXPECT_EQ(a.chi_max, b.chi_max);
}

TEST(Generate, PerturbationStaysWithinGronwallBound)
{
  const auto alg = ChartAlgebroid::atiyah(2, levi_civita());
  const auto src = test::flow_family(5, 1e-2);
  auto b0 = test::flow_family_b0(5);
  const auto a = generate_infinitesimal_homotopy(alg, src, b0);
  const double delta = 1e-6;
  for (auto & b : b0) { b[3] += delta; }
  const auto b = generate_infinitesimal_homotopy(alg, src, b0);
  const double C = gronwall_constant(alg, src);
  for (std::size_t i = 0; i < src.t.size(); ++i) {
    for (std::size_t j = 0; j < src.eps.size(); ++j) {
      EXPECT_LE((a.field.b[i][j] - b.field.b[i][j]).norm(), delta * std::exp(C * src.t[i]) * (1 + 1e-9));
    }
  }
}

TEST(Generate, NonMorphismChartRaisesWarning)
{
  const auto g = generate_infinitesimal_homotopy(test::non_morphism_chart(), test::flow_family(2, 1e-2), test::flow_family_b0(2));
  EXPECT_GT(g.chi_max, 1e-2);
  EXPECT_TRUE(g.chi_warning);
}
