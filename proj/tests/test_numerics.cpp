#include <gtest/gtest.h>

#include <cmath>

#include "alcontrol/numerics.hpp"
#include "fixtures.hpp"

using namespace alc;
using alc::test::v;

TEST(TimeGrid, UniformNodes)
{
  const TimeGrid g(0.0, 1.0, 0.25);
  const auto n = g.nodes();
  ASSERT_EQ(n.size(), 5u);
  EXPECT_DOUBLE_EQ(n[2], 0.5);
  EXPECT_EQ(n.back(), 1.0);
  EXPECT_EQ(g.segment_count(), 1u);
}

TEST(TimeGrid, BreakpointsBecomeNodesAndCloseNodesMerge)
{
  const TimeGrid g(0.0, 1.0, 0.1, {0.3001, 0.55});
  const auto n = g.nodes();
  EXPECT_TRUE(std::find(n.begin(), n.end(), 0.55) != n.end());
  EXPECT_TRUE(std::find(n.begin(), n.end(), 0.3001) != n.end());
  // 0.3 lies within merge_tolerance of 0.3001 and is dropped
  for (double t : n) { EXPECT_FALSE(std::abs(t - 0.3) < 1e-12); }
  EXPECT_EQ(g.segment_count(), 3u);
  const auto s1 = g.segment_nodes(1);
  EXPECT_EQ(s1.front(), 0.3001);
  EXPECT_EQ(s1.back(), 0.55);
}

TEST(TimeGrid, RejectsBadInput)
{
  EXPECT_THROW(TimeGrid(1.0, 0.0, 0.1), std::invalid_argument);
  EXPECT_THROW(TimeGrid(0.0, 1.0, 0.0), std::invalid_argument);
  EXPECT_THROW(TimeGrid(0.0, 1.0, 0.1, {1.5}), std::invalid_argument);
}

TEST(Integrate, ExponentialMatchesClosedForm)
{
  const OdeRhs rhs{1, [](double, const Vec & y) { return Vec(-2.0 * y); }};
  const auto c = integrate(rhs, TimeGrid(0.0, 1.0, 1e-3), v({1.0}));
  EXPECT_NEAR(c.back()[0], std::exp(-2.0), 1e-12);
}

TEST(Integrate, FourthOrderConvergence)
{
  const OdeRhs rhs{2, [](double t, const Vec & y) { return v({y[1], -y[0] + std::sin(t)}); }};
  auto err = [&](double h) {
    const auto c = integrate(rhs, TimeGrid(0.0, 2.0, h), v({1.0, 0.0}));
    // x'' + x = sin t, x(0) = 1, x'(0) = 0
    const double t = 2.0;
    const double exact = std::cos(t) + 0.5 * (std::sin(t) - t * std::cos(t));
    return std::abs(c.back()[0] - exact);
  };
  const double ratio = err(0.1) / err(0.05);
  EXPECT_GT(ratio, 14.0);
  EXPECT_LT(ratio, 18.0);
}

TEST(Integrate, BreakpointsAreDuplicated)
{
  const OdeRhs rhs{1, [](double, const Vec &) { return v({1.0}); }};
  const auto c = integrate(rhs, TimeGrid(0.0, 1.0, 0.1, {0.45}), v({0.0}));
  const auto segs = c.segments();
  ASSERT_EQ(segs.size(), 2u);
  EXPECT_EQ(c.t[segs[0].second - 1], 0.45);
  EXPECT_EQ(c.t[segs[1].first], 0.45);
  EXPECT_NEAR(c.back()[0], 1.0, 1e-14);
}

TEST(Integrate, DivergenceThrows)
{
  const OdeRhs rhs{1, [](double, const Vec & y) { return Vec(y.array().square()); }};
  EXPECT_THROW(integrate(rhs, TimeGrid(0.0, 2.0, 1e-2), v({1.0})), IntegrationDiverged);
}

TEST(Stencils, DerivativeWeightsExactOnPolynomials)
{
  const std::vector<double> nodes{0.0, 0.1, 0.25, 0.4, 0.6};
  const auto w = derivative_weights(nodes, 0.25);
  double d = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) { d += w[i] * std::pow(nodes[i], 4); }
  EXPECT_NEAR(d, 4.0 * std::pow(0.25, 3), 1e-12);
}

TEST(Stencils, SampleDerivativeOneSidedAtSegmentEnds)
{
  std::vector<double> t;
  std::vector<Vec> y;
  for (int i = 0; i <= 10; ++i) {
    const double s = 0.1 * i;
    t.push_back(s);
    y.push_back(v({s * s * s}));
  }
  const auto d = sample_derivatives(t, y, 5);
  for (std::size_t i = 0; i < t.size(); ++i) { EXPECT_NEAR(d[i][0], 3.0 * t[i] * t[i], 1e-11); }
}

TEST(Interpolation, CubicExactAndInterpolantAgrees)
{
  std::vector<double> t;
  std::vector<Vec> y;
  for (int i = 0; i <= 8; ++i) {
    t.push_back(0.125 * i);
    y.push_back(v({2.0 - t.back() + std::pow(t.back(), 3)}));
  }
  const CurveInterpolant ci(t, y);
  for (double s : {0.01, 0.3, 0.77, 0.99}) {
    const double exact = 2.0 - s + s * s * s;
    EXPECT_NEAR(interpolate(t, y, s)[0], exact, 1e-13);
    EXPECT_NEAR(ci(s)[0], exact, 1e-13);
  }
}

TEST(Interpolation, BreakpointSides)
{
  const std::vector<double> t{0.0, 0.5, 1.0, 1.0, 1.5, 2.0};
  const std::vector<Vec> y{v({0}), v({0}), v({0}), v({1}), v({1}), v({1})};
  EXPECT_EQ(interpolate(t, y, 1.0, true)[0], 0.0);
  EXPECT_EQ(interpolate(t, y, 1.0, false)[0], 1.0);
}

TEST(FiniteDifference, JacobianMatchesAnalytic)
{
  const auto fn = [](const Vec & x) { return v({std::sin(x[0]) * x[1], x[0] * x[0]}); };
  const Vec x = v({0.3, -1.2});
  Mat exact(2, 2);
  exact << std::cos(0.3) * -1.2, std::sin(0.3), 0.6, 0.0;
  EXPECT_LT((finite_difference_jacobian(fn, x) - exact).cwiseAbs().maxCoeff(), 1e-9);
}
