#include <gtest/gtest.h>

#include "alcontrol/algebroid.hpp"
#include "fixtures.hpp"

using namespace alc;
using alc::test::v;

namespace {

std::vector<ChartAlgebroid> builtins()
{
  return {
    ChartAlgebroid::tangent_bundle(3),
    ChartAlgebroid::so3(),
    ChartAlgebroid::atiyah(2, levi_civita()),
    product_with_time(ChartAlgebroid::so3()).inner,
    product_with_time(ChartAlgebroid::tangent_bundle(2)).inner,
    wong_system(WongFixture::polynomial_so3()).alg,
  };
}

}  // namespace

TEST(Structure, LeviCivitaBracket)
{
  const auto c = levi_civita();
  EXPECT_EQ(c.bracket(v({1, 0, 0}), v({0, 1, 0})), v({0, 0, 1}));
  EXPECT_EQ(c(2, 0, 1), 1.0);
  EXPECT_EQ(c(2, 1, 0), -1.0);
  const Vec u = v({0.3, -0.1, 2.0});
  const Vec w = v({1.0, 0.5, -0.7});
  EXPECT_LT((c.left_action(u) * w - c.bracket(u, w)).norm(), 1e-15);
}

TEST(Validation, BuiltinsPass)
{
  for (const auto & alg : builtins()) {
    const auto pts = sample_box(alg.base_dim(), 100, 42);
    const auto skew = validate_skew(alg, pts, 1e-6);
    const auto morph = validate_anchor_morphism(alg, pts, 1e-5, 1e-6);
    EXPECT_TRUE(skew.pass) << alg.name();
    EXPECT_TRUE(morph.pass) << alg.name() << " " << morph.max_violation;
    EXPECT_EQ(skew.samples, 100u);
  }
}

TEST(Validation, NonSkewChartFails)
{
  const auto r = validate_skew(test::non_skew_chart(), sample_box(0, 10, 1), 1e-6);
  EXPECT_FALSE(r.pass);
  EXPECT_DOUBLE_EQ(r.max_violation, 2.0);
}

TEST(Validation, NonMorphismChartFails)
{
  const auto alg = test::non_morphism_chart();
  const auto pts = sample_box(2, 100, 3);
  EXPECT_TRUE(validate_skew(alg, pts, 1e-6).pass);
  const auto r = validate_anchor_morphism(alg, pts, 1e-5, 1e-6);
  EXPECT_FALSE(r.pass);
  EXPECT_NEAR(r.max_violation, 1.0, 1e-9);
}

TEST(Validation, ProductPreservesSkewVerdict)
{
  const auto bad = product_with_time(test::non_skew_chart()).inner;
  EXPECT_FALSE(validate_skew(bad, sample_box(1, 10, 1), 1e-6).pass);
}

TEST(TangentLift, So3Example)
{
  const Section f{.eval = [](const Vec &) { return v({1, 0, 0}); }};
  const auto tv = tangent_lift_section(ChartAlgebroid::so3(), f, Vec(0), v({0, 1, 0}));
  EXPECT_EQ(tv.base.size(), 0);
  EXPECT_LT((tv.fiber - v({0, 0, -1})).norm(), 1e-15);
}

TEST(TangentLift, TangentBundleExample)
{
  const Section f{.eval = [](const Vec & x) { return x; }};
  const auto tv = tangent_lift_section(ChartAlgebroid::tangent_bundle(1), f, v({1.0}), v({2.0}));
  EXPECT_NEAR(tv.base[0], 1.0, 1e-15);
  EXPECT_NEAR(tv.fiber[0], 2.0, 1e-9);
}

TEST(TangentLift, BaseEqualsAnchorApplyExactly)
{
  const auto alg = ChartAlgebroid::atiyah(2, levi_civita());
  const Section f{.eval = [](const Vec & x) { return v({x[0] * x[1], std::sin(x[0]), 1, 2, x[1]}); }};
  const Vec x = v({0.4, -0.3});
  const auto tv = tangent_lift_section(alg, f, x, v({1, 2, 3, 4, 5}));
  EXPECT_EQ(tv.base, anchor_apply(alg, x, f.eval(x)));
}

TEST(HamiltonianField, So3Example)
{
  const Vec f = v({1, 0, 0});
  const DualFunction h{.eval = [f](const Vec &, const Vec & xi) { return f.dot(xi); }};
  const auto tv = hamiltonian_vector_field(ChartAlgebroid::so3(), h, Vec(0), v({0, 0, 1}));
  EXPECT_LT((tv.fiber - v({0, 1, 0})).norm(), 1e-9);
}

TEST(HamiltonianField, ConstantAndClassical)
{
  const DualFunction c{.eval = [](const Vec &, const Vec &) { return 3.0; }};
  const auto z = hamiltonian_vector_field(ChartAlgebroid::tangent_bundle(2), c, v({1, 2}), v({0.5, 0.5}));
  EXPECT_LT(z.base.norm() + z.fiber.norm(), 1e-9);

  const Vec w = v({0.7, -0.2});
  const DualFunction lin{.eval = [w](const Vec &, const Vec & xi) { return w.dot(xi); }};
  const auto r = hamiltonian_vector_field(ChartAlgebroid::tangent_bundle(2), lin, v({1, 2}), v({0.5, 0.5}));
  EXPECT_LT((r.base - w).norm(), 1e-9);
  EXPECT_LT(r.fiber.norm(), 1e-9);
}

TEST(ProductWithTime, Dimensions)
{
  const auto e = product_with_time(ChartAlgebroid::so3());
  EXPECT_EQ(e.inner.base_dim(), 1u);
  EXPECT_EQ(e.inner.fiber_dim(), 4u);
  const auto t = product_with_time(ChartAlgebroid::tangent_bundle(2));
  EXPECT_EQ(t.inner.base_dim(), 3u);
  EXPECT_EQ(t.inner.fiber_dim(), 3u);
  EXPECT_EQ(t.inner.anchor(v({0, 1, 2})), Mat(Mat::Identity(3, 3)));
  EXPECT_EQ(e.base_of(v({5.0})).size(), 0);
  EXPECT_EQ(e.fiber_of(v({9, 1, 2, 3})), v({1, 2, 3}));
}

TEST(AnchorDerivative, FiniteDifferenceMatchesAnalytic)
{
  const AnchorField rho = [](const Vec & x) {
    Mat r(2, 2);
    r << 1.0, x[1] * x[1], std::sin(x[0]), 1.0;
    return r;
  };
  const AnchorDerivative drho = [](const Vec & x) {
    Mat d0 = Mat::Zero(2, 2), d1 = Mat::Zero(2, 2);
    d0(1, 0) = std::cos(x[0]);
    d1(0, 1) = 2.0 * x[1];
    return std::vector<Mat>{d0, d1};
  };
  const auto structure = [](const Vec &) { return StructureTensor(2); };
  const ChartAlgebroid analytic(2, 2, rho, structure, "a", drho);
  const ChartAlgebroid numeric(2, 2, rho, structure, "n");
  for (const auto & x : sample_box(2, 50, 9)) {
    const auto a = analytic.anchor_derivative(x);
    const auto n = numeric.anchor_derivative(x);
    for (std::size_t b = 0; b < 2; ++b) { EXPECT_LT((a[b] - n[b]).cwiseAbs().maxCoeff(), 1e-6); }
  }
}

TEST(SampleBox, DeterministicAndBounded)
{
  const auto a = sample_box(3, 20, 5, 0.5);
  const auto b = sample_box(3, 20, 5, 0.5);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i], b[i]);
    EXPECT_LE(a[i].cwiseAbs().maxCoeff(), 0.5);
  }
}
