#pragma once

#include <algorithm>
#include <cmath>
#include <initializer_list>

#include "alcontrol/paths.hpp"
#include "alcontrol/scenarios.hpp"

namespace alc::test {

inline Vec v(std::initializer_list<double> xs)
{
  Vec r(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) { r[i++] = x; }
  return r;
}

/// Rodrigues rotation by `angle` about the unit vector along `axis`.
inline Mat rotation(const Vec & axis, double angle)
{
  const Vec k = axis.normalized();
  Mat K(3, 3);
  K << 0, -k[2], k[1], k[2], 0, -k[0], -k[1], k[0], 0;
  return Mat::Identity(3, 3) + std::sin(angle) * K + (1.0 - std::cos(angle)) * K * K;
}

/// One-dimensional "algebra" with c^1_11 = 1.
inline ChartAlgebroid non_skew_chart()
{
  return ChartAlgebroid::lie_algebra(StructureTensor(1, {1.0}), "non-skew");
}

/// ρ = id on ℝ² with a constant bracket c^1_12 = −c^1_21 = 1; skew but not a morphism.
inline ChartAlgebroid non_morphism_chart()
{
  StructureTensor c(2);
  c(0, 0, 1) = 1.0;
  c(0, 1, 0) = -1.0;
  return ChartAlgebroid(
    2, 2, [](const Vec &) { return Mat(Mat::Identity(2, 2)); }, [c](const Vec &) { return c; }, "non-morphism");
}

/// so(3) table with |ε_ijk|: symmetric in (j, k).
inline ChartAlgebroid symmetric_so3()
{
  StructureTensor c = levi_civita();
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      for (std::size_t k = 0; k < 3; ++k) { c(i, j, k) = std::abs(c(i, j, k)); }
    }
  }
  return ChartAlgebroid::lie_algebra(c, "symmetric");
}

inline ControlSystem so3_system(const Vec & a = v({1, 0, 0}), const Vec & b = v({0, 1, 0}))
{
  ScenarioConfig c = default_config("so3-bang-bang");
  c.a = a;
  c.b = b;
  return build_system(c);
}

/// Constant-velocity system f = ω on a Lie-algebra chart.
inline ControlSystem constant_field(const ChartAlgebroid & alg, const Vec & omega)
{
  return ControlSystem{
    .alg = alg,
    .f = [omega](const Vec &, const Vec &) { return omega; },
    .L = [](const Vec &, const Vec &) { return 0.0; },
    .U = ControlSpace::finite({Vec::Zero(1)}),
  };
}

/// TM ℝ¹, f = u, L = (q x² + u²)/2, U = [−10, 10] with closed-form maximizer.
inline ControlSystem lq_system(double q)
{
  ScenarioConfig c = default_config("classical-tm-lq");
  c.state_weight = q;
  return build_system(c);
}

/// Nonlinear planar field used for flow families.
inline Vec planar_field(const Vec & x) { return v({1.0 + 0.5 * std::sin(x[1]), 0.8 + 0.3 * std::cos(x[0])}); }

/**
 * Family x(t, ε) of flows of planar_field from (ε, 0) over a base ℝ² chart,
 * a(t, ε) = (planar_field(x), w(t, ε)) where w fills any extra fiber slots.
 */
inline HomotopyField flow_family(std::size_t fiber_dim, double step = 1e-3, std::size_t eps_count = 33)
{
  const TimeGrid grid(0.0, 1.0, step);
  const OdeRhs rhs{2, [](double, const Vec & x) { return planar_field(x); }};
  HomotopyField h;
  h.eps = linspace(0.0, 1.0, eps_count);
  std::vector<SampledCurve> flows;
  for (double e : h.eps) { flows.push_back(integrate(rhs, grid, v({e, 0.0}))); }
  h.t = flows.front().t;
  h.x.assign(h.t.size(), std::vector<Vec>(eps_count));
  h.a = h.x;
  h.b = h.x;
  for (std::size_t i = 0; i < h.t.size(); ++i) {
    for (std::size_t j = 0; j < eps_count; ++j) {
      const Vec & x = flows[j].y[i];
      Vec a = Vec::Zero(static_cast<Eigen::Index>(fiber_dim));
      a.head(2) = planar_field(x);
      for (Eigen::Index k = 2; k < a.size(); ++k) {
        a[k] = std::sin(static_cast<double>(k) * h.t[i] + h.eps[j]) * h.eps[j];
      }
      h.x[i][j] = x;
      h.a[i][j] = a;
      h.b[i][j] = Vec::Zero(a.size());
    }
  }
  return h;
}

/// b0(ε) = ∂_ε x(t0, ε) = e_1 for flow_family.
inline std::vector<Vec> flow_family_b0(std::size_t fiber_dim, std::size_t eps_count = 33)
{
  Vec b = Vec::Zero(static_cast<Eigen::Index>(fiber_dim));
  b[0] = 1.0;
  return std::vector<Vec>(eps_count, b);
}

/// f(x, t, u) = t·u, L = u²/2 on TM ℝ¹; the maximizer acts on the autonomized point (x, clock).
inline TimeDependentSystem t_u_system()
{
  return TimeDependentSystem{
    .alg = ChartAlgebroid::tangent_bundle(1),
    .f = [](const Vec &, double t, const Vec & u) { return Vec(t * u); },
    .L = [](const Vec &, double, const Vec & u) { return 0.5 * u[0] * u[0]; },
    .U = ControlSpace::box(v({-50}), v({50}),
                           [](const Vec & x, const Vec & z, double z0) -> std::optional<Vec> {
                             if (z0 >= 0.0) { return std::nullopt; }
                             return v({std::clamp(z[0] * x[1] / -z0, -50.0, 50.0)});
                           }),
  };
}

/// Time-independent LQ written as a TimeDependentSystem.
inline TimeDependentSystem lq_time_system()
{
  return TimeDependentSystem{
    .alg = ChartAlgebroid::tangent_bundle(1),
    .f = [](const Vec &, double, const Vec & u) { return u; },
    .L = [](const Vec & x, double, const Vec & u) { return 0.5 * (x[0] * x[0] + u[0] * u[0]); },
    .U = ControlSpace::box(v({-50}), v({50}),
                           [](const Vec &, const Vec & z, double z0) -> std::optional<Vec> {
                             if (z0 >= 0.0) { return std::nullopt; }
                             return v({std::clamp(z[0] / -z0, -50.0, 50.0)});
                           }),
  };
}

inline double max_abs_diff(const Mat & a, const Mat & b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace alc::test
