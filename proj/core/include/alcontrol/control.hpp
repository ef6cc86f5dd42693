#pragma once

/**
 * @file control.hpp
 * @brief Control systems on almost Lie algebroids, trajectory simulation and
 *        the parallel-transport operators B and B̄ along a trajectory.
 */

#include <functional>
#include <optional>
#include <variant>
#include <vector>

#include "alcontrol/algebroid.hpp"
#include "alcontrol/numerics.hpp"
#include "alcontrol/paths.hpp"

namespace alc {

/// Closed-form argmax of v ↦ ⟨z, f(x, v)⟩ + z0 L(x, v); nullopt when not applicable at this point.
using HamiltonianMaximizer = std::function<std::optional<Vec>(const Vec & x, const Vec & z, double z0)>;

struct FiniteControlSet
{
  std::vector<Vec> values;
};

struct ControlBox
{
  Vec lower;
  Vec upper;
  std::optional<HamiltonianMaximizer> maximizer{};
};

class ControlSpace
{
public:
  static ControlSpace finite(std::vector<Vec> values);
  static ControlSpace box(Vec lower, Vec upper, std::optional<HamiltonianMaximizer> maximizer = std::nullopt);

  std::size_t dim() const;
  bool is_finite() const noexcept { return std::holds_alternative<FiniteControlSet>(set_); }
  const FiniteControlSet & finite_set() const { return std::get<FiniteControlSet>(set_); }
  const ControlBox & box_set() const { return std::get<ControlBox>(set_); }
  bool contains(const Vec & u, double tol = 1e-12) const;

private:
  explicit ControlSpace(std::variant<FiniteControlSet, ControlBox> s) : set_{std::move(s)} {}
  std::variant<FiniteControlSet, ControlBox> set_;
};

struct ControlSystem
{
  ChartAlgebroid alg;
  std::function<Vec(const Vec & x, const Vec & u)> f;
  std::function<double(const Vec & x, const Vec & u)> L;
  ControlSpace U;
  std::optional<std::function<Mat(const Vec & x, const Vec & u)>> df_dx{};
  std::optional<std::function<Vec(const Vec & x, const Vec & u)>> dL_dx{};
  double fd_step{1e-5};

  /// ∂f/∂x (m×n)
  Mat f_x(const Vec & x, const Vec & u) const;
  /// ∂L/∂x (n)
  Vec L_x(const Vec & x, const Vec & u) const;
  /// The section f(·, u).
  Section section(const Vec & u) const;
};

/// Piecewise-constant, right-continuous control with finitely many discontinuities.
class ControlSignal
{
public:
  ControlSignal(std::vector<double> breakpoints, std::vector<Vec> values);
  static ControlSignal constant(Vec u) { return ControlSignal({}, {std::move(u)}); }

  const std::vector<double> & breakpoints() const noexcept { return breakpoints_; }
  const std::vector<Vec> & values() const noexcept { return values_; }

  /// Value on [bp_{k-1}, bp_k).
  const Vec & at(double t) const;
  /// Value on (bp_{k-1}, bp_k].
  const Vec & left_limit(double t) const;
  bool is_breakpoint(double t, double tol = 1e-12) const;

  /// Breakpoints strictly inside (t0, t1).
  std::vector<double> breakpoints_in(double t0, double t1) const;

private:
  std::vector<double> breakpoints_;
  std::vector<Vec> values_;
};

/// Path with the control samples attached node by node.
struct Trajectory
{
  EPath path;
  std::vector<Vec> u;
};

/// Piecewise-constant control read off the samples of a trajectory.
ControlSignal control_signal_of(const Trajectory & traj);

/// Grid on [t0, t1] whose breakpoints include those of u plus `extra`.
TimeGrid control_grid(const ControlSignal & u, double t0, double t1, double step, const std::vector<double> & extra = {});

/// ẋ = ρ(x) f(x, u(t)); fiber samples a(t) = f(x(t), u(t)).
Trajectory simulate_trajectory(const ControlSystem & sys, const ControlSignal & u, const Vec & x0, const TimeGrid & interval);

/// Extended system on TR × E: 𝐟 = (L, f), zero cost.
ControlSystem extend_system(const ControlSystem & sys);

struct FiberCurve
{
  std::vector<double> t;
  std::vector<Vec> x;
  std::vector<Vec> y;
};

struct CostateCurve
{
  std::vector<double> t;
  std::vector<Vec> x;
  std::vector<Vec> z;
  double z0{0.0};
};

/// Right-hand side of the tangent-lift flow, fiber part: (∂f/∂x) ρ y + c[y, f].
Vec transport_rhs(const ControlSystem & sys, const Vec & x, const Vec & u, const Vec & y);

/// ż = −ρᵀ((∂f/∂x)ᵀ z + z0 ∂L/∂x) + c^i_jk f^j z_i.
Vec costate_rhs(const ControlSystem & sys, const Vec & x, const Vec & u, const Vec & z, double z0);

/// Transport of y0 ∈ E_{x0} by B_{t t0}.
FiberCurve transport_B(const ControlSystem & sys, const ControlSignal & u, const Vec & x0, const TimeGrid & interval, const Vec & y0);

/// Costate transport (z(t), z0); z0 is carried unchanged.
CostateCurve transport_Bbar(const ControlSystem & sys,
                            const ControlSignal & u,
                            const Vec & x0,
                            const TimeGrid & interval,
                            const Vec & z,
                            double z0);

/// Full linear maps B_{t t0} and B̄_{t t0} (z0 = 0) at every node.
struct TransportFrame
{
  std::vector<double> t;
  std::vector<Mat> B;
  std::vector<Mat> Bbar;
};

TransportFrame transport_frame(const ControlSystem & sys, const ControlSignal & u, const Vec & x0, const TimeGrid & interval);

/// max over nodes of |⟨B y0, B̄ ξ0⟩ − ⟨y0, ξ0⟩|.
double pairing_drift(const ControlSystem & sys,
                     const ControlSignal & u,
                     const Vec & x0,
                     const TimeGrid & interval,
                     const Vec & y0,
                     const Vec & xi0);

}  // namespace alc
