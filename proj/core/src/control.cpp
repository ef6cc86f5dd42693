#include "alcontrol/control.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace alc {

ControlSpace ControlSpace::finite(std::vector<Vec> values)
{
  if (values.empty()) { throw std::invalid_argument("ControlSpace: finite set must be nonempty"); }
  for (const auto & v : values) {
    if (v.size() != values.front().size()) { throw std::invalid_argument("ControlSpace: control values differ in dimension"); }
  }
  return ControlSpace(FiniteControlSet{std::move(values)});
}

ControlSpace ControlSpace::box(Vec lower, Vec upper, std::optional<HamiltonianMaximizer> maximizer)
{
  if (lower.size() != upper.size()) { throw std::invalid_argument("ControlSpace: box bounds differ in dimension"); }
  if ((lower.array() > upper.array()).any()) { throw std::invalid_argument("ControlSpace: box requires lower <= upper"); }
  return ControlSpace(ControlBox{std::move(lower), std::move(upper), std::move(maximizer)});
}

std::size_t ControlSpace::dim() const
{
  if (is_finite()) { return static_cast<std::size_t>(finite_set().values.front().size()); }
  return static_cast<std::size_t>(box_set().lower.size());
}

bool ControlSpace::contains(const Vec & u, double tol) const
{
  if (static_cast<std::size_t>(u.size()) != dim()) { return false; }
  if (is_finite()) {
    return std::any_of(finite_set().values.begin(), finite_set().values.end(), [&](const Vec & v) {
      return (v - u).cwiseAbs().maxCoeff() <= tol;
    });
  }
  const auto & b = box_set();
  return ((u.array() >= b.lower.array() - tol) && (u.array() <= b.upper.array() + tol)).all();
}

Mat ControlSystem::f_x(const Vec & x, const Vec & u) const
{
  if (df_dx) { return (*df_dx)(x, u); }
  return finite_difference_jacobian([&](const Vec & p) { return f(p, u); }, x, fd_step);
}

Vec ControlSystem::L_x(const Vec & x, const Vec & u) const
{
  if (dL_dx) { return (*dL_dx)(x, u); }
  return finite_difference_gradient([&](const Vec & p) { return L(p, u); }, x, fd_step);
}

Section ControlSystem::section(const Vec & u) const
{
  Section s{.eval = [fn = f, u](const Vec & x) { return fn(x, u); }};
  s.jacobian = [sys = *this, u](const Vec & x) { return sys.f_x(x, u); };
  return s;
}

ControlSignal::ControlSignal(std::vector<double> breakpoints, std::vector<Vec> values)
    : breakpoints_{std::move(breakpoints)}, values_{std::move(values)}
{
  if (values_.size() != breakpoints_.size() + 1) {
    throw std::invalid_argument("ControlSignal: need one value per segment");
  }
  if (!std::is_sorted(breakpoints_.begin(), breakpoints_.end())
      || std::adjacent_find(breakpoints_.begin(), breakpoints_.end()) != breakpoints_.end()) {
    throw std::invalid_argument("ControlSignal: breakpoints must be strictly increasing");
  }
}

const Vec & ControlSignal::at(double t) const
{
  const auto k = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), t) - breakpoints_.begin();
  return values_[static_cast<std::size_t>(k)];
}

const Vec & ControlSignal::left_limit(double t) const
{
  const auto k = std::lower_bound(breakpoints_.begin(), breakpoints_.end(), t) - breakpoints_.begin();
  return values_[static_cast<std::size_t>(k)];
}

bool ControlSignal::is_breakpoint(double t, double tol) const
{
  return std::any_of(breakpoints_.begin(), breakpoints_.end(), [&](double b) { return std::abs(b - t) <= tol; });
}

std::vector<double> ControlSignal::breakpoints_in(double t0, double t1) const
{
  std::vector<double> out;
  std::copy_if(breakpoints_.begin(), breakpoints_.end(), std::back_inserter(out), [&](double b) {
    return b > t0 && b < t1;
  });
  return out;
}

ControlSignal control_signal_of(const Trajectory & traj)
{
  std::vector<double> bps;
  std::vector<Vec> vals;
  const auto & t = traj.path.t;
  const auto segs = segment_ranges(t);
  for (std::size_t s = 0; s < segs.size(); ++s) {
    if (s > 0) { bps.push_back(t[segs[s].first]); }
    vals.push_back(traj.u[segs[s].first]);
  }
  return ControlSignal(std::move(bps), std::move(vals));
}

TimeGrid control_grid(const ControlSignal & u, double t0, double t1, double step, const std::vector<double> & extra)
{
  auto bps = u.breakpoints_in(t0, t1);
  for (double e : extra) {
    if (e > t0 && e < t1) { bps.push_back(e); }
  }
  return TimeGrid(t0, t1, step, std::move(bps));
}

namespace {

TimeGrid merged_grid(const ControlSignal & u, const TimeGrid & interval)
{
  auto bps = interval.breakpoints();
  for (double b : u.breakpoints_in(interval.t0(), interval.t1())) { bps.push_back(b); }
  return TimeGrid(interval.t0(), interval.t1(), interval.step(), std::move(bps));
}

const Vec & segment_control(const ControlSignal & u, const std::vector<double> & bounds, std::size_t seg)
{
  return u.at(0.5 * (bounds[seg] + bounds[seg + 1]));
}

void check_control(const ControlSystem & sys, const ControlSignal & u)
{
  for (const auto & v : u.values()) {
    if (!sys.U.contains(v, 1e-9)) { throw std::invalid_argument("control value outside the control space"); }
  }
}

}  // namespace

Trajectory simulate_trajectory(const ControlSystem & sys, const ControlSignal & u, const Vec & x0, const TimeGrid & interval)
{
  if (static_cast<std::size_t>(x0.size()) != sys.alg.base_dim()) {
    throw std::invalid_argument("simulate_trajectory: x0 has wrong dimension");
  }
  check_control(sys, u);
  const TimeGrid grid = merged_grid(u, interval);
  const auto bounds = grid.segment_bounds();
  const auto curve = integrate(
    [&](std::size_t seg) {
      const Vec uk = segment_control(u, bounds, seg);
      return OdeRhs{sys.alg.base_dim(), [&sys, uk](double, const Vec & x) { return Vec(sys.alg.anchor(x) * sys.f(x, uk)); }};
    },
    grid,
    x0);

  Trajectory out{.path = EPath{.grid = grid, .t = curve.t, .x = curve.y, .a = {}}, .u = {}};
  const auto segs = curve.segments();
  for (std::size_t s = 0; s < segs.size(); ++s) {
    const Vec & uk = segment_control(u, bounds, s);
    for (std::size_t i = segs[s].first; i < segs[s].second; ++i) {
      out.path.a.push_back(sys.f(curve.y[i], uk));
      out.u.push_back(uk);
    }
  }
  return out;
}

ControlSystem extend_system(const ControlSystem & sys)
{
  const ExtendedAlgebroid ext = product_with_time(sys.alg);
  const auto n = static_cast<Eigen::Index>(sys.alg.base_dim());
  const auto m = static_cast<Eigen::Index>(sys.alg.fiber_dim());
  ControlSystem out{
    .alg = ext.inner,
    .f =
      [sys, n, m](const Vec & xe, const Vec & u) {
        const Vec x = xe.tail(n);
        Vec fe(m + 1);
        fe[0] = sys.L(x, u);
        fe.tail(m) = sys.f(x, u);
        return fe;
      },
    .L = [](const Vec &, const Vec &) { return 0.0; },
    .U = sys.U,
    .df_dx = std::nullopt,
    .dL_dx = std::nullopt,
    .fd_step = sys.fd_step,
  };
  out.df_dx = [sys, n, m](const Vec & xe, const Vec & u) {
    const Vec x = xe.tail(n);
    Mat j = Mat::Zero(m + 1, n + 1);
    j.block(0, 1, 1, n) = sys.L_x(x, u).transpose();
    j.block(1, 1, m, n) = sys.f_x(x, u);
    return j;
  };
  out.dL_dx = [n](const Vec &, const Vec &) { return Vec(Vec::Zero(n + 1)); };
  return out;
}

Vec transport_rhs(const ControlSystem & sys, const Vec & x, const Vec & u, const Vec & y)
{
  const Vec fx = sys.f(x, u);
  Vec dy = sys.alg.structure(x).bracket(y, fx);
  if (sys.alg.base_dim() > 0) { dy += sys.f_x(x, u) * (sys.alg.anchor(x) * y); }
  return dy;
}

Vec costate_rhs(const ControlSystem & sys, const Vec & x, const Vec & u, const Vec & z, double z0)
{
  Vec dz = sys.alg.structure(x).dual_action(sys.f(x, u), z);
  if (sys.alg.base_dim() > 0) {
    Vec inner = sys.f_x(x, u).transpose() * z;
    if (z0 != 0.0) { inner += z0 * sys.L_x(x, u); }
    dz -= sys.alg.anchor(x).transpose() * inner;
  }
  return dz;
}

namespace {

// Integrates (x, w) where w evolves by `fiber_rhs`; returns samples split back into x and w.
template<typename FiberRhs>
std::pair<SampledCurve, std::vector<Vec>> integrate_along(const ControlSystem & sys,
                                                          const ControlSignal & u,
                                                          const Vec & x0,
                                                          const TimeGrid & interval,
                                                          const Vec & w0,
                                                          FiberRhs fiber_rhs)
{
  if (static_cast<std::size_t>(x0.size()) != sys.alg.base_dim()) {
    throw std::invalid_argument("transport: x0 has wrong dimension");
  }
  check_control(sys, u);
  const auto n = x0.size();
  const auto k = w0.size();
  const TimeGrid grid = merged_grid(u, interval);
  const auto bounds = grid.segment_bounds();
  Vec y0(n + k);
  y0 << x0, w0;
  auto curve = integrate(
    [&](std::size_t seg) {
      const Vec uk = segment_control(u, bounds, seg);
      return OdeRhs{static_cast<std::size_t>(n + k), [&sys, uk, n, k, fiber_rhs](double, const Vec & s) {
                      const Vec x = s.head(n);
                      Vec d(n + k);
                      d.head(n) = sys.alg.anchor(x) * sys.f(x, uk);
                      d.tail(k) = fiber_rhs(x, uk, s.tail(k));
                      return d;
                    }};
    },
    grid,
    y0);
  std::vector<Vec> w;
  w.reserve(curve.size());
  for (auto & s : curve.y) {
    w.push_back(s.tail(k));
    Vec x = s.head(n);
    s = std::move(x);
  }
  return {std::move(curve), std::move(w)};
}

}  // namespace

FiberCurve transport_B(const ControlSystem & sys, const ControlSignal & u, const Vec & x0, const TimeGrid & interval, const Vec & y0)
{
  if (static_cast<std::size_t>(y0.size()) != sys.alg.fiber_dim()) {
    throw std::invalid_argument("transport_B: y0 has wrong dimension");
  }
  auto [curve, y] = integrate_along(sys, u, x0, interval, y0, [&sys](const Vec & x, const Vec & uk, const Vec & w) {
    return transport_rhs(sys, x, uk, w);
  });
  return FiberCurve{std::move(curve.t), std::move(curve.y), std::move(y)};
}

CostateCurve transport_Bbar(const ControlSystem & sys,
                            const ControlSignal & u,
                            const Vec & x0,
                            const TimeGrid & interval,
                            const Vec & z,
                            double z0)
{
  if (static_cast<std::size_t>(z.size()) != sys.alg.fiber_dim()) {
    throw std::invalid_argument("transport_Bbar: z has wrong dimension");
  }
  auto [curve, zs] = integrate_along(sys, u, x0, interval, z, [&sys, z0](const Vec & x, const Vec & uk, const Vec & w) {
    return costate_rhs(sys, x, uk, w, z0);
  });
  return CostateCurve{std::move(curve.t), std::move(curve.y), std::move(zs), z0};
}

TransportFrame transport_frame(const ControlSystem & sys, const ControlSignal & u, const Vec & x0, const TimeGrid & interval)
{
  const auto m = static_cast<Eigen::Index>(sys.alg.fiber_dim());
  Vec w0(2 * m * m);
  Eigen::Map<Mat>(w0.data(), m, m).setIdentity();
  Eigen::Map<Mat>(w0.data() + m * m, m, m).setIdentity();
  auto [curve, w] = integrate_along(sys, u, x0, interval, w0, [&sys, m](const Vec & x, const Vec & uk, const Vec & s) {
    Vec d(2 * m * m);
    const Eigen::Map<const Mat> B(s.data(), m, m);
    const Eigen::Map<const Mat> Bbar(s.data() + m * m, m, m);
    for (Eigen::Index c = 0; c < m; ++c) {
      d.segment(c * m, m) = transport_rhs(sys, x, uk, B.col(c));
      d.segment(m * m + c * m, m) = costate_rhs(sys, x, uk, Bbar.col(c), 0.0);
    }
    return d;
  });
  TransportFrame out;
  out.t = std::move(curve.t);
  for (const auto & s : w) {
    out.B.push_back(Eigen::Map<const Mat>(s.data(), m, m));
    out.Bbar.push_back(Eigen::Map<const Mat>(s.data() + m * m, m, m));
  }
  return out;
}

double pairing_drift(const ControlSystem & sys,
                     const ControlSignal & u,
                     const Vec & x0,
                     const TimeGrid & interval,
                     const Vec & y0,
                     const Vec & xi0)
{
  const auto m = static_cast<Eigen::Index>(sys.alg.fiber_dim());
  if (y0.size() != m || xi0.size() != m) { throw std::invalid_argument("pairing_drift: wrong fiber dimension"); }
  Vec w0(2 * m);
  w0 << y0, xi0;
  auto [curve, w] = integrate_along(sys, u, x0, interval, w0, [&sys, m](const Vec & x, const Vec & uk, const Vec & s) {
    Vec d(2 * m);
    d.head(m) = transport_rhs(sys, x, uk, s.head(m));
    d.tail(m) = costate_rhs(sys, x, uk, s.tail(m), 0.0);
    return d;
  });
  const double p0 = y0.dot(xi0);
  double drift = 0.0;
  for (const auto & s : w) { drift = std::max(drift, std::abs(s.head(m).dot(s.tail(m)) - p0)); }
  return drift;
}

}  // namespace alc
