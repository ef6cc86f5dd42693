#include "alcontrol/pmp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace alc {

double hamiltonian(const ControlSystem & sys, const Vec & z, double z0, const Vec & x, const Vec & u)
{
  const Vec f = sys.f(x, u);
  if (f.size() != z.size()) { throw std::invalid_argument("hamiltonian: covector dimension mismatch"); }
  double h = z.dot(f);
  if (z0 != 0.0) { h += z0 * sys.L(x, u); }
  return h;
}

namespace {

double golden_section_max(const std::function<double(double)> & g, double lo, double hi, double tol)
{
  constexpr double invphi = 0.6180339887498949;
  double a = lo, b = hi;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double gc = g(c), gd = g(d);
  for (int it = 0; it < 200 && (b - a) > tol * (1.0 + std::abs(a) + std::abs(b)); ++it) {
    if (gc >= gd) {
      b = d;
      d = c;
      gd = gc;
      c = b - invphi * (b - a);
      gc = g(c);
    } else {
      a = c;
      c = d;
      gc = gd;
      d = a + invphi * (b - a);
      gd = g(d);
    }
  }
  return gc >= gd ? c : d;
}

HamiltonianMax maximize_box(const ControlSystem & sys,
                            const ControlBox & box,
                            const Vec & z,
                            double z0,
                            const Vec & x,
                            const MaximizerOptions & opt)
{
  const auto p = box.lower.size();
  if (box.maximizer) {
    if (auto u = (*box.maximizer)(x, z, z0); u && sys.U.contains(*u, 1e-12)) {
      return HamiltonianMax{*u, hamiltonian(sys, z, z0, x, *u), false, 0};
    }
  }
  if (p > 3) { throw std::invalid_argument("maximize_hamiltonian: box controls with p > 3 need a registered maximizer"); }

  const std::size_t g = std::max<std::size_t>(opt.grid_points, 2);
  Vec best_u = box.lower;
  double best = -std::numeric_limits<double>::infinity();
  std::vector<std::size_t> idx(static_cast<std::size_t>(p), 0);
  Vec u(p);
  for (;;) {
    for (Eigen::Index k = 0; k < p; ++k) {
      const double frac = static_cast<double>(idx[static_cast<std::size_t>(k)]) / static_cast<double>(g - 1);
      u[k] = box.lower[k] + frac * (box.upper[k] - box.lower[k]);
    }
    const double h = hamiltonian(sys, z, z0, x, u);
    if (h > best) {
      best = h;
      best_u = u;
    }
    std::size_t k = 0;
    while (k < idx.size() && ++idx[k] == g) { idx[k++] = 0; }
    if (k == idx.size()) { break; }
  }

  // coordinate-wise golden-section refinement within one grid cell of the best node
  for (int sweep = 0; sweep < 4; ++sweep) {
    for (Eigen::Index k = 0; k < p; ++k) {
      const double cell = (box.upper[k] - box.lower[k]) / static_cast<double>(g - 1);
      const double lo = std::max(box.lower[k], best_u[k] - cell);
      const double hi = std::min(box.upper[k], best_u[k] + cell);
      if (!(hi > lo)) { continue; }
      Vec trial = best_u;
      const double arg = golden_section_max(
        [&](double v) {
          trial[k] = v;
          return hamiltonian(sys, z, z0, x, trial);
        },
        lo,
        hi,
        opt.golden_tol);
      trial[k] = arg;
      const double h = hamiltonian(sys, z, z0, x, trial);
      if (h >= best) {
        best = h;
        best_u = trial;
      }
    }
  }
  return HamiltonianMax{best_u, best, false, 0};
}

}  // namespace

HamiltonianMax maximize_hamiltonian(const ControlSystem & sys,
                                    const Vec & z,
                                    double z0,
                                    const Vec & x,
                                    const MaximizerOptions & options)
{
  if (!sys.U.is_finite()) { return maximize_box(sys, sys.U.box_set(), z, z0, x, options); }
  const auto & values = sys.U.finite_set().values;
  std::vector<double> h(values.size());
  std::size_t best = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    h[i] = hamiltonian(sys, z, z0, x, values[i]);
    if (h[i] > h[best]) { best = i; }
  }
  const double tol = options.tie_tol * (1.0 + std::abs(h[best]));
  bool tie = false;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i != best && h[i] >= h[best] - tol) { tie = true; }
  }
  return HamiltonianMax{values[best], h[best], tie, best};
}

namespace {

OdeRhs pmp_rhs(const ControlSystem & sys, const Vec & u, double z0)
{
  const auto n = static_cast<Eigen::Index>(sys.alg.base_dim());
  const auto m = static_cast<Eigen::Index>(sys.alg.fiber_dim());
  return OdeRhs{static_cast<std::size_t>(n + m), [&sys, u, z0, n, m](double, const Vec & s) {
                  const Vec x = s.head(n);
                  Vec d(n + m);
                  d.head(n) = sys.alg.anchor(x) * sys.f(x, u);
                  d.tail(m) = costate_rhs(sys, x, u, s.tail(m), z0);
                  return d;
                }};
}

PmpSolution assemble(const ControlSystem & sys,
                     const TimeGrid & interval,
                     double z0,
                     const std::vector<double> & ts,
                     const std::vector<Vec> & states,
                     const std::vector<Vec> & controls,
                     std::vector<bool> ties,
                     std::vector<double> switches)
{
  const auto n = static_cast<Eigen::Index>(sys.alg.base_dim());
  const auto m = static_cast<Eigen::Index>(sys.alg.fiber_dim());
  TimeGrid grid(interval.t0(), interval.t1(), interval.step(), switches);
  PmpSolution sol{
    .trajectory = Trajectory{.path = EPath{.grid = grid, .t = ts, .x = {}, .a = {}}, .u = controls},
    .costate = CostatePath{.grid = grid, .t = ts, .z = {}, .z0 = z0},
    .switch_times = std::move(switches),
    .tie = std::move(ties),
  };
  for (std::size_t i = 0; i < ts.size(); ++i) {
    Vec x = states[i].head(n);
    sol.trajectory.path.a.push_back(sys.f(x, controls[i]));
    sol.trajectory.path.x.push_back(std::move(x));
    sol.costate.z.push_back(states[i].tail(m));
  }
  return sol;
}

PmpSolution flow_box(const ControlSystem & sys,
                     const Vec & y0,
                     double z0,
                     const TimeGrid & interval,
                     const PmpFlowOptions & options)
{
  const auto n = static_cast<Eigen::Index>(sys.alg.base_dim());
  const auto m = static_cast<Eigen::Index>(sys.alg.fiber_dim());
  const TimeGrid grid(interval.t0(), interval.t1(), interval.step());
  const OdeRhs rhs{static_cast<std::size_t>(n + m), [&](double, const Vec & s) {
                     const Vec x = s.head(n);
                     const Vec z = s.tail(m);
                     const Vec u = maximize_hamiltonian(sys, z, z0, x, options.maximizer).u;
                     Vec d(n + m);
                     d.head(n) = sys.alg.anchor(x) * sys.f(x, u);
                     d.tail(m) = costate_rhs(sys, x, u, z, z0);
                     return d;
                   }};
  const auto curve = integrate(rhs, grid, y0);
  std::vector<Vec> controls;
  controls.reserve(curve.size());
  for (const auto & s : curve.y) {
    controls.push_back(maximize_hamiltonian(sys, s.tail(m), z0, s.head(n), options.maximizer).u);
  }
  return assemble(sys, interval, z0, curve.t, curve.y, controls, std::vector<bool>(curve.size(), false), {});
}

PmpSolution flow_finite(const ControlSystem & sys,
                        const Vec & y0,
                        double z0,
                        const TimeGrid & interval,
                        const PmpFlowOptions & options)
{
  const auto n = static_cast<Eigen::Index>(sys.alg.base_dim());
  const auto m = static_cast<Eigen::Index>(sys.alg.fiber_dim());
  const auto & values = sys.U.finite_set().values;
  const TimeGrid grid(interval.t0(), interval.t1(), interval.step());
  const auto nodes = grid.nodes();
  const double merge = grid.merge_tolerance();

  auto argmax = [&](const Vec & s) { return maximize_hamiltonian(sys, s.tail(m), z0, s.head(n), options.maximizer); };
  auto ham = [&](const Vec & s, std::size_t k) { return hamiltonian(sys, s.tail(m), z0, s.head(n), values[k]); };

  std::vector<double> ts;
  std::vector<Vec> states;
  std::vector<Vec> controls;
  std::vector<bool> ties;
  std::vector<double> switches;
  auto push = [&](double t, const Vec & s, std::size_t k, bool tie) {
    ts.push_back(t);
    states.push_back(s);
    controls.push_back(values[k]);
    ties.push_back(tie);
  };

  const double t1 = interval.t1();
  Vec y = y0;
  double t = nodes.front();
  auto start = argmax(y);
  std::size_t cur = start.index;
  push(t, y, cur, start.tie);
  bool last_uniform = false;
  std::size_t idx = 1;
  while (idx < nodes.size()) {
    const double t_next = nodes[idx];
    const OdeRhs rhs = pmp_rhs(sys, values[cur], z0);
    const Vec yn = rk4_step(rhs, t, y, t_next - t);
    if (!all_finite(yn)) { throw IntegrationDiverged(t_next); }
    const auto best = argmax(yn);
    const double gain = best.value - ham(yn, cur);
    const bool must_switch = best.index != cur && gain > options.maximizer.tie_tol * (1.0 + std::abs(best.value));
    if (!must_switch) {
      push(t_next, yn, cur, best.tie);
      t = t_next;
      y = yn;
      ++idx;
      last_uniform = true;
      continue;
    }

    double t_switch = t_next;
    Vec y_switch = yn;
    if (values.size() == 2) {
      // s(θ) = H(new) − H(cur) along the step; s(0) <= 0 < s(h)
      double lo = 0.0, hi = t_next - t;
      Vec y_hi = yn;
      while (hi - lo > options.switch_tol) {
        const double mid = 0.5 * (lo + hi);
        const Vec ym = rk4_step(rhs, t, y, mid);
        if (ham(ym, best.index) - ham(ym, cur) > 0.0) {
          hi = mid;
          y_hi = ym;
        } else {
          lo = mid;
        }
      }
      t_switch = t + hi;
      y_switch = y_hi;
    }

    if (t1 - t_switch < merge) {
      // a switch this close to the end has no effect on the sampled extremal
      push(t_next, yn, cur, true);
      t = t_next;
      y = yn;
      ++idx;
      continue;
    }
    if (t_switch - t < merge && last_uniform && t_switch != t_next) {
      // drop the preceding uniform node so breakpoints stay well separated from nodes
      ts.pop_back();
      states.pop_back();
      controls.pop_back();
      ties.pop_back();
      y_switch = rk4_step(rhs, ts.back(), states.back(), t_switch - ts.back());
    }

    const std::size_t next = argmax(y_switch).index == cur ? best.index : argmax(y_switch).index;
    push(t_switch, y_switch, cur, true);
    push(t_switch, y_switch, next, true);
    switches.push_back(t_switch);
    if (switches.size() > options.max_switches) { throw ChatteringError(options.max_switches); }
    cur = next;
    t = t_switch;
    y = y_switch;
    last_uniform = false;
    if (t_switch == t_next || (t_next - t_switch < merge && t_next != t1)) { ++idx; }
  }
  return assemble(sys, interval, z0, ts, states, controls, std::move(ties), std::move(switches));
}

}  // namespace

PmpSolution integrate_pmp_flow(const ControlSystem & sys,
                               const Vec & x0,
                               const Vec & z_init,
                               double z0,
                               const TimeGrid & interval,
                               const PmpFlowOptions & options)
{
  const auto n = static_cast<Eigen::Index>(sys.alg.base_dim());
  const auto m = static_cast<Eigen::Index>(sys.alg.fiber_dim());
  if (x0.size() != n || z_init.size() != m) { throw std::invalid_argument("integrate_pmp_flow: dimension mismatch"); }
  if (!all_finite(x0) || !all_finite(z_init) || !std::isfinite(z0)) {
    throw std::invalid_argument("integrate_pmp_flow: non-finite initial data");
  }
  Vec y0(n + m);
  y0 << x0, z_init;
  if (sys.U.is_finite()) { return flow_finite(sys, y0, z0, interval, options); }
  return flow_box(sys, y0, z0, interval, options);
}

ExtremalAudit verify_extremal(const ControlSystem & sys,
                              const Trajectory & traj,
                              const CostatePath & costate,
                              HorizonMode mode,
                              const AuditOptions & options)
{
  const auto & t = traj.path.t;
  if (costate.t.size() != t.size() || traj.u.size() != t.size() || traj.path.x.size() != t.size()
      || costate.z.size() != t.size()) {
    throw std::invalid_argument("verify_extremal: grid mismatch (sample counts differ)");
  }
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (std::abs(costate.t[i] - t[i]) > 1e-12 * (1.0 + std::abs(t[i]))) {
      throw std::invalid_argument("verify_extremal: grid mismatch at sample " + std::to_string(i));
    }
  }

  ExtremalAudit audit;
  audit.z0 = costate.z0;
  audit.tolerance = options.tol;
  audit.mode = mode;
  const double z0 = costate.z0;
  const auto segs = segment_ranges(t);

  // sampled competitors for box controls
  std::vector<Vec> box_candidates;
  if (!sys.U.is_finite()) {
    const auto & box = sys.U.box_set();
    const auto p = box.lower.size();
    const std::size_t g = std::max<std::size_t>(options.box_samples, 2);
    std::vector<std::size_t> idx(static_cast<std::size_t>(p), 0);
    for (;;) {
      Vec v(p);
      for (Eigen::Index k = 0; k < p; ++k) {
        const double frac = static_cast<double>(idx[static_cast<std::size_t>(k)]) / static_cast<double>(g - 1);
        v[k] = box.lower[k] + frac * (box.upper[k] - box.lower[k]);
      }
      box_candidates.push_back(v);
      std::size_t k = 0;
      while (k < idx.size() && ++idx[k] == g) { idx[k++] = 0; }
      if (k == idx.size()) { break; }
    }
  }

  audit.covector_min_norm = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < t.size(); ++i) {
    const Vec & x = traj.path.x[i];
    const Vec & z = costate.z[i];
    const double h = hamiltonian(sys, z, z0, x, traj.u[i]);
    audit.hamiltonian_values.push_back(h);
    audit.covector_min_norm = std::min(audit.covector_min_norm, z.norm());

    const bool at_breakpoint = (i > 0 && t[i - 1] == t[i]) || (i + 1 < t.size() && t[i + 1] == t[i]);
    if (at_breakpoint) { continue; }
    ++audit.checked_nodes;
    double best = h;
    if (sys.U.is_finite()) {
      const auto mx = maximize_hamiltonian(sys, z, z0, x, options.maximizer);
      best = std::max(best, mx.value);
      const double tie_tol = options.maximizer.tie_tol * (1.0 + std::abs(mx.value));
      std::size_t attaining = 0;
      for (const auto & v : sys.U.finite_set().values) {
        if (hamiltonian(sys, z, z0, x, v) >= mx.value - tie_tol) { ++attaining; }
      }
      if (attaining > 1) { ++audit.tie_nodes; }
    } else {
      best = std::max(best, maximize_hamiltonian(sys, z, z0, x, options.maximizer).value);
      for (const auto & v : box_candidates) { best = std::max(best, hamiltonian(sys, z, z0, x, v)); }
    }
    audit.max_condition_violation = std::max(audit.max_condition_violation, best - h);
  }

  // costate flow residual, five-point stencils inside each smooth segment
  std::size_t skipped = 0;
  for (const auto & seg : segs) {
    if (seg.second - seg.first < 3) {
      ++skipped;
      continue;
    }
    for (std::size_t i = seg.first; i < seg.second; ++i) {
      const Vec zdot = sample_derivative(costate.t, costate.z, i, seg, 5);
      const Vec expected = costate_rhs(sys, traj.path.x[i], traj.u[i], costate.z[i], z0);
      audit.costate_residual = std::max(audit.costate_residual, (zdot - expected).norm());
    }
  }
  if (skipped > 0) { audit.notes.push_back(std::to_string(skipped) + " segment(s) too short for the costate residual"); }

  const auto & hv = audit.hamiltonian_values;
  if (mode == HorizonMode::free_time) {
    for (double h : hv) { audit.h_drift = std::max(audit.h_drift, std::abs(h)); }
  } else {
    const double mean = std::accumulate(hv.begin(), hv.end(), 0.0) / static_cast<double>(hv.size());
    for (double h : hv) { audit.h_drift = std::max(audit.h_drift, std::abs(h - mean)); }
  }

  audit.max_condition_ok = audit.max_condition_violation <= options.tol;
  audit.costate_flow_ok = audit.costate_residual <= options.tol;
  audit.hamiltonian_ok = audit.h_drift <= options.tol;
  audit.multiplier_ok = z0 <= 0.0;
  if (z0 > 0.0) { audit.notes.push_back("z0 > 0 violates the sign condition z0 <= 0"); }
  if (z0 == 0.0) {
    audit.notes.push_back("abnormal multiplier z0 = 0 accepted; the extended-algebroid form asks for z0 < 0");
    if (!(audit.covector_min_norm > options.tol)) {
      audit.multiplier_ok = false;
      audit.notes.push_back("vanishing covector: z0 = 0 requires z(t) != 0 everywhere");
    }
  }
  audit.permanently_singular = audit.checked_nodes > 0 && audit.tie_nodes == audit.checked_nodes;
  if (audit.permanently_singular) { audit.notes.push_back("maximizer is not unique at any checked node (singular extremal)"); }
  else if (audit.tie_nodes > 0) { audit.notes.push_back(std::to_string(audit.tie_nodes) + " node(s) with a non-unique maximizer"); }
  return audit;
}

void VariationSymbol::validate(double t0) const
{
  if (taus.size() != vs.size() || taus.size() != dts.size()) {
    throw std::invalid_argument("VariationSymbol: taus, vs and dts must have equal length");
  }
  for (std::size_t i = 0; i < taus.size(); ++i) {
    if (!(taus[i] > t0 && taus[i] <= tau)) { throw std::invalid_argument("VariationSymbol: need t0 < tau_i <= tau"); }
    if (i > 0 && taus[i] < taus[i - 1]) { throw std::invalid_argument("VariationSymbol: taus must be ordered"); }
    if (dts[i] < 0.0) { throw std::invalid_argument("VariationSymbol: dt_i must be non-negative"); }
  }
}

Vec needle_vector(const ControlSystem & ext_sys,
                  const ControlSignal & u,
                  const Vec & ext_x0,
                  double t0,
                  double step,
                  const VariationSymbol & symbol,
                  const Vec & c_init)
{
  symbol.validate(t0);
  for (double ti : symbol.taus) {
    if (u.is_breakpoint(ti, 1e-12)) { throw std::invalid_argument("needle_vector: tau_i at a discontinuity of u"); }
  }
  const auto m = static_cast<Eigen::Index>(ext_sys.alg.fiber_dim());
  if (c_init.size() != m) { throw std::invalid_argument("needle_vector: c_init has wrong dimension"); }
  const double tau = symbol.tau;

  // base trajectory on [t0, τ] with every τ_i as a node
  Vec x_tau = ext_x0;
  std::vector<Vec> x_at(symbol.taus.size());
  if (tau > t0) {
    const TimeGrid grid = control_grid(u, t0, tau, step, symbol.taus);
    const auto traj = simulate_trajectory(ext_sys, u, ext_x0, grid);
    const auto & ts = traj.path.t;
    for (std::size_t i = 0; i < symbol.taus.size(); ++i) {
      const auto it = std::lower_bound(ts.begin(), ts.end(), symbol.taus[i]);
      x_at[i] = traj.path.x[static_cast<std::size_t>(it - ts.begin())];
    }
    x_tau = traj.path.x.back();
  }

  Vec d = ext_sys.f(x_tau, u.left_limit(tau)) * symbol.dt;
  if (c_init.squaredNorm() > 0.0 && tau > t0) {
    d += transport_B(ext_sys, u, ext_x0, TimeGrid(t0, tau, step), c_init).y.back();
  } else if (tau <= t0) {
    d += c_init;
  }
  for (std::size_t i = 0; i < symbol.taus.size(); ++i) {
    if (symbol.dts[i] == 0.0) { continue; }
    const double ti = symbol.taus[i];
    const Vec w = ext_sys.f(x_at[i], symbol.vs[i]) - ext_sys.f(x_at[i], u.at(ti));
    if (ti < tau) {
      d += symbol.dts[i] * transport_B(ext_sys, u, x_at[i], TimeGrid(ti, tau, step), w).y.back();
    } else {
      d += symbol.dts[i] * w;
    }
  }
  return d;
}

std::vector<Vec> needle_vectors(const ControlSystem & ext_sys,
                                const ControlSignal & u,
                                const Vec & ext_x0,
                                double t0,
                                double step,
                                const std::vector<VariationSymbol> & symbols,
                                const Vec & c_init)
{
  std::vector<double> extra;
  double t_end = t0;
  for (const auto & s : symbols) {
    s.validate(t0);
    for (double ti : s.taus) {
      if (u.is_breakpoint(ti, 1e-12)) { throw std::invalid_argument("needle_vectors: tau_i at a discontinuity of u"); }
      extra.push_back(ti);
    }
    extra.push_back(s.tau);
    t_end = std::max(t_end, s.tau);
  }
  std::vector<Vec> out;
  out.reserve(symbols.size());
  if (!(t_end > t0)) {
    for (const auto & s : symbols) { out.push_back(needle_vector(ext_sys, u, ext_x0, t0, step, s, c_init)); }
    return out;
  }

  const TimeGrid grid = control_grid(u, t0, t_end, step, extra);
  const auto traj = simulate_trajectory(ext_sys, u, ext_x0, grid);
  const auto frame = transport_frame(ext_sys, u, ext_x0, grid);
  auto node = [&](double s) {
    const auto it = std::lower_bound(frame.t.begin(), frame.t.end(), s);
    if (it == frame.t.end() || *it != s) { throw std::logic_error("needle_vectors: time is not a grid node"); }
    return static_cast<std::size_t>(it - frame.t.begin());
  };
  for (const auto & s : symbols) {
    const std::size_t k = node(s.tau);
    const Mat & Bt = frame.B[k];
    Vec d = ext_sys.f(traj.path.x[k], u.left_limit(s.tau)) * s.dt + Bt * c_init;
    for (std::size_t i = 0; i < s.taus.size(); ++i) {
      if (s.dts[i] == 0.0) { continue; }
      const std::size_t ki = node(s.taus[i]);
      const Vec & xi = traj.path.x[ki];
      const Vec w = ext_sys.f(xi, s.vs[i]) - ext_sys.f(xi, u.at(s.taus[i]));
      d += s.dts[i] * (Bt * frame.B[ki].partialPivLu().solve(w));
    }
    out.push_back(std::move(d));
  }
  return out;
}

std::vector<VariationSymbol> random_symbols(const ControlSignal & u,
                                            const ControlSpace & U,
                                            double t0,
                                            double t1,
                                            std::size_t count,
                                            std::uint64_t seed,
                                            std::size_t max_terms,
                                            std::optional<double> fixed_tau)
{
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<VariationSymbol> out;
  out.reserve(count);
  const double span = t1 - t0;
  while (out.size() < count) {
    VariationSymbol s;
    s.tau = fixed_tau ? *fixed_tau : t0 + span * (0.05 + 0.95 * unit(rng));
    const std::size_t terms = 1 + static_cast<std::size_t>(unit(rng) * static_cast<double>(max_terms)) % max_terms;
    for (std::size_t k = 0; k < terms; ++k) {
      double ti = t0 + (s.tau - t0) * unit(rng);
      int guard = 0;
      while ((ti <= t0 || u.is_breakpoint(ti, 1e-6)) && guard++ < 100) { ti = t0 + (s.tau - t0) * unit(rng); }
      s.taus.push_back(ti);
      if (U.is_finite()) {
        const auto & vals = U.finite_set().values;
        s.vs.push_back(vals[static_cast<std::size_t>(unit(rng) * static_cast<double>(vals.size())) % vals.size()]);
      } else {
        const auto & b = U.box_set();
        Vec v(b.lower.size());
        for (Eigen::Index k2 = 0; k2 < v.size(); ++k2) { v[k2] = b.lower[k2] + unit(rng) * (b.upper[k2] - b.lower[k2]); }
        s.vs.push_back(v);
      }
      s.dts.push_back(unit(rng));
    }
    // keep taus ordered together with their data
    std::vector<std::size_t> order(terms);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return s.taus[a] < s.taus[b]; });
    VariationSymbol sorted{.taus = {}, .vs = {}, .tau = s.tau, .dts = {}, .dt = 2.0 * unit(rng) - 1.0};
    for (std::size_t k : order) {
      sorted.taus.push_back(s.taus[k]);
      sorted.vs.push_back(s.vs[k]);
      sorted.dts.push_back(s.dts[k]);
    }
    out.push_back(std::move(sorted));
  }
  return out;
}

ConeSupportReport cone_support_check(const std::vector<Vec> & needles, const Vec & z_ext, double tol)
{
  if (needles.empty()) { throw std::invalid_argument("cone_support_check: no needles"); }
  ConeSupportReport r;
  r.tolerance = tol;
  r.max_pairing = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < needles.size(); ++i) {
    const double p = needles[i].dot(z_ext);
    if (p > r.max_pairing) {
      r.max_pairing = p;
      r.argmax = i;
    }
  }
  r.pass = r.max_pairing <= tol;
  return r;
}

ConeSupportReport extremal_cone_check(const ControlSystem & sys,
                                      const PmpSolution & solution,
                                      std::size_t symbols,
                                      std::uint64_t seed,
                                      bool free_time,
                                      double tol)
{
  const auto & path = solution.trajectory.path;
  const double t0 = path.t.front();
  const double t1 = path.t.back();
  const ControlSignal u = control_signal_of(solution.trajectory);
  const ControlSystem ext = extend_system(sys);
  Vec ext_x0(path.x.front().size() + 1);
  ext_x0 << 0.0, path.x.front();
  auto syms = random_symbols(u, sys.U, t0, t1, symbols, seed, 3, t1);
  if (!free_time) {
    for (auto & s : syms) { s.dt = 0.0; }
  }
  const auto needles = needle_vectors(ext, u, ext_x0, t0, path.grid.step(), syms, Vec::Zero(static_cast<Eigen::Index>(sys.alg.fiber_dim() + 1)));
  Vec z_ext(static_cast<Eigen::Index>(sys.alg.fiber_dim() + 1));
  z_ext << solution.costate.z0, solution.costate.z.back();
  return cone_support_check(needles, z_ext, tol);
}

namespace {

Mat hat(const Vec & w)
{
  Mat m(3, 3);
  m << 0.0, -w[2], w[1], w[2], 0.0, -w[0], -w[1], w[0], 0.0;
  return m;
}

// left multiplication by the quaternion (w, x, y, z) on ℝ⁴
Mat quaternion_left(double w, double x, double y, double z)
{
  Mat m(4, 4);
  m << w, -x, -y, -z, x, w, -z, y, y, z, w, -x, z, -y, x, w;
  return m;
}

Mat rk4_matrix_step(const std::function<Mat(double)> & generator, double t, const Mat & g, double h)
{
  const Mat a0 = generator(t);
  const Mat am = generator(t + 0.5 * h);
  const Mat a1 = generator(t + h);
  const Mat k1 = g * a0;
  const Mat k2 = (g + 0.5 * h * k1) * am;
  const Mat k3 = (g + 0.5 * h * k2) * am;
  const Mat k4 = (g + h * k3) * a1;
  return g + h * ((k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0);
}

Mat polar_projection(const Mat & g)
{
  Eigen::JacobiSVD<Mat> svd(g, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().transpose();
}

}  // namespace

GroupRepresentation GroupRepresentation::so3()
{
  GroupRepresentation r{.name = "SO(3)", .basis = {}, .orthogonal = true};
  for (int i = 0; i < 3; ++i) { r.basis.push_back(hat(Vec::Unit(3, i))); }
  return r;
}

GroupRepresentation GroupRepresentation::su2()
{
  GroupRepresentation r{.name = "SU(2)", .basis = {}, .orthogonal = true};
  r.basis.push_back(0.5 * quaternion_left(0, 1, 0, 0));
  r.basis.push_back(0.5 * quaternion_left(0, 0, 1, 0));
  r.basis.push_back(0.5 * quaternion_left(0, 0, 0, 1));
  return r;
}

double check_representation(const ChartAlgebroid & alg, const GroupRepresentation & rep, double tol)
{
  if (alg.base_dim() != 0) { throw RepresentationError("group development needs a Lie algebra (point base)"); }
  const std::size_t m = alg.fiber_dim();
  if (rep.basis.size() != m) { throw RepresentationError("representation has the wrong number of basis images"); }
  const StructureTensor c = alg.structure(Vec(0));
  double worst = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      Mat image = Mat::Zero(rep.basis[0].rows(), rep.basis[0].cols());
      for (std::size_t k = 0; k < m; ++k) { image += c(k, i, j) * rep.basis[k]; }
      const Mat comm = rep.basis[i] * rep.basis[j] - rep.basis[j] * rep.basis[i];
      worst = std::max(worst, (image - comm).cwiseAbs().maxCoeff());
    }
  }
  if (worst > tol) {
    throw RepresentationError("representation is not bracket-compatible (max error " + std::to_string(worst) + ")");
  }
  return worst;
}

Mat develop_to_group(const ChartAlgebroid & alg, const EPath & path, const GroupRepresentation & rep)
{
  check_representation(alg, rep);
  const auto d = rep.basis.front().rows();
  auto generator_of = [&](const Vec & a) {
    Mat A = Mat::Zero(d, d);
    for (Eigen::Index i = 0; i < a.size(); ++i) { A += a[i] * rep.basis[static_cast<std::size_t>(i)]; }
    return A;
  };

  Mat g = Mat::Identity(d, d);
  std::size_t steps = 0;
  for (const auto & [b, e] : path.segments()) {
    const CurveInterpolant a(std::vector<double>(path.t.begin() + static_cast<std::ptrdiff_t>(b),
                                                 path.t.begin() + static_cast<std::ptrdiff_t>(e)),
                             std::vector<Vec>(path.a.begin() + static_cast<std::ptrdiff_t>(b),
                                              path.a.begin() + static_cast<std::ptrdiff_t>(e)));
    const std::function<Mat(double)> gen = [&](double t) { return generator_of(a(t)); };
    for (std::size_t i = b; i + 1 < e; ++i) {
      g = rk4_matrix_step(gen, path.t[i], g, path.t[i + 1] - path.t[i]);
      if (rep.orthogonal && ++steps % 100 == 0) { g = polar_projection(g); }
    }
  }
  if (rep.orthogonal) { g = polar_projection(g); }
  return g;
}

NelderMeadResult nelder_mead(const std::function<double(const Vec &)> & fn,
                             const Vec & x0,
                             double initial_step,
                             std::size_t max_evaluations,
                             double f_target)
{
  const auto n = x0.size();
  std::vector<Vec> simplex(static_cast<std::size_t>(n + 1), x0);
  std::vector<double> values(static_cast<std::size_t>(n + 1));
  std::size_t evals = 0;
  auto eval = [&](const Vec & x) {
    ++evals;
    const double v = fn(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::max();
  };
  for (Eigen::Index i = 0; i < n; ++i) {
    simplex[static_cast<std::size_t>(i + 1)][i] += initial_step * (1.0 + std::abs(x0[i]));
  }
  for (std::size_t i = 0; i < simplex.size(); ++i) { values[i] = eval(simplex[i]); }

  std::vector<std::size_t> order(simplex.size());
  while (evals < max_evaluations) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    const std::size_t best = order.front(), worst = order.back(), second = order[order.size() - 2];
    if (values[best] <= f_target) { break; }
    double diameter = 0.0;
    for (const auto & p : simplex) { diameter = std::max(diameter, (p - simplex[best]).cwiseAbs().maxCoeff()); }
    if (diameter < 1e-13 && values[worst] - values[best] < 1e-15) { break; }

    Vec centroid = Vec::Zero(n);
    for (std::size_t i = 0; i < simplex.size(); ++i) {
      if (i != worst) { centroid += simplex[i]; }
    }
    centroid /= static_cast<double>(n);

    const Vec reflected = centroid + (centroid - simplex[worst]);
    const double fr = eval(reflected);
    if (fr < values[best]) {
      const Vec expanded = centroid + 2.0 * (centroid - simplex[worst]);
      const double fe = eval(expanded);
      if (fe < fr) {
        simplex[worst] = expanded;
        values[worst] = fe;
      } else {
        simplex[worst] = reflected;
        values[worst] = fr;
      }
      continue;
    }
    if (fr < values[second]) {
      simplex[worst] = reflected;
      values[worst] = fr;
      continue;
    }
    const bool outside = fr < values[worst];
    const Vec contracted = outside ? Vec(centroid + 0.5 * (reflected - centroid)) : Vec(centroid + 0.5 * (simplex[worst] - centroid));
    const double fc = eval(contracted);
    if (fc < std::min(fr, values[worst])) {
      simplex[worst] = contracted;
      values[worst] = fc;
      continue;
    }
    for (std::size_t i = 0; i < simplex.size(); ++i) {
      if (i == best) { continue; }
      simplex[i] = simplex[best] + 0.5 * (simplex[i] - simplex[best]);
      values[i] = eval(simplex[i]);
    }
  }
  const auto it = std::min_element(values.begin(), values.end());
  return NelderMeadResult{simplex[static_cast<std::size_t>(it - values.begin())], *it, evals};
}

ShootResult shoot_endpoint(const ControlSystem & sys,
                           const GroupRepresentation & rep,
                           const Mat & target,
                           double z0,
                           const Vec & z_guess,
                           double t0,
                           double t1_guess,
                           const ShootOptions & options)
{
  check_representation(sys.alg, rep);
  const auto m = static_cast<Eigen::Index>(sys.alg.fiber_dim());
  const auto d = rep.basis.front().rows();
  if (target.rows() != d || target.cols() != d) { throw std::invalid_argument("shoot_endpoint: target has wrong shape"); }

  auto horizon = [&](const Vec & p) { return options.free_time ? t0 + std::abs(p[m]) : t1_guess; };
  auto endpoint = [&](const Vec & p) -> Mat {
    const double t1 = horizon(p);
    if (t1 - t0 <= 1e-3 * options.step) { return Mat::Identity(d, d); }
    const auto sol = integrate_pmp_flow(sys, Vec(0), p.head(m), z0, TimeGrid(t0, t1, options.step), options.flow);
    return develop_to_group(sys.alg, sol.trajectory.path, rep);
  };
  auto objective = [&](const Vec & p) {
    try {
      return (endpoint(p) - target).norm();
    } catch (const ChatteringError &) {
      return 1e6;
    } catch (const IntegrationDiverged &) {
      return 1e6;
    }
  };

  Vec p0(options.free_time ? m + 1 : m);
  p0.head(m) = z_guess;
  if (options.free_time) { p0[m] = t1_guess - t0; }

  ShootResult r;
  Vec best = p0;
  double best_value = objective(p0);
  r.evaluations = 1;
  double simplex = options.initial_simplex;
  // restarts from the incumbent with a shrinking simplex
  while (r.evaluations < options.max_evaluations && best_value >= options.success_residual * 1e-2) {
    const auto nm = nelder_mead(objective, best, simplex, options.max_evaluations - r.evaluations, options.success_residual * 1e-2);
    r.evaluations += nm.evaluations;
    const bool improved = nm.value < best_value;
    if (improved) {
      best = nm.x;
      best_value = nm.value;
    }
    simplex *= improved ? 0.5 : 0.25;
    if (simplex < 1e-10) { break; }
  }
  r.z_init = best.head(m);
  r.t1 = horizon(best);
  r.residual = best_value;
  r.converged = best_value < options.success_residual;
  return r;
}

Vec TimeDependentSystem::f_t(const Vec & x, double t, const Vec & u) const
{
  if (df_dt) { return (*df_dt)(x, t, u); }
  return (f(x, t + fd_step, u) - f(x, t - fd_step, u)) / (2.0 * fd_step);
}

double TimeDependentSystem::L_t(const Vec & x, double t, const Vec & u) const
{
  if (dL_dt) { return (*dL_dt)(x, t, u); }
  return (L(x, t + fd_step, u) - L(x, t - fd_step, u)) / (2.0 * fd_step);
}

ControlSystem autonomize(const TimeDependentSystem & sys)
{
  const auto n = static_cast<Eigen::Index>(sys.alg.base_dim());
  const auto m = static_cast<Eigen::Index>(sys.alg.fiber_dim());
  ControlSystem out{
    .alg = product(sys.alg, ChartAlgebroid::tangent_bundle(1), sys.alg.name() + "xTR"),
    .f =
      [sys, n, m](const Vec & xe, const Vec & u) {
        Vec fe(m + 1);
        fe.head(m) = sys.f(xe.head(n), xe[n], u);
        fe[m] = 1.0;
        return fe;
      },
    .L = [sys, n](const Vec & xe, const Vec & u) { return sys.L(xe.head(n), xe[n], u); },
    .U = sys.U,
    .df_dx = std::nullopt,
    .dL_dx = std::nullopt,
    .fd_step = sys.fd_step,
  };
  out.df_dx = [sys, n, m](const Vec & xe, const Vec & u) {
    const Vec x = xe.head(n);
    const double t = xe[n];
    Mat j = Mat::Zero(m + 1, n + 1);
    j.block(0, 0, m, n) = sys.df_dx ? (*sys.df_dx)(x, t, u)
                                    : finite_difference_jacobian([&](const Vec & p) { return sys.f(p, t, u); }, x, sys.fd_step);
    j.block(0, n, m, 1) = sys.f_t(x, t, u);
    return j;
  };
  out.dL_dx = [sys, n](const Vec & xe, const Vec & u) {
    const Vec x = xe.head(n);
    const double t = xe[n];
    Vec g(n + 1);
    g.head(n) = sys.dL_dx ? (*sys.dL_dx)(x, t, u)
                          : finite_difference_gradient([&](const Vec & p) { return sys.L(p, t, u); }, x, sys.fd_step);
    g[n] = sys.L_t(x, t, u);
    return g;
  };
  return out;
}

TimeDependenceAudit audit_time_dependence(const TimeDependentSystem & sys, const PmpSolution & solution)
{
  const auto n = static_cast<Eigen::Index>(sys.alg.base_dim());
  const auto m = static_cast<Eigen::Index>(sys.alg.fiber_dim());
  const auto & t = solution.trajectory.path.t;
  const double z0 = solution.costate.z0;

  TimeDependenceAudit audit;
  std::vector<Vec> h_samples;
  std::vector<double> expected;
  std::vector<double> extended;
  const double xi0 = solution.costate.z.front()[m];
  for (std::size_t i = 0; i < t.size(); ++i) {
    const Vec & xe = solution.trajectory.path.x[i];
    const Vec & ze = solution.costate.z[i];
    const Vec & u = solution.trajectory.u[i];
    const Vec x = xe.head(n);
    const double clock = xe[n];
    const Vec z = ze.head(m);
    audit.clock_error = std::max(audit.clock_error, std::abs(clock - t[i]));
    const double h = z.dot(sys.f(x, clock, u)) + z0 * sys.L(x, clock, u);
    audit.hamiltonian_values.push_back(h);
    h_samples.push_back(Vec::Constant(1, h));
    expected.push_back(z.dot(sys.f_t(x, clock, u)) + z0 * sys.L_t(x, clock, u));
    extended.push_back(h + ze[m]);
    audit.clock_costate_drift = std::max(audit.clock_costate_drift, std::abs(ze[m] - xi0));
  }
  for (const auto & seg : segment_ranges(t)) {
    if (seg.second - seg.first < 3) { continue; }
    for (std::size_t i = seg.first; i < seg.second; ++i) {
      const double dh = sample_derivative(t, h_samples, i, seg, 5)[0];
      audit.dhdt_error = std::max(audit.dhdt_error, std::abs(dh - expected[i]));
    }
  }
  for (double e : extended) { audit.extended_h_drift = std::max(audit.extended_h_drift, std::abs(e - extended.front())); }
  return audit;
}

}  // namespace alc
