#include "alcontrol/paths.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace alc {

EPath sample_path(const TimeGrid & grid,
                  const std::function<Vec(double)> & base,
                  const std::function<Vec(double, std::size_t)> & fiber)
{
  EPath p{.grid = grid, .t = {}, .x = {}, .a = {}};
  for (std::size_t seg = 0; seg < grid.segment_count(); ++seg) {
    for (double t : grid.segment_nodes(seg)) {
      p.t.push_back(t);
      p.x.push_back(base(t));
      p.a.push_back(fiber(t, seg));
    }
  }
  return p;
}

double admissibility_residual(const ChartAlgebroid & alg, const EPath & p)
{
  const auto xdot = sample_derivatives(p.t, p.x, 3);
  double worst = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    worst = std::max(worst, (xdot[i] - anchor_apply(alg, p.x[i], p.a[i])).norm());
  }
  return worst;
}

EPath compose_paths(const EPath & p, const EPath & q, double tol)
{
  const double gap = (p.x.back() - q.x.front()).norm();
  if (gap > tol) { throw CompositionError(gap); }
  const double shift = p.t.back() - q.t.front();
  const double t1 = q.t.back() + shift;

  std::vector<double> bps = p.grid.breakpoints();
  bps.push_back(p.t.back());
  for (double b : q.grid.breakpoints()) { bps.push_back(b + shift); }

  EPath out{.grid = TimeGrid(p.t.front(), t1, p.grid.step(), bps), .t = p.t, .x = p.x, .a = p.a};
  out.t.reserve(p.size() + q.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    // the junction is duplicated; the shifted start equals p.t.back() exactly
    out.t.push_back(i == 0 ? p.t.back() : q.t[i] + shift);
    out.x.push_back(i == 0 ? p.x.back() : q.x[i]);
    out.a.push_back(q.a[i]);
  }
  return out;
}

EPath reparameterize_unit(const EPath & p)
{
  const double t0 = p.t.front();
  const double t1 = p.t.back();
  const double len = t1 - t0;
  if (t0 == 0.0 && t1 == 1.0) { return p; }

  std::vector<double> bps;
  for (double b : p.grid.breakpoints()) { bps.push_back((b - t0) / len); }
  EPath out{.grid = TimeGrid(0.0, 1.0, p.grid.step() / len, bps), .t = {}, .x = p.x, .a = {}};
  out.t.reserve(p.size());
  out.a.reserve(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    out.t.push_back((p.t[i] - t0) / len);
    out.a.push_back(len * p.a[i]);
  }
  out.t.front() = 0.0;
  out.t.back() = 1.0;
  return out;
}

EPath HomotopyField::t_slice(std::size_t j, double step) const
{
  std::vector<double> bps;
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (t[i] == t[i - 1]) { bps.push_back(t[i]); }
  }
  EPath p{.grid = TimeGrid(t.front(), t.back(), step, bps), .t = t, .x = {}, .a = {}};
  for (std::size_t i = 0; i < t.size(); ++i) {
    p.x.push_back(x[i][j]);
    p.a.push_back(a[i][j]);
  }
  return p;
}

namespace {

// Three-point derivative along ε at (i, j) of field[i][*].
Vec eps_derivative(const std::vector<double> & eps, const std::vector<Vec> & column, std::size_t j)
{
  return sample_derivative(eps, column, j, {0, eps.size()}, 3);
}

std::vector<Vec> column_of(const std::vector<std::vector<Vec>> & f, std::size_t j)
{
  std::vector<Vec> col;
  col.reserve(f.size());
  for (const auto & row : f) { col.push_back(row[j]); }
  return col;
}

}  // namespace

HomotopyResidual homotopy_residual(const ChartAlgebroid & alg, const HomotopyField & h)
{
  HomotopyResidual r;
  const std::size_t nt = h.t.size();
  const std::size_t ne = h.eps.size();
  if (nt < 3 || ne < 3) { throw std::invalid_argument("homotopy_residual: need at least 3 nodes per axis"); }

  // t-derivatives per ε column
  std::vector<std::vector<Vec>> bt(ne), xt(ne);
  for (std::size_t j = 0; j < ne; ++j) {
    bt[j] = sample_derivatives(h.t, column_of(h.b, j), 3);
    xt[j] = sample_derivatives(h.t, column_of(h.x, j), 3);
  }
  for (std::size_t i = 0; i < nt; ++i) {
    for (std::size_t j = 0; j < ne; ++j) {
      const Vec & x = h.x[i][j];
      const Mat rho = alg.anchor(x);
      const Vec ae = eps_derivative(h.eps, h.a[i], j);
      const Vec xe = eps_derivative(h.eps, h.x[i], j);
      const Vec eq = bt[j][i] - ae - alg.structure(x).bracket(h.b[i][j], h.a[i][j]);
      r.equation = std::max(r.equation, eq.norm());
      r.a_admissibility = std::max(r.a_admissibility, (xt[j][i] - rho * h.a[i][j]).norm());
      r.b_admissibility = std::max(r.b_admissibility, (xe - rho * h.b[i][j]).norm());
    }
  }
  return r;
}

GeneratedHomotopy generate_infinitesimal_homotopy(const ChartAlgebroid & alg,
                                                  const HomotopyField & source,
                                                  const std::vector<Vec> & b0,
                                                  const GenerationOptions & options)
{
  const std::size_t nt = source.t.size();
  const std::size_t ne = source.eps.size();
  if (ne < 3) { throw std::invalid_argument("generate_infinitesimal_homotopy: need at least 3 eps nodes"); }
  if (b0.size() != ne) { throw std::invalid_argument("generate_infinitesimal_homotopy: b0 must have one entry per eps node"); }
  const auto n = static_cast<Eigen::Index>(alg.base_dim());
  const auto m = static_cast<Eigen::Index>(alg.fiber_dim());

  GeneratedHomotopy out;
  out.field.t = source.t;
  out.field.eps = source.eps;
  out.field.x = source.x;
  out.field.a = source.a;
  out.field.b.assign(nt, std::vector<Vec>(ne));

  // ∂_ε a at every node, central differences across slices
  std::vector<std::vector<Vec>> a_eps(nt, std::vector<Vec>(ne));
  for (std::size_t i = 0; i < nt; ++i) {
    for (std::size_t j = 0; j < ne; ++j) { a_eps[i][j] = eps_derivative(source.eps, source.a[i], j); }
  }

  const auto segs = segment_ranges(source.t);
  auto solve_slice = [&](std::size_t j) {
    // stacked samples [x; a; ∂_ε a] for cubic interpolation between nodes
    std::vector<Vec> stacked(nt, Vec(n + 2 * m));
    for (std::size_t i = 0; i < nt; ++i) {
      stacked[i] << source.x[i][j], source.a[i][j], a_eps[i][j];
    }
    Vec b = b0[j];
    for (const auto & [sb, se] : segs) {
      const CurveInterpolant interp(std::vector<double>(source.t.begin() + static_cast<std::ptrdiff_t>(sb),
                                                        source.t.begin() + static_cast<std::ptrdiff_t>(se)),
                                    std::vector<Vec>(stacked.begin() + static_cast<std::ptrdiff_t>(sb),
                                                     stacked.begin() + static_cast<std::ptrdiff_t>(se)));
      const OdeRhs rhs{static_cast<std::size_t>(m), [&](double t, const Vec & bb) {
                         const Vec s = interp(t);
                         const Vec x = s.head(n);
                         return Vec(s.tail(m) + alg.structure(x).bracket(bb, s.segment(n, m)));
                       }};
      out.field.b[sb][j] = b;
      for (std::size_t i = sb; i + 1 < se; ++i) {
        b = rk4_step(rhs, source.t[i], b, source.t[i + 1] - source.t[i]);
        if (!all_finite(b)) { throw IntegrationDiverged(source.t[i + 1]); }
        out.field.b[i + 1][j] = b;
      }
    }
  };

  const std::size_t threads = std::max<std::size_t>(1, std::min(options.threads, ne));
  if (threads == 1) {
    for (std::size_t j = 0; j < ne; ++j) { solve_slice(j); }
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t j = w; j < ne; j += threads) { solve_slice(j); }
      });
    }
  }

  for (std::size_t i = 0; i < nt; ++i) {
    for (std::size_t j = 0; j < ne; ++j) {
      const Vec xe = eps_derivative(source.eps, source.x[i], j);
      const Vec chi = xe - alg.anchor(source.x[i][j]) * out.field.b[i][j];
      out.chi_max = std::max(out.chi_max, chi.norm());
    }
  }
  out.chi_warning = out.chi_max > options.chi_warning_threshold;
  return out;
}

HomotopyField shrink_homotopy(const ChartAlgebroid & alg, const EPath & p, std::size_t eps_count)
{
  if (p.t.front() != 0.0 || p.t.back() != 1.0) {
    throw std::invalid_argument("shrink_homotopy: path must be parameterized on [0, 1]");
  }
  (void)alg;
  const auto n = static_cast<Eigen::Index>(p.base_dim());
  const auto m = static_cast<Eigen::Index>(p.fiber_dim());
  std::vector<Vec> stacked(p.size(), Vec(n + m));
  for (std::size_t i = 0; i < p.size(); ++i) { stacked[i] << p.x[i], p.a[i]; }
  const CurveInterpolant interp(p.t, stacked);

  HomotopyField h;
  h.t = p.t;
  h.eps = linspace(0.0, 1.0, eps_count);
  h.x.assign(h.t.size(), std::vector<Vec>(eps_count));
  h.a = h.x;
  h.b = h.x;
  for (std::size_t i = 0; i < h.t.size(); ++i) {
    for (std::size_t j = 0; j < eps_count; ++j) {
      const double t = h.t[i];
      const double e = h.eps[j];
      // on the ε = 1 slice reuse the original samples exactly
      const Vec s = (e == 1.0) ? stacked[i] : interp(t * e);
      h.x[i][j] = s.head(n);
      h.a[i][j] = e * s.tail(m);
      h.b[i][j] = t * s.tail(m);
    }
  }
  return h;
}

double gronwall_constant(const ChartAlgebroid & alg, const HomotopyField & h)
{
  double cmax = 0.0;
  double amax = 0.0;
  for (std::size_t i = 0; i < h.t.size(); ++i) {
    for (std::size_t j = 0; j < h.eps.size(); ++j) {
      cmax = std::max(cmax, alg.structure(h.x[i][j]).frobenius_norm());
      amax = std::max(amax, h.a[i][j].norm());
    }
  }
  return cmax * amax;
}

}  // namespace alc
