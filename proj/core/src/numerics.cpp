#include "alcontrol/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace alc {

TimeGrid::TimeGrid(double t0, double t1, double step, std::vector<double> breakpoints)
    : t0_{t0}, t1_{t1}, step_{step}, breakpoints_{std::move(breakpoints)}
{
  if (!(std::isfinite(t0) && std::isfinite(t1) && t0 < t1)) {
    std::ostringstream os;
    os << "TimeGrid: require t0 < t1, got [" << t0 << ", " << t1 << "]";
    throw std::invalid_argument(os.str());
  }
  if (!(step > 0.0) || !std::isfinite(step)) { throw std::invalid_argument("TimeGrid: step must be positive"); }
  std::sort(breakpoints_.begin(), breakpoints_.end());
  breakpoints_.erase(std::unique(breakpoints_.begin(), breakpoints_.end()), breakpoints_.end());
  for (double b : breakpoints_) {
    if (!(b > t0_ && b < t1_)) {
      std::ostringstream os;
      os << "TimeGrid: breakpoint " << b << " outside (" << t0_ << ", " << t1_ << ")";
      throw std::invalid_argument(os.str());
    }
  }
}

std::vector<double> TimeGrid::nodes() const
{
  const double tol = merge_tolerance();
  std::vector<double> pinned = breakpoints_;
  pinned.push_back(t1_);

  std::vector<double> out;
  out.reserve(static_cast<std::size_t>((t1_ - t0_) / step_) + pinned.size() + 2);
  out.push_back(t0_);
  auto pin = pinned.begin();
  for (std::size_t k = 1;; ++k) {
    const double t = t0_ + static_cast<double>(k) * step_;
    // flush pinned nodes preceding this uniform node
    while (pin != pinned.end() && *pin <= t + tol) {
      if (*pin - out.back() > 0.0) { out.push_back(*pin); }
      ++pin;
    }
    if (t >= t1_ - tol) { break; }
    if (std::abs(t - out.back()) <= tol) { continue; }
    if (pin != pinned.end() && std::abs(*pin - t) <= tol) { continue; }
    out.push_back(t);
  }
  while (pin != pinned.end()) {
    if (*pin > out.back()) { out.push_back(*pin); }
    ++pin;
  }
  return out;
}

std::vector<double> TimeGrid::segment_bounds() const
{
  std::vector<double> b;
  b.reserve(breakpoints_.size() + 2);
  b.push_back(t0_);
  b.insert(b.end(), breakpoints_.begin(), breakpoints_.end());
  b.push_back(t1_);
  return b;
}

std::vector<double> TimeGrid::segment_nodes(std::size_t k) const
{
  const auto bounds = segment_bounds();
  if (k + 1 >= bounds.size()) { throw std::out_of_range("TimeGrid::segment_nodes"); }
  const auto all = nodes();
  std::vector<double> out;
  for (double t : all) {
    if (t >= bounds[k] && t <= bounds[k + 1]) { out.push_back(t); }
  }
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> segment_ranges(std::span<const double> t)
{
  std::vector<std::pair<std::size_t, std::size_t>> out;
  if (t.empty()) { return out; }
  std::size_t begin = 0;
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (t[i] == t[i - 1]) {
      out.emplace_back(begin, i);
      begin = i;
    }
  }
  out.emplace_back(begin, t.size());
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> SampledCurve::segments() const { return segment_ranges(t); }

bool all_finite(const Vec & v) { return v.allFinite(); }

Vec rk4_step(const OdeRhs & rhs, double t, const Vec & y, double h)
{
  const double half = 0.5 * h;
  const Vec k1 = rhs.eval(t, y);
  const Vec k2 = rhs.eval(t + half, y + half * k1);
  const Vec k3 = rhs.eval(t + half, y + half * k2);
  const Vec k4 = rhs.eval(t + h, y + h * k3);
  // h * (sum / 6) keeps constant fields exact: a unit rate advances by exactly h.
  return y + h * ((k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0);
}

namespace {

void check_dimension(const OdeRhs & rhs, const Vec & y0)
{
  if (rhs.dimension != static_cast<std::size_t>(y0.size())) {
    throw std::invalid_argument("integrate: rhs dimension " + std::to_string(rhs.dimension)
                                + " does not match state dimension " + std::to_string(y0.size()));
  }
}

}  // namespace

SampledCurve integrate(const std::function<OdeRhs(std::size_t)> & rhs_for_segment,
                       const TimeGrid & grid,
                       const Vec & y0)
{
  if (!all_finite(y0)) { throw IntegrationDiverged(grid.t0()); }
  const auto nodes = grid.nodes();
  const auto bounds = grid.segment_bounds();

  SampledCurve out;
  out.t.reserve(nodes.size() + grid.breakpoints().size());
  out.y.reserve(nodes.size() + grid.breakpoints().size());

  Vec y = y0;
  std::size_t node = 0;
  for (std::size_t seg = 0; seg + 1 < bounds.size(); ++seg) {
    const OdeRhs rhs = rhs_for_segment(seg);
    check_dimension(rhs, y);
    out.t.push_back(nodes[node]);
    out.y.push_back(y);
    while (nodes[node] < bounds[seg + 1]) {
      const double t = nodes[node];
      const double h = nodes[node + 1] - t;
      y = rk4_step(rhs, t, y, h);
      ++node;
      if (!all_finite(y)) { throw IntegrationDiverged(nodes[node]); }
      out.t.push_back(nodes[node]);
      out.y.push_back(y);
    }
  }
  return out;
}

SampledCurve integrate(const OdeRhs & rhs, const TimeGrid & grid, const Vec & y0)
{
  return integrate([&rhs](std::size_t) { return rhs; }, grid, y0);
}

Mat finite_difference_jacobian(const std::function<Vec(const Vec &)> & fn, const Vec & x, double h)
{
  if (!(h > 0.0)) { throw std::invalid_argument("finite_difference_jacobian: h must be positive"); }
  const auto n = x.size();
  Vec probe = x;
  Mat jac;
  for (Eigen::Index j = 0; j < n; ++j) {
    probe[j] = x[j] + h;
    const Vec plus = fn(probe);
    probe[j] = x[j] - h;
    const Vec minus = fn(probe);
    probe[j] = x[j];
    if (j == 0) { jac.resize(plus.size(), n); }
    jac.col(j) = (plus - minus) / (2.0 * h);
  }
  if (n == 0) { jac.resize(fn(x).size(), 0); }
  return jac;
}

Vec finite_difference_gradient(const std::function<double(const Vec &)> & fn, const Vec & x, double h)
{
  if (!(h > 0.0)) { throw std::invalid_argument("finite_difference_gradient: h must be positive"); }
  Vec probe = x;
  Vec g(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    probe[j] = x[j] + h;
    const double plus = fn(probe);
    probe[j] = x[j] - h;
    const double minus = fn(probe);
    probe[j] = x[j];
    g[j] = (plus - minus) / (2.0 * h);
  }
  return g;
}

namespace {

// Fornberg's recursion for weights of derivatives 0 and 1.
void fornberg(std::span<const double> nodes, double at, std::vector<double> & w0, std::vector<double> & w1)
{
  const std::size_t n = nodes.size();
  w0.assign(n, 0.0);
  w1.assign(n, 0.0);
  if (n == 0) { return; }
  double c1 = 1.0;
  double c4 = nodes[0] - at;
  w0[0] = 1.0;
  for (std::size_t i = 1; i < n; ++i) {
    const std::size_t mn = std::min<std::size_t>(i, 1);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = nodes[i] - at;
    for (std::size_t j = 0; j < i; ++j) {
      const double c3 = nodes[i] - nodes[j];
      c2 *= c3;
      if (j == i - 1) {
        if (mn >= 1) { w1[i] = c1 * (w0[i - 1] - c5 * w1[i - 1]) / c2; }
        w0[i] = -c1 * c5 * w0[i - 1] / c2;
      }
      if (mn >= 1) { w1[j] = (c4 * w1[j] - w0[j]) / c3; }
      w0[j] = c4 * w0[j] / c3;
    }
    c1 = c2;
  }
}

}  // namespace

std::vector<double> derivative_weights(std::span<const double> nodes, double at)
{
  std::vector<double> w0, w1;
  fornberg(nodes, at, w0, w1);
  return w1;
}

std::vector<double> interpolation_weights(std::span<const double> nodes, double at)
{
  std::vector<double> w0, w1;
  fornberg(nodes, at, w0, w1);
  return w0;
}

Vec sample_derivative(std::span<const double> t,
                      std::span<const Vec> y,
                      std::size_t i,
                      std::pair<std::size_t, std::size_t> segment,
                      std::size_t points)
{
  const auto [b, e] = segment;
  const std::size_t len = e - b;
  if (len < 2) { return Vec::Zero(y[i].size()); }
  const std::size_t k = std::min(points, len);
  std::size_t start = (i >= b + k / 2) ? i - k / 2 : b;
  if (start + k > e) { start = e - k; }
  const auto w = derivative_weights(t.subspan(start, k), t[i]);
  Vec d = Vec::Zero(y[i].size());
  for (std::size_t j = 0; j < k; ++j) { d += w[j] * y[start + j]; }
  return d;
}

std::vector<Vec> sample_derivatives(std::span<const double> t, std::span<const Vec> y, std::size_t points)
{
  std::vector<Vec> out(t.size());
  for (const auto & seg : segment_ranges(t)) {
    for (std::size_t i = seg.first; i < seg.second; ++i) { out[i] = sample_derivative(t, y, i, seg, points); }
  }
  return out;
}

namespace {

Vec interpolate_in(std::span<const double> t,
                   std::span<const Vec> y,
                   std::span<const std::pair<std::size_t, std::size_t>> segs,
                   double at,
                   bool prefer_left)
{
  if (segs.empty()) { throw std::invalid_argument("interpolate: empty curve"); }
  std::pair<std::size_t, std::size_t> seg;
  if (prefer_left) {
    // first segment whose end reaches `at`
    const auto it = std::lower_bound(segs.begin(), segs.end(), at, [&](const auto & s, double v) {
      return t[s.second - 1] < v;
    });
    seg = it == segs.end() ? segs.back() : *it;
  } else {
    // last segment starting at or before `at`
    const auto it = std::upper_bound(segs.begin(), segs.end(), at, [&](double v, const auto & s) {
      return v < t[s.first];
    });
    seg = it == segs.begin() ? segs.front() : *(it - 1);
  }
  const auto [b, e] = seg;
  const std::size_t len = e - b;
  const std::size_t k = std::min<std::size_t>(4, len);
  const auto pos = std::upper_bound(t.begin() + static_cast<std::ptrdiff_t>(b),
                                    t.begin() + static_cast<std::ptrdiff_t>(e),
                                    at);
  const std::size_t j = static_cast<std::size_t>(pos - t.begin());
  std::size_t start = (j >= b + 2) ? j - 2 : b;
  if (start + k > e) { start = e - k; }
  const auto w = interpolation_weights(t.subspan(start, k), at);
  Vec v = Vec::Zero(y[b].size());
  for (std::size_t i = 0; i < k; ++i) { v += w[i] * y[start + i]; }
  return v;
}

}  // namespace

Vec interpolate(std::span<const double> t, std::span<const Vec> y, double at, bool prefer_left)
{
  const auto segs = segment_ranges(t);
  return interpolate_in(t, y, segs, at, prefer_left);
}

CurveInterpolant::CurveInterpolant(std::vector<double> t, std::vector<Vec> y)
    : t_{std::move(t)}, y_{std::move(y)}, segs_{segment_ranges(t_)}
{
  if (t_.empty() || t_.size() != y_.size()) { throw std::invalid_argument("CurveInterpolant: bad samples"); }
}

Vec CurveInterpolant::operator()(double at, bool prefer_left) const
{
  return interpolate_in(t_, y_, segs_, at, prefer_left);
}

std::vector<double> linspace(double a, double b, std::size_t count)
{
  if (count < 2) { throw std::invalid_argument("linspace: count must be >= 2"); }
  std::vector<double> out(count);
  const double h = (b - a) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) { out[i] = a + static_cast<double>(i) * h; }
  out.back() = b;
  return out;
}

}  // namespace alc
