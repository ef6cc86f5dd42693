#pragma once

/**
 * @file numerics.hpp
 * @brief Fixed-step RK4 integration over breakpoint-segmented time grids,
 *        finite-difference derivatives and sampled-curve utilities.
 */

#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace alc {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Thrown when an integrated state stops being finite.
class IntegrationDiverged : public std::runtime_error
{
public:
  explicit IntegrationDiverged(double t)
      : std::runtime_error("integration diverged at t = " + std::to_string(t)), time_(t)
  {}
  double time() const noexcept { return time_; }

private:
  double time_;
};

/**
 * @brief Interval [t0, t1] with a nominal step and ordered breakpoints.
 *
 * Nodes are t0 + k*step, t1 and every breakpoint. A uniform node closer than
 * merge_tolerance() to a breakpoint or to t1 is dropped, so breakpoints are
 * always represented exactly.
 */
class TimeGrid
{
public:
  TimeGrid(double t0, double t1, double step, std::vector<double> breakpoints = {});

  double t0() const noexcept { return t0_; }
  double t1() const noexcept { return t1_; }
  double step() const noexcept { return step_; }
  const std::vector<double> & breakpoints() const noexcept { return breakpoints_; }

  /// Strictly increasing node times.
  std::vector<double> nodes() const;

  /// Segment boundaries {t0, bp_1, ..., bp_k, t1}.
  std::vector<double> segment_bounds() const;
  std::size_t segment_count() const noexcept { return breakpoints_.size() + 1; }

  /// Nodes of segment k, both ends included.
  std::vector<double> segment_nodes(std::size_t k) const;

  double merge_tolerance() const noexcept { return 1e-2 * step_; }

private:
  double t0_;
  double t1_;
  double step_;
  std::vector<double> breakpoints_;
};

/// Right-hand side of ẏ = F(t, y).
struct OdeRhs
{
  std::size_t dimension;
  std::function<Vec(double, const Vec &)> eval;
};

/**
 * @brief Samples of a piecewise-smooth curve.
 *
 * Times are non-decreasing. A breakpoint time appears twice: the left limit
 * (end of the previous segment) followed by the right limit (start of the
 * next). Within a segment times are strictly increasing.
 */
struct SampledCurve
{
  std::vector<double> t;
  std::vector<Vec> y;

  std::size_t size() const noexcept { return t.size(); }

  /// Half-open index ranges [begin, end) of the smooth segments.
  std::vector<std::pair<std::size_t, std::size_t>> segments() const;

  /// Value at the last sample.
  const Vec & back() const { return y.back(); }
};

/// Index ranges of smooth segments for a time vector following the SampledCurve convention.
std::vector<std::pair<std::size_t, std::size_t>> segment_ranges(std::span<const double> t);

/// One classical RK4 step of size h.
Vec rk4_step(const OdeRhs & rhs, double t, const Vec & y, double h);

/**
 * @brief Segment-wise RK4 on the grid; never steps across a breakpoint.
 *
 * Throws IntegrationDiverged when a non-finite state appears.
 */
SampledCurve integrate(const OdeRhs & rhs, const TimeGrid & grid, const Vec & y0);

/// Same, with a separate right-hand side for each segment (piecewise-constant controls).
SampledCurve integrate(const std::function<OdeRhs(std::size_t)> & rhs_for_segment,
                       const TimeGrid & grid,
                       const Vec & y0);

/// Central-difference Jacobian, column j = (fn(x + h e_j) - fn(x - h e_j)) / 2h.
Mat finite_difference_jacobian(const std::function<Vec(const Vec &)> & fn, const Vec & x, double h = 1e-5);

/// Central-difference gradient of a scalar function.
Vec finite_difference_gradient(const std::function<double(const Vec &)> & fn, const Vec & x, double h = 1e-5);

/**
 * @brief Weights of the first-derivative Lagrange stencil on arbitrary nodes.
 *
 * Returns w such that f'(at) ≈ Σ w_i f(nodes_i); exact for polynomials of
 * degree < nodes.size().
 */
std::vector<double> derivative_weights(std::span<const double> nodes, double at);

/// Lagrange interpolation weights on arbitrary nodes.
std::vector<double> interpolation_weights(std::span<const double> nodes, double at);

/**
 * @brief Time derivative of sampled data at sample i using up to `points`
 *        nodes of the same smooth segment (default: fourth order).
 */
Vec sample_derivative(std::span<const double> t,
                      std::span<const Vec> y,
                      std::size_t i,
                      std::pair<std::size_t, std::size_t> segment,
                      std::size_t points = 5);

/// Derivatives at every sample, segment by segment.
std::vector<Vec> sample_derivatives(std::span<const double> t, std::span<const Vec> y, std::size_t points = 5);

/**
 * @brief Cubic interpolation of sampled data inside the segment containing t.
 *
 * When t equals a breakpoint, `prefer_left` selects the left-limit segment.
 */
Vec interpolate(std::span<const double> t, std::span<const Vec> y, double at, bool prefer_left = false);

/// Interpolant with precomputed segment structure, for repeated evaluation.
class CurveInterpolant
{
public:
  CurveInterpolant(std::vector<double> t, std::vector<Vec> y);
  explicit CurveInterpolant(const SampledCurve & c) : CurveInterpolant(c.t, c.y) {}

  Vec operator()(double at, bool prefer_left = false) const;

  double t0() const { return t_.front(); }
  double t1() const { return t_.back(); }

private:
  std::vector<double> t_;
  std::vector<Vec> y_;
  std::vector<std::pair<std::size_t, std::size_t>> segs_;
};

/// Uniform grid on [a, b] with `count` nodes (count >= 2).
std::vector<double> linspace(double a, double b, std::size_t count);

bool all_finite(const Vec & v);

}  // namespace alc
