#pragma once

/**
 * @file paths.hpp
 * @brief Admissible paths (E-paths), E-homotopies and their generation.
 *
 * Curves follow the SampledCurve convention: a breakpoint time is stored twice
 * (left limit, right limit). The base x is continuous across breakpoints, the
 * fiber a may jump.
 */

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "alcontrol/algebroid.hpp"
#include "alcontrol/numerics.hpp"

namespace alc {

struct EPath
{
  TimeGrid grid;
  std::vector<double> t;
  std::vector<Vec> x;
  std::vector<Vec> a;

  std::size_t size() const noexcept { return t.size(); }
  std::size_t base_dim() const { return static_cast<std::size_t>(x.front().size()); }
  std::size_t fiber_dim() const { return static_cast<std::size_t>(a.front().size()); }
  std::vector<std::pair<std::size_t, std::size_t>> segments() const { return segment_ranges(t); }
};

/**
 * @brief Samples x(t) and a(t, segment) on the nodes of `grid`.
 *
 * The fiber callback receives the segment index so that left and right limits
 * at a breakpoint can differ.
 */
EPath sample_path(const TimeGrid & grid,
                  const std::function<Vec(double)> & base,
                  const std::function<Vec(double, std::size_t)> & fiber);

/// Raised by compose_paths when the end of the first path is not the start of the second.
class CompositionError : public std::runtime_error
{
public:
  explicit CompositionError(double gap)
      : std::runtime_error("compose_paths: base endpoints differ by " + std::to_string(gap)), gap_{gap}
  {}
  double gap() const noexcept { return gap_; }

private:
  double gap_;
};

/// max over nodes of |ẋ(t) − ρ(x(t)) a(t)|, ẋ from three-point stencils inside each segment.
double admissibility_residual(const ChartAlgebroid & alg, const EPath & p);

/// p followed by q (q shifted in time); the junction becomes a breakpoint.
EPath compose_paths(const EPath & p, const EPath & q, double tol = 1e-9);

/// Affine reparameterization onto [0, 1]: ā(s) = (t1 − t0) a(t0 + (t1 − t0) s).
EPath reparameterize_unit(const EPath & p);

/**
 * @brief Two-parameter family (x, a, b)(t, ε).
 *
 * Indexing is [t index][ε index]. The t axis follows the SampledCurve
 * convention; the ε axis is smooth.
 */
struct HomotopyField
{
  std::vector<double> t;
  std::vector<double> eps;
  std::vector<std::vector<Vec>> x;
  std::vector<std::vector<Vec>> a;
  std::vector<std::vector<Vec>> b;

  /// ε-slice j as an E-path candidate over x(·, ε_j).
  EPath t_slice(std::size_t j, double step) const;
};

struct HomotopyResidual
{
  double equation{0.0};         ///< max |∂_t b − ∂_ε a − c(x)[b, a]|
  double a_admissibility{0.0};  ///< max |∂_t x − ρ(x) a|
  double b_admissibility{0.0};  ///< max |∂_ε x − ρ(x) b|

  double max() const { return std::max({equation, a_admissibility, b_admissibility}); }
};

/// Strong-form residuals with three-point stencils on both axes, per smooth t-block.
HomotopyResidual homotopy_residual(const ChartAlgebroid & alg, const HomotopyField & h);

struct GenerationOptions
{
  double chi_warning_threshold{1e-3};
  std::size_t threads{1};
};

struct GeneratedHomotopy
{
  HomotopyField field;
  double chi_max{0.0};       ///< max |∂_ε x − ρ(x) b| over the field
  bool chi_warning{false};   ///< chi_max above the warning threshold
};

/**
 * @brief Solves ∂_t b = ∂_ε a + c(x)[b, a], b(t0, ε) = b0(ε) for every ε slice.
 *
 * `source` supplies t, eps, x and a; its b is ignored. ∂_ε a uses central
 * differences across slices. Slices are independent; with threads > 1 the
 * result is identical to the sequential one.
 */
GeneratedHomotopy generate_infinitesimal_homotopy(const ChartAlgebroid & alg,
                                                  const HomotopyField & source,
                                                  const std::vector<Vec> & b0,
                                                  const GenerationOptions & options = {});

/// ā(t, ε) = ε a(tε), b̄(t, ε) = t a(tε), x̄(t, ε) = x(tε) for a path on [0, 1].
HomotopyField shrink_homotopy(const ChartAlgebroid & alg, const EPath & p, std::size_t eps_count = 33);

/// Grönwall bound δ·exp(C (t − t0)) with C = max ‖c‖_F · max |a| over the field.
double gronwall_constant(const ChartAlgebroid & alg, const HomotopyField & h);

}  // namespace alc
