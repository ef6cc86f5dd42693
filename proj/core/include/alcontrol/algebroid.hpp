#pragma once

/**
 * @file algebroid.hpp
 * @brief Almost Lie algebroids in a single coordinate chart.
 *
 * An algebroid over base coordinates x ∈ ℝⁿ with fiber coordinates y ∈ ℝᵐ is
 * described by its anchor ρ^a_i(x) (an n×m matrix) and structure functions
 * c^i_jk(x), the coordinates of the bracket [e_j, e_k] = c^i_jk e_i.
 */

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "alcontrol/numerics.hpp"

namespace alc {

/// Dense m×m×m table c(i, j, k) = c^i_jk.
class StructureTensor
{
public:
  StructureTensor() = default;
  explicit StructureTensor(std::size_t m) : m_{m}, data_(m * m * m, 0.0) {}
  /// Row-major table, entry (i, j, k) at index (i*m + j)*m + k.
  StructureTensor(std::size_t m, std::vector<double> row_major);

  std::size_t dim() const noexcept { return m_; }

  double & operator()(std::size_t i, std::size_t j, std::size_t k) { return data_[(i * m_ + j) * m_ + k]; }
  double operator()(std::size_t i, std::size_t j, std::size_t k) const { return data_[(i * m_ + j) * m_ + k]; }

  /// c^i_jk u^j v^k
  Vec bracket(const Vec & u, const Vec & v) const;

  /// Matrix M with M(i, k) = c^i_jk u^j, so that bracket(u, v) = M v.
  Mat left_action(const Vec & u) const;

  /// Coadjoint-type action on a covector: result_k = c^i_jk u^j ξ_i.
  Vec dual_action(const Vec & u, const Vec & xi) const;

  double max_abs() const;
  double frobenius_norm() const;

  const std::vector<double> & data() const noexcept { return data_; }

private:
  std::size_t m_{0};
  std::vector<double> data_;
};

using AnchorField = std::function<Mat(const Vec &)>;
using StructureField = std::function<StructureTensor(const Vec &)>;
/// Returns the n partial derivatives ∂ρ/∂x^b, each an n×m matrix.
using AnchorDerivative = std::function<std::vector<Mat>(const Vec &)>;

/**
 * @brief Single-chart almost Lie algebroid; immutable after construction.
 *
 * Only the single-anchor case ρ = σ is representable. Two-anchor skew
 * algebroids are rejected by the configuration layer.
 */
class ChartAlgebroid
{
public:
  ChartAlgebroid(std::size_t base_dim,
                 std::size_t fiber_dim,
                 AnchorField anchor,
                 StructureField structure,
                 std::string name = "custom",
                 std::optional<AnchorDerivative> anchor_derivative = std::nullopt);

  std::size_t base_dim() const noexcept { return n_; }
  std::size_t fiber_dim() const noexcept { return m_; }
  const std::string & name() const noexcept { return name_; }

  Mat anchor(const Vec & x) const;
  StructureTensor structure(const Vec & x) const;

  /// ∂ρ/∂x^b for b = 0..n-1, analytic when registered, central differences otherwise.
  std::vector<Mat> anchor_derivative(const Vec & x, double fd_step = 1e-5) const;
  bool has_analytic_anchor_derivative() const noexcept { return anchor_derivative_.has_value(); }

  // Built-ins.
  static ChartAlgebroid tangent_bundle(std::size_t n);
  /// Lie algebra as an algebroid over a point: ρ = 0, constant c.
  static ChartAlgebroid lie_algebra(StructureTensor c, std::string name = "lie-algebra");
  static ChartAlgebroid so3();
  /// Trivialized Atiyah algebroid TM × 𝔤 over M = ℝⁿ; fiber is (TM part, 𝔤 part).
  static ChartAlgebroid atiyah(std::size_t n, StructureTensor algebra, std::string name = "atiyah");

private:
  std::size_t n_;
  std::size_t m_;
  AnchorField anchor_;
  StructureField structure_;
  std::string name_;
  std::optional<AnchorDerivative> anchor_derivative_;
};

/// so(3) structure constants in the standard basis: c^i_jk = ε_ijk.
StructureTensor levi_civita();

/// Section of E: x ↦ f(x) ∈ ℝᵐ with optional analytic Jacobian ∂f/∂x (m×n).
struct Section
{
  std::function<Vec(const Vec &)> eval;
  std::optional<std::function<Mat(const Vec &)>> jacobian{};

  Mat derivative(const Vec & x, double fd_step = 1e-5) const;
};

/// Function h(x, ξ) on E* with optional analytic partials.
struct DualFunction
{
  std::function<double(const Vec &, const Vec &)> eval;
  std::optional<std::function<Vec(const Vec &, const Vec &)>> grad_x{};
  std::optional<std::function<Vec(const Vec &, const Vec &)>> grad_xi{};

  Vec partial_x(const Vec & x, const Vec & xi, double fd_step = 1e-5) const;
  Vec partial_xi(const Vec & x, const Vec & xi, double fd_step = 1e-5) const;
};

/// Tangent vector at a point of E (or E*): base part and fiber part.
struct TangentVector
{
  Vec base;
  Vec fiber;
};

/// Report of a sampling-based axiom check.
struct ValidationReport
{
  std::string check;
  double max_violation{0.0};
  double tolerance{0.0};
  bool pass{true};
  std::size_t samples{0};
  double box_half_width{1.0};
  std::uint64_t seed{0};
};

/// Uniform random points in [-half_width, half_width]ⁿ.
std::vector<Vec> sample_box(std::size_t n, std::size_t count, std::uint64_t seed, double half_width = 1.0);

/// ρ(x) y, componentwise ρ^a_i(x) y^i.
Vec anchor_apply(const ChartAlgebroid & alg, const Vec & x, const Vec & y);

/// max |c^i_jk + c^i_kj| over the samples.
ValidationReport validate_skew(const ChartAlgebroid & alg, const std::vector<Vec> & sample_points, double tol);

/**
 * @brief Max entry of (∂_b ρ^a_k)ρ^b_j − (∂_b ρ^a_j)ρ^b_k − ρ^a_i c^i_jk over the samples.
 *
 * Vanishes identically iff the anchor maps brackets to commutators of vector fields.
 */
ValidationReport validate_anchor_morphism(const ChartAlgebroid & alg,
                                          const std::vector<Vec> & sample_points,
                                          double fd_step,
                                          double tol);

/// Tangent lift of a section evaluated at (x, y).
TangentVector tangent_lift_section(const ChartAlgebroid & alg, const Section & f, const Vec & x, const Vec & y);

/// Hamiltonian vector field of h at (x, ξ); fiber part is ξ̇.
TangentVector hamiltonian_vector_field(const ChartAlgebroid & alg, const DualFunction & h, const Vec & x, const Vec & xi);

/// Product algebroid first × second (base and fiber coordinates concatenated, block-diagonal anchor and bracket).
ChartAlgebroid product(const ChartAlgebroid & first, const ChartAlgebroid & second, std::string name = "");

/// TR × E with base (x⁰, x) and fiber (a⁰, a).
struct ExtendedAlgebroid
{
  ChartAlgebroid inner;
  std::size_t base_dim;   ///< n of the underlying chart
  std::size_t fiber_dim;  ///< m of the underlying chart

  /// Underlying base point x from 𝐱 = (x⁰, x).
  Vec base_of(const Vec & ext_x) const { return ext_x.tail(static_cast<Eigen::Index>(base_dim)); }
  /// Underlying fiber vector a from 𝐚 = (a⁰, a).
  Vec fiber_of(const Vec & ext_a) const { return ext_a.tail(static_cast<Eigen::Index>(fiber_dim)); }
};

ExtendedAlgebroid product_with_time(const ChartAlgebroid & alg);

}  // namespace alc
