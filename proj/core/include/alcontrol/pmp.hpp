#pragma once

/**
 * @file pmp.hpp
 * @brief Maximum-principle machinery on almost Lie algebroids: the
 *        Hamiltonian, extremal construction and audit, needle variations,
 *        group development and shooting, and time-dependent systems.
 */

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "alcontrol/control.hpp"

namespace alc {

struct CostatePath
{
  TimeGrid grid;
  std::vector<double> t;
  std::vector<Vec> z;
  double z0{-1.0};
};

class ChatteringError : public std::runtime_error
{
public:
  explicit ChatteringError(std::size_t switches)
      : std::runtime_error("chattering: more than " + std::to_string(switches) + " control switches")
  {}
};

/// H = ⟨z, f(x, u)⟩ + z0 L(x, u)
double hamiltonian(const ControlSystem & sys, const Vec & z, double z0, const Vec & x, const Vec & u);

struct HamiltonianMax
{
  Vec u;
  double value{0.0};
  bool tie{false};          ///< another finite control attains the max within tie tolerance
  std::size_t index{0};     ///< index into the finite set (finite U only)
};

struct MaximizerOptions
{
  std::size_t grid_points{33};  ///< per coordinate, box controls without a registered maximizer
  double golden_tol{1e-12};
  double tie_tol{1e-12};
};

/**
 * @brief sup over U of H(z, v).
 *
 * Finite sets: exhaustive, lowest index wins ties. Boxes: registered
 * maximizer, else coarse grid plus golden-section refinement per coordinate
 * (p ≤ 3).
 */
HamiltonianMax maximize_hamiltonian(const ControlSystem & sys,
                                    const Vec & z,
                                    double z0,
                                    const Vec & x,
                                    const MaximizerOptions & options = {});

struct PmpFlowOptions
{
  double switch_tol{1e-9};
  std::size_t max_switches{10000};
  MaximizerOptions maximizer{};
};

struct PmpSolution
{
  Trajectory trajectory;
  CostatePath costate;
  std::vector<double> switch_times;
  std::vector<bool> tie;  ///< per sample
};

/**
 * @brief Closed-loop extremal: u* = argmax H along the state and costate flows.
 *
 * Finite U of size 2 locates switches by bisection on the switching function;
 * larger finite sets switch at nodes. Box controls are evaluated inside every
 * RK4 stage.
 */
PmpSolution integrate_pmp_flow(const ControlSystem & sys,
                               const Vec & x0,
                               const Vec & z_init,
                               double z0,
                               const TimeGrid & interval,
                               const PmpFlowOptions & options = {});

enum class HorizonMode
{
  free_time,
  fixed_time
};

struct ExtremalAudit
{
  double max_condition_violation{0.0};
  std::vector<double> hamiltonian_values;
  double h_drift{0.0};
  double costate_residual{0.0};
  double covector_min_norm{0.0};
  double z0{0.0};
  std::size_t tie_nodes{0};
  std::size_t checked_nodes{0};
  double tolerance{0.0};
  HorizonMode mode{HorizonMode::free_time};

  bool max_condition_ok{false};
  bool costate_flow_ok{false};
  bool hamiltonian_ok{false};
  bool multiplier_ok{false};
  bool permanently_singular{false};
  std::vector<std::string> notes;

  bool pass() const { return max_condition_ok && costate_flow_ok && hamiltonian_ok && multiplier_ok; }
};

struct AuditOptions
{
  double tol{1e-5};
  std::size_t box_samples{9};  ///< per coordinate, extra sampled v for box controls
  MaximizerOptions maximizer{};
};

/// Checks the maximum condition, the costate flow, H (zero or constant) and the multiplier.
ExtremalAudit verify_extremal(const ControlSystem & sys,
                              const Trajectory & traj,
                              const CostatePath & costate,
                              HorizonMode mode,
                              const AuditOptions & options = {});

/// Needle-variation data: substitutions v_i at τ_i of widths δt_i and horizon change δt at τ.
struct VariationSymbol
{
  std::vector<double> taus;
  std::vector<Vec> vs;
  double tau{0.0};
  std::vector<double> dts;
  double dt{0.0};

  void validate(double t0) const;
};

/**
 * @brief First-order direction of a needle variation in the extended fiber at 𝐱(τ).
 *
 * `ext_sys` is the extended system from extend_system, `ext_x0` = (x⁰, x0).
 * Computes 𝐟(𝐱(τ), u(τ))δt + 𝐁_{τ t0} c_init + Σ 𝐁_{τ τ_i}[𝐟(𝐱(τ_i), v_i) − 𝐟(𝐱(τ_i), u(τ_i))]δt_i.
 */
Vec needle_vector(const ControlSystem & ext_sys,
                  const ControlSignal & u,
                  const Vec & ext_x0,
                  double t0,
                  double step,
                  const VariationSymbol & symbol,
                  const Vec & c_init);

/**
 * @brief needle_vector for a batch of symbols from one transport frame.
 *
 * 𝐁_{τ τ_i} is taken as 𝐁_{τ t0}·𝐁_{τ_i t0}⁻¹ on a grid holding every τ_i and τ as nodes.
 */
std::vector<Vec> needle_vectors(const ControlSystem & ext_sys,
                                const ControlSignal & u,
                                const Vec & ext_x0,
                                double t0,
                                double step,
                                const std::vector<VariationSymbol> & symbols,
                                const Vec & c_init);

/// Random symbols with τ_i at continuity points of u, v_i from a finite U (or box corners).
std::vector<VariationSymbol> random_symbols(const ControlSignal & u,
                                            const ControlSpace & U,
                                            double t0,
                                            double t1,
                                            std::size_t count,
                                            std::uint64_t seed,
                                            std::size_t max_terms = 3,
                                            std::optional<double> fixed_tau = std::nullopt);

struct ConeSupportReport
{
  double max_pairing{0.0};
  std::size_t argmax{0};
  bool pass{true};
  double tolerance{0.0};
};

/// pass iff max ⟨d, 𝐳⟩ ≤ tol over the needles.
ConeSupportReport cone_support_check(const std::vector<Vec> & needles, const Vec & z_ext, double tol = 1e-6);

/**
 * @brief Cone check at τ = t1 for an extremal: random symbols, needles on the
 *        extended system, 𝐳 = (z0, z(t1)).
 *
 * With `free_time` false the horizon change δt is set to zero.
 */
ConeSupportReport extremal_cone_check(const ControlSystem & sys,
                                      const PmpSolution & solution,
                                      std::size_t symbols,
                                      std::uint64_t seed,
                                      bool free_time,
                                      double tol = 1e-6);

/// Matrix images of a Lie-algebra basis.
struct GroupRepresentation
{
  std::string name;
  std::vector<Mat> basis;
  bool orthogonal{true};  ///< re-orthonormalize during development

  static GroupRepresentation so3();
  /// Unit quaternions acting on ℝ⁴ by left multiplication, covering SO(3).
  static GroupRepresentation su2();
};

class RepresentationError : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

/// max |rep([e_i, e_j]) − [rep e_i, rep e_j]|; throws RepresentationError above tol.
double check_representation(const ChartAlgebroid & alg, const GroupRepresentation & rep, double tol = 1e-10);

/// g(t1) for ġ = g·rep(a(t)), g(t0) = I.
Mat develop_to_group(const ChartAlgebroid & alg, const EPath & path, const GroupRepresentation & rep);

struct ShootOptions
{
  double step{1e-3};
  std::size_t max_evaluations{2000};
  double success_residual{1e-4};
  double initial_simplex{0.2};
  bool free_time{false};
  PmpFlowOptions flow{};
};

struct ShootResult
{
  Vec z_init;
  double t1{0.0};
  double residual{0.0};
  bool converged{false};
  std::size_t evaluations{0};
};

/// Nelder–Mead on ‖develop(extremal(z_init)) − target‖_F over z_init (and t1 in free time).
ShootResult shoot_endpoint(const ControlSystem & sys,
                           const GroupRepresentation & rep,
                           const Mat & target,
                           double z0,
                           const Vec & z_guess,
                           double t0,
                           double t1_guess,
                           const ShootOptions & options = {});

struct NelderMeadResult
{
  Vec x;
  double value{0.0};
  std::size_t evaluations{0};
};

NelderMeadResult nelder_mead(const std::function<double(const Vec &)> & fn,
                             const Vec & x0,
                             double initial_step,
                             std::size_t max_evaluations,
                             double f_target = 0.0);

/// Control system whose dynamics and cost depend on time.
struct TimeDependentSystem
{
  ChartAlgebroid alg;
  std::function<Vec(const Vec & x, double t, const Vec & u)> f;
  std::function<double(const Vec & x, double t, const Vec & u)> L;
  ControlSpace U;
  std::optional<std::function<Mat(const Vec & x, double t, const Vec & u)>> df_dx{};
  std::optional<std::function<Vec(const Vec & x, double t, const Vec & u)>> dL_dx{};
  std::optional<std::function<Vec(const Vec & x, double t, const Vec & u)>> df_dt{};
  std::optional<std::function<double(const Vec & x, double t, const Vec & u)>> dL_dt{};
  double fd_step{1e-5};

  Vec f_t(const Vec & x, double t, const Vec & u) const;
  double L_t(const Vec & x, double t, const Vec & u) const;
};

/// Time-independent system on E × TR: base (x, clock), 𝐟 = (f, 1).
ControlSystem autonomize(const TimeDependentSystem & sys);

struct TimeDependenceAudit
{
  double clock_error{0.0};        ///< max |clock − t|
  double dhdt_error{0.0};         ///< max |dH/dt − (z·∂f/∂t + z0 ∂L/∂t)|
  double extended_h_drift{0.0};   ///< max |H + ξ − (H + ξ)(t0)|
  double clock_costate_drift{0.0};
  std::vector<double> hamiltonian_values;
};

/// Audit of an extremal of autonomize(sys): clock, dH/dt law and conservation of H + ξ.
TimeDependenceAudit audit_time_dependence(const TimeDependentSystem & sys, const PmpSolution & solution);

}  // namespace alc
