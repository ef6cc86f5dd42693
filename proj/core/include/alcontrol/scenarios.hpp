#pragma once

/**
 * @file scenarios.hpp
 * @brief Built-in scenarios, JSON scenario configs and invariant reports.
 */

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "alcontrol/pmp.hpp"

namespace alc {

inline constexpr int scenario_schema_version = 1;

/// Config validation failure; `field()` is a JSON-pointer-like path such as "/so3/a".
class ConfigError : public std::invalid_argument
{
public:
  ConfigError(std::string field, const std::string & what)
      : std::invalid_argument(field + ": " + what), field_{std::move(field)}
  {}
  const std::string & field() const noexcept { return field_; }

private:
  std::string field_;
};

/**
 * @brief Principal connection and metric on M = ℝⁿ with affine coefficients.
 *
 * A^i_b(x) = A0(i,b) + Σ_c A1[c](i,b) x^c,  g_ab(x) = G0(a,b) + Σ_c G1[c](a,b) x^c.
 */
struct WongFixture
{
  StructureTensor algebra{0};
  Mat A0;
  std::vector<Mat> A1;
  Mat G0;
  std::vector<Mat> G1;

  std::size_t base_dim() const { return static_cast<std::size_t>(A0.cols()); }
  std::size_t algebra_dim() const { return static_cast<std::size_t>(A0.rows()); }

  Mat A(const Vec & x) const;
  Mat g(const Vec & x) const;
  /// ∂g/∂x^c
  const Mat & dg(std::size_t c) const { return G1[c]; }
  /// B^i_{ab}(x) = ∂_b A^i_a − ∂_a A^i_b + c^i_jk A^j_a A^k_b, one n×n matrix per i.
  std::vector<Mat> curvature(const Vec & x) const;

  /// A ≡ 0, g = I.
  static WongFixture flat(std::size_t n, StructureTensor algebra);
  /// so(3) over ℝ² with a linear connection and g = I.
  static WongFixture polynomial_so3();
};

/// Atiyah-chart control system with f = (u, −A u), L = ½ g(u, u) and a closed-form maximizer.
ControlSystem wong_system(const WongFixture & fx, double box_half_width = 50.0);

struct ChartSpec
{
  std::string type{"lie-algebra"};  ///< lie-algebra | tangent-bundle | atiyah
  std::size_t dim{0};               ///< tangent-bundle dimension or Atiyah base dimension
  std::size_t algebra_dim{0};
  std::vector<double> structure;    ///< c^i_jk row-major, algebra_dim³ entries
};

struct ControlSpec
{
  bool finite{true};
  std::vector<Vec> values;
  Vec lower;
  Vec upper;
};

enum class Pipeline
{
  simulate,
  extremal,
  shoot,
  audit
};

enum class Z0Mode
{
  normal,
  abnormal
};

struct ScenarioConfig
{
  int schema_version{scenario_schema_version};
  std::string scenario;  ///< so3-bang-bang | wong | classical-tm-lq | custom
  Pipeline pipeline{Pipeline::extremal};
  double t0{0.0};
  double t1{1.0};
  bool free_time{false};
  double step{1e-3};
  double tol{1e-5};
  std::uint64_t seed{1};
  std::size_t symbol_samples{0};  ///< needle symbols for the cone check; 0 disables it
  Z0Mode z0_mode{Z0Mode::normal};
  Vec x0;
  Vec z_init;

  // so3-bang-bang
  Vec a;
  Vec b;

  // wong
  WongFixture wong;

  // classical-tm-lq: L = (q x² + u²)/2
  double state_weight{0.0};

  // custom: f(x, u) = drift + inputs·u, L = cost_constant + ½ cost_quadratic |u|²
  ChartSpec chart;
  ControlSpec control;
  Vec drift;
  Mat inputs;
  double cost_constant{0.0};
  double cost_quadratic{0.0};

  // simulate
  std::vector<double> control_breakpoints;
  std::vector<Vec> control_values;

  // shoot
  std::string representation{"so3"};
  std::optional<Mat> target;
  Vec target_z_init;
  double target_t1{1.0};
  Vec z_guess;

  double z0() const { return z0_mode == Z0Mode::normal ? -1.0 : 0.0; }
};

/// Parses and validates a JSON config document.
ScenarioConfig parse_config(const std::string & json_text);

/// Built-in defaults for a named scenario.
ScenarioConfig default_config(const std::string & scenario);

struct ScenarioInfo
{
  std::string name;
  std::string description;
};

std::vector<ScenarioInfo> list_scenarios();

struct Check
{
  std::string name;
  double value{0.0};
  double tolerance{0.0};
  bool pass{false};
};

struct ScenarioReport
{
  std::string scenario;
  std::string pipeline;
  std::vector<Check> checks;
  std::vector<std::string> notes;
  std::vector<double> switch_times;

  /// Adds a check that passes iff value <= tolerance.
  void bound(std::string name, double value, double tolerance);
  bool pass() const;
  const Check * find(const std::string & name) const;
};

std::string report_json(const ScenarioReport & report);

struct ScenarioArtifacts
{
  ScenarioReport report;
  std::optional<Trajectory> trajectory;
  std::optional<CostatePath> costate;
  std::vector<double> hamiltonian;
};

ControlSystem build_system(const ScenarioConfig & config);

/// Runs the configured pipeline. The audit pipeline needs `trajectory` and `costate`.
ScenarioArtifacts run_scenario(const ScenarioConfig & config,
                               const std::optional<Trajectory> & trajectory = std::nullopt,
                               const std::optional<CostatePath> & costate = std::nullopt);

/// AL-axiom checks only.
ScenarioReport validate_scenario(const ScenarioConfig & config);

ScenarioArtifacts scenario_so3_bang_bang(const ScenarioConfig & config);
ScenarioArtifacts scenario_wong(const ScenarioConfig & config);
ScenarioArtifacts scenario_classical(const ScenarioConfig & config);

/// Wong residuals along an extremal of wong_system(fx).
struct WongResiduals
{
  double momentum{0.0};  ///< max |∂_t p̃_b + B^i_{ba} u^a ξ_i + z0 ½ ∂_b g_ac u^a u^c|
  double charge{0.0};    ///< max |∂_t ξ_j + c^k_ij A^i_b u^b ξ_k|
  double speed_drift{0.0};
};

WongResiduals wong_residuals(const WongFixture & fx, const PmpSolution & sol);

}  // namespace alc
