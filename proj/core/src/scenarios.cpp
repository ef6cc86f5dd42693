#include "alcontrol/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <nlohmann/json.hpp>

namespace alc {

using nlohmann::json;

Mat WongFixture::A(const Vec & x) const
{
  Mat r = A0;
  for (std::size_t c = 0; c < A1.size(); ++c) { r += x[static_cast<Eigen::Index>(c)] * A1[c]; }
  return r;
}

Mat WongFixture::g(const Vec & x) const
{
  Mat r = G0;
  for (std::size_t c = 0; c < G1.size(); ++c) { r += x[static_cast<Eigen::Index>(c)] * G1[c]; }
  return r;
}

std::vector<Mat> WongFixture::curvature(const Vec & x) const
{
  const std::size_t n = base_dim();
  const std::size_t k = algebra_dim();
  const Mat a = A(x);
  std::vector<Mat> out(k, Mat::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)));
  for (std::size_t i = 0; i < k; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = 0; q < n; ++q) {
        const auto pi = static_cast<Eigen::Index>(p);
        const auto qi = static_cast<Eigen::Index>(q);
        double v = A1[q](ii, pi) - A1[p](ii, qi);
        for (std::size_t j = 0; j < k; ++j) {
          for (std::size_t l = 0; l < k; ++l) {
            v += algebra(i, j, l) * a(static_cast<Eigen::Index>(j), pi) * a(static_cast<Eigen::Index>(l), qi);
          }
        }
        out[i](pi, qi) = v;
      }
    }
  }
  return out;
}

WongFixture WongFixture::flat(std::size_t n, StructureTensor algebra)
{
  const auto ni = static_cast<Eigen::Index>(n);
  const auto ki = static_cast<Eigen::Index>(algebra.dim());
  WongFixture fx;
  fx.algebra = std::move(algebra);
  fx.A0 = Mat::Zero(ki, ni);
  fx.A1.assign(n, Mat::Zero(ki, ni));
  fx.G0 = Mat::Identity(ni, ni);
  fx.G1.assign(n, Mat::Zero(ni, ni));
  return fx;
}

WongFixture WongFixture::polynomial_so3()
{
  WongFixture fx = flat(2, levi_civita());
  fx.A0 << 0.3, 0.0, 0.0, 0.2, 0.1, -0.1;
  fx.A1[0] << 0.0, 0.5, 0.2, 0.0, 0.0, 0.3;
  fx.A1[1] << -0.4, 0.0, 0.0, 0.1, 0.25, 0.0;
  return fx;
}

ControlSystem wong_system(const WongFixture & fx, double box_half_width)
{
  const auto n = static_cast<Eigen::Index>(fx.base_dim());
  const auto k = static_cast<Eigen::Index>(fx.algebra_dim());
  if (n == 0 || fx.G0.rows() != n || fx.G0.cols() != n) { throw std::invalid_argument("wong_system: metric has wrong shape"); }
  {
    const Eigen::LDLT<Mat> ldlt(fx.g(Vec::Zero(n)));
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || ldlt.vectorD().minCoeff() <= 1e-12) {
      throw std::invalid_argument("wong_system: singular metric");
    }
  }
  HamiltonianMaximizer best = [fx, n, k, box_half_width](const Vec & x, const Vec & z, double z0) -> std::optional<Vec> {
    if (!(z0 < 0.0)) { return std::nullopt; }
    const Vec pt = z.head(n) - fx.A(x).transpose() * z.tail(k);
    const Eigen::LDLT<Mat> ldlt(fx.g(x));
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) { return std::nullopt; }
    Vec u = ldlt.solve(pt) / (-z0);
    if (u.cwiseAbs().maxCoeff() > box_half_width) { return std::nullopt; }
    return u;
  };
  ControlSystem sys{
    .alg = ChartAlgebroid::atiyah(fx.base_dim(), fx.algebra, "atiyah-wong"),
    .f =
      [fx, n, k](const Vec & x, const Vec & u) {
        Vec f(n + k);
        f.head(n) = u;
        f.tail(k) = -fx.A(x) * u;
        return f;
      },
    .L = [fx](const Vec & x, const Vec & u) { return 0.5 * u.dot(fx.g(x) * u); },
    .U = ControlSpace::box(Vec::Constant(n, -box_half_width), Vec::Constant(n, box_half_width), best),
    .df_dx = std::nullopt,
    .dL_dx = std::nullopt,
  };
  sys.df_dx = [fx, n, k](const Vec &, const Vec & u) {
    Mat j = Mat::Zero(n + k, n);
    for (Eigen::Index c = 0; c < n; ++c) { j.block(n, c, k, 1) = -fx.A1[static_cast<std::size_t>(c)] * u; }
    return j;
  };
  sys.dL_dx = [fx, n](const Vec &, const Vec & u) {
    Vec g(n);
    for (Eigen::Index c = 0; c < n; ++c) { g[c] = 0.5 * u.dot(fx.dg(static_cast<std::size_t>(c)) * u); }
    return g;
  };
  return sys;
}

WongResiduals wong_residuals(const WongFixture & fx, const PmpSolution & sol)
{
  const auto n = static_cast<Eigen::Index>(fx.base_dim());
  const auto k = static_cast<Eigen::Index>(fx.algebra_dim());
  const auto & t = sol.trajectory.path.t;
  const double z0 = sol.costate.z0;
  std::vector<Vec> pt(t.size());
  std::vector<Vec> xi(t.size());
  for (std::size_t s = 0; s < t.size(); ++s) {
    const Vec & z = sol.costate.z[s];
    xi[s] = z.tail(k);
    pt[s] = z.head(n) - fx.A(sol.trajectory.path.x[s]).transpose() * xi[s];
  }
  const auto dpt = sample_derivatives(t, pt, 5);
  const auto dxi = sample_derivatives(t, xi, 5);

  WongResiduals r;
  double speed0 = 0.0;
  for (std::size_t s = 0; s < t.size(); ++s) {
    const Vec & x = sol.trajectory.path.x[s];
    const Vec & u = sol.trajectory.u[s];
    const auto B = fx.curvature(x);
    const Mat a = fx.A(x);

    Vec r1 = dpt[s];
    for (Eigen::Index b = 0; b < n; ++b) {
      double v = 0.5 * z0 * u.dot(fx.dg(static_cast<std::size_t>(b)) * u);
      for (Eigen::Index i = 0; i < k; ++i) { v += B[static_cast<std::size_t>(i)].row(b).dot(u) * xi[s][i]; }
      r1[b] += v;
    }
    r.momentum = std::max(r.momentum, r1.norm());

    // c^k_ij (A u)^i ξ_k
    const Vec r2 = dxi[s] + fx.algebra.dual_action(a * u, xi[s]);
    r.charge = std::max(r.charge, r2.norm());

    const double speed = u.dot(fx.g(x) * u);
    if (s == 0) { speed0 = speed; }
    r.speed_drift = std::max(r.speed_drift, std::abs(speed - speed0));
  }
  return r;
}

namespace {

std::string join(const std::string & base, const std::string & key) { return base + "/" + key; }

double number(const json & j, const std::string & path)
{
  if (!j.is_number()) { throw ConfigError(path, "expected a number"); }
  const double v = j.get<double>();
  if (!std::isfinite(v)) { throw ConfigError(path, "must be finite"); }
  return v;
}

Vec vector_of(const json & j, const std::string & path, std::optional<std::size_t> size = std::nullopt)
{
  if (!j.is_array()) { throw ConfigError(path, "expected an array of numbers"); }
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) { v[static_cast<Eigen::Index>(i)] = number(j[i], path + "/" + std::to_string(i)); }
  if (size && j.size() != *size) {
    throw ConfigError(path, "expected " + std::to_string(*size) + " entries, got " + std::to_string(j.size()));
  }
  return v;
}

Mat matrix_of(const json & j, const std::string & path, std::optional<std::size_t> rows = std::nullopt, std::optional<std::size_t> cols = std::nullopt)
{
  if (!j.is_array()) { throw ConfigError(path, "expected an array of rows"); }
  if (rows && j.size() != *rows) { throw ConfigError(path, "expected " + std::to_string(*rows) + " rows"); }
  const std::size_t c = j.empty() ? cols.value_or(0) : (j[0].is_array() ? j[0].size() : 0);
  if (cols && c != *cols) { throw ConfigError(path, "expected " + std::to_string(*cols) + " columns"); }
  Mat m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(c));
  for (std::size_t r = 0; r < j.size(); ++r) {
    m.row(static_cast<Eigen::Index>(r)) = vector_of(j[r], path + "/" + std::to_string(r), c).transpose();
  }
  return m;
}

std::vector<Vec> rows_of(const json & j, const std::string & path)
{
  if (!j.is_array() || j.empty()) { throw ConfigError(path, "expected a non-empty array"); }
  std::vector<Vec> out;
  for (std::size_t r = 0; r < j.size(); ++r) { out.push_back(vector_of(j[r], path + "/" + std::to_string(r))); }
  return out;
}

void only_keys(const json & j, const std::string & path, std::initializer_list<const char *> keys)
{
  if (!j.is_object()) { throw ConfigError(path.empty() ? "/" : path, "expected an object"); }
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto & [key, value] : j.items()) {
    if (key == "sigma") {
      throw ConfigError(join(path, key), "two-anchor (skew) algebroids are not supported; only rho = sigma charts");
    }
    if (!allowed.contains(key)) { throw ConfigError(join(path, key), "unknown field"); }
  }
}

StructureTensor structure_of(const json & j, const std::string & path, std::size_t m)
{
  if (j.is_string()) {
    if (j.get<std::string>() == "so3") {
      if (m != 3) { throw ConfigError(path, "so3 needs algebra_dim 3"); }
      return levi_civita();
    }
    throw ConfigError(path, "unknown named algebra");
  }
  const Vec flat = vector_of(j, path, m * m * m);
  return StructureTensor(m, std::vector<double>(flat.data(), flat.data() + flat.size()));
}

const char * pipeline_name(Pipeline p)
{
  switch (p) {
  case Pipeline::simulate: return "simulate";
  case Pipeline::extremal: return "extremal";
  case Pipeline::shoot: return "shoot";
  case Pipeline::audit: return "audit";
  }
  return "?";
}

ChartAlgebroid chart_of(const ChartSpec & spec)
{
  if (spec.type == "tangent-bundle") { return ChartAlgebroid::tangent_bundle(spec.dim); }
  const StructureTensor c(spec.algebra_dim, spec.structure);
  if (spec.type == "lie-algebra") { return ChartAlgebroid::lie_algebra(c); }
  return ChartAlgebroid::atiyah(spec.dim, c);
}

std::size_t control_dim(const ControlSpec & c) { return c.finite ? static_cast<std::size_t>(c.values.front().size()) : static_cast<std::size_t>(c.lower.size()); }

void check_dims(const ScenarioConfig & c)
{
  auto need = [](const Vec & v, std::size_t n, const std::string & path) {
    if (static_cast<std::size_t>(v.size()) != n) {
      throw ConfigError(path, "expected " + std::to_string(n) + " entries, got " + std::to_string(v.size()));
    }
  };
  if (!(c.t1 > c.t0)) { throw ConfigError("/horizon/t1", "must exceed t0"); }
  if (!(c.step > 0.0) || c.step > c.t1 - c.t0) { throw ConfigError("/solver/step", "must be positive and at most the horizon"); }
  if (!(c.tol > 0.0)) { throw ConfigError("/solver/tol", "must be positive"); }
  std::size_t n = 0, m = 0;
  if (c.scenario == "so3-bang-bang") {
    need(c.a, 3, "/so3/a");
    need(c.b, 3, "/so3/b");
    m = 3;
  } else if (c.scenario == "wong") {
    const auto & w = c.wong;
    n = w.base_dim();
    const std::size_t k = w.algebra_dim();
    if (w.algebra.dim() != k) { throw ConfigError("/wong/A0", "row count must equal the algebra dimension"); }
    if (w.A1.size() != n) { throw ConfigError("/wong/A1", "needs one matrix per base coordinate"); }
    for (std::size_t i = 0; i < n; ++i) {
      if (w.A1[i].rows() != w.A0.rows() || w.A1[i].cols() != w.A0.cols()) {
        throw ConfigError("/wong/A1/" + std::to_string(i), "shape must match A0");
      }
    }
    if (w.G0.rows() != static_cast<Eigen::Index>(n) || w.G0.cols() != static_cast<Eigen::Index>(n)) {
      throw ConfigError("/wong/G0", "must be n x n");
    }
    if (w.G1.size() != n) { throw ConfigError("/wong/G1", "needs one matrix per base coordinate"); }
    m = n + k;
  } else if (c.scenario == "classical-tm-lq") {
    n = 1;
    m = 1;
  } else if (c.scenario == "custom") {
    const auto & ch = c.chart;
    if (ch.type == "tangent-bundle") {
      if (ch.dim == 0) { throw ConfigError("/chart/dim", "must be positive"); }
      n = m = ch.dim;
    } else if (ch.type == "lie-algebra" || ch.type == "atiyah") {
      if (ch.algebra_dim == 0) { throw ConfigError("/chart/algebra_dim", "must be positive"); }
      n = ch.type == "atiyah" ? ch.dim : 0;
      m = n + ch.algebra_dim;
    } else {
      throw ConfigError("/chart/type", "must be lie-algebra, tangent-bundle or atiyah");
    }
    const std::size_t p = control_dim(c.control);
    for (std::size_t i = 0; i < c.control.values.size(); ++i) {
      need(c.control.values[i], p, "/control/finite/" + std::to_string(i));
    }
    need(c.drift, m, "/dynamics/drift");
    if (static_cast<std::size_t>(c.inputs.rows()) != m || static_cast<std::size_t>(c.inputs.cols()) != p) {
      throw ConfigError("/dynamics/inputs", "must be " + std::to_string(m) + " x " + std::to_string(p));
    }
  } else {
    throw ConfigError("/scenario", "unknown scenario '" + c.scenario + "'");
  }
  need(c.x0, n, "/x0");
  if (c.pipeline != Pipeline::simulate && c.pipeline != Pipeline::audit) { need(c.z_init, m, "/z_init"); }
  if (c.pipeline == Pipeline::simulate && !c.control_values.empty()) {
    if (c.control_values.size() != c.control_breakpoints.size() + 1) {
      throw ConfigError("/signal/values", "needs one value more than breakpoints");
    }
  }
  if (c.pipeline == Pipeline::shoot) {
    if (n != 0) { throw ConfigError("/pipeline", "shooting needs a Lie-algebra chart"); }
    if (c.representation != "so3" && c.representation != "su2") {
      throw ConfigError("/shoot/representation", "must be so3 or su2");
    }
    if (m != 3) { throw ConfigError("/shoot/representation", "built-in representations need a 3-dimensional algebra"); }
    if (!c.target) { need(c.target_z_init, m, "/shoot/target_z_init"); }
    need(c.z_guess, m, "/shoot/z_guess");
  }
}

}  // namespace

ScenarioConfig default_config(const std::string & scenario)
{
  ScenarioConfig c;
  c.scenario = scenario;
  if (scenario == "so3-bang-bang") {
    c.a = Vec::Unit(3, 0);
    c.b = Vec::Unit(3, 1);
    c.x0 = Vec(0);
    c.z_init = Vec(3);
    c.z_init << 0.0, 1.0, 0.2;
    c.t1 = 6.0;
    c.free_time = true;
    c.tol = 1e-5;
    c.target_z_init = c.z_init;
    c.target_t1 = 2.0;
    c.z_guess = Vec(3);
    c.z_guess << 0.1, 0.9, 0.3;
  } else if (scenario == "wong") {
    c.wong = WongFixture::polynomial_so3();
    c.x0 = Vec(2);
    c.x0 << 0.1, -0.2;
    c.z_init = Vec(5);
    c.z_init << 0.6, -0.3, 0.5, 0.2, -0.4;
    c.t1 = 1.0;
  } else if (scenario == "classical-tm-lq") {
    c.state_weight = 1.0;
    c.x0 = Vec::Constant(1, 0.5);
    c.z_init = Vec::Constant(1, -0.3);
    c.t1 = 1.0;
  } else if (scenario == "custom") {
    c.chart = ChartSpec{.type = "tangent-bundle", .dim = 2, .algebra_dim = 0, .structure = {}};
    c.control = ControlSpec{.finite = false, .values = {}, .lower = Vec::Constant(2, -1.0), .upper = Vec::Constant(2, 1.0)};
    c.drift = Vec::Zero(2);
    c.inputs = Mat::Identity(2, 2);
    c.cost_quadratic = 1.0;
    c.x0 = Vec::Zero(2);
    c.z_init = Vec::Constant(2, 0.25);
    c.t1 = 1.0;
  } else {
    throw ConfigError("/scenario", "unknown scenario '" + scenario + "'");
  }
  return c;
}

std::vector<ScenarioInfo> list_scenarios()
{
  return {
    {"so3-bang-bang", "rigid body on so(3), two fixed axes a + u b with u in {-1, 1}, time-optimal"},
    {"wong", "Atiyah algebroid TR^2 x so(3) with a linear connection; Wong equations"},
    {"classical-tm-lq", "tangent bundle of R, f = u, L = (q x^2 + u^2)/2, closed-form comparison"},
    {"custom", "user chart (Lie algebra, tangent bundle or Atiyah), control set, affine dynamics"},
  };
}

ScenarioConfig parse_config(const std::string & json_text)
{
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error & e) {
    throw ConfigError("/", std::string("invalid JSON: ") + e.what());
  }
  only_keys(j,
            "",
            {"schema_version", "scenario", "pipeline", "horizon", "solver", "z0", "x0", "z_init", "so3", "wong",
             "classical", "chart", "control", "dynamics", "cost", "signal", "shoot"});
  if (!j.contains("schema_version")) { throw ConfigError("/schema_version", "missing"); }
  if (!j["schema_version"].is_number_integer() || j["schema_version"].get<int>() != scenario_schema_version) {
    throw ConfigError("/schema_version", "unsupported version (expected " + std::to_string(scenario_schema_version) + ")");
  }
  if (!j.contains("scenario") || !j["scenario"].is_string()) { throw ConfigError("/scenario", "missing scenario name"); }
  ScenarioConfig c = default_config(j["scenario"].get<std::string>());

  if (j.contains("pipeline")) {
    const auto p = j["pipeline"].is_string() ? j["pipeline"].get<std::string>() : "";
    if (p == "simulate") { c.pipeline = Pipeline::simulate; }
    else if (p == "extremal") { c.pipeline = Pipeline::extremal; }
    else if (p == "shoot") { c.pipeline = Pipeline::shoot; }
    else if (p == "audit") { c.pipeline = Pipeline::audit; }
    else { throw ConfigError("/pipeline", "must be simulate, extremal, shoot or audit"); }
  }
  if (j.contains("horizon")) {
    const auto & h = j["horizon"];
    only_keys(h, "/horizon", {"t0", "t1", "free_time"});
    if (h.contains("t0")) { c.t0 = number(h["t0"], "/horizon/t0"); }
    if (h.contains("t1")) { c.t1 = number(h["t1"], "/horizon/t1"); }
    if (h.contains("free_time")) {
      if (!h["free_time"].is_boolean()) { throw ConfigError("/horizon/free_time", "expected a boolean"); }
      c.free_time = h["free_time"].get<bool>();
    }
  }
  if (j.contains("solver")) {
    const auto & s = j["solver"];
    only_keys(s, "/solver", {"step", "tol", "seed", "symbols"});
    if (s.contains("step")) { c.step = number(s["step"], "/solver/step"); }
    if (s.contains("tol")) { c.tol = number(s["tol"], "/solver/tol"); }
    if (s.contains("seed")) {
      if (!s["seed"].is_number_unsigned()) { throw ConfigError("/solver/seed", "expected a non-negative integer"); }
      c.seed = s["seed"].get<std::uint64_t>();
    }
    if (s.contains("symbols")) {
      if (!s["symbols"].is_number_unsigned()) { throw ConfigError("/solver/symbols", "expected a non-negative integer"); }
      c.symbol_samples = s["symbols"].get<std::size_t>();
    }
  }
  if (j.contains("z0")) {
    const auto z = j["z0"].is_string() ? j["z0"].get<std::string>() : "";
    if (z == "normal") { c.z0_mode = Z0Mode::normal; }
    else if (z == "abnormal") { c.z0_mode = Z0Mode::abnormal; }
    else { throw ConfigError("/z0", "must be normal or abnormal"); }
  }
  if (j.contains("x0")) { c.x0 = vector_of(j["x0"], "/x0"); }
  if (j.contains("z_init")) { c.z_init = vector_of(j["z_init"], "/z_init"); }
  if (j.contains("so3")) {
    const auto & s = j["so3"];
    only_keys(s, "/so3", {"a", "b"});
    if (s.contains("a")) { c.a = vector_of(s["a"], "/so3/a", 3); }
    if (s.contains("b")) { c.b = vector_of(s["b"], "/so3/b", 3); }
  }
  if (j.contains("wong")) {
    const auto & w = j["wong"];
    only_keys(w, "/wong", {"flat", "base_dim", "algebra_dim", "algebra", "A0", "A1", "G0", "G1"});
    if (w.contains("flat") && w["flat"].is_boolean() && w["flat"].get<bool>()) {
      c.wong = WongFixture::flat(c.wong.base_dim(), c.wong.algebra);
    }
    const std::size_t n = w.contains("base_dim") ? static_cast<std::size_t>(number(w["base_dim"], "/wong/base_dim")) : c.wong.base_dim();
    const std::size_t k = w.contains("algebra_dim") ? static_cast<std::size_t>(number(w["algebra_dim"], "/wong/algebra_dim")) : c.wong.algebra_dim();
    if (n != c.wong.base_dim() || k != c.wong.algebra_dim()) {
      if (!w.contains("algebra") || !w.contains("A0")) { throw ConfigError("/wong", "changing dimensions needs algebra and A0"); }
      c.wong = WongFixture::flat(n, StructureTensor(k));
    }
    if (w.contains("algebra")) { c.wong.algebra = structure_of(w["algebra"], "/wong/algebra", k); }
    if (w.contains("A0")) { c.wong.A0 = matrix_of(w["A0"], "/wong/A0", k, n); }
    if (w.contains("A1")) {
      if (!w["A1"].is_array()) { throw ConfigError("/wong/A1", "expected one matrix per base coordinate"); }
      c.wong.A1.clear();
      for (std::size_t i = 0; i < w["A1"].size(); ++i) { c.wong.A1.push_back(matrix_of(w["A1"][i], "/wong/A1/" + std::to_string(i), k, n)); }
    }
    if (w.contains("G0")) { c.wong.G0 = matrix_of(w["G0"], "/wong/G0", n, n); }
    if (w.contains("G1")) {
      if (!w["G1"].is_array()) { throw ConfigError("/wong/G1", "expected one matrix per base coordinate"); }
      c.wong.G1.clear();
      for (std::size_t i = 0; i < w["G1"].size(); ++i) { c.wong.G1.push_back(matrix_of(w["G1"][i], "/wong/G1/" + std::to_string(i), n, n)); }
    }
  }
  if (j.contains("classical")) {
    const auto & s = j["classical"];
    only_keys(s, "/classical", {"state_weight"});
    if (s.contains("state_weight")) {
      c.state_weight = number(s["state_weight"], "/classical/state_weight");
      if (c.state_weight < 0.0) { throw ConfigError("/classical/state_weight", "must be non-negative"); }
    }
  }
  if (j.contains("chart")) {
    const auto & s = j["chart"];
    only_keys(s, "/chart", {"type", "dim", "algebra_dim", "structure"});
    if (!s.contains("type") || !s["type"].is_string()) { throw ConfigError("/chart/type", "missing"); }
    c.chart = ChartSpec{.type = s["type"].get<std::string>(), .dim = 0, .algebra_dim = 0, .structure = {}};
    if (s.contains("dim")) { c.chart.dim = static_cast<std::size_t>(number(s["dim"], "/chart/dim")); }
    if (s.contains("algebra_dim")) { c.chart.algebra_dim = static_cast<std::size_t>(number(s["algebra_dim"], "/chart/algebra_dim")); }
    if (s.contains("structure")) {
      const auto t = structure_of(s["structure"], "/chart/structure", c.chart.algebra_dim);
      c.chart.structure = t.data();
    } else if (c.chart.type != "tangent-bundle") {
      throw ConfigError("/chart/structure", "missing structure constants");
    }
  }
  if (j.contains("control")) {
    const auto & s = j["control"];
    only_keys(s, "/control", {"finite", "box"});
    if (s.contains("finite") == s.contains("box")) { throw ConfigError("/control", "give exactly one of finite or box"); }
    if (s.contains("finite")) {
      c.control = ControlSpec{.finite = true, .values = rows_of(s["finite"], "/control/finite"), .lower = {}, .upper = {}};
    } else {
      const auto & b = s["box"];
      only_keys(b, "/control/box", {"lower", "upper"});
      if (!b.contains("lower") || !b.contains("upper")) { throw ConfigError("/control/box", "needs lower and upper"); }
      const Vec lo = vector_of(b["lower"], "/control/box/lower");
      const Vec hi = vector_of(b["upper"], "/control/box/upper", static_cast<std::size_t>(lo.size()));
      if ((hi - lo).minCoeff() < 0.0) { throw ConfigError("/control/box", "lower must not exceed upper"); }
      c.control = ControlSpec{.finite = false, .values = {}, .lower = lo, .upper = hi};
    }
  }
  if (j.contains("dynamics")) {
    const auto & s = j["dynamics"];
    only_keys(s, "/dynamics", {"drift", "inputs"});
    if (s.contains("drift")) { c.drift = vector_of(s["drift"], "/dynamics/drift"); }
    if (s.contains("inputs")) { c.inputs = matrix_of(s["inputs"], "/dynamics/inputs"); }
  }
  if (j.contains("cost")) {
    const auto & s = j["cost"];
    only_keys(s, "/cost", {"constant", "quadratic"});
    c.cost_constant = 0.0;
    c.cost_quadratic = 0.0;
    if (s.contains("constant")) { c.cost_constant = number(s["constant"], "/cost/constant"); }
    if (s.contains("quadratic")) { c.cost_quadratic = number(s["quadratic"], "/cost/quadratic"); }
  }
  if (j.contains("signal")) {
    const auto & s = j["signal"];
    only_keys(s, "/signal", {"breakpoints", "values"});
    if (s.contains("breakpoints")) {
      const Vec bp = vector_of(s["breakpoints"], "/signal/breakpoints");
      c.control_breakpoints.assign(bp.data(), bp.data() + bp.size());
    }
    if (s.contains("values")) { c.control_values = rows_of(s["values"], "/signal/values"); }
  }
  if (j.contains("shoot")) {
    const auto & s = j["shoot"];
    only_keys(s, "/shoot", {"representation", "target", "target_z_init", "target_t1", "z_guess"});
    if (s.contains("representation")) {
      if (!s["representation"].is_string()) { throw ConfigError("/shoot/representation", "expected a string"); }
      c.representation = s["representation"].get<std::string>();
    }
    if (s.contains("target")) { c.target = matrix_of(s["target"], "/shoot/target"); }
    if (s.contains("target_z_init")) { c.target_z_init = vector_of(s["target_z_init"], "/shoot/target_z_init"); }
    if (s.contains("target_t1")) { c.target_t1 = number(s["target_t1"], "/shoot/target_t1"); }
    if (s.contains("z_guess")) { c.z_guess = vector_of(s["z_guess"], "/shoot/z_guess"); }
  }
  check_dims(c);
  return c;
}

void ScenarioReport::bound(std::string name, double value, double tolerance)
{
  checks.push_back(Check{std::move(name), value, tolerance, std::isfinite(value) && value <= tolerance});
}

bool ScenarioReport::pass() const
{
  return std::all_of(checks.begin(), checks.end(), [](const Check & c) { return c.pass; });
}

const Check * ScenarioReport::find(const std::string & name) const
{
  const auto it = std::find_if(checks.begin(), checks.end(), [&](const Check & c) { return c.name == name; });
  return it == checks.end() ? nullptr : &*it;
}

std::string report_json(const ScenarioReport & report)
{
  json j;
  j["schema_version"] = scenario_schema_version;
  j["scenario"] = report.scenario;
  j["pipeline"] = report.pipeline;
  j["pass"] = report.pass();
  j["checks"] = json::array();
  for (const auto & c : report.checks) {
    j["checks"].push_back({{"name", c.name}, {"value", std::isfinite(c.value) ? json(c.value) : json(nullptr)},
                           {"tolerance", c.tolerance}, {"pass", c.pass}});
  }
  j["notes"] = report.notes;
  j["switch_times"] = report.switch_times;
  return j.dump(2);
}

ControlSystem build_system(const ScenarioConfig & c)
{
  if (c.scenario == "so3-bang-bang") {
    const Vec a = c.a, b = c.b;
    return ControlSystem{
      .alg = ChartAlgebroid::so3(),
      .f = [a, b](const Vec &, const Vec & u) { return Vec(a + u[0] * b); },
      .L = [](const Vec &, const Vec &) { return 1.0; },
      .U = ControlSpace::finite({Vec::Constant(1, -1.0), Vec::Constant(1, 1.0)}),
      .df_dx = [](const Vec &, const Vec &) { return Mat(3, 0); },
      .dL_dx = [](const Vec &, const Vec &) { return Vec(0); },
    };
  }
  if (c.scenario == "wong") { return wong_system(c.wong); }
  if (c.scenario == "classical-tm-lq") {
    const double q = c.state_weight;
    constexpr double bound = 10.0;
    HamiltonianMaximizer best = [](const Vec &, const Vec & z, double z0) -> std::optional<Vec> {
      if (!(z0 < 0.0)) { return std::nullopt; }
      Vec u = z / (-z0);
      if (std::abs(u[0]) > bound) { return std::nullopt; }
      return u;
    };
    return ControlSystem{
      .alg = ChartAlgebroid::tangent_bundle(1),
      .f = [](const Vec &, const Vec & u) { return u; },
      .L = [q](const Vec & x, const Vec & u) { return 0.5 * (q * x[0] * x[0] + u[0] * u[0]); },
      .U = ControlSpace::box(Vec::Constant(1, -bound), Vec::Constant(1, bound), best),
      .df_dx = [](const Vec &, const Vec &) { return Mat(Mat::Zero(1, 1)); },
      .dL_dx = [q](const Vec & x, const Vec &) { return Vec(Vec::Constant(1, q * x[0])); },
    };
  }
  // custom
  const Vec drift = c.drift;
  const Mat inputs = c.inputs;
  const double c0 = c.cost_constant;
  const double r = c.cost_quadratic;
  const auto m = static_cast<Eigen::Index>(drift.size());
  ControlSpace U = c.control.finite ? ControlSpace::finite(c.control.values) : [&] {
    const Vec lo = c.control.lower, hi = c.control.upper;
    HamiltonianMaximizer best = [inputs, r, lo, hi](const Vec &, const Vec & z, double z0) -> std::optional<Vec> {
      if (!(z0 < 0.0) || !(r > 0.0)) { return std::nullopt; }
      Vec u = inputs.transpose() * z / (-z0 * r);
      if ((u - lo).minCoeff() < 0.0 || (hi - u).minCoeff() < 0.0) { return std::nullopt; }
      return u;
    };
    return ControlSpace::box(lo, hi, best);
  }();
  const auto n = static_cast<Eigen::Index>(c.x0.size());
  return ControlSystem{
    .alg = chart_of(c.chart),
    .f = [drift, inputs](const Vec &, const Vec & u) { return Vec(drift + inputs * u); },
    .L = [c0, r](const Vec &, const Vec & u) { return c0 + 0.5 * r * u.squaredNorm(); },
    .U = std::move(U),
    .df_dx = [m, n](const Vec &, const Vec &) { return Mat(Mat::Zero(m, n)); },
    .dL_dx = [n](const Vec &, const Vec &) { return Vec(Vec::Zero(n)); },
  };
}

namespace {

void al_checks(ScenarioReport & r, const ChartAlgebroid & alg, std::uint64_t seed)
{
  const auto pts = sample_box(alg.base_dim(), 100, seed);
  const auto skew = validate_skew(alg, pts, 1e-6);
  const auto morph = validate_anchor_morphism(alg, pts, 1e-5, 1e-6);
  r.bound("al_skew", skew.max_violation, skew.tolerance);
  r.bound("al_anchor_morphism", morph.max_violation, morph.tolerance);
}

void audit_checks(ScenarioReport & r, const ExtremalAudit & a)
{
  r.bound("max_condition", a.max_condition_violation, a.tolerance);
  r.bound("costate_flow", a.costate_residual, a.tolerance);
  r.bound(a.mode == HorizonMode::free_time ? "hamiltonian_zero" : "hamiltonian_constant", a.h_drift, a.tolerance);
  r.checks.push_back(Check{"multiplier", a.z0, 0.0, a.multiplier_ok});
  r.notes.insert(r.notes.end(), a.notes.begin(), a.notes.end());
}

HorizonMode mode_of(const ScenarioConfig & c) { return c.free_time ? HorizonMode::free_time : HorizonMode::fixed_time; }

ScenarioArtifacts artifacts_of(const ControlSystem & sys, const PmpSolution & sol, ScenarioReport report)
{
  ScenarioArtifacts out{.report = std::move(report), .trajectory = sol.trajectory, .costate = sol.costate, .hamiltonian = {}};
  for (std::size_t i = 0; i < sol.trajectory.u.size(); ++i) {
    out.hamiltonian.push_back(
      hamiltonian(sys, sol.costate.z[i], sol.costate.z0, sol.trajectory.path.x[i], sol.trajectory.u[i]));
  }
  out.report.switch_times = sol.switch_times;
  return out;
}

ScenarioReport new_report(const ScenarioConfig & c)
{
  return ScenarioReport{.scenario = c.scenario, .pipeline = pipeline_name(c.pipeline), .checks = {}, .notes = {}, .switch_times = {}};
}

void cone_check(ScenarioReport & r, const ControlSystem & sys, const PmpSolution & sol, const ScenarioConfig & c)
{
  if (c.symbol_samples == 0) { return; }
  const auto cone = extremal_cone_check(sys, sol, c.symbol_samples, c.seed, c.free_time);
  r.bound("cone_support", cone.max_pairing, cone.tolerance);
}

ScenarioArtifacts generic_extremal(const ScenarioConfig & c)
{
  const ControlSystem sys = build_system(c);
  ScenarioReport r = new_report(c);
  al_checks(r, sys.alg, c.seed);
  const auto sol = integrate_pmp_flow(sys, c.x0, c.z_init, c.z0(), TimeGrid(c.t0, c.t1, c.step));
  audit_checks(r, verify_extremal(sys, sol.trajectory, sol.costate, mode_of(c), AuditOptions{.tol = c.tol}));
  cone_check(r, sys, sol, c);
  return artifacts_of(sys, sol, std::move(r));
}

ScenarioArtifacts simulate(const ScenarioConfig & c)
{
  const ControlSystem sys = build_system(c);
  ScenarioReport r = new_report(c);
  al_checks(r, sys.alg, c.seed);
  const ControlSignal u = c.control_values.empty()
                            ? ControlSignal::constant(sys.U.is_finite() ? sys.U.finite_set().values.front()
                                                                        : Vec(0.5 * (sys.U.box_set().lower + sys.U.box_set().upper)))
                            : ControlSignal(c.control_breakpoints, c.control_values);
  const auto traj = simulate_trajectory(sys, u, c.x0, TimeGrid(c.t0, c.t1, c.step));
  if (sys.alg.base_dim() > 0) { r.bound("admissibility", admissibility_residual(sys.alg, traj.path), c.tol); }
  r.switch_times = u.breakpoints_in(c.t0, c.t1);
  return ScenarioArtifacts{.report = std::move(r), .trajectory = traj, .costate = std::nullopt, .hamiltonian = {}};
}

ScenarioArtifacts shoot(const ScenarioConfig & c)
{
  const ControlSystem sys = build_system(c);
  ScenarioReport r = new_report(c);
  al_checks(r, sys.alg, c.seed);
  const auto rep = c.representation == "su2" ? GroupRepresentation::su2() : GroupRepresentation::so3();
  ShootOptions opt;
  opt.step = c.step;
  opt.free_time = c.free_time;
  Mat target;
  if (c.target) {
    target = *c.target;
  } else {
    const auto known = integrate_pmp_flow(sys, c.x0, c.target_z_init, c.z0(), TimeGrid(c.t0, c.target_t1, c.step));
    target = develop_to_group(sys.alg, known.trajectory.path, rep);
    r.notes.push_back("target developed from the extremal with z_init = target_z_init");
  }
  const double t1_guess = c.free_time ? c.t1 : c.target ? c.t1 : c.target_t1;
  const auto res = shoot_endpoint(sys, rep, target, c.z0(), c.z_guess, c.t0, t1_guess, opt);
  r.bound("shoot_residual", res.residual, opt.success_residual);
  r.notes.push_back(std::string(res.converged ? "converged" : "not converged") + " after " + std::to_string(res.evaluations) + " evaluations");
  const auto sol = integrate_pmp_flow(sys, c.x0, res.z_init, c.z0(), TimeGrid(c.t0, std::max(res.t1, c.t0 + c.step), c.step));
  return artifacts_of(sys, sol, std::move(r));
}

}  // namespace

ScenarioArtifacts scenario_so3_bang_bang(const ScenarioConfig & c)
{
  const ControlSystem sys = build_system(c);
  ScenarioReport r = new_report(c);
  al_checks(r, sys.alg, c.seed);
  const auto sol = integrate_pmp_flow(sys, c.x0, c.z_init, c.z0(), TimeGrid(c.t0, c.t1, c.step));
  const auto & t = sol.trajectory.path.t;
  const auto & z = sol.costate.z;
  const StructureTensor eps = levi_civita();

  std::size_t violations = 0;
  double casimir = 0.0;
  double hmax = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double s = z[i].dot(c.b);
    const bool breakpoint = (i > 0 && t[i - 1] == t[i]) || (i + 1 < t.size() && t[i + 1] == t[i]);
    if (!breakpoint && s * sol.trajectory.u[i][0] < 0.0) { ++violations; }
    casimir = std::max(casimir, std::abs(z[i].norm() - z.front().norm()));
    hmax = std::max(hmax, std::abs(hamiltonian(sys, z[i], sol.costate.z0, Vec(0), sol.trajectory.u[i])));
  }
  // ż_j = c^k_ij (a + u b)^i z_k
  double residual = 0.0;
  for (const auto & seg : segment_ranges(t)) {
    if (seg.second - seg.first < 3) { continue; }
    for (std::size_t i = seg.first; i < seg.second; ++i) {
      const Vec w = c.a + sol.trajectory.u[i][0] * c.b;
      Vec rhs = Vec::Zero(3);
      for (std::size_t j = 0; j < 3; ++j) {
        for (std::size_t k = 0; k < 3; ++k) {
          for (std::size_t l = 0; l < 3; ++l) {
            rhs[static_cast<Eigen::Index>(j)] += eps(k, l, j) * w[static_cast<Eigen::Index>(l)] * z[i][static_cast<Eigen::Index>(k)];
          }
        }
      }
      residual = std::max(residual, (sample_derivative(t, z, i, seg, 5) - rhs).norm());
    }
  }
  r.bound("switching_law_violations", static_cast<double>(violations), 0.0);
  r.bound(c.free_time ? "hamiltonian_abs" : "hamiltonian_abs_info", hmax, c.free_time ? 1e-6 : INFINITY);
  r.bound("casimir_drift", casimir, 1e-8);
  r.bound("costate_residual", residual, 1e-6);
  const auto audit = verify_extremal(sys, sol.trajectory, sol.costate, mode_of(c), AuditOptions{.tol = c.tol});
  audit_checks(r, audit);
  if (audit.permanently_singular) { r.notes.push_back("permanent singularity: <z, b> vanishes at every node"); }
  r.notes.push_back(std::to_string(sol.switch_times.size()) + " switch(es); u = sgn<z, b>");
  cone_check(r, sys, sol, c);
  return artifacts_of(sys, sol, std::move(r));
}

ScenarioArtifacts scenario_wong(const ScenarioConfig & c)
{
  const ControlSystem sys = wong_system(c.wong);
  ScenarioReport r = new_report(c);
  al_checks(r, sys.alg, c.seed);
  double antisym = 0.0;
  for (const auto & x : sample_box(c.wong.base_dim(), 100, c.seed)) {
    for (const auto & B : c.wong.curvature(x)) { antisym = std::max(antisym, (B + B.transpose()).cwiseAbs().maxCoeff()); }
  }
  r.bound("curvature_antisymmetry", antisym, 1e-10);
  const auto sol = integrate_pmp_flow(sys, c.x0, c.z_init, c.z0(), TimeGrid(c.t0, c.t1, c.step));
  const auto w = wong_residuals(c.wong, sol);
  r.bound("wong_momentum_residual", w.momentum, 1e-5);
  r.bound("wong_charge_residual", w.charge, 1e-5);
  r.bound("speed_drift", w.speed_drift, 1e-6);
  audit_checks(r, verify_extremal(sys, sol.trajectory, sol.costate, mode_of(c), AuditOptions{.tol = c.tol}));
  cone_check(r, sys, sol, c);
  return artifacts_of(sys, sol, std::move(r));
}

ScenarioArtifacts scenario_classical(const ScenarioConfig & c)
{
  const ControlSystem sys = build_system(c);
  ScenarioReport r = new_report(c);
  al_checks(r, sys.alg, c.seed);
  const auto sol = integrate_pmp_flow(sys, c.x0, c.z_init, c.z0(), TimeGrid(c.t0, c.t1, c.step));
  const double z0 = sol.costate.z0;

  // textbook adjoint −(∂f/∂x)ᵀz − z0 ∂L/∂x
  double reduction = 0.0;
  for (std::size_t i = 0; i < sol.trajectory.u.size(); ++i) {
    const Vec & x = sol.trajectory.path.x[i];
    const Vec & u = sol.trajectory.u[i];
    const Vec & z = sol.costate.z[i];
    const Vec textbook = -sys.f_x(x, u).transpose() * z - z0 * sys.L_x(x, u);
    reduction = std::max(reduction, (costate_rhs(sys, x, u, z, z0) - textbook).cwiseAbs().maxCoeff());
  }
  r.bound("costate_reduction", reduction, 1e-12);

  if (z0 < 0.0) {
    // ẋ = z/(−z0), ż = −z0 q x  ⇒  x'' = q x
    const double q = c.state_weight;
    const double k = std::sqrt(q);
    const double x0 = c.x0[0];
    const double v0 = c.z_init[0] / (-z0);
    double err = 0.0;
    for (std::size_t i = 0; i < sol.trajectory.path.t.size(); ++i) {
      const double s = sol.trajectory.path.t[i] - c.t0;
      const double x = q > 0.0 ? x0 * std::cosh(k * s) + v0 / k * std::sinh(k * s) : x0 + v0 * s;
      const double v = q > 0.0 ? x0 * k * std::sinh(k * s) + v0 * std::cosh(k * s) : v0;
      err = std::max({err, std::abs(sol.trajectory.path.x[i][0] - x), std::abs(sol.costate.z[i][0] / (-z0) - v),
                      std::abs(sol.trajectory.u[i][0] - v)});
    }
    r.bound("closed_form_error", err, 1e-6);
  }
  const auto audit = verify_extremal(sys, sol.trajectory, sol.costate, mode_of(c), AuditOptions{.tol = c.tol});
  if (!c.free_time) { r.bound("hamiltonian_constancy", audit.h_drift, 1e-8); }
  audit_checks(r, audit);
  cone_check(r, sys, sol, c);
  return artifacts_of(sys, sol, std::move(r));
}

ScenarioReport validate_scenario(const ScenarioConfig & c)
{
  ScenarioReport r = new_report(c);
  r.pipeline = "validate";
  al_checks(r, build_system(c).alg, c.seed);
  return r;
}

ScenarioArtifacts run_scenario(const ScenarioConfig & c,
                               const std::optional<Trajectory> & trajectory,
                               const std::optional<CostatePath> & costate)
{
  switch (c.pipeline) {
  case Pipeline::simulate: return simulate(c);
  case Pipeline::shoot: return shoot(c);
  case Pipeline::audit: {
    if (!trajectory || !costate) { throw std::invalid_argument("audit pipeline needs a trajectory and a costate"); }
    const ControlSystem sys = build_system(c);
    ScenarioReport r = new_report(c);
    al_checks(r, sys.alg, c.seed);
    audit_checks(r, verify_extremal(sys, *trajectory, *costate, mode_of(c), AuditOptions{.tol = c.tol}));
    r.switch_times = control_signal_of(*trajectory).breakpoints();
    return ScenarioArtifacts{.report = std::move(r), .trajectory = trajectory, .costate = costate, .hamiltonian = {}};
  }
  case Pipeline::extremal: break;
  }
  if (c.scenario == "so3-bang-bang") { return scenario_so3_bang_bang(c); }
  if (c.scenario == "wong") { return scenario_wong(c); }
  if (c.scenario == "classical-tm-lq") { return scenario_classical(c); }
  return generic_extremal(c);
}

}  // namespace alc
