// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "alcontrol/pmp.hpp"
#include "alcontrol/scenarios.hpp"
#include "fixtures.hpp"

using namespace alc;
using alc::test::v;

namespace {

struct Outcome
{
  bool pass{true};
  std::ostringstream detail;

  void require(bool ok, const std::string & what, double value)
  {
    pass = pass && ok;
    detail << (detail.tellp() > 0 ? "; " : "") << what << "=" << value << (ok ? "" : " (!)");
  }
};

int failures = 0;

void criterion(int id, const std::string & title, double budget_s, const std::function<void(Outcome &)> & body)
{
  Outcome o;
  const auto start = std::chrono::steady_clock::now();
  try {
    body(o);
  } catch (const std::exception & e) {
    o.pass = false;
    o.detail << "exception: " << e.what();
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool in_time = secs < budget_s;
  const bool ok = o.pass && in_time;
  if (!ok) { ++failures; }
  std::printf("%s %d %s: %s [%.3f s / %.0f s%s]\n", ok ? "PASS" : "FAIL", id, title.c_str(), o.detail.str().c_str(), secs,
              budget_s, in_time ? "" : ", over budget");
  std::fflush(stdout);
}

ControlSystem symmetric_so3_system()
{
  return ControlSystem{
    .alg = test::symmetric_so3(),
    .f = [](const Vec &, const Vec & u) { return Vec(v({1, 0, 0}) + u[0] * v({0, 1, 0})); },
    .L = [](const Vec &, const Vec &) { return 1.0; },
    .U = ControlSpace::finite({v({-1}), v({1})}),
  };
}

EPath planar_curve(double step)
{
  return sample_path(
    TimeGrid(0.0, 1.0, step), [](double t) { return v({std::sin(3.0 * t), t * t}); },
    [](double t, std::size_t) { return v({3.0 * std::cos(3.0 * t), 2.0 * t}); });
}

EPath constant_algebra_path(const Vec & a, double t1)
{
  return sample_path(TimeGrid(0.0, t1, 1e-3), [](double) { return Vec(0); }, [a](double, std::size_t) { return a; });
}

}  // namespace

int main()
{
  criterion(1, "algebroid axiom validation", 1.0, [](Outcome & o) {
    const std::vector<ChartAlgebroid> charts{
      ChartAlgebroid::tangent_bundle(3),
      ChartAlgebroid::so3(),
      ChartAlgebroid::atiyah(2, levi_civita()),
      product_with_time(ChartAlgebroid::so3()).inner,
      wong_system(WongFixture::polynomial_so3()).alg,
    };
    double worst = 0.0;
    bool all = true;
    for (const auto & alg : charts) {
      const auto pts = sample_box(alg.base_dim(), 100, 1);
      const auto s = validate_skew(alg, pts, 1e-6);
      const auto m = validate_anchor_morphism(alg, pts, 1e-5, 1e-6);
      all = all && s.pass && m.pass;
      worst = std::max({worst, s.max_violation, m.max_violation});
    }
    o.require(all, "builtin_max_violation", worst);
    const double ns = validate_skew(test::non_skew_chart(), sample_box(0, 100, 1), 1e-6).max_violation;
    const double nm = validate_anchor_morphism(test::non_morphism_chart(), sample_box(2, 100, 1), 1e-5, 1e-6).max_violation;
    o.require(ns > 1e-3, "non_skew", ns);
    o.require(nm > 1e-3, "non_morphism", nm);
  });

  criterion(2, "pairing preservation", 5.0, [](Outcome & o) {
    const TimeGrid grid(0.0, 1.0, 1e-3);
    const double so3 = pairing_drift(test::so3_system(), ControlSignal({0.5}, {v({1}), v({-1})}), Vec(0), grid,
                                     v({1, 0.5, -0.3}), v({0.2, 1, 0.7}));
    const double wong = pairing_drift(wong_system(WongFixture::polynomial_so3()), ControlSignal::constant(v({0.5, -0.3})),
                                      v({0.1, -0.2}), grid, v({1, 0.5, -0.3, 0.2, 0.4}), v({0.2, 1, 0.7, -0.6, 0.1}));
    const double broken = pairing_drift(symmetric_so3_system(), ControlSignal::constant(v({1})), Vec(0), grid,
                                        v({1, 0.5, -0.3}), v({0.2, 1, 0.7}));
    o.require(so3 < 1e-8, "so3_drift", so3);
    o.require(wong < 1e-8, "wong_drift", wong);
    o.require(broken > 1e-3, "symmetric_c_drift", broken);
  });

  criterion(3, "homotopy machinery", 30.0, [](Outcome & o) {
    const auto tm = ChartAlgebroid::tangent_bundle(2);
    const auto at = ChartAlgebroid::atiyah(2, levi_civita());
    const double chi_tm = generate_infinitesimal_homotopy(tm, test::flow_family(2), test::flow_family_b0(2)).chi_max;
    const auto src5 = test::flow_family(5);
    const auto gen_at = generate_infinitesimal_homotopy(at, src5, test::flow_family_b0(5));
    const double chi_bad =
      generate_infinitesimal_homotopy(test::non_morphism_chart(), test::flow_family(2), test::flow_family_b0(2)).chi_max;
    o.require(chi_tm < 1e-4, "chi_tangent", chi_tm);
    o.require(gen_at.chi_max < 1e-4, "chi_atiyah", gen_at.chi_max);
    o.require(chi_bad > 1e-2, "chi_non_al", chi_bad);

    const double coarse = homotopy_residual(tm, shrink_homotopy(tm, planar_curve(0.02), 17)).max();
    const double fine = homotopy_residual(tm, shrink_homotopy(tm, planar_curve(0.01), 33)).max();
    o.require(coarse / fine >= 2.0, "shrink_refinement_ratio", coarse / fine);

    const auto again = generate_infinitesimal_homotopy(at, src5, test::flow_family_b0(5), {.threads = 4});
    std::size_t mismatches = 0;
    for (std::size_t i = 0; i < src5.t.size(); ++i) {
      for (std::size_t j = 0; j < src5.eps.size(); ++j) { mismatches += gen_at.field.b[i][j] == again.field.b[i][j] ? 0 : 1; }
    }
    o.require(mismatches == 0, "determinism_mismatches", static_cast<double>(mismatches));
  });

  criterion(4, "so(3) bang-bang extremal", 10.0, [](Outcome & o) {
    const auto out = scenario_so3_bang_bang(default_config("so3-bang-bang"));
    const auto & r = out.report;
    o.require(r.find("switching_law_violations")->value == 0.0, "switching_violations", r.find("switching_law_violations")->value);
    o.require(r.find("hamiltonian_abs")->value < 1e-6, "max_abs_H", r.find("hamiltonian_abs")->value);
    o.require(r.find("casimir_drift")->value < 1e-8, "casimir_drift", r.find("casimir_drift")->value);
    o.require(r.find("costate_residual")->value < 1e-6, "costate_residual", r.find("costate_residual")->value);
    o.require(true, "switches", static_cast<double>(r.switch_times.size()));
  });

  criterion(5, "Wong equations", 10.0, [](Outcome & o) {
    const auto c = default_config("wong");
    const auto sol = integrate_pmp_flow(wong_system(c.wong), c.x0, c.z_init, -1.0, TimeGrid(0.0, 1.0, 1e-3));
    const auto w = wong_residuals(c.wong, sol);
    o.require(w.momentum < 1e-5, "momentum_residual", w.momentum);
    o.require(w.charge < 1e-5, "charge_residual", w.charge);
    o.require(w.speed_drift < 1e-6, "speed_drift", w.speed_drift);
    const auto flat = WongFixture::flat(2, levi_civita());
    const auto fs = integrate_pmp_flow(wong_system(flat), c.x0, c.z_init, -1.0, TimeGrid(0.0, 1.0, 1e-3));
    double line = 0.0;
    for (std::size_t i = 0; i < fs.trajectory.path.size(); ++i) {
      const Vec expected = c.x0 + fs.trajectory.path.t[i] * c.z_init.head(2);
      line = std::max(line, (fs.trajectory.path.x[i] - expected).norm());
    }
    o.require(line < 1e-8, "flat_line_error", line);
  });

  criterion(6, "classical reduction", 5.0, [](Outcome & o) {
    const auto r = scenario_classical(default_config("classical-tm-lq")).report;
    o.require(r.find("costate_reduction")->value < 1e-12, "reduction_residual", r.find("costate_reduction")->value);
    o.require(r.find("closed_form_error")->value < 1e-6, "closed_form_error", r.find("closed_form_error")->value);
  });

  criterion(7, "needle variations and cone support", 60.0, [](Outcome & o) {
    const auto sys = wong_system(WongFixture::polynomial_so3());
    const auto ext = extend_system(sys);
    const ControlSignal u({0.4}, {v({0.5, -0.3}), v({-0.5, 0.3})});
    const Vec ext_x0 = v({0.0, 0.1, -0.2});
    const VariationSymbol s1{.taus = {0.2, 0.7}, .vs = {v({1, 1}), v({-1, 0.5})}, .tau = 0.9, .dts = {0.3, 0.8}, .dt = 0.4};
    VariationSymbol s2 = s1;
    s2.dts = {0.9, 0.1};
    s2.dt = -0.6;
    VariationSymbol mix = s1;
    const double lam = 0.35;
    mix.dts = {lam * 0.3 + (1 - lam) * 0.9, lam * 0.8 + (1 - lam) * 0.1};
    mix.dt = lam * 0.4 + (1 - lam) * -0.6;
    const Vec c0 = Vec::Zero(6);
    const Vec d1 = needle_vector(ext, u, ext_x0, 0.0, 1e-3, s1, c0);
    const Vec d2 = needle_vector(ext, u, ext_x0, 0.0, 1e-3, s2, c0);
    const Vec dm = needle_vector(ext, u, ext_x0, 0.0, 1e-3, mix, c0);
    const double lin = (dm - (lam * d1 + (1 - lam) * d2)).norm();
    o.require(lin < 1e-10, "linearity_error", lin);

    const auto so3 = test::so3_system();
    const auto sol = integrate_pmp_flow(so3, Vec(0), default_config("so3-bang-bang").z_init, -1.0, TimeGrid(0.0, 6.0, 1e-3));
    const auto cone = extremal_cone_check(so3, sol, 500, 1, true);
    o.require(cone.pass, "extremal_max_pairing", cone.max_pairing);

    const auto so3_ext = extend_system(so3);
    const auto bad = ControlSignal::constant(v({-1}));
    const auto cz = transport_Bbar(so3_ext, bad, v({0.0}), TimeGrid(0.0, 6.0, 1e-3), v({-1.0, 0.0, 1.0, 0.2}), -1.0);
    const auto syms = random_symbols(bad, so3.U, 0.0, 6.0, 500, 1, 3, 6.0);
    const auto needles = needle_vectors(so3_ext, bad, v({0.0}), 0.0, 1e-3, syms, Vec::Zero(4));
    const auto sep = cone_support_check(needles, cz.z.back());
    o.require(!sep.pass, "suboptimal_max_pairing", sep.max_pairing);
  });

  criterion(8, "group development round trip", 60.0, [](Outcome & o) {
    const auto alg = ChartAlgebroid::so3();
    const auto rep = GroupRepresentation::so3();
    const Mat turn = develop_to_group(alg, constant_algebra_path(v({0, 0, 1}), 2.0 * std::numbers::pi), rep);
    const double turn_err = (turn - Mat::Identity(3, 3)).cwiseAbs().maxCoeff();
    o.require(turn_err < 1e-6, "full_turn_error", turn_err);

    const auto sys = test::so3_system();
    const Vec z_true = v({0.3, -0.5, 0.8});
    const auto known = integrate_pmp_flow(sys, Vec(0), z_true, -1.0, TimeGrid(0.0, 2.0, 1e-3));
    const Mat target = develop_to_group(alg, known.trajectory.path, rep);
    const auto shot = shoot_endpoint(sys, rep, target, -1.0, z_true + v({0.1, -0.08, 0.06}), 0.0, 2.0);
    o.require(shot.residual < 1e-4, "shoot_residual", shot.residual);
    o.require(!known.switch_times.empty(), "target_switches", static_cast<double>(known.switch_times.size()));

    const auto sol = integrate_pmp_flow(sys, Vec(0), v({0.0, 1.0, 0.2}), -1.0, TimeGrid(0.5, 3.5, 1e-3));
    const Mat a = develop_to_group(alg, sol.trajectory.path, rep);
    const Mat b = develop_to_group(alg, reparameterize_unit(sol.trajectory.path), rep);
    const double reparam = (a - b).cwiseAbs().maxCoeff();
    o.require(reparam < 1e-6, "reparameterization_error", reparam);
  });

  criterion(9, "time-dependent reduction", 5.0, [](Outcome & o) {
    const auto td = test::t_u_system();
    const auto sol = integrate_pmp_flow(autonomize(td), v({0.2, 0.0}), v({0.7, -0.1}), -1.0, TimeGrid(0.0, 1.0, 1e-3));
    const auto a = audit_time_dependence(td, sol);
    o.require(a.clock_error == 0.0, "clock_error", a.clock_error);
    o.require(a.dhdt_error < 1e-5, "dHdt_error", a.dhdt_error);

    const auto lq = test::lq_time_system();
    const auto ls = integrate_pmp_flow(autonomize(lq), v({0.5, 0.0}), v({-0.3, 0.0}), -1.0, TimeGrid(0.0, 1.0, 1e-3));
    const auto la = audit_time_dependence(lq, ls);
    double spread = 0.0;
    for (double h : la.hamiltonian_values) { spread = std::max(spread, std::abs(h - la.hamiltonian_values.front())); }
    o.require(spread < 1e-8, "autonomous_H_spread", spread);
  });

  std::printf("%s: %d criterion failure(s)\n", failures == 0 ? "ALL PASS" : "FAILURES", failures);
  return failures == 0 ? 0 : 1;
}
