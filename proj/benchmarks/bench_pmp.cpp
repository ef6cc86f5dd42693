#include <benchmark/benchmark.h>

#include "alcontrol/pmp.hpp"
#include "alcontrol/scenarios.hpp"

using namespace alc;

static void BM_So3Extremal(benchmark::State & state)
{
  const auto cfg = default_config("so3-bang-bang");
  const auto sys = build_system(cfg);
  for (auto _ : state) {
    benchmark::DoNotOptimize(integrate_pmp_flow(sys, Vec(0), cfg.z_init, -1.0, TimeGrid(0.0, cfg.t1, cfg.step)));
  }
}
BENCHMARK(BM_So3Extremal)->Unit(benchmark::kMillisecond);

static void BM_VerifyExtremal(benchmark::State & state)
{
  const auto cfg = default_config("so3-bang-bang");
  const auto sys = build_system(cfg);
  const auto sol = integrate_pmp_flow(sys, Vec(0), cfg.z_init, -1.0, TimeGrid(0.0, cfg.t1, cfg.step));
  for (auto _ : state) {
    benchmark::DoNotOptimize(verify_extremal(sys, sol.trajectory, sol.costate, HorizonMode::free_time));
  }
}
BENCHMARK(BM_VerifyExtremal)->Unit(benchmark::kMillisecond);

static void BM_ConeCheck(benchmark::State & state)
{
  const auto cfg = default_config("so3-bang-bang");
  const auto sys = build_system(cfg);
  const auto sol = integrate_pmp_flow(sys, Vec(0), cfg.z_init, -1.0, TimeGrid(0.0, cfg.t1, cfg.step));
  const auto symbols = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) { benchmark::DoNotOptimize(extremal_cone_check(sys, sol, symbols, 1, true)); }
}
BENCHMARK(BM_ConeCheck)->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond);

static void BM_WongExtremal(benchmark::State & state)
{
  const auto cfg = default_config("wong");
  const auto sys = wong_system(cfg.wong);
  for (auto _ : state) {
    benchmark::DoNotOptimize(integrate_pmp_flow(sys, cfg.x0, cfg.z_init, -1.0, TimeGrid(cfg.t0, cfg.t1, cfg.step)));
  }
}
BENCHMARK(BM_WongExtremal)->Unit(benchmark::kMillisecond);

static void BM_DevelopSo3(benchmark::State & state)
{
  const auto alg = ChartAlgebroid::so3();
  const auto p = sample_path(
    TimeGrid(0.0, 6.0, 1e-3), [](double) { return Vec(0); },
    [](double t, std::size_t) {
      Vec a(3);
      a << 1.0, std::cos(t), 0.2;
      return a;
    });
  const auto rep = GroupRepresentation::so3();
  for (auto _ : state) { benchmark::DoNotOptimize(develop_to_group(alg, p, rep)); }
}
BENCHMARK(BM_DevelopSo3)->Unit(benchmark::kMillisecond);
