#include <benchmark/benchmark.h>

#include "alcontrol/control.hpp"
#include "alcontrol/paths.hpp"
#include "alcontrol/scenarios.hpp"

using namespace alc;

static void BM_Rk4Harmonic(benchmark::State & state)
{
  const OdeRhs rhs{2, [](double, const Vec & y) {
                     Vec d(2);
                     d << y[1], -y[0];
                     return d;
                   }};
  const TimeGrid grid(0.0, 10.0, 1.0 / static_cast<double>(state.range(0)));
  Vec y0(2);
  y0 << 1.0, 0.0;
  for (auto _ : state) { benchmark::DoNotOptimize(integrate(rhs, grid, y0)); }
  state.SetItemsProcessed(state.iterations() * 10 * state.range(0));
}
BENCHMARK(BM_Rk4Harmonic)->Arg(100)->Arg(1000);

static void BM_TransportFrameWong(benchmark::State & state)
{
  const auto sys = wong_system(WongFixture::polynomial_so3());
  Vec u(2), x0(2);
  u << 0.5, -0.3;
  x0 << 0.1, -0.2;
  const auto sig = ControlSignal::constant(u);
  for (auto _ : state) { benchmark::DoNotOptimize(transport_frame(sys, sig, x0, TimeGrid(0.0, 1.0, 1e-3))); }
}
BENCHMARK(BM_TransportFrameWong)->Unit(benchmark::kMillisecond);

static void BM_GenerateHomotopy(benchmark::State & state)
{
  const auto alg = ChartAlgebroid::so3();
  const auto p = sample_path(
    TimeGrid(0.0, 1.0, 1e-3), [](double) { return Vec(0); },
    [](double t, std::size_t) {
      Vec a(3);
      a << 1.0 + t, std::sin(3.0 * t), 0.5;
      return a;
    });
  const auto src = shrink_homotopy(alg, p, 33);
  const std::vector<Vec> b0(33, Vec::Zero(3));
  const auto threads = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) { benchmark::DoNotOptimize(generate_infinitesimal_homotopy(alg, src, b0, {.threads = threads})); }
}
BENCHMARK(BM_GenerateHomotopy)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();
