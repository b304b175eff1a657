#include "pflutter/config.hpp"
#include "pflutter/equilibria.hpp"
#include "pflutter/flow.hpp"

#include <benchmark/benchmark.h>

using namespace pflutter;

namespace {

GridSpec grid(int n) { return GridSpec::make(1, 1, n, n); }

PhysParams phys(const GridSpec& g) {
  PhysParams p;
  p.U = 0.5;
  p.loads = LoadSet::radial_beta(g, 5.0);
  return p;
}

}  // namespace

static void BM_Biharmonic(benchmark::State& st) {
  const GridSpec g = grid(static_cast<int>(st.range(0)));
  const PlateField u = random_smooth(g, 1, 1);
  for (auto _ : st) benchmark::DoNotOptimize(biharmonic_clamped(u, g));
}
BENCHMARK(BM_Biharmonic)->Arg(33)->Arg(65);

static void BM_Fv(benchmark::State& st) {
  const GridSpec g = grid(static_cast<int>(st.range(0)));
  const VonKarman vk(g, LoadSet::radial_beta(g, 5.0));
  const PlateField u = random_smooth(g, 1, 1);
  for (auto _ : st) benchmark::DoNotOptimize(vk.fv(u));
}
BENCHMARK(BM_Fv)->Arg(33)->Arg(65);

static void BM_QEval(benchmark::State& st) {
  const GridSpec g = grid(static_cast<int>(st.range(0)));
  const AeroConfig cfg = make_aero_config(g, 0.5, {static_cast<int>(st.range(1)), static_cast<int>(st.range(2))});
  HistoryBuffer h(g, 0.01, cfg.t_star);
  const PlateField u = random_smooth(g, 1, 2);
  const int n = static_cast<int>(std::ceil(cfg.t_star / 0.01)) + 3;
  for (int k = 0; k <= n; ++k) h.push(0.01 * k, std::cos(0.3 * k) * u);
  for (auto _ : st) benchmark::DoNotOptimize(q_eval(h, cfg));
}
BENCHMARK(BM_QEval)->Args({33, 32, 64})->Args({65, 16, 32})->Unit(benchmark::kMillisecond);

static void BM_Step(benchmark::State& st) {
  const GridSpec g = grid(static_cast<int>(st.range(0)));
  Integrator it(g, phys(g), {32, 64}, 0.01);
  it.initialize(random_smooth(g, 0.05, 3), zeros(g), 0.0, Prehistory::Constant);
  for (auto _ : st) it.advance();
}
BENCHMARK(BM_Step)->Arg(17)->Arg(33)->Unit(benchmark::kMillisecond);

static void BM_Reconstruct(benchmark::State& st) {
  const GridSpec g = grid(33);
  Integrator it(g, phys(g), {16, 32}, 0.01);
  it.initialize(random_smooth(g, 0.05, 4), random_smooth(g, 0.5, 5), 0.0, Prehistory::Constant);
  for (int k = 0; k < 20; ++k) it.advance();
  const FlowHistory fh(it.history());
  for (auto _ : st) {
    FlowSampleSet s = box_samples({0, 1, 0, 1, 0, 0.5}, 5, 5, 3, it.state().t);
    reconstruct(fh, s, 0.5, it.t_star(), {32, 256});
    benchmark::DoNotOptimize(s.phi.data());
  }
}
BENCHMARK(BM_Reconstruct)->Unit(benchmark::kMillisecond);

static void BM_Newton(benchmark::State& st) {
  const GridSpec g = grid(33);
  PhysParams p = phys(g);
  p.loads.p0 = 100.0 * clamped_bump(g);
  const StationaryProblem prob(g, p, {32, 64});
  for (auto _ : st) benchmark::DoNotOptimize(prob.newton(zeros(g)));
}
BENCHMARK(BM_Newton)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
