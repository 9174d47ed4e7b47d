#include <benchmark/benchmark.h>

#include "ca43/atomic_structure.hpp"
#include "ca43/experiment_config.hpp"
#include "ca43/experiments.hpp"
#include "ca43/gate_dynamics.hpp"
#include "ca43/ms_numeric.hpp"
#include "ca43/sequence.hpp"

namespace {

using namespace ca43;

void BM_Eigenlevels(benchmark::State& state) {
  const auto species = IonSpecies::ca43();
  const Manifold m = state.range(0) == 0 ? Manifold::S12 : Manifold::D52;
  for (auto _ : state) benchmark::DoNotOptimize(eigenlevels(species, m, 6.0));
}
BENCHMARK(BM_Eigenlevels)->Arg(0)->Arg(1);

void BM_MsAnalytic(benchmark::State& state) {
  MotionalMode m;
  m.lamb_dicke_eta = 0.043;
  m.nbar = 0.03;
  const auto p = maximally_entangling_pulse(m, 10.0);
  const auto in = JointState::product(2, 0, 0);
  for (auto _ : state) benchmark::DoNotOptimize(ms_analytic(p, m).apply(in));
}
BENCHMARK(BM_MsAnalytic);

void BM_MsNumeric(benchmark::State& state) {
  MotionalMode m;
  m.lamb_dicke_eta = 0.03;
  m.nbar = 0.05;
  m.n_max = static_cast<int>(state.range(0));
  const auto p = maximally_entangling_pulse(m, 10.0);
  for (auto _ : state) benchmark::DoNotOptimize(ms_numeric_bell(p, m, 2, 0, 0));
}
BENCHMARK(BM_MsNumeric)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_RunSequence(benchmark::State& state) {
  const auto config = preset_config("bell_optical");
  const auto ctx = sequence_context(config);
  const auto seq = bell_sequence(config.errors, ctx, QubitKind::optical);
  const int shots = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(run_sequence(seq, ctx, shots, 1));
  state.SetItemsProcessed(state.iterations() * shots);
}
BENCHMARK(BM_RunSequence)->Arg(200)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
