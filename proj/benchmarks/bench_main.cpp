#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "qmem/dynamics.hpp"
#include "qmem/fitting.hpp"
#include "qmem/lossbudget.hpp"
#include "qmem/measurement.hpp"
#include "qmem/protocols.hpp"
#include "qmem/sequence.hpp"

using namespace qmem;

namespace {

void BM_EvolveAdaptive(benchmark::State& state) {
  const HilbertDims dims{static_cast<int>(state.range(0)), 2};
  const DeviceModel model;
  const Liouvillian gen(model, dims);
  const QuantumState start = coherent_state(1.0, dims);
  for (auto _ : state) benchmark::DoNotOptimize(evolve(start, gen, 1e-3));
}
BENCHMARK(BM_EvolveAdaptive)->Arg(10)->Arg(20)->Arg(40)->Unit(benchmark::kMillisecond);

void BM_EvolveExponential(benchmark::State& state) {
  const HilbertDims dims{static_cast<int>(state.range(0)), 2};
  DeviceModel model;
  model.transmon_Pe_th = 0.01;
  const Liouvillian gen(model, dims);
  EvolveOptions opt;
  opt.method = EvolveMethod::Exponential;
  const QuantumState start = coherent_state(1.0, dims);
  benchmark::DoNotOptimize(evolve(start, gen, 1e-3, opt));  // sector discovery is cached
  for (auto _ : state) benchmark::DoNotOptimize(evolve(start, gen, 1e-3, opt));
}
BENCHMARK(BM_EvolveExponential)->Arg(10)->Arg(20)->Arg(40)->Unit(benchmark::kMillisecond);

void BM_T1FockSweep(benchmark::State& state) {
  const HilbertDims dims{20, 2};
  const DeviceModel model;
  const PulseSequence seq = build_protocol(ProtocolKind::T1Fock, model, dims);
  RunOptions opt;
  opt.threads = 1;
  for (auto _ : state) benchmark::DoNotOptimize(run_sequence(seq, model, dims, {}, opt));
}
BENCHMARK(BM_T1FockSweep)->Unit(benchmark::kMillisecond);

void BM_WignerGrid(benchmark::State& state) {
  const HilbertDims dims{25, 2};
  const QuantumState s = coherent_state(Complex(0.8, 0.4), dims);
  for (auto _ : state) benchmark::DoNotOptimize(wigner(s));
}
BENCHMARK(BM_WignerGrid)->Unit(benchmark::kMillisecond);

void BM_Fit(benchmark::State& state) {
  const auto kind = static_cast<FitModelKind>(state.range(0));
  const std::vector<std::vector<double>> truth{
      {-1.0, 1.4e-3, 1.0}, {1.0, 2.0, 1.4e-3, 0.0}, {0.35, 2.8e-3, 600.0, 0.4, 0.37}};
  const double span = kind == FitModelKind::RamseyFringe ? 8.4e-3 : 7e-3;
  const auto t = linear_grid(span, 81);
  std::vector<double> y;
  for (double x : t) y.push_back(model_eval(kind, truth[state.range(0)], x));
  for (auto _ : state) benchmark::DoNotOptimize(fit(kind, t, y));
  state.SetLabel(std::string(to_string(kind)));
}
BENCHMARK(BM_Fit)->DenseRange(0, 2)->Unit(benchmark::kMicrosecond);

void BM_Budget(benchmark::State& state) {
  const auto channels = stripline_storage_channels(PackageAlloy::Al6061);
  for (auto _ : state) benchmark::DoNotOptimize(compute_budget(channels));
}
BENCHMARK(BM_Budget);

}  // namespace

BENCHMARK_MAIN();
