// Serial vs OpenMP paths of the data-parallel kernels. Both paths compute the
// same result; only the execution differs.
#include "sparsecert/cmsv.hpp"
#include "sparsecert/ensembles.hpp"
#include "sparsecert/recovery.hpp"
#include "sparsecert/verify.hpp"

#include <benchmark/benchmark.h>

using namespace sparsecert;

namespace {

Exec exec_of(const benchmark::State& st) { return st.range(0) ? Exec::Parallel : Exec::Serial; }

void label(benchmark::State& st) {
  st.SetLabel(st.range(0) ? "openmp x" + std::to_string(thread_count()) : "serial");
}

// n independent LPs of the L-infinity bank.
void BM_LinfBank(benchmark::State& st) {
  const SensingMatrix a = generate({EnsembleKind::Gaussian, 40, 80, 1, true});
  VerifyOptions o;
  o.exec = exec_of(st);
  for (auto _ : st) benchmark::DoNotOptimize(verify_linf(a, o).tau);
  label(st);
}
BENCHMARK(BM_LinfBank)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

// Multi-start interior point restarts.
void BM_CmsvRestarts(benchmark::State& st) {
  const SensingMatrix a = generate({EnsembleKind::Gaussian, 20, 60, 2, false});
  CmsvIpOptions o;
  o.restarts = 16;
  o.exec = exec_of(st);
  for (auto _ : st) benchmark::DoNotOptimize(compute_cmsv_ip(a, 5.0, o).rho_upper);
  label(st);
}
BENCHMARK(BM_CmsvRestarts)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

// Support enumeration for the restricted isometry constant.
void BM_RicEnumeration(benchmark::State& st) {
  const SensingMatrix a = generate({EnsembleKind::Gaussian, 12, 20, 3, true});
  for (auto _ : st) benchmark::DoNotOptimize(ric_exact(a, 4, exec_of(st)).delta_k);
  label(st);
}
BENCHMARK(BM_RicEnumeration)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

// Exhaustive null space property check (supports x sign patterns).
void BM_ExactOracle(benchmark::State& st) {
  const SensingMatrix a = generate({EnsembleKind::Gaussian, 6, 10, 4, false});
  ExactOracleOptions o;
  o.exec = exec_of(st);
  for (auto _ : st) benchmark::DoNotOptimize(nsp_oracle_exact(a, 2, o));
  label(st);
}
BENCHMARK(BM_ExactOracle)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

// Monte Carlo noise-event draws.
void BM_NoiseEvent(benchmark::State& st) {
  const SensingMatrix a = generate({EnsembleKind::Gaussian, 50, 100, 5, true});
  for (auto _ : st) {
    benchmark::DoNotOptimize(noise_event_frequency(a, noise_lambda(100, 1.0), 1.0, 2000, 7, exec_of(st)).hits);
  }
  label(st);
}
BENCHMARK(BM_NoiseEvent)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
