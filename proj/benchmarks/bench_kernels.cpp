#include "pnpmri/cnn.hpp"
#include "pnpmri/fft.hpp"
#include "pnpmri/phantom.hpp"
#include "pnpmri/regularizers.hpp"
#include "pnpmri/sampling.hpp"
#include "pnpmri/sense.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace pnpmri;

ComplexImage phantom(std::size_t n, std::size_t nt) {
  PhantomSpec spec;
  spec.nx = spec.ny = n;
  spec.nt = nt;
  spec.seed = 1;
  return generate_cine_phantom(spec);
}

SenseModel model(std::size_t n, std::size_t nt, std::size_t nc) {
  MaskSpec ms;
  ms.nkx = ms.nky = n;
  ms.nt = nt;
  ms.R = 8.0;
  ms.seed = 2;
  return SenseModel(generate_coil_maps(nc, n, n, 3), generate_mask(ms));
}

void BM_Fft2c(benchmark::State &state) {
  const std::size_t n = std::size_t(state.range(0));
  const ComplexImage x = phantom(n, 4);
  std::vector<cplx> out(n * n);
  for (auto _ : state) {
    fft2c(x.frame(0), out, n, n);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * std::int64_t(n * n));
}
BENCHMARK(BM_Fft2c)->Arg(64)->Arg(128)->Arg(256);

void BM_SenseGram(benchmark::State &state) {
  const std::size_t nc = std::size_t(state.range(0));
  const SenseModel m = model(64, 16, nc);
  const ComplexImage x = phantom(64, 16);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sense_gram(x, m));
  }
}
BENCHMARK(BM_SenseGram)->Arg(4)->Arg(8)->Arg(12)->Unit(benchmark::kMillisecond);

void BM_ProxUwt(benchmark::State &state) {
  const ComplexImage x = phantom(64, 16);
  for (auto _ : state) {
    benchmark::DoNotOptimize(prox_uwt_l1(x, 0.02));
  }
}
BENCHMARK(BM_ProxUwt)->Unit(benchmark::kMillisecond);

void BM_DenoiseCnn(benchmark::State &state) {
  const std::size_t n = std::size_t(state.range(0));
  const DenoiserNet net = random_denoiser_net(7);
  const ComplexImage x = phantom(n, 16);
  for (auto _ : state) {
    benchmark::DoNotOptimize(denoise_cnn(net, x));
  }
  state.SetItemsProcessed(state.iterations() * std::int64_t(x.size()));
}
BENCHMARK(BM_DenoiseCnn)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
