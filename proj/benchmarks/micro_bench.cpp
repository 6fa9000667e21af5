// Micro-benchmarks for the hot paths: forward/backward passes, the DCT,
// the image filters and representative attack steps.

#include <benchmark/benchmark.h>

#include "advbench/attacks.hpp"
#include "advbench/datagen.hpp"
#include "advbench/dct.hpp"
#include "advbench/defenses.hpp"
#include "advbench/net.hpp"

namespace {

using namespace advbench;

struct Fixture {
  Model model;
  Tensor image;

  Fixture() {
    SplitMix64 rng(1234);
    model = reference_model(4, rng);
    Dataset ds = generate(1234, 4);
    image = image_at(ds, 0);
  }
};

const Fixture& fixture() {
  static Fixture f;
  return f;
}

void BM_Forward(benchmark::State& state) {
  const Fixture& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(forward(f.model, f.image));
}
BENCHMARK(BM_Forward);

void BM_InputGradient(benchmark::State& state) {
  const Fixture& f = fixture();
  for (auto _ : state)
    benchmark::DoNotOptimize(input_gradient(f.model, f.image, 0, 1.0));
}
BENCHMARK(BM_InputGradient);

void BM_Dct2(benchmark::State& state) {
  SplitMix64 rng(5);
  Tensor x({28, 28});
  for (double& v : x.values()) v = rng.next_double();
  for (auto _ : state) benchmark::DoNotOptimize(dct2(x));
}
BENCHMARK(BM_Dct2);

void BM_MedianFilter(benchmark::State& state) {
  const Fixture& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(median_filter(f.image, 3));
}
BENCHMARK(BM_MedianFilter);

void BM_BilateralFilter(benchmark::State& state) {
  const Fixture& f = fixture();
  for (auto _ : state)
    benchmark::DoNotOptimize(bilateral_filter(f.image, 9, 0.3, 3.0));
}
BENCHMARK(BM_BilateralFilter);

void BM_TvDenoise(benchmark::State& state) {
  const Fixture& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(tv_denoise(f.image, 0.1, 50));
}
BENCHMARK(BM_TvDenoise);

void BM_FgsmSingleImage(benchmark::State& state) {
  const Fixture& f = fixture();
  AttackSpec spec = attack_preset(AttackFamily::Fgsm, PresetKind::PaperManual);
  for (auto _ : state) {
    SplitMix64 rng(7);
    benchmark::DoNotOptimize(fgsm(f.model, f.image, spec, rng));
  }
}
BENCHMARK(BM_FgsmSingleImage);

void BM_BimSingleImage(benchmark::State& state) {
  const Fixture& f = fixture();
  AttackSpec spec = attack_preset(AttackFamily::Bim, PresetKind::PaperManual);
  spec.max_iter = 10;
  for (auto _ : state) {
    SplitMix64 rng(7);
    benchmark::DoNotOptimize(bim(f.model, f.image, spec, rng));
  }
}
BENCHMARK(BM_BimSingleImage);

}  // namespace

BENCHMARK_MAIN();
