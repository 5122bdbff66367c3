#include <benchmark/benchmark.h>

#include "fcl/curvature.hpp"
#include "support/instances.hpp"

using namespace fcl;

namespace {

const std::vector<double> kX{0.7, 0.1, 0.2};
const std::vector<double> kY{0.1, 1.0, 0.5};

void BM_ExprJet(benchmark::State& state) {
  const auto e = expr::parse("exp(0.3*x2 - 0.2*x3) * sin(x1)^2 + x1*x2/(1 + x3^2)", 3);
  for (auto _ : state) benchmark::DoNotOptimize(expr::eval_jet2(e, kX));
}
BENCHMARK(BM_ExprJet);

void BM_Christoffel(benchmark::State& state) {
  const auto in = testing::hopf();
  for (auto _ : state) benchmark::DoNotOptimize(riemann::christoffel(in.a, kX));
}
BENCHMARK(BM_Christoffel);

void BM_SprayJets(benchmark::State& state) {
  curvature::KropinaSpace space(testing::hopf().kropina());
  for (auto _ : state) benchmark::DoNotOptimize(space.spray(kX, kY));
}
BENCHMARK(BM_SprayJets);

void BM_CurvatureSample(benchmark::State& state) {
  curvature::KropinaSpace space(testing::hopf().kropina(), {}, state.range(0) != 0);
  for (auto _ : state) benchmark::DoNotOptimize(space.curvature(kX, kY));
}
BENCHMARK(BM_CurvatureSample)->Arg(0)->Arg(1)->ArgName("suite");

void BM_Check(benchmark::State& state) {
  curvature::KropinaSpace space(testing::hopf().kropina());
  curvature::SampleConfig cfg;
  cfg.box = testing::hopf().box;
  cfg.samples = 100;
  cfg.threads = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(curvature::constant_curvature_check(space, cfg));
}
BENCHMARK(BM_Check)->Arg(1)->Arg(4)->ArgName("threads")->Unit(benchmark::kMillisecond);

void BM_Geodesic(benchmark::State& state) {
  const auto in = testing::hopf();
  curvature::KropinaSpace space(in.kropina());
  for (auto _ : state) benchmark::DoNotOptimize(curvature::geodesic_integrate(space, kX, kY, 0.1, 1e-3));
}
BENCHMARK(BM_Geodesic)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
