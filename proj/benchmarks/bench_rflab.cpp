#include <benchmark/benchmark.h>

#include "rflab/backward_heat.hpp"
#include "rflab/flow_quantities.hpp"
#include "rflab/lgeodesic.hpp"
#include "rflab/model_flows.hpp"
#include "rflab/sz_harness.hpp"

namespace {

using namespace rflab;

FlowMetric shrinking_sphere() {
  return make_flow({2, Curvature::Sphere}, {scale::BackwardRicci{}, 1.0}, {0.0, 2.0});
}

void BM_FirstIntegralGeodesic(benchmark::State& state) {
  const FlowMetric flow = shrinking_sphere();
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_minimal_l_geodesic(flow, {0.8, 1.0}).l_length);
  }
}
BENCHMARK(BM_FirstIntegralGeodesic);

void BM_Shooting(benchmark::State& state) {
  const FlowMetric flow = shrinking_sphere();
  ShootingOptions opt;
  opt.starts = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(shoot_minimal_l_geodesic(flow, {0.8, 1.0}, opt).geodesic.l_length);
  }
}
BENCHMARK(BM_Shooting)->Arg(1)->Arg(3);

void BM_VariationalRefine(benchmark::State& state) {
  const FlowMetric flow = shrinking_sphere();
  const SampledCurve start = straight_curve({0.8, 1.0}, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(variational_refine(flow, start).l_length);
  }
}
BENCHMARK(BM_VariationalRefine)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_ReducedField(benchmark::State& state) {
  const FlowMetric flow = shrinking_sphere();
  const int n = static_cast<int>(state.range(0));
  ReducedFieldOptions opt;
  opt.multistart = false;
  opt.workers = 1;
  for (auto _ : state) {
    const ReducedField f = reduced_field(flow, make_axis(0.0, 1.0, n), make_axis(0.5, 1.5, n), opt);
    benchmark::DoNotOptimize(f.nodes.data());
  }
  state.SetItemsProcessed(state.iterations() * n * n);
}
BENCHMARK(BM_ReducedField)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_DerivativeFormulas(benchmark::State& state) {
  const FlowMetric flow = shrinking_sphere();
  ReducedFieldOptions fo;
  fo.multistart = false;
  const ReducedField f = reduced_field(flow, make_axis(0.0, 0.99, 100), make_axis(0.5, 1.49, 100), fo);
  FormulaOptions opt;
  opt.workers = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(verify_derivative_formulas(flow, f, opt).pass);
  }
}
BENCHMARK(BM_DerivativeFormulas)->Unit(benchmark::kMillisecond);

void BM_BackwardHeatSolve(benchmark::State& state) {
  const FlowMetric flow = shrinking_sphere();
  const CatalogSolution exact(flow, heat::Eigen{1.0, 10.0});
  HeatSolveOptions opt;
  opt.nodes = static_cast<int>(state.range(0));
  for (auto _ : state) {
    const HeatSolution s = solve_backward_heat(
        flow, [&](double r) { return exact.value(r, 1.0); }, 1.0, 0.1, opt);
    benchmark::DoNotOptimize(s.A);
  }
}
BENCHMARK(BM_BackwardHeatSolve)->Arg(201)->Arg(401)->Unit(benchmark::kMillisecond);

void BM_CutoffCertification(benchmark::State& state) {
  const int grid = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(build_cutoff(1.0, 1.0, grid).C_alpha());
  }
}
BENCHMARK(BM_CutoffCertification)->Arg(512)->Arg(2048)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
