#include <benchmark/benchmark.h>

#include "pyrafem/meshfem.hpp"

using namespace pyrafem;

static void BM_ConicalRule(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(conical_rule(k));
}
BENCHMARK(BM_ConicalRule)->Arg(1)->Arg(3)->Arg(6);

static void BM_ConformingBasis(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(build_conforming_basis(0, k));
}
BENCHMARK(BM_ConformingBasis)->Arg(1)->Arg(2)->Arg(3);

static void BM_LocalStiffness(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  const SpaceBasis& basis = space_basis(0, k, Family::Conforming);
  CoefficientTensor A = CoefficientTensor::identity(0);
  AffinePyramid K = AffinePyramid::reference();
  PyramidRule rule = conical_rule(k);
  for (auto _ : state)
    benchmark::DoNotOptimize(local_bilinear_matrix(basis, A, K, rule));
}
BENCHMARK(BM_LocalStiffness)->Arg(1)->Arg(2)->Arg(3);

static void BM_AssemblePoisson(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  PyramidMesh mesh = build_cube_mesh(2);
  CoefficientTensor A = CoefficientTensor::identity(1);
  auto f = [](const Vec3&) { return 1.0; };
  for (auto _ : state)
    benchmark::DoNotOptimize(assemble_poisson(mesh, k, A, f, k));
}
BENCHMARK(BM_AssemblePoisson)->Arg(1)->Arg(2);

BENCHMARK_MAIN();
