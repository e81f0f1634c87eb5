// Serial reference kernels against their OpenMP counterparts on a curved
// chart. Arguments: polynomial order k.

#include "ivem/assembly.hpp"
#include "ivem/mesh_generation.hpp"
#include "ivem/mms.hpp"

#include <benchmark/benchmark.h>

#include <omp.h>

using namespace ivem;

namespace {

const PolyMesh& bench_mesh() {
  static const PolyMesh mesh = generate_voronoi_polymesh(DomainKind::QuarterDisk, 400, 64, 1, 50);
  return mesh;
}

ManufacturedCase bench_case() {
  ManufacturedCase mc;
  mc.chart = Chart::monge_trig(2.0, 0.5, 5);
  mc.w_hat = Vec2(1.0, 1.0);
  mc.gamma = 1.0;
  return mc;
}

template <bool Parallel>
void BM_Assemble(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  const auto mc = bench_case();
  const ProblemSpec p = mc.problem(default_stabilization(k));
  const PolyMesh& mesh = bench_mesh();
  for (auto _ : state) {
    auto sys = Parallel ? assemble(mesh, k, p) : assemble_reference(mesh, k, p);
    benchmark::DoNotOptimize(sys.matrix.valuePtr());
  }
  state.counters["cells"] = static_cast<double>(mesh.n_cells());
  state.counters["threads"] = Parallel ? omp_get_max_threads() : 1;
}

template <bool Parallel>
void BM_Errors(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  const auto mc = bench_case();
  const ProblemSpec p = mc.problem(default_stabilization(k));
  auto sys = assemble(bench_mesh(), k, p);
  apply_dirichlet(sys, bench_mesh(), mc.u_field());
  const auto sol = solve(sys, bench_mesh(), mc.chart, false);
  const ExactSolution exact = exact_solution(mc);
  for (auto _ : state) {
    const auto e = Parallel ? compute_errors(sol, exact) : compute_errors_reference(sol, exact);
    benchmark::DoNotOptimize(e.l2);
  }
  state.counters["threads"] = Parallel ? omp_get_max_threads() : 1;
}

}  // namespace

BENCHMARK(BM_Assemble<false>)->Name("assemble/reference")->DenseRange(1, 4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Assemble<true>)->Name("assemble/openmp")->DenseRange(1, 4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Errors<false>)->Name("errors/reference")->DenseRange(1, 4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Errors<true>)->Name("errors/openmp")->DenseRange(1, 4)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
