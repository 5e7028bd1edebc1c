#include "squaremap/generators.hpp"
#include "squaremap/geometry_image.hpp"
#include "squaremap/pipeline.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace sqm;

const PreparedMesh& sliced_sphere(int subdiv) {
  static std::map<int, PreparedMesh> cache;
  auto it = cache.find(subdiv);
  if (it == cache.end()) {
    it = cache.emplace(subdiv, prepare_mesh(make_icosphere(subdiv), 0)).first;
  }
  return it->second;
}

const SolveResult& solved_sphere(int subdiv) {
  static std::map<int, SolveResult> cache;
  auto it = cache.find(subdiv);
  if (it == cache.end()) {
    const PreparedMesh& prep = sliced_sphere(subdiv);
    SolverConfig cfg;
    it = cache.emplace(subdiv,
                       pcg_minimize(prep.solve_mesh, *prep.sliced.segments,
                                    cfg, AreaMeasure::face_areas(prep.solve_mesh)))
             .first;
  }
  return it->second;
}

void BM_StretchLaplacian(benchmark::State& state) {
  const PreparedMesh& prep = sliced_sphere(static_cast<int>(state.range(0)));
  const AreaMeasure rho = AreaMeasure::face_areas(prep.solve_mesh);
  const ParamMap& f = solved_sphere(static_cast<int>(state.range(0))).map;
  for (auto _ : state) {
    benchmark::DoNotOptimize(stretch_laplacian(prep.solve_mesh, f, rho));
  }
  state.SetItemsProcessed(state.iterations() * prep.solve_mesh.face_count());
}
BENCHMARK(BM_StretchLaplacian)->Arg(2)->Arg(3)->Arg(4);

void BM_StretchGradient(benchmark::State& state) {
  const PreparedMesh& prep = sliced_sphere(static_cast<int>(state.range(0)));
  const AreaMeasure rho = AreaMeasure::face_areas(prep.solve_mesh);
  const ParamMap& f = solved_sphere(static_cast<int>(state.range(0))).map;
  FreeLayout layout(prep.solve_mesh, *prep.sliced.segments);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        stretch_gradient(prep.solve_mesh, f, rho, layout));
  }
}
BENCHMARK(BM_StretchGradient)->Arg(2)->Arg(3)->Arg(4);

void BM_FixedPointInit(benchmark::State& state) {
  const PreparedMesh& prep = sliced_sphere(static_cast<int>(state.range(0)));
  const AreaMeasure rho = AreaMeasure::face_areas(prep.solve_mesh);
  SolverConfig cfg;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        fixed_point_init(prep.solve_mesh, *prep.sliced.segments, cfg, rho));
  }
}
BENCHMARK(BM_FixedPointInit)->Arg(2)->Arg(3);

void BM_PcgMinimize(benchmark::State& state) {
  const PreparedMesh& prep = sliced_sphere(static_cast<int>(state.range(0)));
  const AreaMeasure rho = AreaMeasure::face_areas(prep.solve_mesh);
  SolverConfig cfg;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        pcg_minimize(prep.solve_mesh, *prep.sliced.segments, cfg, rho));
  }
}
BENCHMARK(BM_PcgMinimize)->Arg(2)->Arg(3);

void BM_SliceForSquare(benchmark::State& state) {
  TriMesh sphere = make_icosphere(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(slice_for_square(sphere, 0));
  }
}
BENCHMARK(BM_SliceForSquare)->Arg(2)->Arg(3)->Arg(4);

void BM_Encode(benchmark::State& state) {
  const PreparedMesh& prep = sliced_sphere(3);
  const ParamMap& f = solved_sphere(3).map;
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(encode(prep.sliced.mesh, f, n, 0));
  }
  state.SetItemsProcessed(state.iterations() * n * n);
}
BENCHMARK(BM_Encode)->Arg(64)->Arg(200);

void BM_MeanValueCorrection(benchmark::State& state) {
  const PreparedMesh& prep = sliced_sphere(3);
  const ParamMap& f = solved_sphere(3).map;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        correct_overlaps(prep.solve_mesh, f, *prep.sliced.segments));
  }
}
BENCHMARK(BM_MeanValueCorrection);

}  // namespace

BENCHMARK_MAIN();
