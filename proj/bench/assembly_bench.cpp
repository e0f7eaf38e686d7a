// SPDX-License-Identifier: Apache-2.0
// Serial vs OpenMP element loops. Run with OMP_NUM_THREADS set to compare.

#include <benchmark/benchmark.h>

#include <random>

#include "eigentopo/assembly.hpp"
#include "eigentopo/kernels.hpp"

using namespace eigentopo;

namespace {

struct Fixture
{
  explicit Fixture(int n)
      : mesh(n, n, 1.0, 1.0, BoundarySpec::cantilever()),
        dofs(build_dof_map(mesh, BoundaryTag::DirichletD)),
        law(material_set()),
        phi(mesh.num_vertices(), 3)
  {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(1.0, 2.0);
    for (int v = 0; v < mesh.num_vertices(); ++v)
    {
      double s = 0.0;
      for (int i = 0; i < 3; ++i)
      {
        phi(v, i) = u(rng);
        s += phi(v, i);
      }
      for (int i = 0; i < 3; ++i)
      {
        phi(v, i) /= s;
      }
    }
    a = Eigen::VectorXd::Random(2 * mesh.num_vertices());
  }

  static MaterialSet material_set()
  {
    MaterialSet ms;
    ms.n_phases = 3;
    ms.densities = {1.0, 0.6};
    ms.youngs = {1.0, 0.3};
    ms.poissons = {0.3, 0.25};
    return ms;
  }

  Mesh mesh;
  DofMap dofs;
  MaterialLaw law;
  PhaseField phi;
  Eigen::VectorXd a;
};

Backend backend_of(const benchmark::State& st)
{
  return st.range(1) == 0 ? Backend::Serial : Backend::OpenMP;
}

void BM_Stiffness(benchmark::State& st)
{
  const Fixture f(static_cast<int>(st.range(0)));
  const Backend b = backend_of(st);
  for (auto _ : st)
  {
    benchmark::DoNotOptimize(assemble_stiffness(f.mesh, f.dofs, f.phi, f.law, b));
  }
  st.SetItemsProcessed(st.iterations() * f.mesh.num_triangles());
}

void BM_Mass(benchmark::State& st)
{
  const Fixture f(static_cast<int>(st.range(0)));
  const Backend b = backend_of(st);
  for (auto _ : st)
  {
    benchmark::DoNotOptimize(assemble_mass(f.mesh, f.dofs, f.phi, f.law, b));
  }
  st.SetItemsProcessed(st.iterations() * f.mesh.num_triangles());
}

void BM_StiffnessPairField(benchmark::State& st)
{
  const Fixture f(static_cast<int>(st.range(0)));
  const Backend b = backend_of(st);
  for (auto _ : st)
  {
    benchmark::DoNotOptimize(kernels::stiffness_pair_field(f.mesh, f.phi, f.law, f.a, f.a, b));
  }
  st.SetItemsProcessed(st.iterations() * f.mesh.num_triangles());
}

void BM_MassPairField(benchmark::State& st)
{
  const Fixture f(static_cast<int>(st.range(0)));
  const Backend b = backend_of(st);
  for (auto _ : st)
  {
    benchmark::DoNotOptimize(kernels::mass_pair_field(f.mesh, f.phi, f.law, f.a, f.a, b));
  }
  st.SetItemsProcessed(st.iterations() * f.mesh.num_triangles());
}

// Args: {cells per side, 0 serial | 1 OpenMP}.
void sizes(benchmark::internal::Benchmark* b)
{
  for (int n : {32, 64, 128})
  {
    b->Args({n, 0});
    b->Args({n, 1});
  }
  b->Unit(benchmark::kMillisecond);
}

}  // namespace

BENCHMARK(BM_Stiffness)->Apply(sizes);
BENCHMARK(BM_Mass)->Apply(sizes);
BENCHMARK(BM_StiffnessPairField)->Apply(sizes);
BENCHMARK(BM_MassPairField)->Apply(sizes);

BENCHMARK_MAIN();
