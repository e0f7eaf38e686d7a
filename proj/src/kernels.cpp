// SPDX-License-Identifier: Apache-2.0

#include "eigentopo/kernels.hpp"

#include <array>
#include <stdexcept>

#include <omp.h>

namespace eigentopo::kernels {

namespace {

// Runs body(t, out) over all triangles and returns the concatenated output
// in triangle order regardless of backend.
template <class T, class Body>
std::vector<T> element_loop(int n_tri, std::size_t reserve_per_element, Backend backend, Body&& body)
{
  if (backend == Backend::Serial)
  {
    std::vector<T> out;
    out.reserve(reserve_per_element * static_cast<std::size_t>(n_tri));
    for (int t = 0; t < n_tri; ++t)
    {
      body(t, out);
    }
    return out;
  }

  std::vector<std::vector<T>> parts;
#pragma omp parallel
  {
    const int nth = omp_get_num_threads();
    const int tid = omp_get_thread_num();
#pragma omp single
    parts.resize(static_cast<std::size_t>(nth));
    std::vector<T> local;
    local.reserve(reserve_per_element * static_cast<std::size_t>(n_tri / nth + 1));
#pragma omp for schedule(static)
    for (int t = 0; t < n_tri; ++t)
    {
      body(t, local);
    }
    parts[static_cast<std::size_t>(tid)] = std::move(local);
  }
  std::size_t total = 0;
  for (const auto& p : parts)
  {
    total += p.size();
  }
  std::vector<T> out;
  out.reserve(total);
  for (auto& p : parts)
  {
    out.insert(out.end(), p.begin(), p.end());
  }
  return out;
}

// Per-element values written to a preallocated array; trivially parallel.
template <class Body>
void for_each_element(int n_tri, Backend backend, Body&& body)
{
  if (backend == Backend::Serial)
  {
    for (int t = 0; t < n_tri; ++t)
    {
      body(t);
    }
    return;
  }
#pragma omp parallel for schedule(static)
  for (int t = 0; t < n_tri; ++t)
  {
    body(t);
  }
}

void check_phase_field(const Mesh& mesh, const PhaseField& phi, const MaterialLaw& law)
{
  if (phi.n_nodes() != mesh.num_vertices() || phi.n_phases() != law.n_phases())
  {
    throw std::invalid_argument("assembly: phase field does not match mesh/material count");
  }
}

std::array<int, 6> element_dofs(const std::array<int, 3>& tri)
{
  return {2 * tri[0], 2 * tri[0] + 1, 2 * tri[1], 2 * tri[1] + 1, 2 * tri[2], 2 * tri[2] + 1};
}

Eigen::Matrix<double, 6, 1> gather(const Eigen::VectorXd& full, const std::array<int, 6>& dofs)
{
  Eigen::Matrix<double, 6, 1> out;
  for (int k = 0; k < 6; ++k)
  {
    out(k) = full(dofs[static_cast<std::size_t>(k)]);
  }
  return out;
}

PhaseField scatter_thirds(const Mesh& mesh, int n_phases, const std::vector<double>& per_element)
{
  PhaseField g(mesh.num_vertices(), n_phases);
  const auto& tris = mesh.triangles();
  for (int t = 0; t < mesh.num_triangles(); ++t)
  {
    for (int v : tris[static_cast<std::size_t>(t)])
    {
      for (int i = 0; i < n_phases; ++i)
      {
        g(v, i) += per_element[static_cast<std::size_t>(t * n_phases + i)] / 3.0;
      }
    }
  }
  return g;
}

}  // namespace

ElementMatrix element_stiffness(const Eigen::Matrix<double, 3, 2>& g, double area, const Lame& lame)
{
  const double l = lame.lambda;
  const double m = lame.mu;
  ElementMatrix ke;
  for (int a = 0; a < 3; ++a)
  {
    const double ax = g(a, 0);
    const double ay = g(a, 1);
    for (int b = 0; b < 3; ++b)
    {
      const double bx = g(b, 0);
      const double by = g(b, 1);
      ke(2 * a, 2 * b) = area * ((l + 2.0 * m) * ax * bx + m * ay * by);
      ke(2 * a, 2 * b + 1) = area * (l * ax * by + m * ay * bx);
      ke(2 * a + 1, 2 * b) = area * (l * ay * bx + m * ax * by);
      ke(2 * a + 1, 2 * b + 1) = area * ((l + 2.0 * m) * ay * by + m * ax * bx);
    }
  }
  return ke;
}

Eigen::Matrix3d element_scalar_mass(double area)
{
  Eigen::Matrix3d m;
  m << 2.0, 1.0, 1.0, 1.0, 2.0, 1.0, 1.0, 1.0, 2.0;
  return (area / 12.0) * m;
}

void centroid_value(const Mesh& mesh, const PhaseField& phi, int t, std::span<double> out)
{
  const auto& tri = mesh.triangles()[static_cast<std::size_t>(t)];
  for (int i = 0; i < phi.n_phases(); ++i)
  {
    out[static_cast<std::size_t>(i)] = (phi(tri[0], i) + phi(tri[1], i) + phi(tri[2], i)) / 3.0;
  }
}

ElementCoefficients element_coefficients(const Mesh& mesh, const PhaseField& phi, const MaterialLaw& law,
                                         Backend backend)
{
  check_phase_field(mesh, phi, law);
  const int n_tri = mesh.num_triangles();
  ElementCoefficients c;
  c.lame.resize(static_cast<std::size_t>(n_tri));
  c.rho.resize(static_cast<std::size_t>(n_tri));
  const auto n = static_cast<std::size_t>(phi.n_phases());
  for_each_element(n_tri, backend, [&](int t) {
    std::array<double, 16> buf{};
    std::span<double> bar(buf.data(), n);
    centroid_value(mesh, phi, t, bar);
    c.lame[static_cast<std::size_t>(t)] = law.effective_lame(bar);
    c.rho[static_cast<std::size_t>(t)] = law.density(bar);
  });
  return c;
}

ElementCoefficients element_coefficient_derivs(const Mesh& mesh, const PhaseField& phi, const PhaseField& h,
                                               const MaterialLaw& law, Backend backend)
{
  check_phase_field(mesh, phi, law);
  check_phase_field(mesh, h, law);
  const int n_tri = mesh.num_triangles();
  ElementCoefficients c;
  c.lame.resize(static_cast<std::size_t>(n_tri));
  c.rho.resize(static_cast<std::size_t>(n_tri));
  const auto n = static_cast<std::size_t>(phi.n_phases());
  for_each_element(n_tri, backend, [&](int t) {
    std::array<double, 16> pbuf{};
    std::array<double, 16> hbuf{};
    std::span<double> pbar(pbuf.data(), n);
    std::span<double> hbar(hbuf.data(), n);
    centroid_value(mesh, phi, t, pbar);
    centroid_value(mesh, h, t, hbar);
    c.lame[static_cast<std::size_t>(t)] = law.effective_lame_deriv(pbar, hbar);
    c.rho[static_cast<std::size_t>(t)] = law.density_deriv(pbar, hbar);
  });
  return c;
}

SparseSymMatrix assemble_elastic(const Mesh& mesh, const DofMap& dofs, const std::vector<Lame>& lame,
                                 Backend backend)
{
  if (dofs.num_dofs() != 2 * mesh.num_vertices())
  {
    throw std::invalid_argument("assembly: vector dof map expected");
  }
  if (static_cast<int>(lame.size()) != mesh.num_triangles())
  {
    throw std::invalid_argument("assembly: one Lame pair per element expected");
  }
  const auto& tris = mesh.triangles();
  const auto& grads = mesh.shape_gradients();
  const auto& areas = mesh.element_areas();
  auto triplets = element_loop<Triplet>(mesh.num_triangles(), 21, backend, [&](int t, std::vector<Triplet>& out) {
    const auto ts = static_cast<std::size_t>(t);
    const ElementMatrix ke = element_stiffness(grads[ts], areas[ts], lame[ts]);
    const auto ld = element_dofs(tris[ts]);
    for (int p = 0; p < 6; ++p)
    {
      const int r = dofs.reduced(ld[static_cast<std::size_t>(p)]);
      if (r < 0)
      {
        continue;
      }
      for (int q = 0; q < 6; ++q)
      {
        const int c = dofs.reduced(ld[static_cast<std::size_t>(q)]);
        if (c < 0 || c > r)
        {
          continue;
        }
        out.emplace_back(r, c, ke(p, q));
      }
    }
  });
  return SparseSymMatrix::from_triplets(dofs.num_free(), triplets);
}

SparseSymMatrix assemble_vector_mass(const Mesh& mesh, const DofMap& dofs, const std::vector<double>& rho,
                                     Backend backend)
{
  if (dofs.num_dofs() != 2 * mesh.num_vertices())
  {
    throw std::invalid_argument("assembly: vector dof map expected");
  }
  if (static_cast<int>(rho.size()) != mesh.num_triangles())
  {
    throw std::invalid_argument("assembly: one density per element expected");
  }
  const auto& tris = mesh.triangles();
  const auto& areas = mesh.element_areas();
  auto triplets = element_loop<Triplet>(mesh.num_triangles(), 12, backend, [&](int t, std::vector<Triplet>& out) {
    const auto ts = static_cast<std::size_t>(t);
    const Eigen::Matrix3d me = rho[ts] * element_scalar_mass(areas[ts]);
    const auto& tri = tris[ts];
    for (int comp = 0; comp < 2; ++comp)
    {
      for (int a = 0; a < 3; ++a)
      {
        const int r = dofs.reduced(2 * tri[static_cast<std::size_t>(a)] + comp);
        if (r < 0)
        {
          continue;
        }
        for (int b = 0; b < 3; ++b)
        {
          const int c = dofs.reduced(2 * tri[static_cast<std::size_t>(b)] + comp);
          if (c < 0 || c > r)
          {
            continue;
          }
          out.emplace_back(r, c, me(a, b));
        }
      }
    }
  });
  return SparseSymMatrix::from_triplets(dofs.num_free(), triplets);
}

PhaseField stiffness_pair_field(const Mesh& mesh, const PhaseField& phi, const MaterialLaw& law,
                                const Eigen::VectorXd& a, const Eigen::VectorXd& b, Backend backend)
{
  check_phase_field(mesh, phi, law);
  if (a.size() != 2 * mesh.num_vertices() || b.size() != 2 * mesh.num_vertices())
  {
    throw std::invalid_argument("assembly: full displacement vectors expected");
  }
  const int n = law.n_phases();
  const auto& tris = mesh.triangles();
  const auto& grads = mesh.shape_gradients();
  const auto& areas = mesh.element_areas();
  const auto& cp = law.cutoff_params();
  std::vector<double> per_element(static_cast<std::size_t>(mesh.num_triangles() * n), 0.0);
  for_each_element(mesh.num_triangles(), backend, [&](int t) {
    const auto ts = static_cast<std::size_t>(t);
    std::array<double, 16> buf{};
    std::span<double> bar(buf.data(), static_cast<std::size_t>(n));
    centroid_value(mesh, phi, t, bar);
    const auto ld = element_dofs(tris[ts]);
    const auto at = gather(a, ld);
    const auto bt = gather(b, ld);
    for (int i = 0; i < n; ++i)
    {
      const double s = cutoff_deriv(bar[static_cast<std::size_t>(i)], cp);
      if (s == 0.0)
      {
        continue;
      }
      const ElementMatrix ke = element_stiffness(grads[ts], areas[ts], law.lame()[static_cast<std::size_t>(i)]);
      per_element[ts * static_cast<std::size_t>(n) + static_cast<std::size_t>(i)] = s * at.dot(ke * bt);
    }
  });
  return scatter_thirds(mesh, n, per_element);
}

PhaseField mass_pair_field(const Mesh& mesh, const PhaseField& phi, const MaterialLaw& law,
                           const Eigen::VectorXd& a, const Eigen::VectorXd& b, Backend backend)
{
  check_phase_field(mesh, phi, law);
  if (a.size() != 2 * mesh.num_vertices() || b.size() != 2 * mesh.num_vertices())
  {
    throw std::invalid_argument("assembly: full displacement vectors expected");
  }
  const int n = law.n_phases();
  const auto& tris = mesh.triangles();
  const auto& areas = mesh.element_areas();
  const auto& cp = law.cutoff_params();
  std::vector<double> per_element(static_cast<std::size_t>(mesh.num_triangles() * n), 0.0);
  for_each_element(mesh.num_triangles(), backend, [&](int t) {
    const auto ts = static_cast<std::size_t>(t);
    std::array<double, 16> buf{};
    std::span<double> bar(buf.data(), static_cast<std::size_t>(n));
    centroid_value(mesh, phi, t, bar);
    const auto& tri = tris[ts];
    const Eigen::Matrix3d me = element_scalar_mass(areas[ts]);
    double m = 0.0;
    for (int comp = 0; comp < 2; ++comp)
    {
      Eigen::Vector3d at;
      Eigen::Vector3d bt;
      for (int k = 0; k < 3; ++k)
      {
        at(k) = a(2 * tri[static_cast<std::size_t>(k)] + comp);
        bt(k) = b(2 * tri[static_cast<std::size_t>(k)] + comp);
      }
      m += at.dot(me * bt);
    }
    for (int i = 0; i < n; ++i)
    {
      const double s = cutoff_deriv(bar[static_cast<std::size_t>(i)], cp);
      per_element[ts * static_cast<std::size_t>(n) + static_cast<std::size_t>(i)] =
          s * law.rho()[static_cast<std::size_t>(i)] * m;
    }
  });
  return scatter_thirds(mesh, n, per_element);
}

}  // namespace eigentopo::kernels
