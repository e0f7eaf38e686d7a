// SPDX-License-Identifier: Apache-2.0

#include "eigentopo/assembly.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace eigentopo {

SparseSymMatrix assemble_stiffness(const Mesh& mesh, const DofMap& dofs, const PhaseField& phi,
                                   const MaterialLaw& law, Backend backend)
{
  const auto coeff = kernels::element_coefficients(mesh, phi, law, backend);
  return kernels::assemble_elastic(mesh, dofs, coeff.lame, backend);
}

SparseSymMatrix assemble_mass(const Mesh& mesh, const DofMap& dofs, const PhaseField& phi, const MaterialLaw& law,
                              Backend backend)
{
  const auto coeff = kernels::element_coefficients(mesh, phi, law, backend);
  return kernels::assemble_vector_mass(mesh, dofs, coeff.rho, backend);
}

SparseSymMatrix assemble_stiffness_dir(const Mesh& mesh, const DofMap& dofs, const PhaseField& phi,
                                       const PhaseField& h, const MaterialLaw& law, Backend backend)
{
  const auto coeff = kernels::element_coefficient_derivs(mesh, phi, h, law, backend);
  return kernels::assemble_elastic(mesh, dofs, coeff.lame, backend);
}

SparseSymMatrix assemble_mass_dir(const Mesh& mesh, const DofMap& dofs, const PhaseField& phi, const PhaseField& h,
                                  const MaterialLaw& law, Backend backend)
{
  const auto coeff = kernels::element_coefficient_derivs(mesh, phi, h, law, backend);
  return kernels::assemble_vector_mass(mesh, dofs, coeff.rho, backend);
}

Eigen::VectorXd assemble_body_load(const Mesh& mesh, const DofMap& dofs, const PhaseField& phi,
                                   const Eigen::VectorXd& body_force)
{
  const int nv = mesh.num_vertices();
  if (body_force.size() != 2 * nv)
  {
    throw std::invalid_argument("load: body force must have 2 entries per vertex");
  }
  if (phi.n_nodes() != nv)
  {
    throw std::invalid_argument("load: phase field does not match mesh");
  }
  const int last = phi.n_phases() - 1;
  Eigen::VectorXd full = Eigen::VectorXd::Zero(2 * nv);
  const auto& tris = mesh.triangles();
  const auto& areas = mesh.element_areas();
  for (int t = 0; t < mesh.num_triangles(); ++t)
  {
    const auto& tri = tris[static_cast<std::size_t>(t)];
    const double solid = 1.0 - (phi(tri[0], last) + phi(tri[1], last) + phi(tri[2], last)) / 3.0;
    const Eigen::Matrix3d me = solid * kernels::element_scalar_mass(areas[static_cast<std::size_t>(t)]);
    for (int comp = 0; comp < 2; ++comp)
    {
      Eigen::Vector3d f;
      for (int k = 0; k < 3; ++k)
      {
        f(k) = body_force(2 * tri[static_cast<std::size_t>(k)] + comp);
      }
      const Eigen::Vector3d contrib = me * f;
      for (int k = 0; k < 3; ++k)
      {
        full(2 * tri[static_cast<std::size_t>(k)] + comp) += contrib(k);
      }
    }
  }
  return dofs.restrict(full);
}

Eigen::VectorXd assemble_load(const Mesh& mesh, const DofMap& dofs, const PhaseField& phi,
                              const Eigen::VectorXd& body_force, const Eigen::VectorXd& traction)
{
  const int nv = mesh.num_vertices();
  if (traction.size() != 2 * nv)
  {
    throw std::invalid_argument("load: traction must have 2 entries per vertex");
  }
  Eigen::VectorXd full = dofs.expand(assemble_body_load(mesh, dofs, phi, body_force));
  const auto& verts = mesh.vertices();
  for (const auto& e : mesh.boundary_edges())
  {
    if (e.load_tag != BoundaryTag::NeumannG)
    {
      continue;
    }
    const double len = (verts[static_cast<std::size_t>(e.a)] - verts[static_cast<std::size_t>(e.b)]).norm();
    for (int v : {e.a, e.b})
    {
      full(2 * v) += 0.5 * len * traction(2 * v);
      full(2 * v + 1) += 0.5 * len * traction(2 * v + 1);
    }
  }
  return dofs.restrict(full);
}

std::pair<SparseSymMatrix, SparseSymMatrix> assemble_scalar_laplace(const Mesh& mesh, const Eigen::VectorXd& coeff)
{
  const int nv = mesh.num_vertices();
  if (coeff.size() != nv)
  {
    throw std::invalid_argument("laplace: one coefficient per vertex expected");
  }
  std::vector<Triplet> kt;
  std::vector<Triplet> mt;
  const auto& tris = mesh.triangles();
  const auto& grads = mesh.shape_gradients();
  const auto& areas = mesh.element_areas();
  for (int t = 0; t < mesh.num_triangles(); ++t)
  {
    const auto ts = static_cast<std::size_t>(t);
    const auto& tri = tris[ts];
    const double a = (coeff(tri[0]) + coeff(tri[1]) + coeff(tri[2])) / 3.0;
    const Eigen::Matrix3d ke = a * areas[ts] * grads[ts] * grads[ts].transpose();
    const Eigen::Matrix3d me = a * kernels::element_scalar_mass(areas[ts]);
    for (int p = 0; p < 3; ++p)
    {
      for (int q = 0; q <= 2; ++q)
      {
        const int r = tri[static_cast<std::size_t>(p)];
        const int c = tri[static_cast<std::size_t>(q)];
        if (c > r)
        {
          continue;
        }
        kt.emplace_back(r, c, ke(p, q));
        mt.emplace_back(r, c, me(p, q));
      }
    }
  }
  return {SparseSymMatrix::from_triplets(nv, kt), SparseSymMatrix::from_triplets(nv, mt)};
}

PhaseField eigen_gradient_field(const Mesh& mesh, const DofMap& dofs, const PhaseField& phi, const MaterialLaw& law,
                                const Eigen::VectorXd& w, double lambda, Backend backend)
{
  const SparseSymMatrix m = assemble_mass(mesh, dofs, phi, law, backend);
  const double norm2 = m.bilinear(w, w);
  if (std::abs(norm2 - 1.0) > 1e-8)
  {
    throw std::invalid_argument("eigen gradient: eigenvector is not M-normalized (w^T M w = " +
                                std::to_string(norm2) + ")");
  }
  const Eigen::VectorXd full = dofs.expand(w);
  PhaseField g = kernels::stiffness_pair_field(mesh, phi, law, full, full, backend);
  const PhaseField gm = kernels::mass_pair_field(mesh, phi, law, full, full, backend);
  g -= lambda * gm;
  return g;
}

}  // namespace eigentopo
