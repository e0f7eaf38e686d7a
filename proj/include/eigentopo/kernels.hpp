// SPDX-License-Identifier: Apache-2.0

// Element-loop kernels shared by all assembly routines. Every kernel has a
// serial reference implementation and an OpenMP implementation; the OpenMP
// variants use static schedules and concatenate per-thread buffers in
// thread order, so they emit exactly the serial triplet sequence.

#pragma once

#include <vector>

#include <Eigen/Core>

#include "eigentopo/grid.hpp"
#include "eigentopo/material.hpp"
#include "eigentopo/phase_field.hpp"
#include "eigentopo/sparse.hpp"

namespace eigentopo {

enum class Backend
{
  Serial,
  OpenMP
};

namespace kernels {

using ElementMatrix = Eigen::Matrix<double, 6, 6>;

/// Local dof ordering (vertex k, component c) -> 2k+c.
ElementMatrix element_stiffness(const Eigen::Matrix<double, 3, 2>& grads, double area, const Lame& lame);
/// P1 mass for a scalar unit density: area/12 * [2 1 1; 1 2 1; 1 1 2].
Eigen::Matrix3d element_scalar_mass(double area);

/// Centroid value of the nodal field on triangle t.
void centroid_value(const Mesh& mesh, const PhaseField& phi, int t, std::span<double> out);

/// Per-element Lame pair and density from the centroid phase value.
struct ElementCoefficients
{
  std::vector<Lame> lame;
  std::vector<double> rho;
};
ElementCoefficients element_coefficients(const Mesh& mesh, const PhaseField& phi, const MaterialLaw& law,
                                         Backend backend);
/// Directional derivatives of the element coefficients along h.
ElementCoefficients element_coefficient_derivs(const Mesh& mesh, const PhaseField& phi, const PhaseField& h,
                                               const MaterialLaw& law, Backend backend);

/// Assemble sum_T K_e(lame_T) restricted to the free dofs of `dofs`.
SparseSymMatrix assemble_elastic(const Mesh& mesh, const DofMap& dofs, const std::vector<Lame>& lame,
                                 Backend backend);
/// Assemble sum_T rho_T * (P1 mass per displacement component) on the free dofs.
SparseSymMatrix assemble_vector_mass(const Mesh& mesh, const DofMap& dofs, const std::vector<double>& rho,
                                     Backend backend);

/// Nodal field g with g_{v,i} = sum_{T ni v} (1/3) sigma'(phibar_{T,i}) a_T^T K_T^{(i)} b_T,
/// where K_T^{(i)} is the element stiffness of phase i alone. a and b are
/// full displacement vectors (2 per vertex).
PhaseField stiffness_pair_field(const Mesh& mesh, const PhaseField& phi, const MaterialLaw& law,
                                const Eigen::VectorXd& a, const Eigen::VectorXd& b, Backend backend);
/// Same with rho_i sigma'(phibar_{T,i}) a_T^T M_T b_T.
PhaseField mass_pair_field(const Mesh& mesh, const PhaseField& phi, const MaterialLaw& law,
                           const Eigen::VectorXd& a, const Eigen::VectorXd& b, Backend backend);

}  // namespace kernels
}  // namespace eigentopo
