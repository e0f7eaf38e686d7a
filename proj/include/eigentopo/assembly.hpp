// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <utility>

#include <Eigen/Core>

#include "eigentopo/grid.hpp"
#include "eigentopo/kernels.hpp"
#include "eigentopo/material.hpp"
#include "eigentopo/phase_field.hpp"
#include "eigentopo/sparse.hpp"

namespace eigentopo {

// All vector-valued operators live on the free dofs of the given DofMap
// (Dirichlet rows and columns eliminated). phi and h are nodal fields; C(phi)
// and rho(phi) are evaluated at element centroids.

/// Entry (a,b) = sum_T E(chi_a) : C(phibar_T) E(chi_b) |T|.
SparseSymMatrix assemble_stiffness(const Mesh& mesh, const DofMap& dofs, const PhaseField& phi,
                                   const MaterialLaw& law, Backend backend = Backend::OpenMP);

/// Exact P1 mass per displacement component weighted by rho(phibar_T).
SparseSymMatrix assemble_mass(const Mesh& mesh, const DofMap& dofs, const PhaseField& phi, const MaterialLaw& law,
                              Backend backend = Backend::OpenMP);

/// Stiffness form with C'(phi)h in place of C(phi).
SparseSymMatrix assemble_stiffness_dir(const Mesh& mesh, const DofMap& dofs, const PhaseField& phi,
                                       const PhaseField& h, const MaterialLaw& law,
                                       Backend backend = Backend::OpenMP);

/// Mass form with rho'(phi)h in place of rho(phi).
SparseSymMatrix assemble_mass_dir(const Mesh& mesh, const DofMap& dofs, const PhaseField& phi, const PhaseField& h,
                                  const MaterialLaw& law, Backend backend = Backend::OpenMP);

/// Load vector on the free dofs:
///   b_a = sum_T (1 - phibar^N_T) (M_T f)_a + sum_{edges tagged NeumannG} |e|/2 g(vertex).
/// `body_force` and `traction` are full nodal 2-vectors (size 2*num_vertices);
/// only the traction values at vertices of loaded edges are used.
Eigen::VectorXd assemble_load(const Mesh& mesh, const DofMap& dofs, const PhaseField& phi,
                              const Eigen::VectorXd& body_force, const Eigen::VectorXd& traction);

/// Body-force part of the load only (the phi-dependent part).
Eigen::VectorXd assemble_body_load(const Mesh& mesh, const DofMap& dofs, const PhaseField& phi,
                                   const Eigen::VectorXd& body_force);

/// Scalar P1 stiffness int a grad u . grad v and mass int a u v, with the
/// nodal coefficient a evaluated at element centroids. All dofs free.
std::pair<SparseSymMatrix, SparseSymMatrix> assemble_scalar_laplace(const Mesh& mesh, const Eigen::VectorXd& coeff);

/// Nodal field g with g . h = w^T K'(phi)[h] w - lambda w^T M'(phi)[h] w for
/// every nodal direction h. w are the free-dof values of an M(phi)-normalized
/// eigenvector; throws std::invalid_argument when |w^T M w - 1| > 1e-8.
PhaseField eigen_gradient_field(const Mesh& mesh, const DofMap& dofs, const PhaseField& phi, const MaterialLaw& law,
                                const Eigen::VectorXd& w, double lambda, Backend backend = Backend::OpenMP);

}  // namespace eigentopo
