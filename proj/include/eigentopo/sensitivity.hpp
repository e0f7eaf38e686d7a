// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>

#include "eigentopo/assembly.hpp"
#include "eigentopo/eigensolver.hpp"

namespace eigentopo {

/// w^T K' w - lambda w^T M' w for assembled directional forms K' = K'(phi)[h],
/// M' = M'(phi)[h].
double eigenvalue_derivative(const SparseSymMatrix& k_dir, const SparseSymMatrix& m_dir, double lambda,
                             const Eigen::VectorXd& w);

/// Derivative of the simple eigenvalue `index` (0-based) of `pairs` along h.
/// Throws DegenerateEigenvalueError when the eigenvalue is clustered.
double eigenvalue_derivative(const Mesh& mesh, const DofMap& dofs, const PhaseField& phi, const MaterialLaw& law,
                             const EigenPairs& pairs, int index, const PhaseField& h,
                             Backend backend = Backend::OpenMP);

enum class BorderedOrdering
{
  Colamd,
  Amd
};

/// Derivative u of the M-normalized eigenvector w of a simple eigenvalue.
///
/// Solves [K - lambda M, M w; (M w)^T, 0] [u; a] = [-K'w + lambda M'w + dlambda M w; -w^T M' w / 2]
/// by sparse LU. Throws NumericalError if the bordered matrix is singular and
/// std::invalid_argument when the right-hand side is incompatible with the
/// kernel of K - lambda M (dlambda inconsistent with K', M').
Eigen::VectorXd eigenfunction_derivative(const SparseSymMatrix& k, const SparseSymMatrix& m,
                                         const SparseSymMatrix& k_dir, const SparseSymMatrix& m_dir, double lambda,
                                         const Eigen::VectorXd& w, double dlambda,
                                         BorderedOrdering ordering = BorderedOrdering::Colamd);

struct SemiDerivative
{
  double value = 0.0;
  /// Coefficients in the given basis of a minimizing unit eigenfunction.
  Eigen::VectorXd direction;
  /// The reduced symmetric matrix B.
  Eigen::MatrixXd reduced;
};

/// One-sided derivative of the first eigenvalue along h: the smallest
/// eigenvalue of B_ab = u_a^T K' u_b - lambda1 u_a^T M' u_b over the
/// M-orthonormal basis u of the first eigenspace. Throws
/// std::invalid_argument if the Gram matrix deviates from I by more than 1e-8.
SemiDerivative semi_derivative_first(const SparseSymMatrix& m, const SparseSymMatrix& k_dir,
                                     const SparseSymMatrix& m_dir, const Eigen::MatrixXd& basis, double lambda1);

SemiDerivative semi_derivative_first(const Mesh& mesh, const DofMap& dofs, const PhaseField& phi,
                                     const MaterialLaw& law, const Eigen::MatrixXd& basis, double lambda1,
                                     const PhaseField& h, Backend backend = Backend::OpenMP);

}  // namespace eigentopo
