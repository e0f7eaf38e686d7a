// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "eigentopo/sparse.hpp"

namespace eigentopo {

/// Generalized eigenpairs of K v = lambda M v in ascending order.
struct EigenPairs
{
  std::vector<double> lambdas;
  Eigen::MatrixXd vectors;  // columns, M-orthonormal
  std::vector<double> residuals;
  /// Half-open index ranges of numerically equal eigenvalues.
  std::vector<std::pair<int, int>> multiplicity_groups;
  /// Whether the sign of each column has been fixed against a reference.
  std::vector<bool> sign_fixed;

  [[nodiscard]] int size() const { return static_cast<int>(lambdas.size()); }
  /// Group containing eigenvalue i.
  [[nodiscard]] std::pair<int, int> group_of(int i) const;
  [[nodiscard]] bool is_simple(int i) const;
};

struct EigenOptions
{
  double tol = 1e-8;            // relative residual |Kv - lambda Mv| / (lambda |Mv|)
  double cluster_tol = 1e-6;    // relative gap defining multiplicity groups
  double shift = 0.0;           // factor K - shift*M; must keep it SPD
  int krylov_dim = 0;           // Lanczos steps per cycle, 0 = automatic
  int max_cycles = 40;
  std::uint64_t seed = 0x5eed;
};

/// Group consecutive eigenvalues whose relative gap is below cluster_tol.
std::vector<std::pair<int, int>> multiplicity_groups(const std::vector<double>& lambdas, double cluster_tol);

/// k smallest eigenpairs by shift-invert Lanczos in the M inner product, with
/// full reorthogonalization, locking and restarts, then Rayleigh-Ritz
/// refinement of the locked basis.
///
/// Throws NumericalError if K - shift*M cannot be factored as SPD (missing
/// Dirichlet boundary) or the iteration does not converge.
EigenPairs smallest_eigenpairs(const SparseSymMatrix& k, const SparseSymMatrix& m, int count,
                               const EigenOptions& opts = {});

/// Full spectrum by dense reduction (Cholesky of M, symmetric eigensolver,
/// back-transform). Dimension capped at 3000.
EigenPairs dense_eigen_oracle(const SparseSymMatrix& k, const SparseSymMatrix& m, double cluster_tol = 1e-6);

/// u^T K u / u^T M u; throws for the zero vector.
double rayleigh_quotient(const SparseSymMatrix& k, const SparseSymMatrix& m, const Eigen::VectorXd& u);

/// Flip each simple eigenvector whose M_ref inner product with the matching
/// reference column is negative. Clustered pairs are left untouched with
/// sign_fixed = false. Throws SignConventionError when a simple pair has a
/// normalized inner product below 0.1 in magnitude.
EigenPairs apply_sign_convention(const EigenPairs& pairs, const Eigen::MatrixXd& reference,
                                 const SparseSymMatrix& m_ref);

/// Relative residual |K v - lambda M v| / (max(lambda, floor) |M v|).
double relative_residual(const SparseSymMatrix& k, const SparseSymMatrix& m, double lambda, const Eigen::VectorXd& v);

}  // namespace eigentopo
