// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace eigentopo {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
using Triplet = Eigen::Triplet<double, int>;

/// Symmetric sparse matrix stored as its lower triangle (column-major CSC).
class SparseSymMatrix
{
public:
  SparseSymMatrix() = default;
  explicit SparseSymMatrix(int dim) : lower_(dim, dim) {}

  /// Sums duplicate triplets; entries above the diagonal are mirrored into
  /// the lower triangle. Exact zeros are dropped.
  static SparseSymMatrix from_triplets(int dim, const std::vector<Triplet>& triplets);
  static SparseSymMatrix from_lower(SparseMatrix lower);

  [[nodiscard]] int dim() const { return static_cast<int>(lower_.rows()); }
  [[nodiscard]] const SparseMatrix& lower() const { return lower_; }
  [[nodiscard]] Eigen::Index nonzeros() const { return lower_.nonZeros(); }

  [[nodiscard]] Eigen::VectorXd multiply(const Eigen::VectorXd& x) const;
  [[nodiscard]] Eigen::MatrixXd multiply(const Eigen::MatrixXd& x) const;
  /// x^T A y
  [[nodiscard]] double bilinear(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const;
  [[nodiscard]] double coeff(int i, int j) const;
  [[nodiscard]] Eigen::MatrixXd to_dense() const;
  /// Full (both triangles) copy, for solvers that want the whole pattern.
  [[nodiscard]] SparseMatrix full() const;

  /// a*this + b*other
  [[nodiscard]] SparseSymMatrix combined(double a, const SparseSymMatrix& other, double b) const;

private:
  SparseMatrix lower_;
};

}  // namespace eigentopo
