// SPDX-License-Identifier: Apache-2.0

#include "eigentopo/sparse.hpp"

#include <stdexcept>

namespace eigentopo {

SparseSymMatrix SparseSymMatrix::from_triplets(int dim, const std::vector<Triplet>& triplets)
{
  std::vector<Triplet> lower;
  lower.reserve(triplets.size());
  for (const auto& t : triplets)
  {
    if (t.row() >= t.col())
    {
      lower.push_back(t);
    }
    else
    {
      lower.emplace_back(t.col(), t.row(), t.value());
    }
  }
  SparseMatrix m(dim, dim);
  m.setFromTriplets(lower.begin(), lower.end());
  return from_lower(std::move(m));
}

SparseSymMatrix SparseSymMatrix::from_lower(SparseMatrix lower)
{
  if (lower.rows() != lower.cols())
  {
    throw std::invalid_argument("sparse: matrix must be square");
  }
  SparseSymMatrix out;
  out.lower_ = lower.triangularView<Eigen::Lower>();
  out.lower_.prune(0.0);
  out.lower_.makeCompressed();
  return out;
}

Eigen::VectorXd SparseSymMatrix::multiply(const Eigen::VectorXd& x) const
{
  if (x.size() != dim())
  {
    throw std::invalid_argument("sparse: vector size mismatch");
  }
  return lower_.selfadjointView<Eigen::Lower>() * x;
}

Eigen::MatrixXd SparseSymMatrix::multiply(const Eigen::MatrixXd& x) const
{
  if (x.rows() != dim())
  {
    throw std::invalid_argument("sparse: block size mismatch");
  }
  return lower_.selfadjointView<Eigen::Lower>() * x;
}

double SparseSymMatrix::bilinear(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const
{
  return x.dot(multiply(y));
}

double SparseSymMatrix::coeff(int i, int j) const
{
  return i >= j ? lower_.coeff(i, j) : lower_.coeff(j, i);
}

Eigen::MatrixXd SparseSymMatrix::to_dense() const
{
  return Eigen::MatrixXd(full());
}

SparseMatrix SparseSymMatrix::full() const
{
  SparseMatrix f = lower_.selfadjointView<Eigen::Lower>();
  f.makeCompressed();
  return f;
}

SparseSymMatrix SparseSymMatrix::combined(double a, const SparseSymMatrix& other, double b) const
{
  if (other.dim() != dim())
  {
    throw std::invalid_argument("sparse: dimension mismatch");
  }
  SparseMatrix sum = a * lower_ + b * other.lower_;
  return from_lower(std::move(sum));
}

}  // namespace eigentopo
