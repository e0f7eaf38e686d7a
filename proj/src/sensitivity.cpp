// SPDX-License-Identifier: Apache-2.0

#include "eigentopo/sensitivity.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <Eigen/OrderingMethods>
#include <Eigen/SparseLU>

#include "eigentopo/errors.hpp"

namespace eigentopo {

double eigenvalue_derivative(const SparseSymMatrix& k_dir, const SparseSymMatrix& m_dir, double lambda,
                             const Eigen::VectorXd& w)
{
  return k_dir.bilinear(w, w) - lambda * m_dir.bilinear(w, w);
}

double eigenvalue_derivative(const Mesh& mesh, const DofMap& dofs, const PhaseField& phi, const MaterialLaw& law,
                             const EigenPairs& pairs, int index, const PhaseField& h, Backend backend)
{
  if (index < 0 || index >= pairs.size())
  {
    throw std::invalid_argument("eigenvalue derivative: index out of range");
  }
  if (!pairs.is_simple(index))
  {
    const auto g = pairs.group_of(index);
    throw DegenerateEigenvalueError("eigenvalue derivative: eigenvalue " + std::to_string(index + 1) +
                                        " is clustered; use the semi-derivative",
                                    index, g.first, g.second);
  }
  const SparseSymMatrix kd = assemble_stiffness_dir(mesh, dofs, phi, h, law, backend);
  const SparseSymMatrix md = assemble_mass_dir(mesh, dofs, phi, h, law, backend);
  return eigenvalue_derivative(kd, md, pairs.lambdas[static_cast<std::size_t>(index)], pairs.vectors.col(index));
}

namespace {

template <typename Ordering>
Eigen::VectorXd solve_lu(const SparseMatrix& a, const Eigen::VectorXd& rhs)
{
  Eigen::SparseLU<SparseMatrix, Ordering> lu;
  lu.analyzePattern(a);
  lu.factorize(a);
  if (lu.info() != Eigen::Success)
  {
    throw NumericalError("eigenfunction derivative: bordered system is singular (eigenvalue not simple?)");
  }
  Eigen::VectorXd x = lu.solve(rhs);
  if (lu.info() != Eigen::Success || !x.allFinite())
  {
    throw NumericalError("eigenfunction derivative: bordered solve failed");
  }
  return x;
}

}  // namespace

Eigen::VectorXd eigenfunction_derivative(const SparseSymMatrix& k, const SparseSymMatrix& m,
                                         const SparseSymMatrix& k_dir, const SparseSymMatrix& m_dir, double lambda,
                                         const Eigen::VectorXd& w, double dlambda, BorderedOrdering ordering)
{
  const int n = k.dim();
  if (m.dim() != n || k_dir.dim() != n || m_dir.dim() != n || w.size() != n)
  {
    throw std::invalid_argument("eigenfunction derivative: dimension mismatch");
  }
  const Eigen::VectorXd mw = m.multiply(w);
  const Eigen::VectorXd f = -k_dir.multiply(w) + lambda * m_dir.multiply(w) + dlambda * mw;
  const double kappa = -m_dir.bilinear(w, w);

  // Solvability of the first block row: f must be orthogonal to the kernel w.
  const double scale = (k_dir.multiply(w).norm() + std::abs(lambda) * m_dir.multiply(w).norm() +
                        std::abs(dlambda) * mw.norm()) *
                           w.norm() +
                       1e-300;
  if (std::abs(w.dot(f)) > 1e-8 * scale)
  {
    throw std::invalid_argument("eigenfunction derivative: right-hand side incompatible (relative " +
                                std::to_string(std::abs(w.dot(f)) / scale) + ")");
  }

  const SparseMatrix a = k.combined(1.0, m, -lambda).full();
  std::vector<Triplet> trips;
  trips.reserve(static_cast<std::size_t>(a.nonZeros() + 2 * n));
  for (int col = 0; col < a.outerSize(); ++col)
  {
    for (SparseMatrix::InnerIterator it(a, col); it; ++it)
    {
      trips.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
    }
  }
  for (int i = 0; i < n; ++i)
  {
    if (mw(i) != 0.0)
    {
      trips.emplace_back(i, n, mw(i));
      trips.emplace_back(n, i, mw(i));
    }
  }
  SparseMatrix bordered(n + 1, n + 1);
  bordered.setFromTriplets(trips.begin(), trips.end());
  bordered.makeCompressed();

  Eigen::VectorXd rhs(n + 1);
  rhs.head(n) = f;
  rhs(n) = 0.5 * kappa;
  const Eigen::VectorXd x = ordering == BorderedOrdering::Colamd
                                ? solve_lu<Eigen::COLAMDOrdering<int>>(bordered, rhs)
                                : solve_lu<Eigen::AMDOrdering<int>>(bordered, rhs);
  const Eigen::VectorXd res = bordered * x - rhs;
  if (!(res.norm() <= 1e-8 * (rhs.norm() + (bordered * x).norm() + 1e-300)))
  {
    throw NumericalError("eigenfunction derivative: bordered residual too large (eigenvalue not simple?)");
  }
  return x.head(n);
}

SemiDerivative semi_derivative_first(const SparseSymMatrix& m, const SparseSymMatrix& k_dir,
                                     const SparseSymMatrix& m_dir, const Eigen::MatrixXd& basis, double lambda1)
{
  if (basis.cols() < 1 || basis.rows() != m.dim())
  {
    throw std::invalid_argument("semi-derivative: basis must have at least one column of matching size");
  }
  const Eigen::MatrixXd gram = basis.transpose() * m.multiply(basis);
  const double dev = (gram - Eigen::MatrixXd::Identity(basis.cols(), basis.cols())).cwiseAbs().maxCoeff();
  if (dev > 1e-8)
  {
    throw std::invalid_argument("semi-derivative: basis is not M-orthonormal (Gram deviation " +
                                std::to_string(dev) + ")");
  }
  Eigen::MatrixXd b = basis.transpose() * k_dir.multiply(basis) - lambda1 * (basis.transpose() * m_dir.multiply(basis));
  b = 0.5 * (b + b.transpose()).eval();
  SemiDerivative out;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(b);
  out.value = es.eigenvalues()(0);
  out.direction = es.eigenvectors().col(0);
  out.reduced = b;
  return out;
}

SemiDerivative semi_derivative_first(const Mesh& mesh, const DofMap& dofs, const PhaseField& phi,
                                     const MaterialLaw& law, const Eigen::MatrixXd& basis, double lambda1,
                                     const PhaseField& h, Backend backend)
{
  const SparseSymMatrix m = assemble_mass(mesh, dofs, phi, law, backend);
  const SparseSymMatrix kd = assemble_stiffness_dir(mesh, dofs, phi, h, law, backend);
  const SparseSymMatrix md = assemble_mass_dir(mesh, dofs, phi, h, law, backend);
  return semi_derivative_first(m, kd, md, basis, lambda1);
}

}  // namespace eigentopo
