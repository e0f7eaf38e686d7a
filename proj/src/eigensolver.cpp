// SPDX-License-Identifier: Apache-2.0

#include "eigentopo/eigensolver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include "eigentopo/errors.hpp"

namespace eigentopo {

std::pair<int, int> EigenPairs::group_of(int i) const
{
  for (const auto& g : multiplicity_groups)
  {
    if (i >= g.first && i < g.second)
    {
      return g;
    }
  }
  return {i, i + 1};
}

bool EigenPairs::is_simple(int i) const
{
  const auto g = group_of(i);
  return g.second - g.first == 1;
}

std::vector<std::pair<int, int>> multiplicity_groups(const std::vector<double>& lambdas, double cluster_tol)
{
  std::vector<std::pair<int, int>> groups;
  const int n = static_cast<int>(lambdas.size());
  int begin = 0;
  for (int i = 1; i <= n; ++i)
  {
    const bool split = (i == n) || std::abs(lambdas[static_cast<std::size_t>(i)] -
                                            lambdas[static_cast<std::size_t>(i - 1)]) >
                                       cluster_tol * std::max(std::abs(lambdas[static_cast<std::size_t>(i)]),
                                                              std::abs(lambdas[static_cast<std::size_t>(i - 1)]));
    if (split)
    {
      groups.emplace_back(begin, i);
      begin = i;
    }
  }
  return groups;
}

double relative_residual(const SparseSymMatrix& k, const SparseSymMatrix& m, double lambda, const Eigen::VectorXd& v)
{
  const Eigen::VectorXd mv = m.multiply(v);
  const Eigen::VectorXd r = k.multiply(v) - lambda * mv;
  const double denom = std::max(std::abs(lambda), 1e-300) * mv.norm();
  return r.norm() / denom;
}

double rayleigh_quotient(const SparseSymMatrix& k, const SparseSymMatrix& m, const Eigen::VectorXd& u)
{
  if (u.size() != k.dim() || u.size() != m.dim())
  {
    throw std::invalid_argument("rayleigh quotient: size mismatch");
  }
  if (u.squaredNorm() == 0.0)
  {
    throw std::invalid_argument("rayleigh quotient: zero vector");
  }
  return k.bilinear(u, u) / m.bilinear(u, u);
}

namespace {

void canonical_signs(Eigen::MatrixXd& v)
{
  for (Eigen::Index j = 0; j < v.cols(); ++j)
  {
    Eigen::Index imax = 0;
    v.col(j).cwiseAbs().maxCoeff(&imax);
    if (v(imax, j) < 0.0)
    {
      v.col(j) = -v.col(j);
    }
  }
}

void finalize(EigenPairs& out, const SparseSymMatrix& k, const SparseSymMatrix& m, double cluster_tol,
              double residual_floor)
{
  out.residuals.clear();
  for (int j = 0; j < out.size(); ++j)
  {
    const double lam = out.lambdas[static_cast<std::size_t>(j)];
    const Eigen::VectorXd v = out.vectors.col(j);
    const Eigen::VectorXd mv = m.multiply(v);
    const Eigen::VectorXd r = k.multiply(v) - lam * mv;
    out.residuals.push_back(r.norm() / (std::max(std::abs(lam), residual_floor) * mv.norm()));
  }
  out.multiplicity_groups = multiplicity_groups(out.lambdas, cluster_tol);
  out.sign_fixed.assign(static_cast<std::size_t>(out.size()), false);
}

// Rayleigh-Ritz on the span of V (M-orthonormal or close to it); returns
// ascending Ritz values and overwrites V with the Ritz vectors.
std::vector<double> rayleigh_ritz(const SparseSymMatrix& k, const SparseSymMatrix& m, Eigen::MatrixXd& v)
{
  const Eigen::MatrixXd kv = k.multiply(v);
  const Eigen::MatrixXd mv = m.multiply(v);
  Eigen::MatrixXd a = v.transpose() * kv;
  Eigen::MatrixXd b = v.transpose() * mv;
  a = 0.5 * (a + a.transpose()).eval();
  b = 0.5 * (b + b.transpose()).eval();
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(a, b, Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
  if (es.info() != Eigen::Success)
  {
    throw NumericalError("eigensolver: Rayleigh-Ritz projection failed (basis lost M-orthogonality)");
  }
  v = (v * es.eigenvectors()).eval();
  return {es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size()};
}

class ShiftInvert
{
public:
  ShiftInvert(const SparseSymMatrix& k, const SparseSymMatrix& m, double shift) : m_(m)
  {
    const SparseSymMatrix a = shift == 0.0 ? k : k.combined(1.0, m, -shift);
    solver_.compute(a.lower());
    if (solver_.info() != Eigen::Success)
    {
      throw NumericalError("eigensolver: factorization of K - shift*M failed (missing Dirichlet boundary?)");
    }
    const Eigen::VectorXd d = solver_.vectorD();
    const double dmax = d.cwiseAbs().maxCoeff();
    if (d.minCoeff() <= 1e-12 * dmax)
    {
      throw NumericalError("eigensolver: K - shift*M is not positive definite (missing Dirichlet boundary?)");
    }
  }

  [[nodiscard]] Eigen::VectorXd apply_to_mx(const Eigen::VectorXd& mx) const { return solver_.solve(mx); }
  [[nodiscard]] Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const { return solver_.solve(m_.multiply(x)); }

private:
  const SparseSymMatrix& m_;
  Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower> solver_;
};

struct RitzCycle
{
  std::vector<double> theta;        // descending
  std::vector<Eigen::VectorXd> vec;  // matching Ritz vectors
  std::vector<bool> converged;
};

// One Lanczos cycle of the M-self-adjoint operator (K - sM)^{-1} M, deflated
// against the locked columns Y.
RitzCycle lanczos_cycle(const ShiftInvert& op, const SparseSymMatrix& m, const Eigen::MatrixXd& y,
                        const Eigen::MatrixXd& my, int steps, std::mt19937_64& rng, double inner_tol)
{
  const Eigen::Index n = m.dim();
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd q(n);
  for (Eigen::Index i = 0; i < n; ++i)
  {
    q(i) = normal(rng);
  }
  for (int pass = 0; pass < 2; ++pass)
  {
    if (y.cols() > 0)
    {
      q -= y * (my.transpose() * q);
    }
  }
  Eigen::VectorXd mq = m.multiply(q);
  double nrm = std::sqrt(q.dot(mq));
  if (!(nrm > 0.0))
  {
    throw NumericalError("eigensolver: degenerate Lanczos start vector");
  }
  Eigen::MatrixXd basis(n, steps + 1);
  Eigen::MatrixXd mbasis(n, steps + 1);
  basis.col(0) = q / nrm;
  mbasis.col(0) = mq / nrm;
  std::vector<double> alpha;
  std::vector<double> beta;
  int used = 0;
  double beta_last = 0.0;
  for (int j = 0; j < steps; ++j)
  {
    Eigen::VectorXd z = op.apply_to_mx(mbasis.col(j));
    const double a = mbasis.col(j).dot(z);
    alpha.push_back(a);
    z -= a * basis.col(j);
    if (j > 0)
    {
      z -= beta.back() * basis.col(j - 1);
    }
    for (int pass = 0; pass < 2; ++pass)
    {
      const Eigen::VectorXd c = mbasis.leftCols(j + 1).transpose() * z;
      z -= basis.leftCols(j + 1) * c;
      if (y.cols() > 0)
      {
        z -= y * (my.transpose() * z);
      }
    }
    const Eigen::VectorXd mz = m.multiply(z);
    const double b = std::sqrt(std::max(0.0, z.dot(mz)));
    used = j + 1;
    beta_last = b;
    if (b <= 1e-14 * std::abs(a) || j + 1 == steps)
    {
      break;
    }
    beta.push_back(b);
    basis.col(j + 1) = z / b;
    mbasis.col(j + 1) = mz / b;
  }

  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(used, used);
  for (int j = 0; j < used; ++j)
  {
    t(j, j) = alpha[static_cast<std::size_t>(j)];
    if (j + 1 < used)
    {
      t(j, j + 1) = beta[static_cast<std::size_t>(j)];
      t(j + 1, j) = beta[static_cast<std::size_t>(j)];
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
  const bool invariant = beta_last <= 1e-14 * std::abs(alpha.back());
  RitzCycle out;
  for (int i = used - 1; i >= 0; --i)
  {
    const double theta = es.eigenvalues()(i);
    const double bound = invariant ? 0.0 : std::abs(beta_last * es.eigenvectors()(used - 1, i));
    out.theta.push_back(theta);
    out.vec.emplace_back(basis.leftCols(used) * es.eigenvectors().col(i));
    out.converged.push_back(theta > 0.0 && bound <= inner_tol * theta);
  }
  return out;
}

void append_column(Eigen::MatrixXd& mat, const Eigen::VectorXd& col)
{
  mat.conservativeResize(col.size(), mat.cols() + 1);
  mat.col(mat.cols() - 1) = col;
}

void remove_column(Eigen::MatrixXd& mat, Eigen::Index j)
{
  const Eigen::Index cols = mat.cols();
  if (j < cols - 1)
  {
    mat.middleCols(j, cols - j - 1) = mat.rightCols(cols - j - 1).eval();
  }
  mat.conservativeResize(mat.rows(), cols - 1);
}

// M-orthonormalize col against Y (twice) and normalize; returns false if it
// collapses.
bool m_orthonormalize(const SparseSymMatrix& m, const Eigen::MatrixXd& y, const Eigen::MatrixXd& my,
                      Eigen::VectorXd& col)
{
  for (int pass = 0; pass < 2; ++pass)
  {
    if (y.cols() > 0)
    {
      col -= y * (my.transpose() * col);
    }
  }
  const double nrm = std::sqrt(col.dot(m.multiply(col)));
  if (!(nrm > 1e-8))
  {
    return false;
  }
  col /= nrm;
  return true;
}

}  // namespace

EigenPairs smallest_eigenpairs(const SparseSymMatrix& k, const SparseSymMatrix& m, int count, const EigenOptions& opts)
{
  const int n = k.dim();
  if (m.dim() != n)
  {
    throw std::invalid_argument("eigensolver: K and M dimension mismatch");
  }
  if (count < 1 || count > n)
  {
    throw std::invalid_argument("eigensolver: requested count must lie in [1, dim]");
  }
  const ShiftInvert op(k, m, opts.shift);
  std::mt19937_64 rng(opts.seed);
  const double inner_tol = std::min(1e-10, opts.tol * 1e-2);

  Eigen::MatrixXd locked(n, 0);
  Eigen::MatrixXd mlocked(n, 0);
  std::vector<double> thetas;
  int steps_boost = 0;
  bool done = false;
  for (int cycle = 0; cycle < opts.max_cycles && !done; ++cycle)
  {
    const int have = static_cast<int>(locked.cols());
    const int room = n - have;
    if (room <= 0)
    {
      done = true;
      break;
    }
    const int need = std::max(0, count - have);
    int steps = opts.krylov_dim > 0 ? opts.krylov_dim : std::max(2 * need + 20, 30);
    steps = std::min(room, steps + steps_boost);
    const RitzCycle rc = lanczos_cycle(op, m, locked, mlocked, steps, rng, inner_tol);

    int accepted = 0;
    if (need > 0)
    {
      for (std::size_t i = 0; i < rc.theta.size() && accepted < need && rc.converged[i]; ++i)
      {
        Eigen::VectorXd v = rc.vec[i];
        if (!m_orthonormalize(m, locked, mlocked, v))
        {
          break;
        }
        append_column(locked, v);
        append_column(mlocked, m.multiply(v));
        thetas.push_back(rc.theta[i]);
        ++accepted;
      }
    }
    else
    {
      // Verification pass: any converged Ritz value of the deflated operator
      // above the smallest locked theta is a missed eigenvalue.
      const auto min_it = std::min_element(thetas.begin(), thetas.end());
      if (!rc.theta.empty() && rc.converged[0] && rc.theta[0] > *min_it * (1.0 + 1e-12))
      {
        const auto drop = static_cast<Eigen::Index>(min_it - thetas.begin());
        Eigen::VectorXd v = rc.vec[0];
        if (m_orthonormalize(m, locked, mlocked, v))
        {
          remove_column(locked, drop);
          remove_column(mlocked, drop);
          thetas.erase(min_it);
          append_column(locked, v);
          append_column(mlocked, m.multiply(v));
          thetas.push_back(rc.theta[0]);
          accepted = 1;
        }
      }
      else if (!rc.theta.empty() && (rc.converged[0] || static_cast<int>(rc.theta.size()) == room))
      {
        done = true;
      }
    }
    steps_boost = accepted == 0 && !done ? steps_boost + 20 : 0;
  }
  if (!done)
  {
    throw NumericalError("eigensolver: Lanczos did not converge within " + std::to_string(opts.max_cycles) +
                         " cycles");
  }

  EigenPairs out;
  Eigen::MatrixXd v = locked;
  std::vector<double> ritz = rayleigh_ritz(k, m, v);
  const double floor = std::max(std::abs(opts.shift), 1e-300);
  // Block inverse iteration polishes vectors that sit at the Lanczos floor.
  for (int sweep = 0; sweep < 3; ++sweep)
  {
    double worst = 0.0;
    for (int j = 0; j < count; ++j)
    {
      const Eigen::VectorXd col = v.col(j);
      const Eigen::VectorXd mv = m.multiply(col);
      const double lam = ritz[static_cast<std::size_t>(j)];
      worst = std::max(worst, (k.multiply(col) - lam * mv).norm() / (std::max(std::abs(lam), floor) * mv.norm()));
    }
    if (worst <= opts.tol * 1e-2)
    {
      break;
    }
    v = op.apply(v);
    ritz = rayleigh_ritz(k, m, v);
  }
  out.lambdas.assign(ritz.begin(), ritz.begin() + count);
  out.vectors = v.leftCols(count);
  canonical_signs(out.vectors);
  finalize(out, k, m, opts.cluster_tol, floor);
  for (int j = 0; j < count; ++j)
  {
    if (!(out.residuals[static_cast<std::size_t>(j)] <= opts.tol))
    {
      throw NumericalError("eigensolver: residual " + std::to_string(out.residuals[static_cast<std::size_t>(j)]) +
                           " of pair " + std::to_string(j) + " exceeds tolerance");
    }
  }
  return out;
}

EigenPairs dense_eigen_oracle(const SparseSymMatrix& k, const SparseSymMatrix& m, double cluster_tol)
{
  if (k.dim() != m.dim())
  {
    throw std::invalid_argument("dense oracle: dimension mismatch");
  }
  if (k.dim() > 3000)
  {
    throw std::invalid_argument("dense oracle: dimension cap (3000) exceeded");
  }
  const Eigen::MatrixXd a = k.to_dense();
  const Eigen::MatrixXd b = m.to_dense();
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(a, b, Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
  if (es.info() != Eigen::Success)
  {
    throw NumericalError("dense oracle: M is not positive definite");
  }
  EigenPairs out;
  out.lambdas.assign(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  out.vectors = es.eigenvectors();
  canonical_signs(out.vectors);
  finalize(out, k, m, cluster_tol, 1e-300);
  return out;
}

EigenPairs apply_sign_convention(const EigenPairs& pairs, const Eigen::MatrixXd& reference,
                                 const SparseSymMatrix& m_ref)
{
  if (reference.cols() != pairs.size() || reference.rows() != pairs.vectors.rows())
  {
    throw std::invalid_argument("sign convention: reference must match the pair count and dimension");
  }
  EigenPairs out = pairs;
  out.sign_fixed.assign(static_cast<std::size_t>(out.size()), false);
  for (int j = 0; j < out.size(); ++j)
  {
    if (!out.is_simple(j))
    {
      continue;
    }
    const Eigen::VectorXd v = out.vectors.col(j);
    const Eigen::VectorXd r = reference.col(j);
    const Eigen::VectorXd mr = m_ref.multiply(r);
    const double inner = v.dot(mr);
    const double scale = std::sqrt(v.dot(m_ref.multiply(v)) * r.dot(mr));
    if (!(std::abs(inner) >= 0.1 * scale))
    {
      throw SignConventionError("sign convention: eigenvector " + std::to_string(j) +
                                " is nearly orthogonal to its reference (eigenvalue crossing?)");
    }
    if (inner < 0.0)
    {
      out.vectors.col(j) = -v;
    }
    out.sign_fixed[static_cast<std::size_t>(j)] = true;
  }
  return out;
}

}  // namespace eigentopo
