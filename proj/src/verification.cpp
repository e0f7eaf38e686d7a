// SPDX-License-Identifier: Apache-2.0

#include "eigentopo/verification.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>
#include <utility>

#include <Eigen/Dense>

#include "eigentopo/assembly.hpp"
#include "eigentopo/compliance.hpp"
#include "eigentopo/errors.hpp"
#include "eigentopo/optimizer.hpp"
#include "eigentopo/sensitivity.hpp"

namespace eigentopo {

MaterialSet VerifyOptions::default_verify_materials()
{
  MaterialSet ms;
  ms.n_phases = 3;
  ms.densities = {1.0, 0.6};
  ms.youngs = {1.0, 0.3};
  ms.poissons = {0.3, 0.25};
  ms.void_density_base = 1.0;
  ms.void_young_base = 1.0;
  ms.interface_eps = 0.3;
  return ms;
}

double loglog_slope(const std::vector<double>& t, const std::vector<double>& err)
{
  if (t.size() != err.size() || t.size() < 2)
  {
    throw std::invalid_argument("loglog slope: need at least two matching samples");
  }
  double sx = 0.0;
  double sy = 0.0;
  double sxx = 0.0;
  double sxy = 0.0;
  const double n = static_cast<double>(t.size());
  for (std::size_t k = 0; k < t.size(); ++k)
  {
    const double x = std::log(t[k]);
    const double y = std::log(std::max(err[k], 1e-300));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

namespace {

using Clock = std::chrono::steady_clock;

std::string fmt(const char* f, double a)
{
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// Discrete problem on a fixed mesh and dof splitting.
struct Discrete
{
  const Mesh& mesh;
  DofMap dofs;
  MaterialLaw law;

  Discrete(const Mesh& m, const MaterialSet& mats)
      : mesh(m), dofs(build_dof_map(m, BoundaryTag::DirichletD)), law(mats, CutoffParams::for_materials(mats))
  {
  }

  struct Solved
  {
    SparseSymMatrix k;
    SparseSymMatrix m;
    EigenPairs pairs;
  };

  [[nodiscard]] Solved solve(const PhaseField& phi, int count) const
  {
    Solved s{assemble_stiffness(mesh, dofs, phi, law), assemble_mass(mesh, dofs, phi, law), {}};
    s.pairs = smallest_eigenpairs(s.k, s.m, count);
    return s;
  }
};

// Nodal values mixed halfway with the barycenter: every component lies in
// [1/(2N), 1 - (N-1)/(2N)], well inside the simplex.
PhaseField random_interior_phi(int nodes, int phases, std::mt19937_64& rng)
{
  std::exponential_distribution<double> expo(1.0);
  PhaseField phi(nodes, phases);
  for (int v = 0; v < nodes; ++v)
  {
    double sum = 0.0;
    for (int i = 0; i < phases; ++i)
    {
      phi(v, i) = expo(rng);
      sum += phi(v, i);
    }
    for (int i = 0; i < phases; ++i)
    {
      phi(v, i) = 0.5 * phi(v, i) / sum + 0.5 / phases;
    }
  }
  return phi;
}

// Uniform [-1,1] entries with the nodal mean removed (stays on sum phi = 1).
PhaseField random_direction(int nodes, int phases, std::mt19937_64& rng)
{
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  PhaseField h(nodes, phases);
  for (int v = 0; v < nodes; ++v)
  {
    double sum = 0.0;
    for (int i = 0; i < phases; ++i)
    {
      h(v, i) = uni(rng);
      sum += h(v, i);
    }
    for (int i = 0; i < phases; ++i)
    {
      h(v, i) -= sum / phases;
    }
  }
  return h;
}

int first_simple(const EigenPairs& p)
{
  for (int i = 0; i < p.size(); ++i)
  {
    if (p.is_simple(i))
    {
      return i;
    }
  }
  return -1;
}

const std::vector<double>& fd_ladder()
{
  static const std::vector<double> t{1e-2, std::pow(10.0, -2.5), 1e-3, std::pow(10.0, -3.5), 1e-4};
  return t;
}

template <typename F>
CheckResult timed(int id, std::string name, F&& body)
{
  CheckResult r;
  r.id = id;
  r.name = std::move(name);
  const auto t0 = Clock::now();
  try
  {
    body(r);
  }
  catch (const std::exception& e)
  {
    r.passed = false;
    r.detail += std::string(r.detail.empty() ? "" : "; ") + "exception: " + e.what();
  }
  r.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  return r;
}

}  // namespace

CheckResult check_eigensolver(const VerifyOptions& opts)
{
  return timed(1, "eigensolver matches dense oracle", [&](CheckResult& r) {
    std::mt19937_64 rng(opts.seed + 1);
    double worst_lambda = 0.0;
    double worst_orth = 0.0;
    double worst_res = 0.0;
    for (int n : {4, 8, 12, 16})
    {
      const Mesh mesh(n, n, 1.0, 1.0, BoundarySpec::cantilever());
      const Discrete disc(mesh, opts.materials);
      const PhaseField phi = random_interior_phi(mesh.num_vertices(), opts.materials.n_phases, rng);
      const auto s = disc.solve(phi, 6);
      const EigenPairs dense = dense_eigen_oracle(s.k, s.m);
      for (int i = 0; i < 6; ++i)
      {
        const double ref = dense.lambdas[static_cast<std::size_t>(i)];
        worst_lambda = std::max(worst_lambda, std::abs(s.pairs.lambdas[static_cast<std::size_t>(i)] - ref) / ref);
        worst_res = std::max(worst_res, s.pairs.residuals[static_cast<std::size_t>(i)]);
      }
      const Eigen::MatrixXd gram = s.pairs.vectors.transpose() * s.m.multiply(s.pairs.vectors);
      worst_orth = std::max(worst_orth, (gram - Eigen::MatrixXd::Identity(6, 6)).cwiseAbs().maxCoeff());
    }
    r.passed = worst_lambda <= 1e-8 && worst_orth <= 1e-8 && worst_res <= 1e-8;
    r.detail = "max rel eig err " + fmt("%.2e", worst_lambda) + ", orthonormality " + fmt("%.2e", worst_orth) +
               ", residual " + fmt("%.2e", worst_res);
  });
}

std::vector<LaplaceRow> laplace_table(int nx, int count)
{
  if (nx < 2)
  {
    throw std::invalid_argument("laplace: need nx >= 2");
  }
  const Mesh mesh(nx, nx, 1.0, 1.0, BoundarySpec::free_all());
  const auto [k, m] = assemble_scalar_laplace(mesh, Eigen::VectorXd::Ones(mesh.num_vertices()));
  EigenOptions eo;
  eo.shift = -1.0;  // the Neumann stiffness is singular
  const EigenPairs pairs = smallest_eigenpairs(k, m, std::min(count, k.dim()), eo);

  std::vector<std::pair<int, int>> modes;
  for (int a = 0; a * a <= 4 * count; ++a)
  {
    for (int b = 0; b * b <= 4 * count; ++b)
    {
      modes.emplace_back(a, b);
    }
  }
  std::stable_sort(modes.begin(), modes.end(), [](const auto& x, const auto& y) {
    return x.first * x.first + x.second * x.second < y.first * y.first + y.second * y.second;
  });
  std::vector<LaplaceRow> rows;
  const double pi2 = std::numbers::pi * std::numbers::pi;
  for (int i = 0; i < pairs.size(); ++i)
  {
    LaplaceRow row;
    row.m = modes[static_cast<std::size_t>(i)].first;
    row.n = modes[static_cast<std::size_t>(i)].second;
    row.exact = pi2 * (row.m * row.m + row.n * row.n);
    row.observed = pairs.lambdas[static_cast<std::size_t>(i)];
    row.rel_error = row.exact == 0.0 ? std::abs(row.observed) : std::abs(row.observed - row.exact) / row.exact;
    rows.push_back(row);
  }
  return rows;
}

CheckResult check_laplace(const VerifyOptions&)
{
  return timed(2, "Neumann-Laplace analytic eigenvalues", [&](CheckResult& r) {
    const int count = 10;
    const auto coarse = laplace_table(32, count);
    const auto fine = laplace_table(64, count);
    double worst_err = 0.0;
    double min_ratio = std::numeric_limits<double>::infinity();
    double max_ratio = 0.0;
    bool ok = std::abs(fine[0].observed) <= 1e-8;
    for (std::size_t i = 1; i < fine.size(); ++i)
    {
      worst_err = std::max(worst_err, fine[i].rel_error);
      const double ratio = coarse[i].rel_error / fine[i].rel_error;
      min_ratio = std::min(min_ratio, ratio);
      max_ratio = std::max(max_ratio, ratio);
    }
    ok = ok && worst_err < 0.02 && min_ratio >= 3.5 && max_ratio <= 4.5;
    r.passed = ok;
    r.detail = "max rel err at 64x64 " + fmt("%.2e", worst_err) + ", error ratio 32/64 in [" +
               fmt("%.3f", min_ratio) + ", " + fmt("%.3f", max_ratio) + "], lambda_0 " +
               fmt("%.1e", fine[0].observed);
  });
}

CheckResult check_eigenvalue_derivative(const VerifyOptions& opts)
{
  return timed(3, "simple eigenvalue derivative Taylor slope", [&](CheckResult& r) {
    const Mesh mesh(8, 8, 1.0, 1.0, BoundarySpec::clamped_all());
    const Discrete disc(mesh, opts.materials);
    std::mt19937_64 rng(opts.seed + 3);
    const auto& ts = fd_ladder();
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    double lo_fwd = lo;
    double hi_fwd = -lo;
    int cases = 0;
    for (int a = 0; a < 5; ++a)
    {
      const PhaseField phi = random_interior_phi(mesh.num_vertices(), opts.materials.n_phases, rng);
      const auto base = disc.solve(phi, 3);
      const int idx = first_simple(base.pairs);
      if (idx < 0)
      {
        throw NumericalError("no simple eigenvalue among the first three");
      }
      for (int b = 0; b < 5; ++b)
      {
        const PhaseField h = random_direction(mesh.num_vertices(), opts.materials.n_phases, rng);
        const double dl = eigenvalue_derivative(mesh, disc.dofs, phi, disc.law, base.pairs, idx, h);
        std::vector<double> central;
        std::vector<double> forward;
        for (double t : ts)
        {
          const double lp = disc.solve(phi + t * h, idx + 2).pairs.lambdas[static_cast<std::size_t>(idx)];
          const double lm = disc.solve(phi - t * h, idx + 2).pairs.lambdas[static_cast<std::size_t>(idx)];
          central.push_back(std::abs((lp - lm) / (2.0 * t) - dl));
          forward.push_back(std::abs(lp - base.pairs.lambdas[static_cast<std::size_t>(idx)] - t * dl));
        }
        const double sc = loglog_slope(ts, central);
        const double sf = loglog_slope(ts, forward);
        lo = std::min(lo, sc);
        hi = std::max(hi, sc);
        lo_fwd = std::min(lo_fwd, sf);
        hi_fwd = std::max(hi_fwd, sf);
        ++cases;
      }
    }
    r.passed = lo >= 1.9 && hi <= 2.1 && lo_fwd >= 1.9 && hi_fwd <= 2.1;
    r.detail = std::to_string(cases) + " cases, central quotient error slope in [" + fmt("%.3f", lo) + ", " +
               fmt("%.3f", hi) + "], forward remainder slope in [" + fmt("%.3f", lo_fwd) + ", " +
               fmt("%.3f", hi_fwd) + "]";
  });
}

CheckResult check_eigenfunction_derivative(const VerifyOptions& opts)
{
  return timed(4, "eigenfunction derivative Taylor slope and normalization", [&](CheckResult& r) {
    const Mesh mesh(8, 8, 1.0, 1.0, BoundarySpec::clamped_all());
    const Discrete disc(mesh, opts.materials);
    std::mt19937_64 rng(opts.seed + 4);
    const auto& ts = fd_ladder();
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    double worst_zb = 0.0;
    int cases = 0;
    for (int a = 0; a < 5; ++a)
    {
      const PhaseField phi = random_interior_phi(mesh.num_vertices(), opts.materials.n_phases, rng);
      const auto base = disc.solve(phi, 3);
      const int idx = first_simple(base.pairs);
      if (idx < 0)
      {
        throw NumericalError("no simple eigenvalue among the first three");
      }
      const Eigen::VectorXd w = base.pairs.vectors.col(idx);
      const double lam = base.pairs.lambdas[static_cast<std::size_t>(idx)];
      for (int b = 0; b < 5; ++b)
      {
        const PhaseField h = random_direction(mesh.num_vertices(), opts.materials.n_phases, rng);
        const SparseSymMatrix kd = assemble_stiffness_dir(mesh, disc.dofs, phi, h, disc.law);
        const SparseSymMatrix md = assemble_mass_dir(mesh, disc.dofs, phi, h, disc.law);
        const double dl = eigenvalue_derivative(kd, md, lam, w);
        const Eigen::VectorXd u = eigenfunction_derivative(base.k, base.m, kd, md, lam, w, dl);
        // Normalization constraint, recomputed from u directly.
        worst_zb = std::max(worst_zb, std::abs(u.dot(base.m.multiply(w)) + 0.5 * md.bilinear(w, w)));
        std::vector<double> rem;
        for (double t : ts)
        {
          const auto s = disc.solve(phi + t * h, idx + 2);
          Eigen::VectorXd wt = s.pairs.vectors.col(idx);
          if (wt.dot(base.m.multiply(w)) < 0.0)
          {
            wt = -wt;
          }
          const Eigen::VectorXd e = wt - w - t * u;
          rem.push_back(std::sqrt(e.dot(base.m.multiply(e))));
        }
        const double sl = loglog_slope(ts, rem);
        lo = std::min(lo, sl);
        hi = std::max(hi, sl);
        ++cases;
      }
    }
    r.passed = lo >= 1.9 && hi <= 2.1 && worst_zb <= 1e-10;
    r.detail = std::to_string(cases) + " cases, remainder slope in [" + fmt("%.3f", lo) + ", " + fmt("%.3f", hi) +
               "], normalization residual " + fmt("%.2e", worst_zb);
  });
}

namespace {

// Reflection (x,y) -> (y,x) on a square mesh as a permutation of the free
// dofs; it swaps the displacement components.
std::vector<int> diagonal_reflection(const Mesh& mesh, const DofMap& dofs)
{
  std::vector<int> perm(static_cast<std::size_t>(dofs.num_free()), -1);
  for (int j = 0; j <= mesh.ny(); ++j)
  {
    for (int i = 0; i <= mesh.nx(); ++i)
    {
      for (int c = 0; c < 2; ++c)
      {
        const int a = dofs.reduced(2 * mesh.vertex_index(i, j) + c);
        if (a >= 0)
        {
          perm[static_cast<std::size_t>(a)] = dofs.reduced(2 * mesh.vertex_index(j, i) + 1 - c);
        }
      }
    }
  }
  return perm;
}

// Lowest eigenvalue in the reflection-symmetric and antisymmetric subspaces,
// by Rayleigh-Ritz on the symmetrized low eigenvectors.
std::pair<double, double> symmetry_split(const SparseSymMatrix& k, const SparseSymMatrix& m, const EigenPairs& p,
                                         const std::vector<int>& perm)
{
  const Eigen::Index n = p.vectors.rows();
  double best[2] = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  for (int sign = 0; sign < 2; ++sign)
  {
    Eigen::MatrixXd v(n, p.size());
    for (int c = 0; c < p.size(); ++c)
    {
      for (Eigen::Index a = 0; a < n; ++a)
      {
        const double pv = p.vectors(perm[static_cast<std::size_t>(a)], c);
        v(a, c) = 0.5 * (p.vectors(a, c) + (sign == 0 ? pv : -pv));
      }
    }
    // Drop columns that vanish under the symmetrization.
    Eigen::MatrixXd keep(n, 0);
    for (int c = 0; c < p.size(); ++c)
    {
      if (v.col(c).norm() > 1e-6 * p.vectors.col(c).norm())
      {
        keep.conservativeResize(n, keep.cols() + 1);
        keep.col(keep.cols() - 1) = v.col(c);
      }
    }
    if (keep.cols() == 0)
    {
      continue;
    }
    const Eigen::MatrixXd a = keep.transpose() * k.multiply(keep);
    const Eigen::MatrixXd b = keep.transpose() * m.multiply(keep);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(b, Eigen::ComputeThinU);
    // orthonormal basis of the well-conditioned part of span(keep)
    const double smax = svd.singularValues()(0);
    int rank = 0;
    while (rank < svd.singularValues().size() && svd.singularValues()(rank) > 1e-10 * smax)
    {
      ++rank;
    }
    const Eigen::MatrixXd q = svd.matrixU().leftCols(rank);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(q.transpose() * a * q, q.transpose() * b * q);
    best[sign] = es.eigenvalues()(0);
  }
  return {best[0], best[1]};
}

}  // namespace

CheckResult check_semi_derivative(const VerifyOptions& opts)
{
  return timed(5, "semi-derivative of a double first eigenvalue", [&](CheckResult& r) {
    const int n = 8;
    const Mesh mesh(n, n, 1.0, 1.0, BoundarySpec::clamped_all());
    const Discrete disc(mesh, opts.materials);
    const std::vector<int> perm = diagonal_reflection(mesh, disc.dofs);
    const int np = opts.materials.n_phases;
    // Family invariant under the mesh symmetries (diagonal reflection and
    // half turn): phi_1 = 1/2 + s (2x-1)(2y-1), void = rest.
    auto family = [&](double s) {
      PhaseField phi(mesh.num_vertices(), np);
      for (int v = 0; v < mesh.num_vertices(); ++v)
      {
        const auto& p = mesh.vertices()[static_cast<std::size_t>(v)];
        phi(v, 0) = 0.5 + s * (2.0 * p.x() - 1.0) * (2.0 * p.y() - 1.0);
        phi(v, np - 1) = 1.0 - phi(v, 0);
      }
      return phi;
    };
    auto gap = [&](double s) {
      const auto sol = disc.solve(family(s), 4);
      const auto [sym, anti] = symmetry_split(sol.k, sol.m, sol.pairs, perm);
      return std::make_pair(sym - anti, sol.pairs.lambdas[0]);
    };
    double s_lo = 0.0;
    double g_lo = gap(s_lo).first;
    double s_hi = 0.0;
    double g_hi = g_lo;
    for (int k = 1; k <= 18 && (g_hi > 0.0) == (g_lo > 0.0); ++k)
    {
      s_hi = 0.025 * k;
      g_hi = gap(s_hi).first;
      if ((g_hi > 0.0) == (g_lo > 0.0))
      {
        s_lo = s_hi;
        g_lo = g_hi;
      }
    }
    if ((g_hi > 0.0) == (g_lo > 0.0))
    {
      throw NumericalError("no symmetry-class crossing of the first eigenvalue found");
    }
    double s_mid = 0.5 * (s_lo + s_hi);
    double rel_gap = 1.0;
    for (int it = 0; it < 80; ++it)
    {
      // Regula falsi with bisection fallback.
      s_mid = s_lo - g_lo * (s_hi - s_lo) / (g_hi - g_lo);
      if (!(s_mid > s_lo && s_mid < s_hi) || it % 3 == 2)
      {
        s_mid = 0.5 * (s_lo + s_hi);
      }
      const auto [g, lam] = gap(s_mid);
      rel_gap = std::abs(g) / lam;
      if (rel_gap < 1e-12)
      {
        break;
      }
      if ((g > 0.0) == (g_lo > 0.0))
      {
        s_lo = s_mid;
        g_lo = g;
      }
      else
      {
        s_hi = s_mid;
        g_hi = g;
      }
    }
    const PhaseField phi = family(s_mid);
    const auto base = disc.solve(phi, 4);
    const auto grp = base.pairs.group_of(0);
    if (grp.second - grp.first != 2)
    {
      throw NumericalError("constructed first eigenvalue is not double (group size " +
                           std::to_string(grp.second - grp.first) + ")");
    }
    const double lam1 = base.pairs.lambdas[0];
    const Eigen::MatrixXd basis = base.pairs.vectors.leftCols(2);
    std::mt19937_64 rng(opts.seed + 5);
    double worst = 0.0;
    bool below_naive = true;
    double split = 0.0;
    for (int trial = 0; trial < 3; ++trial)
    {
      const PhaseField h = random_direction(mesh.num_vertices(), np, rng);
      const SemiDerivative sd = semi_derivative_first(mesh, disc.dofs, phi, disc.law, basis, lam1, h);
      below_naive = below_naive && sd.value <= sd.reduced(0, 0) + 1e-14 && sd.value <= sd.reduced(1, 1) + 1e-14;
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sd.reduced);
      split = std::max(split, (es.eigenvalues()(1) - es.eigenvalues()(0)) / lam1);
      for (double t : {1e-3, 1e-4})
      {
        const double lt = disc.solve(phi + t * h, 3).pairs.lambdas[0];
        worst = std::max(worst, std::abs((lt - lam1) / t - sd.value) / std::abs(lam1));
      }
    }
    r.passed = worst <= 1e-3 && below_naive;
    r.detail = "s* = " + fmt("%.6f", s_mid) + ", relative gap " + fmt("%.1e", rel_gap) +
               ", max |quotient - semi-derivative|/lambda1 " + fmt("%.2e", worst) +
               ", reduced splitting/lambda1 up to " + fmt("%.2e", split);
  });
}

CheckResult check_projection(const VerifyOptions& opts)
{
  return timed(6, "admissible projection properties", [&](CheckResult& r) {
    const Mesh mesh(12, 12, 1.0, 1.0, BoundarySpec::cantilever());
    const int np = std::max(3, opts.materials.n_phases);
    std::vector<double> mean(static_cast<std::size_t>(np), 0.6 / (np - 1));
    mean.back() = 0.4;
    const AdmissibleSet set(mesh, mean, {Box{0.0, 0.0, 0.2, 0.2}}, {Box{0.75, 0.75, 1.0, 1.0}});
    std::mt19937_64 rng(opts.seed + 6);
    std::normal_distribution<double> gauss(0.0, 0.6);
    auto raw = [&]() {
      PhaseField y(mesh.num_vertices(), np);
      for (int v = 0; v < y.n_nodes(); ++v)
      {
        for (int i = 0; i < np; ++i)
        {
          y(v, i) = 1.0 / np + gauss(rng);
        }
      }
      return y;
    };
    double idem = 0.0;
    double mean_err = 0.0;
    double sum_err = 0.0;
    bool nonneg = true;
    bool fixed_ok = true;
    double expansion = 0.0;
    auto inspect = [&](const PhaseField& p) {
      const auto m = set.mean_of(p);
      for (int i = 0; i < np; ++i)
      {
        mean_err = std::max(mean_err, std::abs(m[static_cast<std::size_t>(i)] - mean[static_cast<std::size_t>(i)]));
      }
      for (int v = 0; v < p.n_nodes(); ++v)
      {
        double s = 0.0;
        for (int i = 0; i < np; ++i)
        {
          nonneg = nonneg && p(v, i) >= 0.0;
          s += p(v, i);
        }
        sum_err = std::max(sum_err, std::abs(s - 1.0));
        const NodeRegion reg = set.regions()[static_cast<std::size_t>(v)];
        if (reg == NodeRegion::Solid)
        {
          fixed_ok = fixed_ok && p(v, np - 1) == 0.0;
        }
        else if (reg == NodeRegion::Void)
        {
          for (int i = 0; i < np; ++i)
          {
            fixed_ok = fixed_ok && p(v, i) == (i == np - 1 ? 1.0 : 0.0);
          }
        }
      }
    };
    for (int pair = 0; pair < 1000; ++pair)
    {
      const PhaseField a = raw();
      const PhaseField b = raw();
      const PhaseField pa = set.project(a);
      const PhaseField pb = set.project(b);
      if (pair < 100)
      {
        idem = std::max(idem, (set.project(pa) - pa).max_abs());
      }
      inspect(pa);
      inspect(pb);
      const PhaseField dp = pa - pb;
      const PhaseField dr = a - b;
      expansion = std::max(expansion, std::sqrt(set.inner(dp, dp)) / std::sqrt(set.inner(dr, dr)));
    }
    r.passed = idem <= 1e-12 && mean_err <= 1e-10 && nonneg && sum_err <= 1e-14 && fixed_ok &&
               expansion <= 1.0 + 1e-12;
    r.detail = "idempotence " + fmt("%.1e", idem) + ", mean error " + fmt("%.1e", mean_err) + ", simplex sum error " +
               fmt("%.1e", sum_err) + (nonneg ? ", nonnegative" : ", NEGATIVE entries") +
               (fixed_ok ? ", fixed regions exact" : ", FIXED REGIONS VIOLATED") + ", max expansion ratio " +
               fmt("%.12f", expansion);
  });
}

namespace {

struct BeamSetup
{
  Mesh mesh{32, 32, 2.0, 1.0, BoundarySpec::cantilever()};
  MaterialSet mats;
  ObjectiveSpec spec;
  std::vector<double> mean{0.4, 0.6};

  BeamSetup()
  {
    mats.n_phases = 2;
    mats.densities = {1.0};
    mats.youngs = {1.0};
    mats.poissons = {0.3};
    mats.interface_eps = 0.1;
    spec.kind = PsiKind::NegMinFirst;
    spec.indices = {1};
    spec.weights = {1.0};
    spec.gamma = 1e-3;
    spec.eps = 0.1;
  }

  [[nodiscard]] MaterialLaw law() const { return MaterialLaw(mats, CutoffParams::for_materials(mats)); }

  [[nodiscard]] PhaseField initial(const AdmissibleSet& set, std::uint64_t seed) const
  {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(-0.1, 0.1);
    PhaseField phi(mesh.num_vertices(), 2);
    for (int v = 0; v < mesh.num_vertices(); ++v)
    {
      phi(v, 0) = mean[0] + uni(rng);
      phi(v, 1) = 1.0 - phi(v, 0);
    }
    return set.project(phi);
  }
};

}  // namespace

CheckResult check_optimization(const VerifyOptions& opts)
{
  return timed(7, "lambda_1 maximization descent and VI", [&](CheckResult& r) {
    const BeamSetup setup;
    const EigenProblem prob(setup.mesh, setup.law(), setup.spec);
    const AdmissibleSet set(setup.mesh, setup.mean);
    OptOptions oo;
    oo.max_iter = 3000;
    oo.conv_tol = 1e-6;
    oo.seed = opts.seed + 7;
    const OptResult res = projected_gradient_solve(prob, set, setup.initial(set, opts.seed + 70), oo);
    bool monotone = true;
    bool lambda_up = true;
    for (std::size_t k = 1; k < res.history.size(); ++k)
    {
      monotone = monotone && res.history[k].J <= res.history[k - 1].J;
      lambda_up = lambda_up && res.history[k].lambdas[0] >= res.history[k - 1].lambdas[0] - 1e-12;
    }
    const double threshold = -1e-6 * (1.0 + std::abs(res.final_eval.J));
    r.passed = monotone && res.termination != Termination::EigenvalueDegenerated && res.vi_residual >= threshold &&
               set.contains(res.phi);
    r.detail = to_string(res.termination) + " after " + std::to_string(res.history.size() - 1) +
               " iterations, J " + fmt("%.9g", res.history.front().J) + " -> " + fmt("%.9g", res.final_eval.J) +
               ", lambda_1 " + fmt("%.6g", res.final_eval.lambdas[0]) + (monotone ? ", J monotone" : ", J NOT monotone") +
               (lambda_up ? ", lambda_1 non-decreasing" : ", lambda_1 decreased at some step") + ", VI residual " +
               fmt("%.3e", res.vi_residual) + " (threshold " + fmt("%.2e", threshold) + ")";
  });
}

CheckResult check_combined(const VerifyOptions& opts)
{
  return timed(8, "combined problem adjoint, gradient, reduction", [&](CheckResult& r) {
    const Mesh mesh(8, 8, 2.0, 1.0, BoundarySpec::cantilever());
    const int np = opts.materials.n_phases;
    const MaterialLaw law(opts.materials, CutoffParams::for_materials(opts.materials));
    std::mt19937_64 rng(opts.seed + 8);
    LoadCase load = LoadCase::zeros(mesh);
    for (int v = 0; v < mesh.num_vertices(); ++v)
    {
      const auto& p = mesh.vertices()[static_cast<std::size_t>(v)];
      load.body_force(2 * v + 1) = -0.5;
      if (p.x() > 2.0 - 1e-12)
      {
        load.traction(2 * v + 1) = -1.0;
      }
      load.target(2 * v + 1) = -0.2 * p.x();
      load.weight(v) = p.x() > 1.0 ? 1.0 : 0.0;
    }
    const PhaseField phi = random_interior_phi(mesh.num_vertices(), np, rng);
    const DofMap cdofs = build_dof_map(mesh, BoundaryTag::DirichletC);

    // beta = 0: the adjoint is alpha times the state.
    LoadCase l0 = load;
    l0.alpha = 1.7;
    l0.beta = 0.0;
    const Eigen::VectorXd u = solve_state(mesh, cdofs, phi, law, l0);
    const Eigen::VectorXd p = solve_adjoint(mesh, cdofs, phi, law, u, l0);
    const double adj_err = (p - l0.alpha * u).norm() / (l0.alpha * u.norm());

    // Full gradient FD slope with all terms active.
    LoadCase lf = load;
    lf.alpha = 1.0;
    lf.beta = 2.0;
    lf.nu = 0.75;
    ObjectiveSpec spec;
    spec.kind = PsiKind::InverseSum;
    spec.indices = {1, 2};
    spec.weights = {0.5, 0.25};
    spec.gamma = 1e-2;
    spec.eps = opts.materials.interface_eps;
    const CombinedProblem prob(mesh, law, spec, lf);
    const Evaluation ev = prob.evaluate(phi);
    const PhaseField g = prob.gradient(phi, ev);
    const auto& ts = fd_ladder();
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (int dir = 0; dir < 5; ++dir)
    {
      const PhaseField h = random_direction(mesh.num_vertices(), np, rng);
      const double dj = dot(g, h);
      std::vector<double> rem;
      for (double t : ts)
      {
        rem.push_back(std::abs(prob.evaluate(phi + t * h).J - ev.J - t * dj));
      }
      const double sl = loglog_slope(ts, rem);
      lo = std::min(lo, sl);
      hi = std::max(hi, sl);
    }

    // alpha = beta = 0 reproduces the eigenvalue pipeline of the beam run.
    const BeamSetup setup;
    LoadCase lz = LoadCase::zeros(setup.mesh);
    lz.alpha = 0.0;
    lz.beta = 0.0;
    const EigenProblem eig(setup.mesh, setup.law(), setup.spec);
    const CombinedProblem comb(setup.mesh, setup.law(), setup.spec, lz);
    const AdmissibleSet set(setup.mesh, setup.mean);
    const PhaseField phi0 = setup.initial(set, opts.seed + 70);
    const Evaluation e1 = eig.evaluate(phi0);
    const Evaluation e2 = comb.evaluate(phi0);
    const PhaseField g1 = eig.gradient(phi0, e1);
    const PhaseField g2 = comb.gradient(phi0, e2);
    double red = std::abs(e1.J - e2.J) + (g1 - g2).max_abs();
    OptOptions oo;
    oo.max_iter = 5;
    oo.final_probes = 4;
    const OptResult r1 = projected_gradient_solve(eig, set, phi0, oo);
    const OptResult r2 = projected_gradient_solve(comb, set, phi0, oo);
    bool same_len = r1.history.size() == r2.history.size();
    for (std::size_t k = 0; same_len && k < r1.history.size(); ++k)
    {
      red = std::max(red, std::abs(r1.history[k].J - r2.history[k].J));
    }
    red = std::max(red, (r1.phi - r2.phi).max_abs());

    r.passed = adj_err <= 1e-10 && lo >= 1.9 && hi <= 2.1 && same_len && red <= 1e-12;
    r.detail = "adjoint vs alpha*state " + fmt("%.1e", adj_err) + ", gradient FD slope in [" + fmt("%.3f", lo) + ", " +
               fmt("%.3f", hi) + "] (Taylor remainder), alpha=beta=0 deviation " + fmt("%.1e", red);
  });
}

CheckResult check_continuity(const VerifyOptions& opts)
{
  return timed(9, "eigenvalue Lipschitz bound and eigenvector continuity", [&](CheckResult& r) {
    const Mesh mesh(10, 10, 1.0, 1.0, BoundarySpec::cantilever());
    const Discrete disc(mesh, opts.materials);
    std::mt19937_64 rng(opts.seed + 9);
    const int np = opts.materials.n_phases;
    const PhaseField phi = random_interior_phi(mesh.num_vertices(), np, rng);
    const PhaseField h = random_direction(mesh.num_vertices(), np, rng);
    const auto base = disc.solve(phi, 5);
    const std::vector<double> ts{1e-1, 1e-2, 1e-3, 1e-4};
    std::vector<std::vector<double>> dl(ts.size(), std::vector<double>(4));
    std::vector<std::vector<double>> dv(ts.size(), std::vector<double>(4));
    for (std::size_t k = 0; k < ts.size(); ++k)
    {
      const auto s = disc.solve(phi + ts[k] * h, 5);
      const Eigen::MatrixXd ref = base.pairs.vectors;
      const EigenPairs fixed = apply_sign_convention(s.pairs, ref, base.m);
      for (int i = 0; i < 4; ++i)
      {
        dl[k][static_cast<std::size_t>(i)] =
            std::abs(fixed.lambdas[static_cast<std::size_t>(i)] - base.pairs.lambdas[static_cast<std::size_t>(i)]);
        const Eigen::VectorXd e = fixed.vectors.col(i) - base.pairs.vectors.col(i);
        dv[k][static_cast<std::size_t>(i)] = std::sqrt(e.dot(base.m.multiply(e)));
      }
    }
    // C fitted on the coarse steps; the finer steps must respect it.
    double c = 0.0;
    for (std::size_t k = 0; k < 2; ++k)
    {
      for (double d : dl[k])
      {
        c = std::max(c, d / ts[k]);
      }
    }
    bool lipschitz = true;
    double worst_ratio = 0.0;
    for (std::size_t k = 0; k < ts.size(); ++k)
    {
      for (double d : dl[k])
      {
        worst_ratio = std::max(worst_ratio, d / (c * ts[k]));
        lipschitz = lipschitz && d <= 1.5 * c * ts[k];
      }
    }
    bool monotone = true;
    for (int i = 0; i < 4; ++i)
    {
      for (std::size_t k = 1; k < ts.size(); ++k)
      {
        monotone = monotone && dv[k][static_cast<std::size_t>(i)] < dv[k - 1][static_cast<std::size_t>(i)];
      }
    }
    bool simple = true;
    for (int i = 0; i < 4; ++i)
    {
      simple = simple && base.pairs.is_simple(i);
    }
    r.passed = lipschitz && monotone && simple;
    r.detail = "fitted C " + fmt("%.4g", c) + ", max |dlambda|/(C t) " + fmt("%.3f", worst_ratio) +
               ", eigenvector distance at t=1e-4 " + fmt("%.2e", *std::max_element(dv.back().begin(), dv.back().end())) +
               (monotone ? ", monotone in t" : ", NOT monotone in t") + (simple ? "" : ", clustered base eigenvalue");
  });
}

std::vector<CheckResult> run_checks(const std::vector<int>& ids, const VerifyOptions& opts)
{
  std::vector<CheckResult> out;
  for (int id : ids)
  {
    switch (id)
    {
      case 1:
        out.push_back(check_eigensolver(opts));
        break;
      case 2:
        out.push_back(check_laplace(opts));
        break;
      case 3:
        out.push_back(check_eigenvalue_derivative(opts));
        break;
      case 4:
        out.push_back(check_eigenfunction_derivative(opts));
        break;
      case 5:
        out.push_back(check_semi_derivative(opts));
        break;
      case 6:
        out.push_back(check_projection(opts));
        break;
      case 7:
        out.push_back(check_optimization(opts));
        break;
      case 8:
        out.push_back(check_combined(opts));
        break;
      case 9:
        out.push_back(check_continuity(opts));
        break;
      default:
        throw std::invalid_argument("unknown check id " + std::to_string(id));
    }
  }
  return out;
}

}  // namespace eigentopo
