// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <omp.h>

#include <Eigen/Dense>
#include <numbers>
#include <random>

#include "eigentopo/assembly.hpp"
#include "eigentopo/eigensolver.hpp"
#include "eigentopo/sensitivity.hpp"
#include "test_util.hpp"

using namespace eigentopo;

namespace {

// Dense reference assembly: B-matrix form with the plane-strain D matrix,
// coefficients from the centroid value of phi, all dofs (no elimination).
Eigen::MatrixXd dense_stiffness(const Mesh& mesh, const PhaseField& phi, const MaterialSet& ms, double delta)
{
  const int n = 2 * mesh.num_vertices();
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n, n);
  const CutoffParams cp{delta};
  for (int t = 0; t < mesh.num_triangles(); ++t)
  {
    const auto& tri = mesh.triangles()[static_cast<std::size_t>(t)];
    const auto& g = mesh.shape_gradients()[static_cast<std::size_t>(t)];
    double lam = 0.0;
    double mu = 0.0;
    for (int i = 0; i < ms.n_phases; ++i)
    {
      double c = 0.0;
      for (int v : tri)
      {
        c += phi(v, i) / 3.0;
      }
      const Lame l = ms.scaled_lame(i);
      lam += cutoff(c, cp) * l.lambda;
      mu += cutoff(c, cp) * l.mu;
    }
    Eigen::Matrix3d d;
    d << lam + 2 * mu, lam, 0, lam, lam + 2 * mu, 0, 0, 0, mu;
    Eigen::Matrix<double, 3, 6> b = Eigen::Matrix<double, 3, 6>::Zero();
    for (int a = 0; a < 3; ++a)
    {
      b(0, 2 * a) = g(a, 0);
      b(1, 2 * a + 1) = g(a, 1);
      b(2, 2 * a) = g(a, 1);
      b(2, 2 * a + 1) = g(a, 0);
    }
    const Eigen::Matrix<double, 6, 6> ke = b.transpose() * d * b * mesh.element_areas()[static_cast<std::size_t>(t)];
    for (int a = 0; a < 6; ++a)
    {
      for (int c = 0; c < 6; ++c)
      {
        k(2 * tri[static_cast<std::size_t>(a / 2)] + a % 2, 2 * tri[static_cast<std::size_t>(c / 2)] + c % 2) += ke(a, c);
      }
    }
  }
  return k;
}

Eigen::MatrixXd restrict_dense(const Eigen::MatrixXd& full, const DofMap& dofs)
{
  const auto& f = dofs.free_dofs();
  Eigen::MatrixXd r(dofs.num_free(), dofs.num_free());
  for (int i = 0; i < dofs.num_free(); ++i)
  {
    for (int j = 0; j < dofs.num_free(); ++j)
    {
      r(i, j) = full(f[static_cast<std::size_t>(i)], f[static_cast<std::size_t>(j)]);
    }
  }
  return r;
}

bool bitwise_equal(const SparseSymMatrix& a, const SparseSymMatrix& b)
{
  const auto& x = a.lower();
  const auto& y = b.lower();
  if (x.nonZeros() != y.nonZeros() || x.rows() != y.rows())
  {
    return false;
  }
  for (Eigen::Index k = 0; k < x.nonZeros(); ++k)
  {
    if (x.valuePtr()[k] != y.valuePtr()[k] || x.innerIndexPtr()[k] != y.innerIndexPtr()[k])
    {
      return false;
    }
  }
  for (Eigen::Index c = 0; c <= x.cols(); ++c)
  {
    if (x.outerIndexPtr()[c] != y.outerIndexPtr()[c])
    {
      return false;
    }
  }
  return true;
}

bool bitwise_equal(const PhaseField& a, const PhaseField& b)
{
  if (!a.same_shape(b))
  {
    return false;
  }
  for (std::size_t k = 0; k < a.size(); ++k)
  {
    if (a.values()[k] != b.values()[k])
    {
      return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("stiffness against a dense reference assembly")
{
  const MaterialSet ms = testutil::three_phase();
  const MaterialLaw law(ms);
  std::mt19937_64 rng(1);

  SUBCASE("one cell, all dofs free")
  {
    const Mesh mesh(1, 1, 1.0, 1.0, BoundarySpec::free_all());
    const DofMap dofs = build_dof_map(mesh, BoundaryTag::DirichletD);
    const PhaseField phi = testutil::interior_phi(mesh.num_vertices(), 3, rng);
    const Eigen::MatrixXd ref = dense_stiffness(mesh, phi, ms, law.cutoff_params().delta);
    const Eigen::MatrixXd k = assemble_stiffness(mesh, dofs, phi, law).to_dense();
    CHECK((k - ref).cwiseAbs().maxCoeff() <= 1e-12);
  }
  SUBCASE("uniform single material on a clamped mesh")
  {
    const Mesh mesh(4, 3, 2.0, 1.0, BoundarySpec::cantilever());
    const DofMap dofs = build_dof_map(mesh, BoundaryTag::DirichletD);
    const std::array<double, 3> e1{1.0, 0.0, 0.0};
    const PhaseField phi = PhaseField::uniform(mesh.num_vertices(), e1);
    MaterialSet only = testutil::two_phase();
    const Eigen::MatrixXd ref = restrict_dense(dense_stiffness(mesh, PhaseField::uniform(mesh.num_vertices(), std::array<double, 2>{1.0, 0.0}), only, 0.05), dofs);
    const Eigen::MatrixXd k = assemble_stiffness(mesh, dofs, phi, law).to_dense();
    CHECK((k - ref).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("rigid motions lie in the kernel of the free stiffness")
{
  const MaterialLaw law(testutil::three_phase());
  const Mesh mesh(5, 4, 1.5, 1.0, BoundarySpec::free_all());
  const DofMap dofs = build_dof_map(mesh, BoundaryTag::DirichletD);
  std::mt19937_64 rng(2);
  const PhaseField phi = testutil::interior_phi(mesh.num_vertices(), 3, rng);
  const SparseSymMatrix k = assemble_stiffness(mesh, dofs, phi, law);
  const int nv = mesh.num_vertices();
  Eigen::VectorXd tx = Eigen::VectorXd::Zero(2 * nv);
  Eigen::VectorXd ty = Eigen::VectorXd::Zero(2 * nv);
  Eigen::VectorXd rot = Eigen::VectorXd::Zero(2 * nv);
  for (int v = 0; v < nv; ++v)
  {
    const auto& p = mesh.vertices()[static_cast<std::size_t>(v)];
    tx[2 * v] = 1.0;
    ty[2 * v + 1] = 1.0;
    rot[2 * v] = -p.y();
    rot[2 * v + 1] = p.x();
  }
  CHECK(k.multiply(tx).norm() <= 1e-12);
  CHECK(k.multiply(ty).norm() <= 1e-12);
  CHECK(k.multiply(rot).norm() <= 1e-12);
}

TEST_CASE("stored symmetry and positive definiteness after elimination")
{
  const MaterialLaw law(testutil::three_phase());
  const Mesh mesh(6, 4, 2.0, 1.0, BoundarySpec::cantilever());
  const DofMap dofs = build_dof_map(mesh, BoundaryTag::DirichletD);
  std::mt19937_64 rng(3);
  const PhaseField phi = testutil::interior_phi(mesh.num_vertices(), 3, rng);
  const Eigen::MatrixXd k = assemble_stiffness(mesh, dofs, phi, law).to_dense();
  const Eigen::MatrixXd m = assemble_mass(mesh, dofs, phi, law).to_dense();
  CHECK((k - k.transpose()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((m - m.transpose()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(Eigen::LLT<Eigen::MatrixXd>(k).info() == Eigen::Success);
  CHECK(Eigen::LLT<Eigen::MatrixXd>(m).info() == Eigen::Success);

  const Mesh small(2, 2, 1.0, 1.0, BoundarySpec::cantilever());
  const DofMap sd = build_dof_map(small, BoundaryTag::DirichletD);
  const PhaseField sp = testutil::interior_phi(small.num_vertices(), 3, rng);
  const Eigen::MatrixXd sm = assemble_mass(small, sd, sp, law).to_dense();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sm);
  CHECK(es.eigenvalues().minCoeff() > 0.0);
}

TEST_CASE("mass matrix totals and scaling")
{
  const Mesh mesh(4, 5, 2.0, 1.5, BoundarySpec::free_all());
  const DofMap dofs = build_dof_map(mesh, BoundaryTag::DirichletD);
  MaterialSet ms = testutil::two_phase();
  const MaterialLaw law(ms);
  const PhaseField solid = PhaseField::uniform(mesh.num_vertices(), std::array<double, 2>{1.0, 0.0});
  const Eigen::MatrixXd m = assemble_mass(mesh, dofs, solid, law).to_dense();
  double comp0 = 0.0;
  double comp1 = 0.0;
  for (int i = 0; i < m.rows(); ++i)
  {
    for (int j = 0; j < m.cols(); ++j)
    {
      CHECK(((i % 2 != j % 2) ? m(i, j) == 0.0 : true));
      (i % 2 == 0 ? comp0 : comp1) += m(i, j);
    }
  }
  CHECK(comp0 == doctest::Approx(mesh.area()).epsilon(1e-12));
  CHECK(comp1 == doctest::Approx(mesh.area()).epsilon(1e-12));

  MaterialSet doubled = ms;
  doubled.densities = {2.0};
  doubled.void_density_base = 2.0;
  std::mt19937_64 rng(4);
  const PhaseField phi = testutil::interior_phi(mesh.num_vertices(), 2, rng);
  const CutoffParams cp{0.05};
  const Eigen::MatrixXd m1 = assemble_mass(mesh, dofs, phi, MaterialLaw(ms, cp)).to_dense();
  const Eigen::MatrixXd m2 = assemble_mass(mesh, dofs, phi, MaterialLaw(doubled, cp)).to_dense();
  CHECK((m2 - 2.0 * m1).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("directional forms")
{
  const MaterialLaw law(testutil::three_phase());
  const double delta = law.cutoff_params().delta;
  const Mesh mesh(4, 4, 1.0, 1.0, BoundarySpec::cantilever());
  const DofMap dofs = build_dof_map(mesh, BoundaryTag::DirichletD);
  const int nv = mesh.num_vertices();
  std::mt19937_64 rng(5);
  // Centroid values sit inside the quadratic blend bands of the cutoff, so
  // the forms are genuinely nonlinear in phi.
  PhaseField phi = PhaseField::uniform(nv, std::array<double, 3>{-delta, 1.0 + delta, 0.2});
  phi += 0.1 * delta * testutil::random_field(nv, 3, rng);
  const PhaseField h1 = testutil::random_field(nv, 3, rng);
  const PhaseField h2 = testutil::random_field(nv, 3, rng);

  SUBCASE("zero direction")
  {
    const PhaseField zero(nv, 3);
    CHECK(assemble_stiffness_dir(mesh, dofs, phi, zero, law).to_dense().cwiseAbs().maxCoeff() == 0.0);
    CHECK(assemble_mass_dir(mesh, dofs, phi, zero, law).to_dense().cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("linearity in h")
  {
    const PhaseField comb = 0.7 * h1 - 1.3 * h2;
    const Eigen::MatrixXd kc = assemble_stiffness_dir(mesh, dofs, phi, comb, law).to_dense();
    const Eigen::MatrixXd kl = 0.7 * assemble_stiffness_dir(mesh, dofs, phi, h1, law).to_dense() -
                               1.3 * assemble_stiffness_dir(mesh, dofs, phi, h2, law).to_dense();
    CHECK((kc - kl).cwiseAbs().maxCoeff() <= 1e-12);
    const Eigen::MatrixXd mc = assemble_mass_dir(mesh, dofs, phi, comb, law).to_dense();
    const Eigen::MatrixXd ml = 0.7 * assemble_mass_dir(mesh, dofs, phi, h1, law).to_dense() -
                               1.3 * assemble_mass_dir(mesh, dofs, phi, h2, law).to_dense();
    CHECK((mc - ml).cwiseAbs().maxCoeff() <= 1e-12);
  }
  SUBCASE("Taylor remainder is second order")
  {
    const Eigen::MatrixXd k0 = assemble_stiffness(mesh, dofs, phi, law).to_dense();
    const Eigen::MatrixXd kd = assemble_stiffness_dir(mesh, dofs, phi, h1, law).to_dense();
    const Eigen::MatrixXd m0 = assemble_mass(mesh, dofs, phi, law).to_dense();
    const Eigen::MatrixXd md = assemble_mass_dir(mesh, dofs, phi, h1, law).to_dense();
    std::vector<double> ts;
    std::vector<double> ek;
    std::vector<double> em;
    for (double t : {0.1 * delta, 0.03 * delta, 0.01 * delta})
    {
      const PhaseField pt = phi + t * h1;
      ts.push_back(t);
      ek.push_back((assemble_stiffness(mesh, dofs, pt, law).to_dense() - k0 - t * kd).norm());
      em.push_back((assemble_mass(mesh, dofs, pt, law).to_dense() - m0 - t * md).norm());
    }
    CHECK(testutil::loglog_slope(ts, ek) == doctest::Approx(2.0).epsilon(0.05));
    CHECK(testutil::loglog_slope(ts, em) == doctest::Approx(2.0).epsilon(0.05));
  }
  SUBCASE("a single-vertex direction stays in the vertex star")
  {
    const int v = mesh.vertex_index(2, 2);
    PhaseField h(nv, 3);
    h(v, 0) = 1.0;
    h(v, 2) = -1.0;
    const Eigen::MatrixXd kd = assemble_stiffness_dir(mesh, dofs, phi, h, law).to_dense();
    std::vector<bool> in_star(static_cast<std::size_t>(nv), false);
    for (const auto& tri : mesh.triangles())
    {
      if (std::find(tri.begin(), tri.end(), v) != tri.end())
      {
        for (int w : tri)
        {
          in_star[static_cast<std::size_t>(w)] = true;
        }
      }
    }
    const auto& f = dofs.free_dofs();
    for (int i = 0; i < kd.rows(); ++i)
    {
      for (int j = 0; j < kd.cols(); ++j)
      {
        if (kd(i, j) != 0.0)
        {
          CHECK(in_star[static_cast<std::size_t>(f[static_cast<std::size_t>(i)] / 2)]);
          CHECK(in_star[static_cast<std::size_t>(f[static_cast<std::size_t>(j)] / 2)]);
        }
      }
    }
  }
}

TEST_CASE("load vector")
{
  const MaterialLaw law(testutil::two_phase());
  const Mesh mesh(3, 2, 3.0, 1.0, BoundarySpec::cantilever());
  const DofMap dofs = build_dof_map(mesh, BoundaryTag::DirichletC);
  const int nv = mesh.num_vertices();
  std::mt19937_64 rng(6);
  const PhaseField phi = testutil::interior_phi(nv, 2, rng);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(2 * nv);
  CHECK(assemble_load(mesh, dofs, phi, zero, zero).norm() == 0.0);

  Eigen::VectorXd f = Eigen::VectorXd::Ones(2 * nv);
  const PhaseField voids = PhaseField::uniform(nv, std::array<double, 2>{0.0, 1.0});
  CHECK(assemble_load(mesh, dofs, voids, f, zero).norm() == 0.0);
  // Solid everywhere: the body load integrates to |Omega| per component.
  const PhaseField solid = PhaseField::uniform(nv, std::array<double, 2>{1.0, 0.0});
  const Mesh free_mesh(3, 2, 3.0, 1.0, BoundarySpec::free_all());
  const DofMap all = build_dof_map(free_mesh, BoundaryTag::DirichletC);
  CHECK(assemble_load(free_mesh, all, solid, f, zero).sum() == doctest::Approx(2.0 * 3.0));

  // Constant traction on the right edge only (other NeumannG edges get g = 0).
  Eigen::VectorXd g = Eigen::VectorXd::Zero(2 * nv);
  for (int j = 0; j <= 2; ++j)
  {
    g[2 * mesh.vertex_index(3, j) + 1] = -2.0;
  }
  const Eigen::VectorXd b = dofs.expand(assemble_load(mesh, dofs, phi, zero, g));
  const double len = 0.5;
  // Corner vertices also close a loaded bottom/top edge of length 1.
  CHECK(b[2 * mesh.vertex_index(3, 0) + 1] == doctest::Approx(-2.0 * len / 2 - 2.0 * 1.0 / 2));
  CHECK(b[2 * mesh.vertex_index(3, 1) + 1] == doctest::Approx(-2.0 * len));
  CHECK(b[2 * mesh.vertex_index(3, 2) + 1] == doctest::Approx(-2.0 * len / 2 - 2.0 * 1.0 / 2));
  CHECK(b[2 * mesh.vertex_index(2, 0) + 1] == 0.0);
  CHECK(b[2 * mesh.vertex_index(1, 1) + 1] == 0.0);
  CHECK(b.sum() == doctest::Approx(-2.0 * (1.0 + 1.0)));
}

TEST_CASE("scalar Neumann Laplacian")
{
  const Mesh mesh(24, 24, 1.0, 1.0, BoundarySpec::free_all());
  const auto [k, m] = assemble_scalar_laplace(mesh, Eigen::VectorXd::Ones(mesh.num_vertices()));
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(mesh.num_vertices());
  CHECK(k.multiply(ones).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(m.bilinear(ones, ones) == doctest::Approx(1.0));
  EigenOptions eo;
  eo.shift = -1.0;
  const EigenPairs p = smallest_eigenpairs(k, m, 3, eo);
  CHECK(std::abs(p.lambdas[0]) <= 1e-9);
  const Eigen::VectorXd v0 = p.vectors.col(0);
  CHECK((v0 - v0.mean() * ones).cwiseAbs().maxCoeff() <= 1e-8);
  const double pi2 = std::numbers::pi * std::numbers::pi;
  CHECK(std::abs(p.lambdas[1] - pi2) / pi2 < 0.01);
  CHECK(std::abs(p.lambdas[2] - pi2) / pi2 < 0.01);
}

TEST_CASE("eigenvalue gradient field")
{
  const MaterialLaw law(testutil::three_phase());
  const Mesh mesh(6, 6, 1.0, 1.0, BoundarySpec::cantilever());
  const DofMap dofs = build_dof_map(mesh, BoundaryTag::DirichletD);
  const int nv = mesh.num_vertices();
  std::mt19937_64 rng(7);
  const PhaseField phi = testutil::interior_phi(nv, 3, rng);
  const SparseSymMatrix k = assemble_stiffness(mesh, dofs, phi, law);
  const SparseSymMatrix m = assemble_mass(mesh, dofs, phi, law);
  const EigenPairs pairs = smallest_eigenpairs(k, m, 2);
  const Eigen::VectorXd w = pairs.vectors.col(0);
  const PhaseField g = eigen_gradient_field(mesh, dofs, phi, law, w, pairs.lambdas[0]);
  CHECK(dot(g, PhaseField(nv, 3)) == 0.0);
  for (int r = 0; r < 20; ++r)
  {
    const PhaseField h = testutil::random_field(nv, 3, rng);
    const double direct = eigenvalue_derivative(assemble_stiffness_dir(mesh, dofs, phi, h, law),
                                                assemble_mass_dir(mesh, dofs, phi, h, law), pairs.lambdas[0], w);
    CHECK(std::abs(dot(g, h) - direct) <= 1e-12 * (1.0 + std::abs(direct)));
  }
  CHECK_THROWS_AS((void)eigen_gradient_field(mesh, dofs, phi, law, 2.0 * w, pairs.lambdas[0]), std::invalid_argument);
}

TEST_CASE("serial and OpenMP kernels agree bitwise")
{
  omp_set_num_threads(4);
  const MaterialLaw law(testutil::three_phase());
  const Mesh mesh(17, 11, 2.0, 1.0, BoundarySpec::cantilever());
  const DofMap dofs = build_dof_map(mesh, BoundaryTag::DirichletD);
  const int nv = mesh.num_vertices();
  std::mt19937_64 rng(8);
  const PhaseField phi = testutil::interior_phi(nv, 3, rng);
  const PhaseField h = testutil::random_field(nv, 3, rng);
  CHECK(bitwise_equal(assemble_stiffness(mesh, dofs, phi, law, Backend::Serial),
                      assemble_stiffness(mesh, dofs, phi, law, Backend::OpenMP)));
  CHECK(bitwise_equal(assemble_mass(mesh, dofs, phi, law, Backend::Serial),
                      assemble_mass(mesh, dofs, phi, law, Backend::OpenMP)));
  CHECK(bitwise_equal(assemble_stiffness_dir(mesh, dofs, phi, h, law, Backend::Serial),
                      assemble_stiffness_dir(mesh, dofs, phi, h, law, Backend::OpenMP)));
  CHECK(bitwise_equal(assemble_mass_dir(mesh, dofs, phi, h, law, Backend::Serial),
                      assemble_mass_dir(mesh, dofs, phi, h, law, Backend::OpenMP)));
  Eigen::VectorXd a = Eigen::VectorXd::Random(2 * nv);
  Eigen::VectorXd b = Eigen::VectorXd::Random(2 * nv);
  CHECK(bitwise_equal(kernels::stiffness_pair_field(mesh, phi, law, a, b, Backend::Serial),
                      kernels::stiffness_pair_field(mesh, phi, law, a, b, Backend::OpenMP)));
  CHECK(bitwise_equal(kernels::mass_pair_field(mesh, phi, law, a, b, Backend::Serial),
                      kernels::mass_pair_field(mesh, phi, law, a, b, Backend::OpenMP)));
  omp_set_num_threads(1);
}

TEST_CASE("phase dimension mismatch is rejected")
{
  const MaterialLaw law(testutil::three_phase());
  const Mesh mesh(2, 2, 1.0, 1.0, BoundarySpec::cantilever());
  const DofMap dofs = build_dof_map(mesh, BoundaryTag::DirichletD);
  CHECK_THROWS_AS((void)assemble_stiffness(mesh, dofs, PhaseField(mesh.num_vertices(), 2), law), std::invalid_argument);
  CHECK_THROWS_AS((void)assemble_mass(mesh, dofs, PhaseField(5, 3), law), std::invalid_argument);
}
