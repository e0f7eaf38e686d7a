// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "eigentopo/grid.hpp"

using namespace eigentopo;

TEST_CASE("unit square with one cell")
{
  const Mesh mesh(1, 1, 1.0, 1.0, BoundarySpec::clamped_all());
  CHECK(mesh.num_triangles() == 2);
  CHECK(mesh.num_vertices() == 4);
  for (double a : mesh.element_areas())
  {
    CHECK(a == doctest::Approx(0.5).epsilon(1e-15));
  }
  // Diagonal runs from the lower-left to the upper-right corner.
  for (const auto& t : mesh.triangles())
  {
    CHECK(std::find(t.begin(), t.end(), 0) != t.end());
    CHECK(std::find(t.begin(), t.end(), 3) != t.end());
  }
}

TEST_CASE("counts and total area")
{
  const Mesh m22(2, 2, 1.0, 1.0, BoundarySpec::cantilever());
  CHECK(m22.num_triangles() == 8);
  CHECK(m22.num_vertices() == 9);

  const Mesh m42(4, 2, 2.0, 1.0, BoundarySpec::cantilever());
  const auto& areas = m42.element_areas();
  const double total = std::accumulate(areas.begin(), areas.end(), 0.0);
  CHECK(std::abs(total - 2.0) <= 1e-12 * 2.0);
  for (double a : areas)
  {
    CHECK(a == doctest::Approx(2.0 / 16.0));
  }
  const auto& w = m42.lumped_weights();
  CHECK(std::accumulate(w.begin(), w.end(), 0.0) == doctest::Approx(2.0));
}

TEST_CASE("row-major vertex numbering")
{
  const Mesh mesh(3, 2, 3.0, 1.0, BoundarySpec::free_all());
  const auto& p = mesh.vertices()[static_cast<std::size_t>(mesh.vertex_index(2, 1))];
  CHECK(mesh.vertex_index(2, 1) == 1 * 4 + 2);
  CHECK(p.x() == doctest::Approx(2.0));
  CHECK(p.y() == doctest::Approx(0.5));
}

TEST_CASE("shape gradients reproduce linear functions")
{
  const Mesh mesh(5, 3, 1.3, 0.7, BoundarySpec::cantilever());
  for (int t = 0; t < mesh.num_triangles(); ++t)
  {
    const auto& tri = mesh.triangles()[static_cast<std::size_t>(t)];
    const auto& g = mesh.shape_gradients()[static_cast<std::size_t>(t)];
    Eigen::Matrix2d jac = Eigen::Matrix2d::Zero();
    Eigen::Vector2d sum = Eigen::Vector2d::Zero();
    for (int k = 0; k < 3; ++k)
    {
      const auto& x = mesh.vertices()[static_cast<std::size_t>(tri[static_cast<std::size_t>(k)])];
      jac += x * g.row(k);
      sum += g.row(k).transpose();
    }
    CHECK((jac - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(sum.cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(mesh.element_areas()[static_cast<std::size_t>(t)] > 0.0);
  }
}

TEST_CASE("invalid dimensions are rejected")
{
  CHECK_THROWS_AS(Mesh(0, 1, 1.0, 1.0, BoundarySpec{}), std::invalid_argument);
  CHECK_THROWS_AS(Mesh(1, -2, 1.0, 1.0, BoundarySpec{}), std::invalid_argument);
  CHECK_THROWS_AS(Mesh(1, 1, 0.0, 1.0, BoundarySpec{}), std::invalid_argument);
  CHECK_THROWS_AS(Mesh(1, 1, 1.0, -1.0, BoundarySpec{}), std::invalid_argument);
}

TEST_CASE("boundary edges carry both tag sets")
{
  const Mesh mesh(3, 2, 1.0, 1.0, BoundarySpec::cantilever());
  CHECK(mesh.boundary_edges().size() == 2u * (3 + 2));
  for (const auto& e : mesh.boundary_edges())
  {
    const bool left = e.side == Side::Left;
    CHECK((e.eigen_tag == BoundaryTag::DirichletD) == left);
    CHECK((e.load_tag == BoundaryTag::DirichletC) == left);
  }
  CHECK(mesh.has_tag(BoundaryTag::DirichletD));
  CHECK_FALSE(Mesh(1, 1, 1, 1, BoundarySpec::free_all()).has_tag(BoundaryTag::DirichletD));
}

TEST_CASE("dof maps")
{
  SUBCASE("left side clamped on a 1x1 mesh")
  {
    const Mesh mesh(1, 1, 1.0, 1.0, BoundarySpec::cantilever());
    const DofMap d = build_dof_map(mesh, BoundaryTag::DirichletD);
    CHECK(d.num_dofs() == 8);
    CHECK(d.fixed_dofs().size() == 4u);
    CHECK(d.num_free() == 4);
  }
  SUBCASE("no tagged edges")
  {
    const Mesh mesh(3, 3, 1.0, 1.0, BoundarySpec::free_all());
    const DofMap d = build_dof_map(mesh, BoundaryTag::DirichletD);
    CHECK(d.num_free() == 2 * mesh.num_vertices());
  }
  SUBCASE("all sides clamped on a 2x2 mesh")
  {
    const Mesh mesh(2, 2, 1.0, 1.0, BoundarySpec::clamped_all());
    const DofMap d = build_dof_map(mesh, BoundaryTag::DirichletD);
    CHECK(d.num_free() == 2);
    CHECK(d.free_dofs() == std::vector<int>{8, 9});
  }
  SUBCASE("expand and restrict")
  {
    const Mesh mesh(2, 2, 1.0, 1.0, BoundarySpec::cantilever());
    const DofMap d = build_dof_map(mesh, BoundaryTag::DirichletD);
    const Eigen::VectorXd r = Eigen::VectorXd::LinSpaced(d.num_free(), 1.0, 2.0);
    const Eigen::VectorXd full = d.expand(r);
    CHECK(full.size() == d.num_dofs());
    for (int f : d.fixed_dofs())
    {
      CHECK(full[f] == 0.0);
      CHECK(d.reduced(f) == -1);
    }
    CHECK((d.restrict(full) - r).norm() == 0.0);
  }
  SUBCASE("the two splittings are independent")
  {
    BoundarySpec spec;
    spec.eigen.fill(BoundaryTag::Neumann0);
    spec.eigen[static_cast<std::size_t>(Side::Bottom)] = BoundaryTag::DirichletD;
    spec.load.fill(BoundaryTag::NeumannG);
    spec.load[static_cast<std::size_t>(Side::Top)] = BoundaryTag::DirichletC;
    const Mesh mesh(2, 2, 1.0, 1.0, spec);
    const DofMap de = build_dof_map(mesh, BoundaryTag::DirichletD);
    const DofMap dl = build_dof_map(mesh, BoundaryTag::DirichletC);
    CHECK(de.reduced(0) == -1);
    CHECK(de.reduced(2 * 8) >= 0);
    CHECK(dl.reduced(0) >= 0);
    CHECK(dl.reduced(2 * 8) == -1);
  }
  SUBCASE("scalar map")
  {
    const Mesh mesh(2, 3, 1.0, 1.0, BoundarySpec::clamped_all());
    CHECK(build_scalar_dof_map(mesh).num_free() == mesh.num_vertices());
  }
}
