// SPDX-License-Identifier: Apache-2.0

#include "eigentopo/grid.hpp"

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace eigentopo {

std::string_view to_string(BoundaryTag tag)
{
  switch (tag)
  {
    case BoundaryTag::DirichletD:
      return "DIRICHLET_D";
    case BoundaryTag::Neumann0:
      return "NEUMANN_0";
    case BoundaryTag::DirichletC:
      return "DIRICHLET_C";
    case BoundaryTag::NeumannG:
      return "NEUMANN_G";
  }
  return "?";
}

std::string_view to_string(Side side)
{
  switch (side)
  {
    case Side::Bottom:
      return "bottom";
    case Side::Right:
      return "right";
    case Side::Top:
      return "top";
    case Side::Left:
      return "left";
  }
  return "?";
}

BoundarySpec BoundarySpec::cantilever()
{
  return BoundarySpec{};
}

BoundarySpec BoundarySpec::clamped_all()
{
  BoundarySpec spec;
  spec.eigen.fill(BoundaryTag::DirichletD);
  spec.load.fill(BoundaryTag::DirichletC);
  return spec;
}

BoundarySpec BoundarySpec::free_all()
{
  BoundarySpec spec;
  spec.eigen.fill(BoundaryTag::Neumann0);
  spec.load.fill(BoundaryTag::NeumannG);
  return spec;
}

Mesh::Mesh(int nx, int ny, double lx, double ly, const BoundarySpec& spec)
    : nx_(nx), ny_(ny), lx_(lx), ly_(ly), spec_(spec)
{
  if (nx < 1 || ny < 1)
  {
    throw std::invalid_argument("mesh: nx and ny must be >= 1");
  }
  if (!(lx > 0.0) || !(ly > 0.0))
  {
    throw std::invalid_argument("mesh: Lx and Ly must be positive");
  }
  for (auto tag : spec.eigen)
  {
    if (tag != BoundaryTag::DirichletD && tag != BoundaryTag::Neumann0)
    {
      throw std::invalid_argument("mesh: eigen splitting accepts only DIRICHLET_D/NEUMANN_0");
    }
  }
  for (auto tag : spec.load)
  {
    if (tag != BoundaryTag::DirichletC && tag != BoundaryTag::NeumannG)
    {
      throw std::invalid_argument("mesh: load splitting accepts only DIRICHLET_C/NEUMANN_G");
    }
  }

  const double hx = lx / nx;
  const double hy = ly / ny;
  vertices_.reserve(static_cast<std::size_t>((nx + 1) * (ny + 1)));
  for (int j = 0; j <= ny; ++j)
  {
    for (int i = 0; i <= nx; ++i)
    {
      // Exact end coordinates so the boundary sits at 0 and L.
      const double x = (i == nx) ? lx : i * hx;
      const double y = (j == ny) ? ly : j * hy;
      vertices_.emplace_back(x, y);
    }
  }

  triangles_.reserve(static_cast<std::size_t>(2 * nx * ny));
  for (int j = 0; j < ny; ++j)
  {
    for (int i = 0; i < nx; ++i)
    {
      const int v00 = vertex_index(i, j);
      const int v10 = vertex_index(i + 1, j);
      const int v01 = vertex_index(i, j + 1);
      const int v11 = vertex_index(i + 1, j + 1);
      triangles_.push_back({v00, v10, v11});
      triangles_.push_back({v00, v11, v01});
    }
  }

  auto add_edge = [&](int a, int b, Side side) {
    const auto s = static_cast<std::size_t>(side);
    edges_.push_back({a, b, side, spec.eigen[s], spec.load[s]});
  };
  for (int i = 0; i < nx; ++i)
  {
    add_edge(vertex_index(i, 0), vertex_index(i + 1, 0), Side::Bottom);
  }
  for (int j = 0; j < ny; ++j)
  {
    add_edge(vertex_index(nx, j), vertex_index(nx, j + 1), Side::Right);
  }
  for (int i = nx; i > 0; --i)
  {
    add_edge(vertex_index(i, ny), vertex_index(i - 1, ny), Side::Top);
  }
  for (int j = ny; j > 0; --j)
  {
    add_edge(vertex_index(0, j), vertex_index(0, j - 1), Side::Left);
  }

  areas_.reserve(triangles_.size());
  grads_.reserve(triangles_.size());
  lumped_.assign(vertices_.size(), 0.0);
  for (const auto& tri : triangles_)
  {
    const Eigen::Vector2d& p0 = vertices_[static_cast<std::size_t>(tri[0])];
    const Eigen::Vector2d& p1 = vertices_[static_cast<std::size_t>(tri[1])];
    const Eigen::Vector2d& p2 = vertices_[static_cast<std::size_t>(tri[2])];
    Eigen::Matrix2d jac;
    jac.col(0) = p1 - p0;
    jac.col(1) = p2 - p0;
    const double det = jac.determinant();
    if (!(det > 0.0))
    {
      throw std::logic_error("mesh: degenerate or clockwise triangle");
    }
    const double area = 0.5 * det;
    // Reference gradients (-1,-1), (1,0), (0,1) mapped by J^{-T}.
    const Eigen::Matrix2d jinv_t = jac.inverse().transpose();
    Eigen::Matrix<double, 3, 2> g;
    g.row(1) = (jinv_t * Eigen::Vector2d(1.0, 0.0)).transpose();
    g.row(2) = (jinv_t * Eigen::Vector2d(0.0, 1.0)).transpose();
    g.row(0) = -g.row(1) - g.row(2);
    areas_.push_back(area);
    grads_.push_back(g);
    for (int v : tri)
    {
      lumped_[static_cast<std::size_t>(v)] += area / 3.0;
    }
  }
}

Eigen::Vector2d Mesh::centroid(int t) const
{
  const auto& tri = triangles_[static_cast<std::size_t>(t)];
  return (vertices_[static_cast<std::size_t>(tri[0])] + vertices_[static_cast<std::size_t>(tri[1])] +
          vertices_[static_cast<std::size_t>(tri[2])]) /
         3.0;
}

bool Mesh::has_tag(BoundaryTag tag) const
{
  for (const auto& e : edges_)
  {
    if (e.has_tag(tag))
    {
      return true;
    }
  }
  return false;
}

Mesh build_rect_mesh(int nx, int ny, double lx, double ly, const BoundarySpec& spec)
{
  return Mesh(nx, ny, lx, ly, spec);
}

DofMap::DofMap(int num_dofs, const std::vector<bool>& fixed)
{
  if (static_cast<int>(fixed.size()) != num_dofs)
  {
    throw std::invalid_argument("dofmap: fixed mask size mismatch");
  }
  reduced_.assign(static_cast<std::size_t>(num_dofs), -1);
  for (int d = 0; d < num_dofs; ++d)
  {
    if (fixed[static_cast<std::size_t>(d)])
    {
      fixed_.push_back(d);
    }
    else
    {
      reduced_[static_cast<std::size_t>(d)] = static_cast<int>(free_.size());
      free_.push_back(d);
    }
  }
}

Eigen::VectorXd DofMap::expand(const Eigen::VectorXd& reduced_values) const
{
  if (reduced_values.size() != num_free())
  {
    throw std::invalid_argument("dofmap: reduced vector size mismatch");
  }
  Eigen::VectorXd full = Eigen::VectorXd::Zero(num_dofs());
  for (int r = 0; r < num_free(); ++r)
  {
    full(free_[static_cast<std::size_t>(r)]) = reduced_values(r);
  }
  return full;
}

Eigen::VectorXd DofMap::restrict(const Eigen::VectorXd& full_values) const
{
  if (full_values.size() != num_dofs())
  {
    throw std::invalid_argument("dofmap: full vector size mismatch");
  }
  Eigen::VectorXd out(num_free());
  for (int r = 0; r < num_free(); ++r)
  {
    out(r) = full_values(free_[static_cast<std::size_t>(r)]);
  }
  return out;
}

DofMap build_dof_map(const Mesh& mesh, BoundaryTag dirichlet_tag)
{
  std::vector<bool> fixed(static_cast<std::size_t>(2 * mesh.num_vertices()), false);
  for (const auto& e : mesh.boundary_edges())
  {
    if (!e.has_tag(dirichlet_tag))
    {
      continue;
    }
    for (int v : {e.a, e.b})
    {
      fixed[static_cast<std::size_t>(2 * v)] = true;
      fixed[static_cast<std::size_t>(2 * v + 1)] = true;
    }
  }
  return DofMap(2 * mesh.num_vertices(), fixed);
}

DofMap build_scalar_dof_map(const Mesh& mesh)
{
  return DofMap(mesh.num_vertices(), std::vector<bool>(static_cast<std::size_t>(mesh.num_vertices()), false));
}

}  // namespace eigentopo
