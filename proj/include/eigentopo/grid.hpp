// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace eigentopo {

enum class BoundaryTag : std::uint8_t
{
  DirichletD,  // clamped for the eigenproblem
  Neumann0,    // traction free for the eigenproblem
  DirichletC,  // clamped for the load case
  NeumannG     // loaded (traction g) for the load case
};

enum class Side : std::uint8_t
{
  Bottom = 0,
  Right = 1,
  Top = 2,
  Left = 3
};

std::string_view to_string(BoundaryTag tag);
std::string_view to_string(Side side);

/// Tag assignment per rectangle side for both boundary splittings.
///
/// The eigenproblem splitting uses DirichletD/Neumann0, the load case
/// splitting uses DirichletC/NeumannG. The two are independent.
struct BoundarySpec
{
  std::array<BoundaryTag, 4> eigen{BoundaryTag::Neumann0, BoundaryTag::Neumann0,
                                   BoundaryTag::Neumann0, BoundaryTag::DirichletD};
  std::array<BoundaryTag, 4> load{BoundaryTag::NeumannG, BoundaryTag::NeumannG,
                                  BoundaryTag::NeumannG, BoundaryTag::DirichletC};

  static BoundarySpec cantilever();  // left clamped in both splittings
  static BoundarySpec clamped_all(); // every side DirichletD/DirichletC
  static BoundarySpec free_all();    // no Dirichlet side
};

struct BoundaryEdge
{
  int a = 0;
  int b = 0;
  Side side = Side::Bottom;
  BoundaryTag eigen_tag = BoundaryTag::Neumann0;
  BoundaryTag load_tag = BoundaryTag::NeumannG;

  [[nodiscard]] bool has_tag(BoundaryTag tag) const { return eigen_tag == tag || load_tag == tag; }
};

/// Structured P1 triangulation of the rectangle [0,Lx]x[0,Ly].
///
/// Vertices are row-major (index j*(nx+1)+i). Every cell is split along the
/// lower-left to upper-right diagonal into two counterclockwise triangles.
/// Immutable after construction.
class Mesh
{
public:
  Mesh(int nx, int ny, double lx, double ly, const BoundarySpec& spec);

  [[nodiscard]] int nx() const { return nx_; }
  [[nodiscard]] int ny() const { return ny_; }
  [[nodiscard]] double lx() const { return lx_; }
  [[nodiscard]] double ly() const { return ly_; }
  [[nodiscard]] int num_vertices() const { return static_cast<int>(vertices_.size()); }
  [[nodiscard]] int num_triangles() const { return static_cast<int>(triangles_.size()); }
  [[nodiscard]] int vertex_index(int i, int j) const { return j * (nx_ + 1) + i; }

  [[nodiscard]] const std::vector<Eigen::Vector2d>& vertices() const { return vertices_; }
  [[nodiscard]] const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }
  [[nodiscard]] const std::vector<BoundaryEdge>& boundary_edges() const { return edges_; }
  [[nodiscard]] const std::vector<double>& element_areas() const { return areas_; }
  /// Row k holds the (constant) gradient of the k-th local basis function.
  [[nodiscard]] const std::vector<Eigen::Matrix<double, 3, 2>>& shape_gradients() const
  {
    return grads_;
  }
  /// Nodal quadrature weights: one third of the area of every incident triangle.
  [[nodiscard]] const std::vector<double>& lumped_weights() const { return lumped_; }
  [[nodiscard]] double area() const { return lx_ * ly_; }
  [[nodiscard]] const BoundarySpec& boundary_spec() const { return spec_; }

  [[nodiscard]] Eigen::Vector2d centroid(int t) const;
  [[nodiscard]] bool has_tag(BoundaryTag tag) const;

private:
  int nx_;
  int ny_;
  double lx_;
  double ly_;
  BoundarySpec spec_;
  std::vector<Eigen::Vector2d> vertices_;
  std::vector<std::array<int, 3>> triangles_;
  std::vector<BoundaryEdge> edges_;
  std::vector<double> areas_;
  std::vector<Eigen::Matrix<double, 3, 2>> grads_;
  std::vector<double> lumped_;
};

Mesh build_rect_mesh(int nx, int ny, double lx, double ly, const BoundarySpec& spec);

/// Partition of the 2*num_vertices displacement unknowns (dof 2v+c) into
/// free and Dirichlet-fixed indices, plus the global-to-reduced numbering.
class DofMap
{
public:
  DofMap(int num_dofs, const std::vector<bool>& fixed);

  [[nodiscard]] int num_dofs() const { return static_cast<int>(reduced_.size()); }
  [[nodiscard]] int num_free() const { return static_cast<int>(free_.size()); }
  [[nodiscard]] const std::vector<int>& free_dofs() const { return free_; }
  [[nodiscard]] const std::vector<int>& fixed_dofs() const { return fixed_; }
  /// Reduced index of a global dof, or -1 when the dof is fixed.
  [[nodiscard]] int reduced(int dof) const { return reduced_[static_cast<std::size_t>(dof)]; }

  /// Full vector with zeros at the fixed dofs.
  [[nodiscard]] Eigen::VectorXd expand(const Eigen::VectorXd& reduced_values) const;
  [[nodiscard]] Eigen::VectorXd restrict(const Eigen::VectorXd& full_values) const;

private:
  std::vector<int> free_;
  std::vector<int> fixed_;
  std::vector<int> reduced_;
};

/// Both components of every vertex on an edge carrying `dirichlet_tag` are fixed.
DofMap build_dof_map(const Mesh& mesh, BoundaryTag dirichlet_tag);

/// Scalar (one dof per vertex) map with every dof free; used by the Laplace check.
DofMap build_scalar_dof_map(const Mesh& mesh);

}  // namespace eigentopo
