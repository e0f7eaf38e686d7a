// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "eigentopo/grid.hpp"
#include "eigentopo/phase_field.hpp"

namespace eigentopo {

enum class NodeRegion : std::uint8_t
{
  Free,
  Solid,  // S0: void fraction pinned to 0
  Void    // S1: pinned to the void vertex e_N
};

/// Axis-aligned box [x0,x1]x[y0,y1] (closed).
struct Box
{
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 0.0;
  double y1 = 0.0;
  [[nodiscard]] bool contains(const Eigen::Vector2d& p, double tol = 1e-12) const
  {
    return p.x() >= x0 - tol && p.x() <= x1 + tol && p.y() >= y0 - tol && p.y() <= y1 + tol;
  }

  bool operator==(const Box&) const = default;
};

/// The admissible set: nodewise Gibbs simplex, prescribed discrete mean,
/// fixed solid and void regions. Means and distances use the lumped nodal
/// weights, which integrate P1 functions exactly.
class AdmissibleSet
{
public:
  /// Throws InfeasibleError if the fixed regions are incompatible with `mean`,
  /// std::invalid_argument if `mean` is not in the open simplex.
  AdmissibleSet(const Mesh& mesh, std::vector<double> mean, const std::vector<Box>& solid_boxes = {},
                const std::vector<Box>& void_boxes = {});
  AdmissibleSet(std::vector<double> weights, std::vector<double> mean, std::vector<NodeRegion> regions);

  [[nodiscard]] int n_nodes() const { return static_cast<int>(weights_.size()); }
  [[nodiscard]] int n_phases() const { return static_cast<int>(mean_.size()); }
  [[nodiscard]] const std::vector<double>& mean() const { return mean_; }
  [[nodiscard]] const std::vector<double>& weights() const { return weights_; }
  [[nodiscard]] const std::vector<NodeRegion>& regions() const { return regions_; }
  [[nodiscard]] double total_weight() const { return total_; }

  /// Weighted mean of each component.
  [[nodiscard]] std::vector<double> mean_of(const PhaseField& phi) const;

  /// Weighted L2 closest admissible field: phi_v = P_v(y_v + c) with a
  /// common offset c found by semismooth Newton on the dual.
  [[nodiscard]] PhaseField project(const PhaseField& y) const;

  /// Whether phi is admissible: simplex to simplex_tol, mean to mean_tol,
  /// fixed regions exactly.
  [[nodiscard]] bool contains(const PhaseField& phi, double simplex_tol = 1e-12, double mean_tol = 1e-10) const;

  /// Random admissible field: Dirichlet-distributed nodal values, projected.
  [[nodiscard]] PhaseField random_point(std::mt19937_64& rng) const;

  /// Weighted inner product sum_v w_v a_v . b_v.
  [[nodiscard]] double inner(const PhaseField& a, const PhaseField& b) const;

private:
  void check_feasible() const;

  std::vector<double> weights_;
  std::vector<double> mean_;
  std::vector<NodeRegion> regions_;
  double total_ = 0.0;
};

/// Euclidean projection of y onto the standard simplex {x >= 0, sum x = 1}.
void project_simplex(std::span<const double> y, std::span<double> out);

}  // namespace eigentopo
