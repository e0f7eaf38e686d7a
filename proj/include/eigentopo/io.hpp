// SPDX-License-Identifier: Apache-2.0
// Result files: legacy ASCII VTK snapshots and the CSV iteration history.

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "eigentopo/grid.hpp"
#include "eigentopo/optimizer.hpp"

namespace eigentopo {

/// Nodal field for VTK output: 1 component (SCALARS) or 2 (VECTORS, z = 0).
struct VtkField
{
  std::string name;
  int components = 1;
  std::vector<double> values;  // node-major, components * num_vertices entries
};

/// Nodal scalar field per phase, named phi_1..phi_N.
std::vector<VtkField> phase_fields(const PhaseField& phi);
/// Full nodal displacement (2 entries per vertex) as a vector field.
VtkField displacement_field(std::string name, const Eigen::VectorXd& full);

/// File content of write_vtk. Throws std::invalid_argument on a field length
/// mismatch, a bad component count, or a name containing whitespace.
std::string format_vtk(const Mesh& mesh, const std::vector<VtkField>& fields);
/// Throws std::runtime_error on I/O failure.
void write_vtk(const std::filesystem::path& path, const Mesh& mesh, const std::vector<VtkField>& fields);

/// CSV header iter,J,psi,gl_energy,lambda_1..lambda_l,step,vi_residual.
std::string history_header(int n_lambdas);
/// l is taken from the records, or from final_eval for an empty history.
std::string format_history(const OptResult& result);
void write_history(const std::filesystem::path& path, const OptResult& result);

}  // namespace eigentopo
