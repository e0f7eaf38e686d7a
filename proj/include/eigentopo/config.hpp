// SPDX-License-Identifier: Apache-2.0
// Run configuration: a sectioned key = value text file. See README for the
// full key list.

#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "eigentopo/compliance.hpp"
#include "eigentopo/material.hpp"
#include "eigentopo/objective.hpp"
#include "eigentopo/optimizer.hpp"
#include "eigentopo/projection.hpp"

namespace eigentopo {

struct MeshConfig
{
  int nx = 0;
  int ny = 0;
  double lx = 1.0;
  double ly = 1.0;
  std::vector<Side> eigen_dirichlet{Side::Left};  // remaining sides Neumann0
  std::vector<Side> load_dirichlet{Side::Left};   // remaining sides NeumannG

  [[nodiscard]] BoundarySpec boundary() const;
  [[nodiscard]] Mesh build() const;
  bool operator==(const MeshConfig&) const = default;
};

struct MaterialsConfig
{
  MaterialSet set;
  std::optional<double> delta;  // cutoff parameter; derived from the materials if absent

  [[nodiscard]] MaterialLaw law() const;
  bool operator==(const MaterialsConfig&) const = default;
};

/// Uniform loads. The traction acts on NeumannG edges inside traction_box
/// (whole boundary if absent); the tracking weight is the indicator of
/// weight_box (whole domain if absent).
struct LoadsConfig
{
  double alpha = 1.0;
  double beta = 0.0;
  double nu = 1.0;
  std::array<double, 2> body_force{0.0, 0.0};
  std::array<double, 2> traction{0.0, 0.0};
  std::optional<Box> traction_box;
  std::array<double, 2> target{0.0, 0.0};
  std::optional<Box> weight_box;

  [[nodiscard]] LoadCase build(const Mesh& mesh) const;
  bool operator==(const LoadsConfig&) const = default;
};

struct ConstraintsConfig
{
  std::vector<double> mean;
  std::vector<Box> solid_boxes;
  std::vector<Box> void_boxes;

  bool operator==(const ConstraintsConfig&) const = default;
};

struct OutputConfig
{
  std::string directory = "out";
  int vtk_every = 0;  // 0: final state only

  bool operator==(const OutputConfig&) const = default;
};

struct RunConfig
{
  MeshConfig mesh;
  MaterialsConfig materials;
  ObjectiveSpec objective;  // eps mirrors materials.set.interface_eps
  std::optional<LoadsConfig> loads;
  OptOptions optimizer;
  double init_noise = 0.1;  // amplitude of the uniform perturbation of the initial mean field
  ConstraintsConfig constraints;
  OutputConfig output;

  bool operator==(const RunConfig&) const = default;
};

/// Throws ConfigError; messages start with the offending key path.
RunConfig parse_config_string(const std::string& text);
/// Throws ConfigError also when the file cannot be read.
RunConfig parse_config(const std::filesystem::path& path);

/// Cross-field validation, shared by the parser. Throws ConfigError.
void validate_config(const RunConfig& cfg);

/// Text form accepted by parse_config_string; doubles keep 17 digits.
std::string write_config(const RunConfig& cfg);

std::string_view to_string(PsiKind kind);

}  // namespace eigentopo
