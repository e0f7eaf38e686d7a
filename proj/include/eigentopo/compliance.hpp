// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>

#include "eigentopo/objective.hpp"

namespace eigentopo {

/// Loads and tracking data of the combined problem. Vector fields are full
/// nodal 2-vectors (2 entries per vertex), `weight` is a nodal scalar.
struct LoadCase
{
  Eigen::VectorXd body_force;
  Eigen::VectorXd traction;
  Eigen::VectorXd target;
  Eigen::VectorXd weight;
  double nu = 1.0;
  double alpha = 1.0;
  double beta = 0.0;

  /// Zero loads, zero target, unit weight.
  static LoadCase zeros(const Mesh& mesh);
  /// Throws std::invalid_argument on size or range violations.
  void validate(const Mesh& mesh) const;
};

/// Displacement on the free dofs of the load splitting: K(phi) u = b(phi).
/// Throws NumericalError if K is singular (no DirichletC side).
Eigen::VectorXd solve_state(const Mesh& mesh, const DofMap& dofs, const PhaseField& phi, const MaterialLaw& law,
                            const LoadCase& load, Backend backend = Backend::OpenMP);

/// F = int (1 - phi^N) f . u + int_{Gamma_g} g . u, discretized as b(phi)^T u.
double mean_compliance(const Mesh& mesh, const DofMap& dofs, const PhaseField& phi, const Eigen::VectorXd& u,
                       const LoadCase& load);

struct TargetDeviation
{
  double value = 0.0;   // inner^nu
  double inner = 0.0;   // int c (1 - phi^N) |u - u_target|^2
  bool non_differentiable = false;
};

TargetDeviation target_deviation(const Mesh& mesh, const DofMap& dofs, const PhaseField& phi,
                                 const Eigen::VectorXd& u, const LoadCase& load);

/// K(phi) p = alpha b + 2 beta nu inner^(nu-1) (c (1-phi^N) (u - u_target), .).
/// Throws NumericalError at the non-differentiable point of J0.
Eigen::VectorXd solve_adjoint(const Mesh& mesh, const DofMap& dofs, const PhaseField& phi, const MaterialLaw& law,
                              const Eigen::VectorXd& u, const LoadCase& load, Backend backend = Backend::OpenMP);

/// I = alpha F + beta J0 + gamma E + Psi(lambdas).
class CombinedProblem : public EigenProblem
{
public:
  CombinedProblem(const Mesh& mesh, MaterialLaw law, ObjectiveSpec spec, LoadCase load, EigenOptions eig = {},
                  Backend backend = Backend::OpenMP);

  [[nodiscard]] Evaluation evaluate(const PhaseField& phi) const override;
  [[nodiscard]] PhaseField gradient(const PhaseField& phi, const Evaluation& ev) const override;
  [[nodiscard]] double directional_derivative(const PhaseField& phi, const Evaluation& ev,
                                              const PhaseField& d) const override;
  [[nodiscard]] std::vector<PhaseField> surrogate_gradients(const PhaseField& phi,
                                                            const Evaluation& ev) const override;

  [[nodiscard]] const DofMap& load_dofs() const { return load_dofs_; }
  [[nodiscard]] const LoadCase& load() const { return load_; }
  /// Compliance part of the gradient alone.
  [[nodiscard]] PhaseField compliance_gradient(const PhaseField& phi, const Evaluation& ev) const;

private:
  [[nodiscard]] bool has_compliance() const { return load_.alpha != 0.0 || load_.beta != 0.0; }

  DofMap load_dofs_;
  LoadCase load_;
};

double combined_objective(const Mesh& mesh, const PhaseField& phi, const ObjectiveSpec& spec, const MaterialLaw& law,
                          const LoadCase& load);
PhaseField combined_gradient(const Mesh& mesh, const PhaseField& phi, const ObjectiveSpec& spec,
                             const MaterialLaw& law, const LoadCase& load);

}  // namespace eigentopo
