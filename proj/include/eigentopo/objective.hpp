// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include <Eigen/Core>

#include "eigentopo/assembly.hpp"
#include "eigentopo/eigensolver.hpp"
#include "eigentopo/sparse.hpp"

namespace eigentopo {

/// Ginzburg-Landau energy with the multi-obstacle bulk term:
///   gamma * ( eps/2 sum_i int |grad phi_i|^2 + 1/eps int psi0(phi) ),
/// the gradient term exact for P1, psi0 by nodal quadrature.
class GinzburgLandau
{
public:
  GinzburgLandau(const Mesh& mesh, double gamma, double eps);

  [[nodiscard]] double energy(const PhaseField& phi) const;
  /// Nodal field g with g . h = dE[h].
  [[nodiscard]] PhaseField gradient(const PhaseField& phi) const;
  [[nodiscard]] double gamma() const { return gamma_; }
  [[nodiscard]] double eps() const { return eps_; }

private:
  SparseSymMatrix laplace_;
  std::vector<double> weights_;
  double gamma_;
  double eps_;
};

double ginzburg_landau(const Mesh& mesh, const PhaseField& phi, double gamma, double eps);
PhaseField ginzburg_landau_grad(const Mesh& mesh, const PhaseField& phi, double gamma, double eps);

enum class PsiKind
{
  WeightedSum,   // sum_j c_j lambda_{i_j}
  NegMinFirst,   // -c_1 lambda_1
  InverseSum     // sum_j c_j / lambda_{i_j}
};

struct ObjectiveSpec
{
  PsiKind kind = PsiKind::WeightedSum;
  std::vector<int> indices{1};   // 1-based eigenvalue indices
  std::vector<double> weights{1.0};
  double gamma = 0.0;
  double eps = 0.1;
  double lower_bound = 0.0;      // c_Psi: J >= -c_Psi is expected

  /// Throws std::invalid_argument on inconsistent fields.
  void validate() const;
  [[nodiscard]] int max_index() const;

  bool operator==(const ObjectiveSpec&) const = default;
};

/// Psi and its partial derivatives at the target eigenvalues.
double psi_value(const ObjectiveSpec& spec, const std::vector<double>& lambdas);
std::vector<double> psi_gradient(const ObjectiveSpec& spec, const std::vector<double>& lambdas);

/// Everything computed at one design, reused by gradient and VI evaluation.
struct Evaluation
{
  double J = 0.0;
  double psi = 0.0;
  double gl = 0.0;
  double compliance = 0.0;       // alpha F + beta J0 (combined problem only)
  std::vector<double> lambdas;   // target eigenvalues, in spec order
  EigenPairs pairs;
  Eigen::VectorXd state;         // combined problem only (free load dofs)
  Eigen::VectorXd adjoint;
  double deviation_inner = 0.0;  // int c (1-phi^N) |u - u_target|^2
};

/// Reduced objective interface consumed by the optimizer.
class OptProblem
{
public:
  virtual ~OptProblem() = default;
  [[nodiscard]] virtual Evaluation evaluate(const PhaseField& phi) const = 0;
  /// Nodal gradient; throws DegenerateEigenvalueError when a target
  /// eigenvalue is clustered.
  [[nodiscard]] virtual PhaseField gradient(const PhaseField& phi, const Evaluation& ev) const = 0;
  /// One-sided derivative J'(phi; d), valid also on a clustered first
  /// eigenvalue when the objective is -c lambda_1.
  [[nodiscard]] virtual double directional_derivative(const PhaseField& phi, const Evaluation& ev,
                                                      const PhaseField& d) const = 0;
  /// Gradient candidates built from each member of a clustered first
  /// eigenvalue; empty when no surrogate applies.
  [[nodiscard]] virtual std::vector<PhaseField> surrogate_gradients(const PhaseField& phi,
                                                                    const Evaluation& ev) const = 0;
  [[nodiscard]] virtual const ObjectiveSpec& spec() const = 0;
};

/// J = Psi(lambda_{i_1..i_l}) + gamma E(phi) for the eigenproblem splitting.
class EigenProblem : public OptProblem
{
public:
  EigenProblem(const Mesh& mesh, MaterialLaw law, ObjectiveSpec spec, EigenOptions eig = {},
               Backend backend = Backend::OpenMP);

  [[nodiscard]] Evaluation evaluate(const PhaseField& phi) const override;
  [[nodiscard]] PhaseField gradient(const PhaseField& phi, const Evaluation& ev) const override;
  [[nodiscard]] double directional_derivative(const PhaseField& phi, const Evaluation& ev,
                                              const PhaseField& d) const override;
  [[nodiscard]] std::vector<PhaseField> surrogate_gradients(const PhaseField& phi,
                                                            const Evaluation& ev) const override;
  [[nodiscard]] const ObjectiveSpec& spec() const override { return spec_; }

  [[nodiscard]] const Mesh& mesh() const { return mesh_; }
  [[nodiscard]] const DofMap& dofs() const { return dofs_; }
  [[nodiscard]] const MaterialLaw& law() const { return law_; }
  [[nodiscard]] const GinzburgLandau& gl() const { return gl_; }
  [[nodiscard]] Backend backend() const { return backend_; }
  [[nodiscard]] const EigenOptions& eigen_options() const { return eig_; }

  /// Eigenpairs only (max target index + 1 pairs, capped by the dimension).
  [[nodiscard]] EigenPairs solve_eigen(const PhaseField& phi) const;
  /// Eigen part of the gradient alone.
  [[nodiscard]] PhaseField eigen_gradient(const PhaseField& phi, const Evaluation& ev) const;
  /// Whether the first-eigenvalue surrogate applies to ev.
  [[nodiscard]] bool first_cluster_degenerate(const Evaluation& ev) const;

protected:
  void fill_eigen_part(const PhaseField& phi, Evaluation& ev) const;
  /// Eigen part of J'(phi; d), handling a clustered lambda_1.
  [[nodiscard]] double eigen_directional(const PhaseField& phi, const Evaluation& ev, const PhaseField& d) const;

  const Mesh& mesh_;
  DofMap dofs_;
  MaterialLaw law_;
  ObjectiveSpec spec_;
  EigenOptions eig_;
  Backend backend_;
  GinzburgLandau gl_;
};

/// (J, eigenpairs) at phi.
Evaluation objective_eval(const Mesh& mesh, const PhaseField& phi, const ObjectiveSpec& spec, const MaterialLaw& law);
PhaseField objective_grad(const Mesh& mesh, const PhaseField& phi, const ObjectiveSpec& spec, const MaterialLaw& law,
                          const EigenPairs& pairs);

}  // namespace eigentopo
