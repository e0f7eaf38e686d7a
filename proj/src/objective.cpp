// SPDX-License-Identifier: Apache-2.0

#include "eigentopo/objective.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "eigentopo/errors.hpp"
#include "eigentopo/sensitivity.hpp"

namespace eigentopo {

GinzburgLandau::GinzburgLandau(const Mesh& mesh, double gamma, double eps)
    : laplace_(assemble_scalar_laplace(mesh, Eigen::VectorXd::Ones(mesh.num_vertices())).first),
      weights_(mesh.lumped_weights()), gamma_(gamma), eps_(eps)
{
  if (!(eps > 0.0) || !(gamma >= 0.0))
  {
    throw std::invalid_argument("Ginzburg-Landau: need eps > 0 and gamma >= 0");
  }
}

double GinzburgLandau::energy(const PhaseField& phi) const
{
  if (phi.n_nodes() != laplace_.dim())
  {
    throw std::invalid_argument("Ginzburg-Landau: field does not match mesh");
  }
  if (gamma_ == 0.0)
  {
    return 0.0;
  }
  double grad_term = 0.0;
  Eigen::VectorXd comp(phi.n_nodes());
  for (int i = 0; i < phi.n_phases(); ++i)
  {
    for (int v = 0; v < phi.n_nodes(); ++v)
    {
      comp(v) = phi(v, i);
    }
    grad_term += laplace_.bilinear(comp, comp);
  }
  double bulk = 0.0;
  for (int v = 0; v < phi.n_nodes(); ++v)
  {
    bulk += weights_[static_cast<std::size_t>(v)] * bulk_potential(phi.node(v));
  }
  return gamma_ * (0.5 * eps_ * grad_term + bulk / eps_);
}

PhaseField GinzburgLandau::gradient(const PhaseField& phi) const
{
  if (phi.n_nodes() != laplace_.dim())
  {
    throw std::invalid_argument("Ginzburg-Landau: field does not match mesh");
  }
  PhaseField g(phi.n_nodes(), phi.n_phases());
  if (gamma_ == 0.0)
  {
    return g;
  }
  Eigen::VectorXd comp(phi.n_nodes());
  for (int i = 0; i < phi.n_phases(); ++i)
  {
    for (int v = 0; v < phi.n_nodes(); ++v)
    {
      comp(v) = phi(v, i);
    }
    const Eigen::VectorXd sc = laplace_.multiply(comp);
    for (int v = 0; v < phi.n_nodes(); ++v)
    {
      // psi0'(phi) = -phi
      g(v, i) = gamma_ * (eps_ * sc(v) - weights_[static_cast<std::size_t>(v)] * phi(v, i) / eps_);
    }
  }
  return g;
}

double ginzburg_landau(const Mesh& mesh, const PhaseField& phi, double gamma, double eps)
{
  return GinzburgLandau(mesh, gamma, eps).energy(phi);
}

PhaseField ginzburg_landau_grad(const Mesh& mesh, const PhaseField& phi, double gamma, double eps)
{
  return GinzburgLandau(mesh, gamma, eps).gradient(phi);
}

void ObjectiveSpec::validate() const
{
  if (indices.empty())
  {
    throw std::invalid_argument("objective: at least one eigenvalue index required");
  }
  if (weights.size() != indices.size())
  {
    throw std::invalid_argument("objective: one weight per eigenvalue index required");
  }
  for (int i : indices)
  {
    if (i < 1)
    {
      throw std::invalid_argument("objective: eigenvalue indices are 1-based");
    }
  }
  if (kind == PsiKind::NegMinFirst && (indices.size() != 1 || indices[0] != 1))
  {
    throw std::invalid_argument("objective: neg_min_first targets exactly eigenvalue 1");
  }
  if (!(eps > 0.0) || !(gamma >= 0.0))
  {
    throw std::invalid_argument("objective: need eps > 0 and gamma >= 0");
  }
}

int ObjectiveSpec::max_index() const
{
  return *std::max_element(indices.begin(), indices.end());
}

double psi_value(const ObjectiveSpec& spec, const std::vector<double>& lambdas)
{
  double s = 0.0;
  for (std::size_t j = 0; j < lambdas.size(); ++j)
  {
    const double c = spec.weights[j];
    switch (spec.kind)
    {
      case PsiKind::WeightedSum:
        s += c * lambdas[j];
        break;
      case PsiKind::NegMinFirst:
        s -= c * lambdas[j];
        break;
      case PsiKind::InverseSum:
        if (!(lambdas[j] > 0.0))
        {
          throw NumericalError("objective: inverse_sum needs positive eigenvalues");
        }
        s += c / lambdas[j];
        break;
    }
  }
  return s;
}

std::vector<double> psi_gradient(const ObjectiveSpec& spec, const std::vector<double>& lambdas)
{
  std::vector<double> d(lambdas.size());
  for (std::size_t j = 0; j < lambdas.size(); ++j)
  {
    const double c = spec.weights[j];
    switch (spec.kind)
    {
      case PsiKind::WeightedSum:
        d[j] = c;
        break;
      case PsiKind::NegMinFirst:
        d[j] = -c;
        break;
      case PsiKind::InverseSum:
        d[j] = -c / (lambdas[j] * lambdas[j]);
        break;
    }
  }
  return d;
}

EigenProblem::EigenProblem(const Mesh& mesh, MaterialLaw law, ObjectiveSpec spec, EigenOptions eig, Backend backend)
    : mesh_(mesh), dofs_(build_dof_map(mesh, BoundaryTag::DirichletD)), law_(std::move(law)),
      spec_(std::move(spec)), eig_(eig), backend_(backend), gl_(mesh, spec_.gamma, spec_.eps)
{
  spec_.validate();
  if (!mesh.has_tag(BoundaryTag::DirichletD))
  {
    throw std::invalid_argument("eigen objective: the eigenproblem needs a DirichletD side");
  }
}

EigenPairs EigenProblem::solve_eigen(const PhaseField& phi) const
{
  const SparseSymMatrix k = assemble_stiffness(mesh_, dofs_, phi, law_, backend_);
  const SparseSymMatrix m = assemble_mass(mesh_, dofs_, phi, law_, backend_);
  int count = std::min(spec_.max_index() + 1, k.dim());
  for (;;)
  {
    EigenPairs pairs = smallest_eigenpairs(k, m, count, eig_);
    // A cluster touching the last computed pair may extend further.
    const auto last = pairs.group_of(count - 1);
    if (count == k.dim() || last.second - last.first == 1 || last.first > spec_.max_index())
    {
      return pairs;
    }
    count = std::min(count + 2, k.dim());
  }
}

void EigenProblem::fill_eigen_part(const PhaseField& phi, Evaluation& ev) const
{
  ev.pairs = solve_eigen(phi);
  ev.lambdas.clear();
  for (int i : spec_.indices)
  {
    if (i > ev.pairs.size())
    {
      throw std::invalid_argument("eigen objective: index " + std::to_string(i) + " exceeds the dimension");
    }
    ev.lambdas.push_back(ev.pairs.lambdas[static_cast<std::size_t>(i - 1)]);
  }
  ev.psi = psi_value(spec_, ev.lambdas);
}

Evaluation EigenProblem::evaluate(const PhaseField& phi) const
{
  Evaluation ev;
  fill_eigen_part(phi, ev);
  ev.gl = gl_.energy(phi);
  ev.J = ev.psi + ev.gl;
  return ev;
}

bool EigenProblem::first_cluster_degenerate(const Evaluation& ev) const
{
  return spec_.kind == PsiKind::NegMinFirst && !ev.pairs.is_simple(0);
}

PhaseField EigenProblem::eigen_gradient(const PhaseField& phi, const Evaluation& ev) const
{
  const auto dpsi = psi_gradient(spec_, ev.lambdas);
  PhaseField g(phi.n_nodes(), phi.n_phases());
  for (std::size_t j = 0; j < spec_.indices.size(); ++j)
  {
    const int idx = spec_.indices[j] - 1;
    if (!ev.pairs.is_simple(idx))
    {
      const auto grp = ev.pairs.group_of(idx);
      throw DegenerateEigenvalueError("eigen objective: target eigenvalue " + std::to_string(idx + 1) +
                                          " is clustered with eigenvalues " + std::to_string(grp.first + 1) +
                                          ".." + std::to_string(grp.second),
                                      idx, grp.first, grp.second);
    }
    PhaseField gj = eigen_gradient_field(mesh_, dofs_, phi, law_, ev.pairs.vectors.col(idx),
                                         ev.pairs.lambdas[static_cast<std::size_t>(idx)], backend_);
    gj *= dpsi[j];
    g += gj;
  }
  return g;
}

PhaseField EigenProblem::gradient(const PhaseField& phi, const Evaluation& ev) const
{
  PhaseField g = eigen_gradient(phi, ev);
  g += gl_.gradient(phi);
  return g;
}

double EigenProblem::eigen_directional(const PhaseField& phi, const Evaluation& ev, const PhaseField& d) const
{
  if (!first_cluster_degenerate(ev))
  {
    return dot(eigen_gradient(phi, ev), d);
  }
  const auto grp = ev.pairs.group_of(0);
  const Eigen::MatrixXd basis = ev.pairs.vectors.leftCols(grp.second);
  const double lam1 = ev.pairs.lambdas[0];
  const SemiDerivative sd = semi_derivative_first(mesh_, dofs_, phi, law_, basis, lam1, d, backend_);
  // d/dt of -c lambda_1 is -c times the one-sided derivative of lambda_1.
  return -spec_.weights[0] * sd.value;
}

double EigenProblem::directional_derivative(const PhaseField& phi, const Evaluation& ev, const PhaseField& d) const
{
  return eigen_directional(phi, ev, d) + dot(gl_.gradient(phi), d);
}

std::vector<PhaseField> EigenProblem::surrogate_gradients(const PhaseField& phi, const Evaluation& ev) const
{
  std::vector<PhaseField> out;
  if (!first_cluster_degenerate(ev))
  {
    return out;
  }
  const auto grp = ev.pairs.group_of(0);
  const PhaseField glg = gl_.gradient(phi);
  for (int a = grp.first; a < grp.second; ++a)
  {
    PhaseField g = eigen_gradient_field(mesh_, dofs_, phi, law_, ev.pairs.vectors.col(a),
                                        ev.pairs.lambdas[static_cast<std::size_t>(a)], backend_);
    g *= -spec_.weights[0];
    g += glg;
    out.push_back(std::move(g));
  }
  return out;
}

Evaluation objective_eval(const Mesh& mesh, const PhaseField& phi, const ObjectiveSpec& spec, const MaterialLaw& law)
{
  return EigenProblem(mesh, law, spec).evaluate(phi);
}

PhaseField objective_grad(const Mesh& mesh, const PhaseField& phi, const ObjectiveSpec& spec, const MaterialLaw& law,
                          const EigenPairs& pairs)
{
  const EigenProblem prob(mesh, law, spec);
  Evaluation ev;
  ev.pairs = pairs;
  for (int i : spec.indices)
  {
    ev.lambdas.push_back(pairs.lambdas.at(static_cast<std::size_t>(i - 1)));
  }
  return prob.gradient(phi, ev);
}

}  // namespace eigentopo
