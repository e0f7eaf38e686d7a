// SPDX-License-Identifier: Apache-2.0

#include "eigentopo/compliance.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/SparseCholesky>

#include "eigentopo/errors.hpp"

namespace eigentopo {

LoadCase LoadCase::zeros(const Mesh& mesh)
{
  const int nv = mesh.num_vertices();
  LoadCase lc;
  lc.body_force = Eigen::VectorXd::Zero(2 * nv);
  lc.traction = Eigen::VectorXd::Zero(2 * nv);
  lc.target = Eigen::VectorXd::Zero(2 * nv);
  lc.weight = Eigen::VectorXd::Ones(nv);
  return lc;
}

void LoadCase::validate(const Mesh& mesh) const
{
  const int nv = mesh.num_vertices();
  if (body_force.size() != 2 * nv || traction.size() != 2 * nv || target.size() != 2 * nv || weight.size() != nv)
  {
    throw std::invalid_argument("load case: field sizes do not match the mesh");
  }
  if (!(nu > 0.0 && nu <= 1.0))
  {
    throw std::invalid_argument("load case: exponent nu must lie in (0,1]");
  }
  if (!(alpha >= 0.0) || !(beta >= 0.0))
  {
    throw std::invalid_argument("load case: alpha and beta must be nonnegative");
  }
  if (beta > 0.0 && !(weight.cwiseAbs().maxCoeff() > 0.0))
  {
    throw std::invalid_argument("load case: tracking weight c has empty support while beta > 0");
  }
}

namespace {

double solid_fraction(const Mesh& mesh, const PhaseField& phi, int t)
{
  const auto& tri = mesh.triangles()[static_cast<std::size_t>(t)];
  const int last = phi.n_phases() - 1;
  return 1.0 - (phi(tri[0], last) + phi(tri[1], last) + phi(tri[2], last)) / 3.0;
}

double centroid_scalar(const Mesh& mesh, const Eigen::VectorXd& f, int t)
{
  const auto& tri = mesh.triangles()[static_cast<std::size_t>(t)];
  return (f(tri[0]) + f(tri[1]) + f(tri[2])) / 3.0;
}

// a_T^T M_T b_T summed over both displacement components (unit density).
double element_mass_pair(const Mesh& mesh, int t, const Eigen::VectorXd& a, const Eigen::VectorXd& b)
{
  const auto ts = static_cast<std::size_t>(t);
  const auto& tri = mesh.triangles()[ts];
  const Eigen::Matrix3d me = kernels::element_scalar_mass(mesh.element_areas()[ts]);
  double s = 0.0;
  for (int c = 0; c < 2; ++c)
  {
    Eigen::Vector3d av;
    Eigen::Vector3d bv;
    for (int k = 0; k < 3; ++k)
    {
      av(k) = a(2 * tri[static_cast<std::size_t>(k)] + c);
      bv(k) = b(2 * tri[static_cast<std::size_t>(k)] + c);
    }
    s += av.dot(me * bv);
  }
  return s;
}

Eigen::VectorXd spd_solve(const SparseSymMatrix& k, const Eigen::VectorXd& rhs, const char* what)
{
  if (rhs.size() == 0 || rhs.lpNorm<Eigen::Infinity>() == 0.0)
  {
    return Eigen::VectorXd::Zero(rhs.size());
  }
  Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower> solver(k.lower());
  if (solver.info() != Eigen::Success)
  {
    throw NumericalError(std::string(what) + ": stiffness factorization failed (missing DirichletC side?)");
  }
  const Eigen::VectorXd d = solver.vectorD();
  if (d.minCoeff() <= 1e-12 * d.cwiseAbs().maxCoeff())
  {
    throw NumericalError(std::string(what) + ": stiffness is singular (missing DirichletC side?)");
  }
  Eigen::VectorXd x = solver.solve(rhs);
  // one step of iterative refinement
  x += solver.solve(rhs - k.multiply(x));
  const double res = (k.multiply(x) - rhs).norm() / rhs.norm();
  if (!(res <= 1e-10))
  {
    throw NumericalError(std::string(what) + ": residual " + std::to_string(res) + " above 1e-10");
  }
  return x;
}

}  // namespace

Eigen::VectorXd solve_state(const Mesh& mesh, const DofMap& dofs, const PhaseField& phi, const MaterialLaw& law,
                            const LoadCase& load, Backend backend)
{
  load.validate(mesh);
  const SparseSymMatrix k = assemble_stiffness(mesh, dofs, phi, law, backend);
  const Eigen::VectorXd b = assemble_load(mesh, dofs, phi, load.body_force, load.traction);
  return spd_solve(k, b, "state solve");
}

double mean_compliance(const Mesh& mesh, const DofMap& dofs, const PhaseField& phi, const Eigen::VectorXd& u,
                       const LoadCase& load)
{
  return assemble_load(mesh, dofs, phi, load.body_force, load.traction).dot(u);
}

TargetDeviation target_deviation(const Mesh& mesh, const DofMap& dofs, const PhaseField& phi,
                                 const Eigen::VectorXd& u, const LoadCase& load)
{
  const Eigen::VectorXd d = dofs.expand(u) - load.target;
  TargetDeviation out;
  for (int t = 0; t < mesh.num_triangles(); ++t)
  {
    out.inner += centroid_scalar(mesh, load.weight, t) * solid_fraction(mesh, phi, t) * element_mass_pair(mesh, t, d, d);
  }
  out.value = std::pow(out.inner, load.nu);
  out.non_differentiable = out.inner == 0.0 && load.nu < 1.0;
  return out;
}

Eigen::VectorXd solve_adjoint(const Mesh& mesh, const DofMap& dofs, const PhaseField& phi, const MaterialLaw& law,
                              const Eigen::VectorXd& u, const LoadCase& load, Backend backend)
{
  load.validate(mesh);
  const SparseSymMatrix k = assemble_stiffness(mesh, dofs, phi, law, backend);
  Eigen::VectorXd rhs = load.alpha * assemble_load(mesh, dofs, phi, load.body_force, load.traction);
  if (load.beta > 0.0)
  {
    const TargetDeviation td = target_deviation(mesh, dofs, phi, u, load);
    if (td.non_differentiable)
    {
      throw NumericalError("adjoint: target deviation is not differentiable where u equals the target (nu < 1)");
    }
    const double factor = 2.0 * load.beta * load.nu * (load.nu == 1.0 ? 1.0 : std::pow(td.inner, load.nu - 1.0));
    const Eigen::VectorXd d = dofs.expand(u) - load.target;
    Eigen::VectorXd full = Eigen::VectorXd::Zero(d.size());
    for (int t = 0; t < mesh.num_triangles(); ++t)
    {
      const auto ts = static_cast<std::size_t>(t);
      const auto& tri = mesh.triangles()[ts];
      const double coef = centroid_scalar(mesh, load.weight, t) * solid_fraction(mesh, phi, t);
      const Eigen::Matrix3d me = coef * kernels::element_scalar_mass(mesh.element_areas()[ts]);
      for (int c = 0; c < 2; ++c)
      {
        Eigen::Vector3d dv;
        for (int a = 0; a < 3; ++a)
        {
          dv(a) = d(2 * tri[static_cast<std::size_t>(a)] + c);
        }
        const Eigen::Vector3d r = me * dv;
        for (int a = 0; a < 3; ++a)
        {
          full(2 * tri[static_cast<std::size_t>(a)] + c) += r(a);
        }
      }
    }
    rhs += factor * dofs.restrict(full);
  }
  return spd_solve(k, rhs, "adjoint solve");
}

CombinedProblem::CombinedProblem(const Mesh& mesh, MaterialLaw law, ObjectiveSpec spec, LoadCase load,
                                 EigenOptions eig, Backend backend)
    : EigenProblem(mesh, std::move(law), std::move(spec), eig, backend),
      load_dofs_(build_dof_map(mesh, BoundaryTag::DirichletC)), load_(std::move(load))
{
  load_.validate(mesh);
  if (has_compliance() && !mesh.has_tag(BoundaryTag::DirichletC))
  {
    throw std::invalid_argument("combined objective: the load case needs a DirichletC side");
  }
}

Evaluation CombinedProblem::evaluate(const PhaseField& phi) const
{
  Evaluation ev = EigenProblem::evaluate(phi);
  if (!has_compliance())
  {
    return ev;
  }
  ev.state = solve_state(mesh_, load_dofs_, phi, law_, load_, backend_);
  double comp = 0.0;
  if (load_.alpha != 0.0)
  {
    comp += load_.alpha * mean_compliance(mesh_, load_dofs_, phi, ev.state, load_);
  }
  if (load_.beta != 0.0)
  {
    const TargetDeviation td = target_deviation(mesh_, load_dofs_, phi, ev.state, load_);
    ev.deviation_inner = td.inner;
    comp += load_.beta * td.value;
  }
  ev.compliance = comp;
  ev.J += comp;
  return ev;
}

PhaseField CombinedProblem::compliance_gradient(const PhaseField& phi, const Evaluation& ev) const
{
  PhaseField g(phi.n_nodes(), phi.n_phases());
  if (!has_compliance())
  {
    return g;
  }
  const Eigen::VectorXd p = load_.beta == 0.0 ? Eigen::VectorXd(load_.alpha * ev.state)
                                              : solve_adjoint(mesh_, load_dofs_, phi, law_, ev.state, load_, backend_);
  const Eigen::VectorXd u_full = load_dofs_.expand(ev.state);
  const Eigen::VectorXd p_full = load_dofs_.expand(p);
  const Eigen::VectorXd q = load_.alpha * u_full + p_full;
  const Eigen::VectorXd d = u_full - load_.target;
  double dev_factor = 0.0;
  if (load_.beta != 0.0)
  {
    if (ev.deviation_inner == 0.0 && load_.nu < 1.0)
    {
      throw NumericalError("combined gradient: target deviation is not differentiable here");
    }
    dev_factor = load_.beta * load_.nu * (load_.nu == 1.0 ? 1.0 : std::pow(ev.deviation_inner, load_.nu - 1.0));
  }
  const int last = phi.n_phases() - 1;
  for (int t = 0; t < mesh_.num_triangles(); ++t)
  {
    const auto& tri = mesh_.triangles()[static_cast<std::size_t>(t)];
    double val = -element_mass_pair(mesh_, t, q, load_.body_force);
    if (dev_factor != 0.0)
    {
      val -= dev_factor * centroid_scalar(mesh_, load_.weight, t) * element_mass_pair(mesh_, t, d, d);
    }
    for (int v : tri)
    {
      g(v, last) += val / 3.0;
    }
  }
  g -= kernels::stiffness_pair_field(mesh_, phi, law_, p_full, u_full, backend_);
  return g;
}

PhaseField CombinedProblem::gradient(const PhaseField& phi, const Evaluation& ev) const
{
  PhaseField g = EigenProblem::gradient(phi, ev);
  if (has_compliance())
  {
    g += compliance_gradient(phi, ev);
  }
  return g;
}

double CombinedProblem::directional_derivative(const PhaseField& phi, const Evaluation& ev, const PhaseField& d) const
{
  double s = EigenProblem::directional_derivative(phi, ev, d);
  if (has_compliance())
  {
    s += dot(compliance_gradient(phi, ev), d);
  }
  return s;
}

std::vector<PhaseField> CombinedProblem::surrogate_gradients(const PhaseField& phi, const Evaluation& ev) const
{
  std::vector<PhaseField> out = EigenProblem::surrogate_gradients(phi, ev);
  if (!out.empty() && has_compliance())
  {
    const PhaseField cg = compliance_gradient(phi, ev);
    for (auto& g : out)
    {
      g += cg;
    }
  }
  return out;
}

double combined_objective(const Mesh& mesh, const PhaseField& phi, const ObjectiveSpec& spec, const MaterialLaw& law,
                          const LoadCase& load)
{
  return CombinedProblem(mesh, law, spec, load).evaluate(phi).J;
}

PhaseField combined_gradient(const Mesh& mesh, const PhaseField& phi, const ObjectiveSpec& spec,
                             const MaterialLaw& law, const LoadCase& load)
{
  const CombinedProblem prob(mesh, law, spec, load);
  return prob.gradient(phi, prob.evaluate(phi));
}

}  // namespace eigentopo
