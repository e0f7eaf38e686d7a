// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <Eigen/Dense>

#include "eigentopo/assembly.hpp"
#include "eigentopo/compliance.hpp"
#include "eigentopo/errors.hpp"
#include "test_util.hpp"

using namespace eigentopo;

namespace {

LoadCase end_load(const Mesh& mesh)
{
  LoadCase lc = LoadCase::zeros(mesh);
  for (int v = 0; v < mesh.num_vertices(); ++v)
  {
    lc.body_force(2 * v + 1) = -0.5;
    if (mesh.vertices()[static_cast<std::size_t>(v)].x() > mesh.lx() - 1e-12)
    {
      lc.traction(2 * v + 1) = -1.0;
    }
  }
  return lc;
}

}  // namespace

TEST_CASE("state equation")
{
  const Mesh mesh(8, 4, 2.0, 1.0, BoundarySpec::cantilever());
  const DofMap dofs = build_dof_map(mesh, BoundaryTag::DirichletC);
  const MaterialLaw law(testutil::three_phase());
  std::mt19937_64 rng(71);
  const PhaseField phi = testutil::interior_phi(mesh.num_vertices(), 3, rng);

  SUBCASE("zero loads give zero displacement")
  {
    const LoadCase lc = LoadCase::zeros(mesh);
    CHECK(solve_state(mesh, dofs, phi, law, lc).norm() == 0.0);
  }
  SUBCASE("agrees with a dense solve")
  {
    const LoadCase lc = end_load(mesh);
    const Eigen::VectorXd u = solve_state(mesh, dofs, phi, law, lc);
    const Eigen::MatrixXd k = assemble_stiffness(mesh, dofs, phi, law).to_dense();
    const Eigen::VectorXd b = assemble_load(mesh, dofs, phi, lc.body_force, lc.traction);
    const Eigen::VectorXd ref = k.ldlt().solve(b);
    CHECK((u - ref).norm() <= 1e-10 * ref.norm());
    CHECK((k * u - b).norm() <= 1e-10 * b.norm());
    // Work identity and linearity in the load.
    const double f = mean_compliance(mesh, dofs, phi, u, lc);
    CHECK(f == doctest::Approx(u.dot(k * u)).epsilon(1e-10));
    CHECK(f > 0.0);
    LoadCase twice = lc;
    twice.body_force *= 2.0;
    twice.traction *= 2.0;
    const Eigen::VectorXd u2 = solve_state(mesh, dofs, phi, law, twice);
    CHECK((u2 - 2.0 * u).norm() <= 1e-10 * u.norm());
    CHECK(mean_compliance(mesh, dofs, phi, u2, twice) == doctest::Approx(4.0 * f).epsilon(1e-10));
  }
  SUBCASE("no clamped side is singular")
  {
    const Mesh free(4, 4, 1.0, 1.0, BoundarySpec::free_all());
    const DofMap fd = build_dof_map(free, BoundaryTag::DirichletC);
    const PhaseField p = testutil::interior_phi(free.num_vertices(), 3, rng);
    CHECK_THROWS_AS((void)solve_state(free, fd, p, law, end_load(free)), NumericalError);
  }
  SUBCASE("serial and parallel backends agree")
  {
    const LoadCase lc = end_load(mesh);
    const Eigen::VectorXd a = solve_state(mesh, dofs, phi, law, lc, Backend::Serial);
    const Eigen::VectorXd b = solve_state(mesh, dofs, phi, law, lc, Backend::OpenMP);
    CHECK((a - b).norm() == 0.0);
  }
}

TEST_CASE("target deviation")
{
  const Mesh mesh(6, 3, 2.0, 1.0, BoundarySpec::cantilever());
  const DofMap dofs = build_dof_map(mesh, BoundaryTag::DirichletC);
  const MaterialLaw law(testutil::two_phase());
  std::mt19937_64 rng(72);
  const PhaseField phi = testutil::interior_phi(mesh.num_vertices(), 2, rng);
  LoadCase lc = end_load(mesh);
  const Eigen::VectorXd u = solve_state(mesh, dofs, phi, law, lc);

  SUBCASE("value and exponent")
  {
    lc.target.setConstant(0.1);
    const TargetDeviation one = target_deviation(mesh, dofs, phi, u, lc);
    CHECK(one.inner > 0.0);
    CHECK(one.value == doctest::Approx(one.inner));
    lc.nu = 0.5;
    const TargetDeviation half = target_deviation(mesh, dofs, phi, u, lc);
    CHECK(half.value == doctest::Approx(std::sqrt(one.value)).epsilon(1e-12));
    CHECK_FALSE(half.non_differentiable);
    lc.weight.setZero();
    CHECK(target_deviation(mesh, dofs, phi, u, lc).value == 0.0);
  }
  SUBCASE("zero at the target")
  {
    lc.target = dofs.expand(u);
    lc.nu = 0.5;
    lc.beta = 1.0;
    const TargetDeviation d = target_deviation(mesh, dofs, phi, u, lc);
    CHECK(d.value == 0.0);
    CHECK(d.non_differentiable);
    CHECK_THROWS_AS((void)solve_adjoint(mesh, dofs, phi, law, u, lc), NumericalError);
    lc.nu = 1.0;
    CHECK_FALSE(target_deviation(mesh, dofs, phi, u, lc).non_differentiable);
  }
}

TEST_CASE("adjoint")
{
  const Mesh mesh(6, 3, 2.0, 1.0, BoundarySpec::cantilever());
  const DofMap dofs = build_dof_map(mesh, BoundaryTag::DirichletC);
  const MaterialLaw law(testutil::two_phase());
  std::mt19937_64 rng(73);
  const PhaseField phi = testutil::interior_phi(mesh.num_vertices(), 2, rng);
  LoadCase lc = end_load(mesh);
  const Eigen::VectorXd u = solve_state(mesh, dofs, phi, law, lc);

  lc.alpha = 1.7;
  lc.beta = 0.0;
  CHECK((solve_adjoint(mesh, dofs, phi, law, u, lc) - 1.7 * u).norm() <= 1e-10 * u.norm());
  lc.alpha = 0.0;
  CHECK(solve_adjoint(mesh, dofs, phi, law, u, lc).norm() == 0.0);
}

TEST_CASE("load case validation")
{
  const Mesh mesh(3, 3, 1.0, 1.0, BoundarySpec::cantilever());
  LoadCase lc = LoadCase::zeros(mesh);
  CHECK_NOTHROW(lc.validate(mesh));
  LoadCase bad = lc;
  bad.nu = 0.0;
  CHECK_THROWS_AS(bad.validate(mesh), std::invalid_argument);
  bad = lc;
  bad.alpha = -1.0;
  CHECK_THROWS_AS(bad.validate(mesh), std::invalid_argument);
  bad = lc;
  bad.weight.resize(3);
  CHECK_THROWS_AS(bad.validate(mesh), std::invalid_argument);
  bad = lc;
  bad.beta = 1.0;
  bad.weight.setZero();
  CHECK_THROWS_AS(bad.validate(mesh), std::invalid_argument);
}

TEST_CASE("combined objective and gradient")
{
  const Mesh mesh(8, 4, 2.0, 1.0, BoundarySpec::cantilever());
  const int nv = mesh.num_vertices();
  const MaterialLaw law(testutil::three_phase());
  std::mt19937_64 rng(74);
  const PhaseField phi = testutil::interior_phi(nv, 3, rng);
  ObjectiveSpec s;
  s.indices = {1, 2};
  s.weights = {-0.1, 0.05};
  s.gamma = 0.01;

  SUBCASE("reduces to the eigen objective without loads")
  {
    LoadCase lc = end_load(mesh);
    lc.alpha = 0.0;
    lc.beta = 0.0;
    const Evaluation ev = objective_eval(mesh, phi, s, law);
    CHECK(combined_objective(mesh, phi, s, law, lc) == doctest::Approx(ev.J).epsilon(1e-12));
    const PhaseField a = combined_gradient(mesh, phi, s, law, lc);
    const PhaseField b = objective_grad(mesh, phi, s, law, ev.pairs);
    double diff = 0.0;
    double scale = 0.0;
    for (std::size_t k = 0; k < a.values().size(); ++k)
    {
      diff = std::max(diff, std::abs(a.values()[k] - b.values()[k]));
      scale = std::max(scale, std::abs(b.values()[k]));
    }
    CHECK(diff <= 1e-12 * std::max(1.0, scale));
  }
  SUBCASE("Taylor remainder")
  {
    LoadCase lc = end_load(mesh);
    lc.alpha = 1.0;
    lc.beta = 2.0;
    lc.nu = 0.7;
    lc.target.setConstant(0.05);
    for (int v = 0; v < nv; ++v)
    {
      lc.weight(v) = mesh.vertices()[static_cast<std::size_t>(v)].x() > 1.0 ? 1.0 : 0.0;
    }
    const double i0 = combined_objective(mesh, phi, s, law, lc);
    const PhaseField g = combined_gradient(mesh, phi, s, law, lc);
    for (int r = 0; r < 5; ++r)
    {
      const PhaseField h = testutil::tangent_direction(nv, 3, rng);
      std::vector<double> ts{1e-2, 3e-3, 1e-3, 3e-4};
      std::vector<double> err;
      for (double t : ts)
      {
        err.push_back(std::abs(combined_objective(mesh, phi + t * h, s, law, lc) - i0 - t * dot(g, h)));
      }
      CHECK(testutil::loglog_slope(ts, err) == doctest::Approx(2.0).epsilon(0.05));
    }
  }
  SUBCASE("problem object matches the free functions")
  {
    LoadCase lc = end_load(mesh);
    lc.beta = 0.5;
    const CombinedProblem prob(mesh, law, s, lc);
    const Evaluation ev = prob.evaluate(phi);
    CHECK(ev.J == doctest::Approx(combined_objective(mesh, phi, s, law, lc)).epsilon(1e-12));
    const PhaseField h = testutil::tangent_direction(nv, 3, rng);
    CHECK(prob.directional_derivative(phi, ev, h) == doctest::Approx(dot(prob.gradient(phi, ev), h)).epsilon(1e-10));
  }
}
