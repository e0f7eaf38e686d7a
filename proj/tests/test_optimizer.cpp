// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <random>

#include "eigentopo/errors.hpp"
#include "eigentopo/optimizer.hpp"
#include "test_util.hpp"

using namespace eigentopo;

namespace {

// J = 1/2 sum_v w_v |phi_v - a_v|^2, whose constrained minimizer is P(a).
class Quadratic : public OptProblem
{
public:
  Quadratic(std::vector<double> w, PhaseField a, int degenerate_after = -1)
      : w_(std::move(w)), a_(std::move(a)), degenerate_after_(degenerate_after)
  {
  }

  [[nodiscard]] Evaluation evaluate(const PhaseField& phi) const override
  {
    Evaluation ev;
    const PhaseField d = phi - a_;
    for (int v = 0; v < phi.n_nodes(); ++v)
    {
      for (int i = 0; i < phi.n_phases(); ++i)
      {
        ev.J += 0.5 * w_[static_cast<std::size_t>(v)] * d(v, i) * d(v, i);
      }
    }
    ev.psi = ev.J;
    return ev;
  }
  [[nodiscard]] PhaseField gradient(const PhaseField& phi, const Evaluation&) const override
  {
    if (degenerate_after_ >= 0 && ++calls_ > degenerate_after_)
    {
      throw DegenerateEigenvalueError("mock cluster", 1, 1, 3);
    }
    PhaseField g = phi - a_;
    for (int v = 0; v < phi.n_nodes(); ++v)
    {
      for (int i = 0; i < phi.n_phases(); ++i)
      {
        g(v, i) *= w_[static_cast<std::size_t>(v)];
      }
    }
    return g;
  }
  [[nodiscard]] double directional_derivative(const PhaseField& phi, const Evaluation& ev,
                                              const PhaseField& d) const override
  {
    return dot(gradient(phi, ev), d);
  }
  [[nodiscard]] std::vector<PhaseField> surrogate_gradients(const PhaseField&, const Evaluation&) const override
  {
    return {};
  }
  [[nodiscard]] const ObjectiveSpec& spec() const override { return spec_; }

private:
  std::vector<double> w_;
  PhaseField a_;
  int degenerate_after_;
  mutable int calls_ = 0;
  ObjectiveSpec spec_;
};

double max_abs(const PhaseField& a)
{
  double m = 0.0;
  for (double v : a.values())
  {
    m = std::max(m, std::abs(v));
  }
  return m;
}

}  // namespace

TEST_CASE("quadratic model converges to the projection")
{
  const Mesh mesh(6, 6, 1.0, 1.0, BoundarySpec::cantilever());
  const AdmissibleSet set(mesh, {0.3, 0.3, 0.4}, {Box{0, 0, 0.2, 0.2}}, {});
  std::mt19937_64 rng(61);
  const PhaseField a = testutil::random_field(mesh.num_vertices(), 3, rng, -0.5, 1.5);
  const Quadratic q(mesh.lumped_weights(), a);
  OptOptions oo;
  oo.max_iter = 500;
  oo.conv_tol = 1e-10;
  const OptResult res = projected_gradient_solve(q, set, set.random_point(rng), oo);
  CHECK(res.termination == Termination::Converged);
  CHECK(max_abs(res.phi - set.project(a)) <= 1e-8);
  for (std::size_t k = 1; k < res.history.size(); ++k)
  {
    CHECK(res.history[k].J <= res.history[k - 1].J);
  }
  CHECK(res.vi_residual >= -1e-8);
  CHECK(set.contains(res.phi));
}

TEST_CASE("tiny step predicts the decrease")
{
  const Mesh mesh(5, 5, 1.0, 1.0, BoundarySpec::cantilever());
  const int nv = mesh.num_vertices();
  std::mt19937_64 rng(62);
  const PhaseField phi = testutil::interior_phi(nv, 3, rng);
  const AdmissibleSet probe_set(mesh, {0.3, 0.3, 0.4});
  const auto mean = probe_set.mean_of(phi);
  const AdmissibleSet set(mesh, mean);
  const PhaseField a = testutil::random_field(nv, 3, rng, -2.0, 2.0);
  const Quadratic q(mesh.lumped_weights(), a);
  const Evaluation ev = q.evaluate(phi);
  const PhaseField g = q.gradient(phi, ev);

  // Tangential part of W^-1 g: zero node sums and zero weighted mean.
  const auto& w = mesh.lumped_weights();
  PhaseField t(nv, 3);
  for (int v = 0; v < nv; ++v)
  {
    double s = 0.0;
    for (int i = 0; i < 3; ++i)
    {
      t(v, i) = g(v, i) / w[static_cast<std::size_t>(v)];
      s += t(v, i);
    }
    for (int i = 0; i < 3; ++i)
    {
      t(v, i) -= s / 3.0;
    }
  }
  for (int i = 0; i < 3; ++i)
  {
    double s = 0.0;
    for (int v = 0; v < nv; ++v)
    {
      s += w[static_cast<std::size_t>(v)] * t(v, i);
    }
    for (int v = 0; v < nv; ++v)
    {
      t(v, i) -= s / set.total_weight();
    }
  }
  const double s = 1e-6;
  OptOptions oo;
  oo.max_iter = 1;
  oo.step0 = s;
  oo.history_probes = 0;
  oo.final_probes = 0;
  const OptResult res = projected_gradient_solve(q, set, phi, oo);
  REQUIRE(res.history.size() == 2u);
  const double predicted = s * set.inner(t, t);
  const double observed = res.history[0].J - res.history[1].J;
  CHECK(res.history[1].step == s);
  CHECK(std::abs(observed - predicted) <= 0.2 * predicted);
}

TEST_CASE("degenerate target stops with a diagnostic")
{
  const Mesh mesh(4, 4, 1.0, 1.0, BoundarySpec::cantilever());
  const AdmissibleSet set(mesh, {0.5, 0.5});
  std::mt19937_64 rng(63);
  const Quadratic q(mesh.lumped_weights(), testutil::random_field(mesh.num_vertices(), 2, rng), 1);
  const OptResult res = projected_gradient_solve(q, set, set.random_point(rng), OptOptions{});
  CHECK(res.termination == Termination::EigenvalueDegenerated);
  CHECK(res.message.find("mock cluster") != std::string::npos);
  CHECK(to_string(res.termination) == "eigenvalue_degenerated");
}

TEST_CASE("interface energy alone decreases monotonically")
{
  const Mesh mesh(8, 8, 1.0, 1.0, BoundarySpec::cantilever());
  const int nv = mesh.num_vertices();
  const MaterialSet ms = testutil::two_phase(0.2);
  ObjectiveSpec s;
  s.weights = {0.0};
  s.gamma = 10.0;
  s.eps = 0.2;
  const EigenProblem prob(mesh, MaterialLaw(ms), s);
  const AdmissibleSet set(mesh, {0.5, 0.5});
  std::mt19937_64 rng(64);
  std::uniform_real_distribution<double> u(-0.2, 0.2);
  PhaseField phi0(nv, 2);
  for (int v = 0; v < nv; ++v)
  {
    phi0(v, 0) = 0.5 + u(rng);
    phi0(v, 1) = 1.0 - phi0(v, 0);
  }
  phi0 = set.project(phi0);
  OptOptions oo;
  oo.max_iter = 60;
  const OptResult res = projected_gradient_solve(prob, set, phi0, oo);
  for (std::size_t k = 1; k < res.history.size(); ++k)
  {
    CHECK(res.history[k].gl <= res.history[k - 1].gl);
  }
  REQUIRE(res.history.size() > 2u);
  CHECK(res.history.back().gl < 0.5 * res.history.front().gl);
  CHECK(set.contains(res.phi));
}

TEST_CASE("first eigenvalue maximization on a small beam")
{
  const Mesh mesh(12, 6, 2.0, 1.0, BoundarySpec::cantilever());
  ObjectiveSpec s;
  s.kind = PsiKind::NegMinFirst;
  s.gamma = 0.0;
  s.eps = 0.1;
  const EigenProblem prob(mesh, MaterialLaw(testutil::two_phase(0.1)), s);
  const AdmissibleSet set(mesh, {0.4, 0.6});
  std::mt19937_64 rng(65);
  OptOptions oo;
  oo.max_iter = 25;
  const OptResult res = projected_gradient_solve(prob, set, set.random_point(rng), oo);
  REQUIRE(res.history.size() > 2u);
  for (std::size_t k = 1; k < res.history.size(); ++k)
  {
    CHECK(res.history[k].J <= res.history[k - 1].J);
    CHECK(res.history[k].lambdas[0] >= res.history[k - 1].lambdas[0]);
  }
  CHECK(set.contains(res.phi));
}

TEST_CASE("minimizing an eigenvalue respects the lower bound")
{
  const Mesh mesh(8, 4, 2.0, 1.0, BoundarySpec::cantilever());
  ObjectiveSpec s;
  s.indices = {1};
  s.weights = {1.0};
  s.gamma = 1e-3;
  s.lower_bound = 0.0;
  const EigenProblem prob(mesh, MaterialLaw(testutil::two_phase(0.3)), s);
  const AdmissibleSet set(mesh, {0.5, 0.5});
  std::mt19937_64 rng(66);
  OptOptions oo;
  oo.max_iter = 15;
  const OptResult res = projected_gradient_solve(prob, set, set.random_point(rng), oo);
  for (const auto& r : res.history)
  {
    CHECK(r.J >= -s.lower_bound);
  }
}

TEST_CASE("variational inequality residual")
{
  const Mesh mesh(6, 6, 1.0, 1.0, BoundarySpec::cantilever());
  ObjectiveSpec s;
  s.gamma = 1e-2;
  const EigenProblem prob(mesh, MaterialLaw(testutil::three_phase()), s);
  const AdmissibleSet set(mesh, {0.3, 0.3, 0.4});
  std::mt19937_64 rng(67);
  const PhaseField phi = set.random_point(rng);
  const Evaluation ev = prob.evaluate(phi);
  CHECK(std::abs(vi_residual(prob, set, phi, ev, {phi})) <= 1e-14);
  const auto probes = make_probes(set, 20, 5);
  for (const auto& p : probes)
  {
    CHECK(set.contains(p));
  }
  CHECK(vi_residual(prob, set, phi, ev, probes) < 0.0);
  PhaseField bad = phi;
  bad(0, 0) += 0.5;
  CHECK_THROWS_AS((void)vi_residual(prob, set, phi, ev, {bad}), std::invalid_argument);
  // Same seed, same probes.
  const auto again = make_probes(set, 20, 5);
  CHECK(max_abs(again[7] - probes[7]) == 0.0);
}

TEST_CASE("invalid options and start points")
{
  const Mesh mesh(4, 4, 1.0, 1.0, BoundarySpec::cantilever());
  const AdmissibleSet set(mesh, {0.5, 0.5});
  std::mt19937_64 rng(68);
  const Quadratic q(mesh.lumped_weights(), testutil::random_field(mesh.num_vertices(), 2, rng));
  PhaseField off = set.random_point(rng);
  off(0, 0) += 0.2;
  CHECK_THROWS_AS(projected_gradient_solve(q, set, off, OptOptions{}), std::invalid_argument);
  OptOptions bad;
  bad.backtrack_beta = 1.5;
  CHECK_THROWS_AS(projected_gradient_solve(q, set, set.random_point(rng), bad), std::invalid_argument);
}
