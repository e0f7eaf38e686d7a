// SPDX-License-Identifier: Apache-2.0

#include "eigentopo/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "eigentopo/errors.hpp"

namespace eigentopo {

std::string to_string(Termination t)
{
  switch (t)
  {
    case Termination::Converged:
      return "converged";
    case Termination::MaxIter:
      return "max_iter";
    case Termination::EigenvalueDegenerated:
      return "eigenvalue_degenerated";
  }
  return "unknown";
}

std::vector<PhaseField> make_probes(const AdmissibleSet& set, int count, std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  std::vector<PhaseField> probes;
  probes.reserve(static_cast<std::size_t>(std::max(count, 0)));
  for (int k = 0; k < count; ++k)
  {
    probes.push_back(set.random_point(rng));
  }
  return probes;
}

namespace {

void check_probe(const AdmissibleSet& set, const PhaseField& probe)
{
  if (!set.contains(probe))
  {
    throw std::invalid_argument("VI residual: probe is not admissible");
  }
}

double min_over_probes(const PhaseField& g, const PhaseField& phi, const AdmissibleSet& set,
                       const std::vector<PhaseField>& probes)
{
  double best = std::numeric_limits<double>::infinity();
  for (const auto& theta : probes)
  {
    check_probe(set, theta);
    best = std::min(best, dot(g, theta) - dot(g, phi));
  }
  return best;
}

// Projected trial point P(phi - s W^{-1} g).
PhaseField trial_point(const AdmissibleSet& set, const PhaseField& phi, const PhaseField& g, double s)
{
  PhaseField y = phi;
  const auto& w = set.weights();
  for (int v = 0; v < phi.n_nodes(); ++v)
  {
    const double scale = s / w[static_cast<std::size_t>(v)];
    for (int i = 0; i < phi.n_phases(); ++i)
    {
      y(v, i) -= scale * g(v, i);
    }
  }
  return set.project(y);
}

double vi_with(const OptProblem& problem, const AdmissibleSet& set, const PhaseField& phi, const Evaluation& ev,
               const std::vector<PhaseField>& probes, const PhaseField* grad)
{
  if (probes.empty())
  {
    return 0.0;
  }
  if (grad != nullptr)
  {
    return min_over_probes(*grad, phi, set, probes);
  }
  double best = std::numeric_limits<double>::infinity();
  for (const auto& theta : probes)
  {
    check_probe(set, theta);
    best = std::min(best, problem.directional_derivative(phi, ev, theta - phi));
  }
  return best;
}

}  // namespace

double vi_residual(const OptProblem& problem, const AdmissibleSet& set, const PhaseField& phi, const Evaluation& ev,
                   const std::vector<PhaseField>& probes)
{
  if (!problem.surrogate_gradients(phi, ev).empty())
  {
    return vi_with(problem, set, phi, ev, probes, nullptr);
  }
  const PhaseField g = problem.gradient(phi, ev);
  return vi_with(problem, set, phi, ev, probes, &g);
}

OptResult projected_gradient_solve(const OptProblem& problem, const AdmissibleSet& set, const PhaseField& phi0,
                                   const OptOptions& opts,
                                   const std::function<void(const IterRecord&, const PhaseField&)>& on_iter)
{
  if (!set.contains(phi0))
  {
    throw std::invalid_argument("optimizer: initial field is not admissible");
  }
  if (!(opts.backtrack_beta > 0.0 && opts.backtrack_beta < 1.0) || !(opts.step0 > 0.0) ||
      !(opts.armijo_sigma > 0.0 && opts.armijo_sigma < 1.0))
  {
    throw std::invalid_argument("optimizer: invalid line-search parameters");
  }
  const std::vector<PhaseField> probes = make_probes(set, opts.history_probes, opts.seed);
  const double norm_scale = std::sqrt(set.total_weight());

  OptResult res;
  res.phi = phi0;
  Evaluation ev = problem.evaluate(res.phi);

  // Gradient candidates at the current iterate; a single entry unless the
  // first eigenvalue is clustered under -lambda_1.
  auto candidates = [&](const PhaseField& phi, const Evaluation& e, std::vector<PhaseField>& out) {
    out = problem.surrogate_gradients(phi, e);
    if (!out.empty())
    {
      return true;
    }
    out.push_back(problem.gradient(phi, e));
    return false;
  };

  auto record = [&](int iter, double step, double vi) {
    IterRecord r;
    r.iter = iter;
    r.J = ev.J;
    r.psi = ev.psi;
    r.gl = ev.gl;
    r.lambdas = ev.lambdas;
    r.step = step;
    r.vi_residual = vi;
    res.history.push_back(r);
    if (on_iter)
    {
      on_iter(r, res.phi);
    }
  };

  std::vector<PhaseField> grads;
  bool surrogate = false;
  try
  {
    surrogate = candidates(res.phi, ev, grads);
  }
  catch (const DegenerateEigenvalueError& e)
  {
    record(0, 0.0, std::numeric_limits<double>::quiet_NaN());
    res.termination = Termination::EigenvalueDegenerated;
    res.message = e.what();
    res.final_eval = ev;
    return res;
  }
  record(0, 0.0, vi_with(problem, set, res.phi, ev, probes, surrogate ? nullptr : &grads[0]));

  double s = opts.step0;
  res.termination = Termination::MaxIter;
  for (int iter = 1; iter <= opts.max_iter; ++iter)
  {
    bool accepted = false;
    bool converged = false;
    PhaseField next;
    Evaluation next_ev;
    std::size_t used = 0;
    for (int bt = 0; bt <= opts.max_backtracks; ++bt)
    {
      double slope = std::numeric_limits<double>::infinity();
      PhaseField cand;
      for (std::size_t c = 0; c < grads.size(); ++c)
      {
        PhaseField p = trial_point(set, res.phi, grads[c], s);
        const PhaseField d = p - res.phi;
        const double sl = surrogate ? problem.directional_derivative(res.phi, ev, d) : dot(grads[c], d);
        if (sl < slope)
        {
          slope = sl;
          cand = std::move(p);
          used = c;
        }
      }
      const PhaseField d = cand - res.phi;
      const double move = std::sqrt(set.inner(d, d)) / (s * norm_scale);
      if (move < opts.conv_tol || !(slope < 0.0))
      {
        converged = true;
        break;
      }
      Evaluation trial = problem.evaluate(cand);
      if (trial.J <= ev.J + opts.armijo_sigma * slope)
      {
        next = std::move(cand);
        next_ev = std::move(trial);
        accepted = true;
        break;
      }
      s *= opts.backtrack_beta;
    }
    if (converged)
    {
      res.termination = Termination::Converged;
      break;
    }
    if (!accepted)
    {
      throw NumericalError("optimizer: line search failed after " + std::to_string(opts.max_backtracks) +
                           " backtracks");
    }

    const PhaseField dphi = next - res.phi;
    const PhaseField g_old = grads[used];
    const double step_taken = s;
    res.phi = std::move(next);
    ev = std::move(next_ev);
    try
    {
      surrogate = candidates(res.phi, ev, grads);
    }
    catch (const DegenerateEigenvalueError& e)
    {
      record(iter, step_taken, std::numeric_limits<double>::quiet_NaN());
      res.termination = Termination::EigenvalueDegenerated;
      res.message = e.what();
      break;
    }
    record(iter, step_taken, vi_with(problem, set, res.phi, ev, probes, surrogate ? nullptr : &grads[0]));
    if (std::sqrt(set.inner(dphi, dphi)) / (step_taken * norm_scale) < opts.conv_tol)
    {
      res.termination = Termination::Converged;
      break;
    }

    // Barzilai-Borwein step for the next iteration in the W metric.
    const double num = set.inner(dphi, dphi);
    const double den = dot(dphi, grads[0] - g_old);
    s = (den > 0.0 && num > 0.0) ? std::clamp(num / den, 1e-10 * opts.step0, 1e10 * opts.step0) : opts.step0;
  }

  res.final_eval = ev;
  if (res.termination != Termination::EigenvalueDegenerated)
  {
    const std::vector<PhaseField> final_probes = make_probes(set, opts.final_probes, opts.seed + 1);
    res.vi_residual = vi_with(problem, set, res.phi, ev, final_probes, surrogate ? nullptr : &grads[0]);
  }
  else
  {
    res.vi_residual = std::numeric_limits<double>::quiet_NaN();
  }
  return res;
}

}  // namespace eigentopo
