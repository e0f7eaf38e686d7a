// SPDX-License-Identifier: Apache-2.0

#include "eigentopo/projection.hpp"

#include <algorithm>
#include <array>
#include <functional>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "eigentopo/errors.hpp"

namespace eigentopo {

void project_simplex(std::span<const double> y, std::span<double> out)
{
  const std::size_t n = y.size();
  std::array<double, 16> u{};
  if (n == 0 || n > u.size() || out.size() != n)
  {
    throw std::invalid_argument("simplex projection: bad dimension");
  }
  std::copy(y.begin(), y.end(), u.begin());
  std::sort(u.begin(), u.begin() + static_cast<std::ptrdiff_t>(n), std::greater<>());
  double csum = 0.0;
  double tau = 0.0;
  for (std::size_t j = 0; j < n; ++j)
  {
    csum += u[j];
    const double t = (csum - 1.0) / static_cast<double>(j + 1);
    if (u[j] - t > 0.0)
    {
      tau = t;
    }
  }
  for (std::size_t i = 0; i < n; ++i)
  {
    out[i] = std::max(y[i] - tau, 0.0);
  }
}

AdmissibleSet::AdmissibleSet(const Mesh& mesh, std::vector<double> mean, const std::vector<Box>& solid_boxes,
                             const std::vector<Box>& void_boxes)
    : weights_(mesh.lumped_weights()), mean_(std::move(mean)),
      regions_(static_cast<std::size_t>(mesh.num_vertices()), NodeRegion::Free)
{
  for (int v = 0; v < mesh.num_vertices(); ++v)
  {
    const auto& p = mesh.vertices()[static_cast<std::size_t>(v)];
    const bool solid = std::any_of(solid_boxes.begin(), solid_boxes.end(), [&](const Box& b) { return b.contains(p); });
    const bool hole = std::any_of(void_boxes.begin(), void_boxes.end(), [&](const Box& b) { return b.contains(p); });
    if (solid && hole)
    {
      throw InfeasibleError("admissible set: vertex " + std::to_string(v) + " lies in both a solid and a void box");
    }
    regions_[static_cast<std::size_t>(v)] = solid ? NodeRegion::Solid : (hole ? NodeRegion::Void : NodeRegion::Free);
  }
  total_ = std::accumulate(weights_.begin(), weights_.end(), 0.0);
  check_feasible();
}

AdmissibleSet::AdmissibleSet(std::vector<double> weights, std::vector<double> mean, std::vector<NodeRegion> regions)
    : weights_(std::move(weights)), mean_(std::move(mean)), regions_(std::move(regions))
{
  if (regions_.size() != weights_.size())
  {
    throw std::invalid_argument("admissible set: one region flag per node expected");
  }
  for (double w : weights_)
  {
    if (!(w > 0.0))
    {
      throw std::invalid_argument("admissible set: weights must be positive");
    }
  }
  total_ = std::accumulate(weights_.begin(), weights_.end(), 0.0);
  check_feasible();
}

void AdmissibleSet::check_feasible() const
{
  const int n = n_phases();
  if (n < 2 || n > 16)
  {
    throw std::invalid_argument("admissible set: mean must have between 2 and 16 components");
  }
  double sum = 0.0;
  for (double m : mean_)
  {
    if (!(m > 0.0 && m < 1.0))
    {
      throw std::invalid_argument("admissible set: mean components must lie in (0,1)");
    }
    sum += m;
  }
  if (std::abs(sum - 1.0) > 1e-12)
  {
    throw std::invalid_argument("admissible set: mean not on simplex (sum = " + std::to_string(sum) + ")");
  }
  double w_void = 0.0;
  double w_free = 0.0;
  for (std::size_t v = 0; v < weights_.size(); ++v)
  {
    if (regions_[v] == NodeRegion::Void)
    {
      w_void += weights_[v];
    }
    else if (regions_[v] == NodeRegion::Free)
    {
      w_free += weights_[v];
    }
  }
  const double tol = 1e-12 * total_;
  const double void_target = mean_.back() * total_;
  if (w_void > void_target + tol)
  {
    throw InfeasibleError("admissible set: fixed void region exceeds the void mean budget");
  }
  if (void_target - w_void > w_free + tol)
  {
    throw InfeasibleError("admissible set: fixed solid region leaves too little room for the void mean");
  }
}

std::vector<double> AdmissibleSet::mean_of(const PhaseField& phi) const
{
  std::vector<double> out(static_cast<std::size_t>(phi.n_phases()), 0.0);
  for (int v = 0; v < phi.n_nodes(); ++v)
  {
    for (int i = 0; i < phi.n_phases(); ++i)
    {
      out[static_cast<std::size_t>(i)] += weights_[static_cast<std::size_t>(v)] * phi(v, i);
    }
  }
  for (double& x : out)
  {
    x /= total_;
  }
  return out;
}

double AdmissibleSet::inner(const PhaseField& a, const PhaseField& b) const
{
  double s = 0.0;
  for (int v = 0; v < a.n_nodes(); ++v)
  {
    double t = 0.0;
    for (int i = 0; i < a.n_phases(); ++i)
    {
      t += a(v, i) * b(v, i);
    }
    s += weights_[static_cast<std::size_t>(v)] * t;
  }
  return s;
}

namespace {

struct DualState
{
  PhaseField phi;
  Eigen::VectorXd residual;  // target - achieved
  double dual = 0.0;
  Eigen::MatrixXd hessian;   // sum_v w_v J_v
};

}  // namespace

PhaseField AdmissibleSet::project(const PhaseField& y) const
{
  const int np = n_phases();
  const int nn = n_nodes();
  if (y.n_nodes() != nn || y.n_phases() != np)
  {
    throw std::invalid_argument("projection: field shape does not match the admissible set");
  }
  Eigen::VectorXd target(np);
  for (int i = 0; i < np; ++i)
  {
    target(i) = mean_[static_cast<std::size_t>(i)] * total_;
  }
  for (int v = 0; v < nn; ++v)
  {
    if (regions_[static_cast<std::size_t>(v)] == NodeRegion::Void)
    {
      target(np - 1) -= weights_[static_cast<std::size_t>(v)];
    }
  }

  auto evaluate = [&](const Eigen::VectorXd& c, bool with_hessian) {
    DualState s;
    s.phi = PhaseField(nn, np);
    s.residual = target;
    s.dual = c.dot(target);
    if (with_hessian)
    {
      s.hessian = Eigen::MatrixXd::Zero(np, np);
    }
    std::array<double, 16> shifted{};
    std::array<double, 16> proj{};
    for (int v = 0; v < nn; ++v)
    {
      const auto vs = static_cast<std::size_t>(v);
      auto out = s.phi.node(v);
      if (regions_[vs] == NodeRegion::Void)
      {
        out[static_cast<std::size_t>(np - 1)] = 1.0;
        continue;
      }
      const int active = regions_[vs] == NodeRegion::Solid ? np - 1 : np;
      for (int i = 0; i < active; ++i)
      {
        shifted[static_cast<std::size_t>(i)] = y(v, i) + c(i);
      }
      project_simplex(std::span<const double>(shifted.data(), static_cast<std::size_t>(active)),
                      std::span<double>(proj.data(), static_cast<std::size_t>(active)));
      const double w = weights_[vs];
      double local = 0.0;
      int support = 0;
      for (int i = 0; i < np; ++i)
      {
        const double p = i < active ? proj[static_cast<std::size_t>(i)] : 0.0;
        out[static_cast<std::size_t>(i)] = p;
        s.residual(i) -= w * p;
        local += 0.5 * (p - y(v, i)) * (p - y(v, i)) - c(i) * p;
        support += (i < active && p > 0.0) ? 1 : 0;
      }
      s.dual += w * local;
      if (with_hessian && support > 0)
      {
        for (int i = 0; i < active; ++i)
        {
          if (!(proj[static_cast<std::size_t>(i)] > 0.0))
          {
            continue;
          }
          for (int j = 0; j < active; ++j)
          {
            if (proj[static_cast<std::size_t>(j)] > 0.0)
            {
              s.hessian(i, j) += w * ((i == j ? 1.0 : 0.0) - 1.0 / support);
            }
          }
        }
      }
    }
    return s;
  };

  const double tol = 1e-14 * total_;
  Eigen::VectorXd c = Eigen::VectorXd::Zero(np);
  DualState cur = evaluate(c, true);
  for (int iter = 0; iter < 200; ++iter)
  {
    const double rnorm = cur.residual.lpNorm<Eigen::Infinity>();
    if (rnorm <= tol)
    {
      return cur.phi;
    }
    const double mu = rnorm + 1e-14 * total_;
    Eigen::MatrixXd h = cur.hessian + mu * Eigen::MatrixXd::Identity(np, np);
    Eigen::VectorXd delta = h.ldlt().solve(cur.residual);
    delta.array() -= delta.mean();
    const double slope = delta.dot(cur.residual);
    bool accepted = false;
    double t = 1.0;
    for (int ls = 0; ls < 60; ++ls, t *= 0.5)
    {
      const Eigen::VectorXd trial = c + t * delta;
      DualState next = evaluate(trial, false);
      const double rn = next.residual.lpNorm<Eigen::Infinity>();
      if (next.dual >= cur.dual + 1e-4 * t * slope || rn <= (1.0 - 1e-4 * t) * rnorm)
      {
        c = trial;
        cur = evaluate(c, true);
        accepted = true;
        break;
      }
    }
    if (!accepted)
    {
      break;
    }
  }
  if (cur.residual.lpNorm<Eigen::Infinity>() <= 1e-11 * total_)
  {
    return cur.phi;
  }
  throw NumericalError("projection: mean balance did not converge (residual " +
                       std::to_string(cur.residual.lpNorm<Eigen::Infinity>() / total_) + ")");
}

bool AdmissibleSet::contains(const PhaseField& phi, double simplex_tol, double mean_tol) const
{
  if (phi.n_nodes() != n_nodes() || phi.n_phases() != n_phases())
  {
    return false;
  }
  const int np = n_phases();
  for (int v = 0; v < n_nodes(); ++v)
  {
    double sum = 0.0;
    for (int i = 0; i < np; ++i)
    {
      if (phi(v, i) < -simplex_tol)
      {
        return false;
      }
      sum += phi(v, i);
    }
    if (std::abs(sum - 1.0) > simplex_tol)
    {
      return false;
    }
    const NodeRegion r = regions_[static_cast<std::size_t>(v)];
    if (r == NodeRegion::Solid && phi(v, np - 1) != 0.0)
    {
      return false;
    }
    if (r == NodeRegion::Void)
    {
      for (int i = 0; i < np; ++i)
      {
        if (phi(v, i) != (i == np - 1 ? 1.0 : 0.0))
        {
          return false;
        }
      }
    }
  }
  const auto m = mean_of(phi);
  for (int i = 0; i < np; ++i)
  {
    if (std::abs(m[static_cast<std::size_t>(i)] - mean_[static_cast<std::size_t>(i)]) > mean_tol)
    {
      return false;
    }
  }
  return true;
}

PhaseField AdmissibleSet::random_point(std::mt19937_64& rng) const
{
  std::exponential_distribution<double> expo(1.0);
  const int np = n_phases();
  PhaseField raw(n_nodes(), np);
  for (int v = 0; v < n_nodes(); ++v)
  {
    double sum = 0.0;
    for (int i = 0; i < np; ++i)
    {
      raw(v, i) = expo(rng);
      sum += raw(v, i);
    }
    for (int i = 0; i < np; ++i)
    {
      raw(v, i) /= sum;
    }
  }
  return project(raw);
}

}  // namespace eigentopo
