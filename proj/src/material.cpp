// SPDX-License-Identifier: Apache-2.0

#include "eigentopo/material.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace eigentopo {

Lame plane_strain_lame(double young, double poisson)
{
  return {young * poisson / ((1.0 + poisson) * (1.0 - 2.0 * poisson)), young / (2.0 * (1.0 + poisson))};
}

void MaterialSet::validate() const
{
  if (n_phases < 2)
  {
    throw std::invalid_argument("materials: need at least one solid phase and the void");
  }
  if (n_phases > 16)
  {
    throw std::invalid_argument("materials: at most 16 phases are supported");
  }
  const auto solids = static_cast<std::size_t>(n_phases - 1);
  if (densities.size() != solids || youngs.size() != solids || poissons.size() != solids)
  {
    throw std::invalid_argument("materials: density/young/poisson lists must have N-1 = " +
                                std::to_string(solids) + " entries");
  }
  for (std::size_t i = 0; i < solids; ++i)
  {
    if (!(densities[i] > 0.0) || !(youngs[i] > 0.0))
    {
      throw std::invalid_argument("materials: densities and Young's moduli must be positive");
    }
    if (!(poissons[i] > 0.0 && poissons[i] < 0.5))
    {
      throw std::invalid_argument("materials: Poisson ratios must lie in (0, 0.5)");
    }
  }
  if (!(void_density_base > 0.0) || !(void_young_base > 0.0))
  {
    throw std::invalid_argument("materials: void base density and modulus must be positive");
  }
  if (!(void_poisson > 0.0 && void_poisson < 0.5))
  {
    throw std::invalid_argument("materials: void Poisson ratio must lie in (0, 0.5)");
  }
  if (!(interface_eps > 0.0))
  {
    throw std::invalid_argument("materials: interface eps must be positive");
  }
}

double MaterialSet::scaled_density(int i) const
{
  if (i == n_phases - 1)
  {
    return interface_eps * interface_eps * void_density_base;
  }
  return densities.at(static_cast<std::size_t>(i));
}

Lame MaterialSet::scaled_lame(int i) const
{
  if (i == n_phases - 1)
  {
    return plane_strain_lame(interface_eps * interface_eps * void_young_base, void_poisson);
  }
  return plane_strain_lame(youngs.at(static_cast<std::size_t>(i)), poissons.at(static_cast<std::size_t>(i)));
}

std::vector<double> MaterialSet::scaled_densities() const
{
  std::vector<double> out;
  for (int i = 0; i < n_phases; ++i)
  {
    out.push_back(scaled_density(i));
  }
  return out;
}

std::vector<Lame> MaterialSet::scaled_lames() const
{
  std::vector<Lame> out;
  for (int i = 0; i < n_phases; ++i)
  {
    out.push_back(scaled_lame(i));
  }
  return out;
}

CutoffParams CutoffParams::for_materials(const MaterialSet& mats)
{
  mats.validate();
  const auto rho = mats.scaled_densities();
  const double big = *std::max_element(rho.begin(), rho.end());
  const double small = *std::min_element(rho.begin(), rho.end());
  const double delta_rho = small / (2.0 * big * mats.n_phases);

  double mu_min = std::numeric_limits<double>::max();
  double sum = 0.0;
  for (const auto& l : mats.scaled_lames())
  {
    mu_min = std::min(mu_min, l.mu);
    sum += l.mu + l.lambda;
  }
  const double delta_c = mu_min / (2.0 * sum);
  return CutoffParams{std::min(delta_rho, delta_c)};
}

double cutoff(double s, const CutoffParams& p)
{
  const double d = p.delta;
  const double w = p.blend_width();
  if (s <= -d - w)
  {
    return -d;
  }
  if (s < -d + w)
  {
    const double r = s + d + w;
    return -d + r * r / (4.0 * w);
  }
  if (s <= 1.0 + d - w)
  {
    return s;
  }
  if (s < 1.0 + d + w)
  {
    const double r = 1.0 + d + w - s;
    return 1.0 + d - r * r / (4.0 * w);
  }
  return 1.0 + d;
}

double cutoff_deriv(double s, const CutoffParams& p)
{
  const double d = p.delta;
  const double w = p.blend_width();
  if (s <= -d - w)
  {
    return 0.0;
  }
  if (s < -d + w)
  {
    return (s + d + w) / (2.0 * w);
  }
  if (s <= 1.0 + d - w)
  {
    return 1.0;
  }
  if (s < 1.0 + d + w)
  {
    return (1.0 + d + w - s) / (2.0 * w);
  }
  return 0.0;
}

MaterialLaw::MaterialLaw(MaterialSet mats) : MaterialLaw(mats, CutoffParams::for_materials(mats)) {}

MaterialLaw::MaterialLaw(MaterialSet mats, CutoffParams cutoff)
    : mats_(std::move(mats)), cutoff_(cutoff)
{
  mats_.validate();
  if (!(cutoff_.delta > 0.0))
  {
    throw std::invalid_argument("cutoff: delta must be positive");
  }
  rho_ = mats_.scaled_densities();
  lame_ = mats_.scaled_lames();
}

void MaterialLaw::check_size(std::span<const double> phi) const
{
  if (static_cast<int>(phi.size()) != mats_.n_phases)
  {
    throw std::invalid_argument("material law: phase vector has wrong length");
  }
}

double MaterialLaw::density(std::span<const double> phi) const
{
  check_size(phi);
  double r = 0.0;
  for (std::size_t i = 0; i < phi.size(); ++i)
  {
    r += rho_[i] * cutoff(phi[i], cutoff_);
  }
  return r;
}

double MaterialLaw::density_deriv(std::span<const double> phi, std::span<const double> h) const
{
  check_size(phi);
  check_size(h);
  double r = 0.0;
  for (std::size_t i = 0; i < phi.size(); ++i)
  {
    r += rho_[i] * cutoff_deriv(phi[i], cutoff_) * h[i];
  }
  return r;
}

Lame MaterialLaw::effective_lame(std::span<const double> phi) const
{
  check_size(phi);
  Lame out;
  for (std::size_t i = 0; i < phi.size(); ++i)
  {
    const double s = cutoff(phi[i], cutoff_);
    out.lambda += s * lame_[i].lambda;
    out.mu += s * lame_[i].mu;
  }
  return out;
}

Lame MaterialLaw::effective_lame_deriv(std::span<const double> phi, std::span<const double> h) const
{
  check_size(phi);
  check_size(h);
  Lame out;
  for (std::size_t i = 0; i < phi.size(); ++i)
  {
    const double s = cutoff_deriv(phi[i], cutoff_) * h[i];
    out.lambda += s * lame_[i].lambda;
    out.mu += s * lame_[i].mu;
  }
  return out;
}

namespace {

void require_symmetric(const Eigen::Matrix2d& a)
{
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  if (std::abs(a(0, 1) - a(1, 0)) > 1e-14 * scale)
  {
    throw std::invalid_argument("elasticity: strain must be symmetric");
  }
}

}  // namespace

Eigen::Matrix2d isotropic_stress(const Lame& lame, const Eigen::Matrix2d& strain)
{
  return 2.0 * lame.mu * strain + lame.lambda * strain.trace() * Eigen::Matrix2d::Identity();
}

Eigen::Matrix2d MaterialLaw::elasticity_apply(std::span<const double> phi, const Eigen::Matrix2d& strain) const
{
  require_symmetric(strain);
  return isotropic_stress(effective_lame(phi), strain);
}

Eigen::Matrix2d MaterialLaw::elasticity_deriv_apply(std::span<const double> phi, std::span<const double> h,
                                                    const Eigen::Matrix2d& strain) const
{
  require_symmetric(strain);
  return isotropic_stress(effective_lame_deriv(phi, h), strain);
}

double MaterialLaw::density_lower_bound() const
{
  const double big = *std::max_element(rho_.begin(), rho_.end());
  const double small = *std::min_element(rho_.begin(), rho_.end());
  return small - cutoff_.delta * big * mats_.n_phases;
}

double MaterialLaw::coercivity_bound() const
{
  double mu_min = std::numeric_limits<double>::max();
  double sum = 0.0;
  for (const auto& l : lame_)
  {
    mu_min = std::min(mu_min, l.mu);
    sum += l.mu + l.lambda;
  }
  return 2.0 * mu_min - 2.0 * cutoff_.delta * sum;
}

double bulk_potential(std::span<const double> phi)
{
  double sq = 0.0;
  for (double v : phi)
  {
    sq += v * v;
  }
  return 0.5 * (1.0 - sq);
}

std::vector<double> bulk_potential_deriv(std::span<const double> phi)
{
  std::vector<double> out(phi.begin(), phi.end());
  for (double& v : out)
  {
    v = -v;
  }
  return out;
}

}  // namespace eigentopo
