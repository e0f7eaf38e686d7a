// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

namespace eigentopo {

/// Isotropic Lame pair.
struct Lame
{
  double lambda = 0.0;
  double mu = 0.0;
};

/// Plane-strain Lame parameters from Young's modulus and Poisson ratio.
Lame plane_strain_lame(double young, double poisson);

/// Material data for N phases; the last phase is void.
///
/// The void phase density and stiffness are eps^2 times their base values.
struct MaterialSet
{
  int n_phases = 2;
  std::vector<double> densities{1.0};  // N-1 entries
  std::vector<double> youngs{1.0};     // N-1 entries
  std::vector<double> poissons{0.3};   // N-1 entries
  double void_density_base = 1.0;
  double void_young_base = 1.0;
  double void_poisson = 0.3;
  double interface_eps = 0.1;

  /// Throws std::invalid_argument on any violated invariant.
  void validate() const;

  /// Effective density of phase i, eps^2 scaling applied to the void.
  [[nodiscard]] double scaled_density(int i) const;
  /// Effective Lame pair of phase i, eps^2 scaling applied to the void.
  [[nodiscard]] Lame scaled_lame(int i) const;
  [[nodiscard]] std::vector<double> scaled_densities() const;
  [[nodiscard]] std::vector<Lame> scaled_lames() const;

  bool operator==(const MaterialSet&) const = default;
};

struct CutoffParams
{
  double delta = 0.1;

  /// Blend half-width of the quadratic transitions.
  [[nodiscard]] double blend_width() const { return 0.5 * delta; }

  /// delta = min(m/(2MN) over densities, analogous bound over the shear moduli).
  static CutoffParams for_materials(const MaterialSet& mats);
};

/// C^{1,1} monotone cutoff: identity on [-delta/2, 1+delta/2], constant -delta
/// below -3delta/2 and 1+delta above 1+3delta/2, quadratic blends in between.
double cutoff(double s, const CutoffParams& p);
double cutoff_deriv(double s, const CutoffParams& p);

/// Pointwise material law: cutoff plus scaled material data, precomputed.
class MaterialLaw
{
public:
  explicit MaterialLaw(MaterialSet mats);
  MaterialLaw(MaterialSet mats, CutoffParams cutoff);

  [[nodiscard]] const MaterialSet& materials() const { return mats_; }
  [[nodiscard]] const CutoffParams& cutoff_params() const { return cutoff_; }
  [[nodiscard]] int n_phases() const { return mats_.n_phases; }
  [[nodiscard]] const std::vector<double>& rho() const { return rho_; }
  [[nodiscard]] const std::vector<Lame>& lame() const { return lame_; }

  /// rho(phi) = sum_i rho_i sigma(phi_i).
  [[nodiscard]] double density(std::span<const double> phi) const;
  /// rho'(phi) h.
  [[nodiscard]] double density_deriv(std::span<const double> phi, std::span<const double> h) const;

  /// Interpolated Lame pair sum_i sigma(phi_i) (lambda_i, mu_i).
  [[nodiscard]] Lame effective_lame(std::span<const double> phi) const;
  /// Derivative of the interpolated Lame pair in direction h.
  [[nodiscard]] Lame effective_lame_deriv(std::span<const double> phi, std::span<const double> h) const;

  /// C(phi) A. Throws std::invalid_argument for non-symmetric A.
  [[nodiscard]] Eigen::Matrix2d elasticity_apply(std::span<const double> phi, const Eigen::Matrix2d& strain) const;
  /// (C'(phi) h) A. Throws std::invalid_argument for non-symmetric A.
  [[nodiscard]] Eigen::Matrix2d elasticity_deriv_apply(std::span<const double> phi, std::span<const double> h,
                                                       const Eigen::Matrix2d& strain) const;

  /// rho0 = min_i rho_i / 2, the uniform lower bound of rho on the hyperplane sum phi = 1.
  [[nodiscard]] double density_lower_bound() const;
  /// theta with A : C(phi) A >= theta |A|^2 on the hyperplane (may be <= 0 if delta is too large).
  [[nodiscard]] double coercivity_bound() const;

private:
  void check_size(std::span<const double> phi) const;

  MaterialSet mats_;
  CutoffParams cutoff_;
  std::vector<double> rho_;
  std::vector<Lame> lame_;
};

/// Isotropic stress 2 mu A + lambda tr(A) I.
Eigen::Matrix2d isotropic_stress(const Lame& lame, const Eigen::Matrix2d& strain);

/// psi0(phi) = (1 - |phi|^2)/2; the obstacle part is enforced by projection.
double bulk_potential(std::span<const double> phi);
/// psi0'(phi) = -phi.
std::vector<double> bulk_potential_deriv(std::span<const double> phi);

}  // namespace eigentopo
