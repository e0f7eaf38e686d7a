// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "eigentopo/objective.hpp"
#include "eigentopo/projection.hpp"

namespace eigentopo {

struct OptOptions
{
  int max_iter = 200;
  double armijo_sigma = 1e-4;
  double backtrack_beta = 0.5;
  double step0 = 1.0;
  double conv_tol = 1e-6;       // on ||phi_{k+1} - phi_k||_W / (s_k sqrt|Omega|)
  int max_backtracks = 50;
  int history_probes = 8;       // probes for the per-iteration VI residual
  int final_probes = 100;
  std::uint64_t seed = 1;

  bool operator==(const OptOptions&) const = default;
};

enum class Termination
{
  Converged,
  MaxIter,
  EigenvalueDegenerated
};

std::string to_string(Termination t);

struct IterRecord
{
  int iter = 0;
  double J = 0.0;
  double psi = 0.0;
  double gl = 0.0;
  std::vector<double> lambdas;
  double step = 0.0;
  double vi_residual = 0.0;
};

struct OptResult
{
  PhaseField phi;
  std::vector<IterRecord> history;
  Evaluation final_eval;
  double vi_residual = 0.0;  // over final_probes admissible probes
  Termination termination = Termination::MaxIter;
  std::string message;
};

/// Fixed admissible probe points for VI residuals, deterministic in seed.
std::vector<PhaseField> make_probes(const AdmissibleSet& set, int count, std::uint64_t seed);

/// min over probes theta of J'(phi; theta - phi). Throws std::invalid_argument
/// for a non-admissible probe.
double vi_residual(const OptProblem& problem, const AdmissibleSet& set, const PhaseField& phi, const Evaluation& ev,
                   const std::vector<PhaseField>& probes);

/// Projected gradient with Barzilai-Borwein initial steps and monotone
/// Armijo backtracking along the projection arc, in the lumped L2 metric.
/// `on_iter` (optional) is called after every accepted iterate.
OptResult projected_gradient_solve(const OptProblem& problem, const AdmissibleSet& set, const PhaseField& phi0,
                                   const OptOptions& opts,
                                   const std::function<void(const IterRecord&, const PhaseField&)>& on_iter = {});

}  // namespace eigentopo
