// SPDX-License-Identifier: Apache-2.0

#include "eigentopo/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <random>

#include "eigentopo/compliance.hpp"
#include "eigentopo/config.hpp"
#include "eigentopo/errors.hpp"
#include "eigentopo/io.hpp"
#include "eigentopo/verification.hpp"

#ifndef EIGENTOPO_VERSION
#define EIGENTOPO_VERSION "0.0.0"
#endif

namespace eigentopo {

std::string version_string()
{
  return std::string("eigentopo ") + EIGENTOPO_VERSION;
}

namespace {

std::string fmt(const char* f, double v)
{
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// Mean field plus uniform noise on the first N-1 components, projected.
PhaseField initial_field(const RunConfig& cfg, const AdmissibleSet& set, int n_nodes)
{
  const int np = cfg.materials.set.n_phases;
  std::mt19937_64 rng(cfg.optimizer.seed);
  std::uniform_real_distribution<double> noise(-cfg.init_noise, cfg.init_noise);
  PhaseField phi(n_nodes, np);
  for (int v = 0; v < n_nodes; ++v)
  {
    double rest = 1.0;
    for (int i = 0; i + 1 < np; ++i)
    {
      phi(v, i) = cfg.constraints.mean[static_cast<std::size_t>(i)] + (cfg.init_noise > 0.0 ? noise(rng) : 0.0);
      rest -= phi(v, i);
    }
    phi(v, np - 1) = rest;
  }
  return set.project(phi);
}

std::string vtk_name(int iter)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "iter_%05d.vtk", iter);
  return buf;
}

int run_optimize(const std::string& path, bool combined, std::ostream& out)
{
  const RunConfig cfg = parse_config(path);
  if (combined && !cfg.loads)
  {
    throw ConfigError("loads: section required by optimize-combined");
  }
  const Mesh mesh = cfg.mesh.build();
  const MaterialLaw law = cfg.materials.law();
  const AdmissibleSet set(mesh, cfg.constraints.mean, cfg.constraints.solid_boxes, cfg.constraints.void_boxes);

  std::unique_ptr<EigenProblem> problem;
  if (combined)
  {
    LoadCase load = cfg.loads->build(mesh);
    try
    {
      load.validate(mesh);
    }
    catch (const std::invalid_argument& e)
    {
      throw ConfigError(std::string("loads: ") + e.what());
    }
    problem = std::make_unique<CombinedProblem>(mesh, law, cfg.objective, std::move(load));
  }
  else
  {
    problem = std::make_unique<EigenProblem>(mesh, law, cfg.objective);
  }

  const std::filesystem::path dir(cfg.output.directory);
  std::filesystem::create_directories(dir);

  auto snapshot = [&](const std::filesystem::path& file, const PhaseField& phi, const Evaluation* ev) {
    std::vector<VtkField> fields = phase_fields(phi);
    if (ev != nullptr && ev->pairs.size() > 0)
    {
      fields.push_back(displacement_field("mode_1", problem->dofs().expand(ev->pairs.vectors.col(0))));
    }
    if (ev != nullptr && ev->state.size() > 0)
    {
      const auto& cp = static_cast<const CombinedProblem&>(*problem);
      fields.push_back(displacement_field("displacement", cp.load_dofs().expand(ev->state)));
    }
    write_vtk(file, mesh, fields);
  };

  const PhaseField phi0 = initial_field(cfg, set, mesh.num_vertices());
  const int every = cfg.output.vtk_every;
  const OptResult res = projected_gradient_solve(*problem, set, phi0, cfg.optimizer,
                                                 [&](const IterRecord& r, const PhaseField& phi) {
                                                   if (every > 0 && r.iter % every == 0)
                                                   {
                                                     snapshot(dir / vtk_name(r.iter), phi, nullptr);
                                                   }
                                                 });
  write_history(dir / "history.csv", res);
  snapshot(dir / "final.vtk", res.phi, &res.final_eval);

  out << "termination: " << to_string(res.termination) << " after " << (res.history.size() - 1) << " iterations\n";
  out << "J: " << fmt("%.12g", res.final_eval.J) << "\n";
  for (std::size_t k = 0; k < res.final_eval.lambdas.size(); ++k)
  {
    out << "lambda_" << cfg.objective.indices[k] << ": " << fmt("%.12g", res.final_eval.lambdas[k]) << "\n";
  }
  if (combined)
  {
    out << "compliance terms: " << fmt("%.12g", res.final_eval.compliance) << "\n";
  }
  out << "vi_residual: " << fmt("%.6e", res.vi_residual) << "\n";
  out << "output: " << dir.string() << "\n";
  if (res.termination == Termination::EigenvalueDegenerated)
  {
    out << "stopped: " << res.message << "\n";
    return kExitNumerical;
  }
  return kExitOk;
}

int run_verify(const std::string& path, const std::vector<int>& ids, std::ostream& out)
{
  const RunConfig cfg = parse_config(path);
  VerifyOptions opts;
  opts.materials = cfg.materials.set;
  opts.seed = cfg.optimizer.seed;
  bool ok = true;
  for (int id : ids)
  {
    if (id < 1 || id > 9)
    {
      throw ConfigError("--checks: unknown check " + std::to_string(id));
    }
  }
  for (const auto& r : run_checks(ids, opts))
  {
    out << (r.passed ? "[PASS] " : "[FAIL] ") << r.id << " " << r.name << ": " << r.detail << " ("
        << fmt("%.1f", r.seconds) << "s)\n";
    out.flush();
    ok = ok && r.passed;
  }
  out << (ok ? "verify: all checks passed\n" : "verify: FAILED\n");
  return ok ? kExitOk : kExitVerifyFailed;
}

int run_laplace(int nx, int count, std::ostream& out)
{
  const auto rows = laplace_table(nx, count);
  bool ok = true;
  out << "   m   n           exact        observed   rel_error\n";
  for (const auto& r : rows)
  {
    char line[128];
    std::snprintf(line, sizeof line, "%4d%4d%16.8f%16.8f%12.3e\n", r.m, r.n, r.exact, r.observed, r.rel_error);
    out << line;
    ok = ok && r.rel_error < 0.02;
  }
  out << (ok ? "laplace-validate: all relative errors < 2%\n" : "laplace-validate: relative error >= 2%\n");
  return ok ? kExitOk : kExitVerifyFailed;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
  CLI::App app{"Multi-phase-field topology optimization of elastic eigenvalues", "eigentopo"};
  app.set_version_flag("--version", version_string());
  app.require_subcommand(1);

  std::string config_path;
  auto* opt_eigen = app.add_subcommand("optimize-eigen", "Optimize a function of the eigenvalues");
  opt_eigen->add_option("config", config_path, "Configuration file")->required();
  auto* opt_comb = app.add_subcommand("optimize-combined", "Optimize compliance, tracking and eigenvalue terms");
  opt_comb->add_option("config", config_path, "Configuration file")->required();

  std::vector<int> checks{1, 3, 4, 5, 6, 8, 9};
  auto* verify = app.add_subcommand("verify", "Run the numerical verification suite");
  verify->add_option("config", config_path, "Configuration file (materials and seed)")->required();
  verify->add_option("--checks", checks, "Check ids")->delimiter(',');

  int nx = 0;
  int count = 10;
  auto* laplace = app.add_subcommand("laplace-validate", "Neumann-Laplace eigenvalues against pi^2 (m^2+n^2)");
  laplace->add_option("nx", nx, "Cells per side")->required()->check(CLI::Range(2, 4096));
  laplace->add_option("--count", count, "Number of eigenvalues")->check(CLI::Range(1, 200));

  try
  {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  }
  catch (const CLI::ParseError& e)
  {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try
  {
    if (opt_eigen->parsed())
    {
      return run_optimize(config_path, false, out);
    }
    if (opt_comb->parsed())
    {
      return run_optimize(config_path, true, out);
    }
    if (verify->parsed())
    {
      return run_verify(config_path, checks, out);
    }
    if (laplace->parsed())
    {
      return run_laplace(nx, count, out);
    }
  }
  catch (const ConfigError& e)
  {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  catch (const std::invalid_argument& e)
  {
    // Infeasible constraints and other input violations found past parsing.
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  catch (const NumericalError& e)
  {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
  catch (const std::exception& e)
  {
    err << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitConfig;
}

int cli_main(int argc, char** argv)
{
  std::vector<std::string> args;
  for (int k = 1; k < argc; ++k)
  {
    args.emplace_back(argv[k]);
  }
  return cli_main(args, std::cout, std::cerr);
}

}  // namespace eigentopo
