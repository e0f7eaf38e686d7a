// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "eigentopo/cli.hpp"

using namespace eigentopo;

namespace {

namespace fs = std::filesystem;

struct Run
{
  int code = 0;
  std::string out;
  std::string err;
};

Run run(const std::vector<std::string>& args)
{
  std::ostringstream out;
  std::ostringstream err;
  Run r;
  r.code = cli_main(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const fs::path& p)
{
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

fs::path write_file(const std::string& name, const std::string& text)
{
  const fs::path p = fs::temp_directory_path() / "eigentopo_test_cli" / name;
  fs::create_directories(p.parent_path());
  std::ofstream f(p, std::ios::binary);
  f << text;
  return p;
}

std::string small_config(const fs::path& out_dir, bool loads)
{
  std::string s = "[mesh]\nnx = 8\nny = 4\nlx = 2\n\n"
                  "[materials]\nn = 2\neps = 0.2\n\n"
                  "[objective]\nkind = weighted_sum\nindices = 1\nweights = -1\ngamma = 0.001\n\n"
                  "[optimizer]\nmax_iter = 6\nseed = 5\nhistory_probes = 4\nfinal_probes = 4\n\n"
                  "[constraints]\nmean = 0.5, 0.5\n\n"
                  "[output]\ndirectory = " +
                  out_dir.string() + "\nvtk_every = 2\n";
  if (loads)
  {
    s += "\n[loads]\nalpha = 1\ntraction = 0, -1\ntraction_box = 2 0 2 1\n";
  }
  return s;
}

}  // namespace

TEST_CASE("version and help")
{
  const Run v = run({"--version"});
  CHECK(v.code == kExitOk);
  CHECK(v.out.find(version_string()) != std::string::npos);
  const Run h = run({"--help"});
  CHECK(h.code == kExitOk);
  CHECK(h.out.find("optimize-eigen") != std::string::npos);
  CHECK(h.out.find("laplace-validate") != std::string::npos);
}

TEST_CASE("usage and config errors exit with 2")
{
  CHECK(run({}).code == kExitConfig);
  CHECK(run({"frobnicate"}).code == kExitConfig);
  CHECK(run({"optimize-eigen"}).code == kExitConfig);
  CHECK(run({"laplace-validate", "1"}).code == kExitConfig);
  const Run missing = run({"optimize-eigen", "/nonexistent/run.ini"});
  CHECK(missing.code == kExitConfig);
  CHECK(missing.err.find("cannot open") != std::string::npos);
  const fs::path bad = write_file("bad.ini", "[mesh]\nnx = 4\nny = 4\n[materials]\nn = 2\n[constraints]\nmean = 0.6, 0.5\n");
  const Run r = run({"verify", bad.string()});
  CHECK(r.code == kExitConfig);
  CHECK(r.err.find("constraints.mean") != std::string::npos);
  const fs::path eigen_only = write_file("eigen_only.ini", small_config(fs::temp_directory_path() / "x", false));
  CHECK(run({"optimize-combined", eigen_only.string()}).code == kExitConfig);
  CHECK(run({"verify", eigen_only.string(), "--checks", "12"}).code == kExitConfig);
}

TEST_CASE("laplace-validate and verify")
{
  const Run l = run({"laplace-validate", "16", "--count", "6"});
  CHECK(l.code == kExitOk);
  CHECK(l.out.find("all relative errors") != std::string::npos);
  const fs::path cfg = write_file("verify.ini", small_config(fs::temp_directory_path() / "x", false));
  const Run v = run({"verify", cfg.string(), "--checks", "6"});
  CHECK(v.code == kExitOk);
  CHECK(v.out.find("[PASS] 6") != std::string::npos);
}

TEST_CASE("optimize-eigen writes deterministic outputs")
{
  const fs::path dir = fs::temp_directory_path() / "eigentopo_test_cli" / "run_eigen";
  fs::remove_all(dir);
  const fs::path cfg = write_file("eigen.ini", small_config(dir, false));
  const Run first = run({"optimize-eigen", cfg.string()});
  CHECK(first.code == kExitOk);
  REQUIRE(fs::exists(dir / "history.csv"));
  REQUIRE(fs::exists(dir / "final.vtk"));
  CHECK(fs::exists(dir / "iter_00000.vtk"));
  CHECK(fs::exists(dir / "iter_00002.vtk"));
  const std::string history = slurp(dir / "history.csv");
  const std::string vtk = slurp(dir / "final.vtk");
  CHECK(history.rfind("iter,J,psi,gl_energy,lambda_1,step,vi_residual\n", 0) == 0);
  CHECK(vtk.find("SCALARS phi_2 double 1") != std::string::npos);
  CHECK(vtk.find("VECTORS mode_1 double") != std::string::npos);

  // J column is nonincreasing.
  std::istringstream in(history);
  std::string line;
  std::getline(in, line);
  double prev = 1e300;
  int rows = 0;
  while (std::getline(in, line))
  {
    const auto a = line.find(',');
    const double j = std::stod(line.substr(a + 1, line.find(',', a + 1) - a - 1));
    CHECK(j <= prev);
    prev = j;
    ++rows;
  }
  CHECK(rows >= 2);

  const Run second = run({"optimize-eigen", cfg.string()});
  CHECK(second.code == kExitOk);
  CHECK(slurp(dir / "history.csv") == history);
  CHECK(slurp(dir / "final.vtk") == vtk);
  CHECK(second.out == first.out);
  fs::remove_all(dir);
}

TEST_CASE("optimize-combined writes the displacement")
{
  const fs::path dir = fs::temp_directory_path() / "eigentopo_test_cli" / "run_combined";
  fs::remove_all(dir);
  const fs::path cfg = write_file("combined.ini", small_config(dir, true));
  const Run r = run({"optimize-combined", cfg.string()});
  CHECK(r.code == kExitOk);
  CHECK(r.out.find("compliance terms") != std::string::npos);
  CHECK(slurp(dir / "final.vtk").find("VECTORS displacement double") != std::string::npos);
  fs::remove_all(dir);
}
