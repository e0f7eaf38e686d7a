// SPDX-License-Identifier: Apache-2.0

#include "eigentopo/io.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace eigentopo {

namespace {

void append(std::string& out, const char* fmt, double v)
{
  char buf[48];
  std::snprintf(buf, sizeof buf, fmt, v);
  out += buf;
}

void write_text(const std::filesystem::path& path, const std::string& text)
{
  if (path.has_parent_path())
  {
    std::filesystem::create_directories(path.parent_path());
  }
  // Binary mode keeps LF line endings on every platform.
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
  {
    throw std::runtime_error(path.string() + ": cannot open for writing");
  }
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.close();
  if (!out)
  {
    throw std::runtime_error(path.string() + ": write failed");
  }
}

}  // namespace

std::vector<VtkField> phase_fields(const PhaseField& phi)
{
  std::vector<VtkField> out;
  for (int i = 0; i < phi.n_phases(); ++i)
  {
    VtkField f{"phi_" + std::to_string(i + 1), 1, {}};
    f.values.reserve(static_cast<std::size_t>(phi.n_nodes()));
    for (int v = 0; v < phi.n_nodes(); ++v)
    {
      f.values.push_back(phi(v, i));
    }
    out.push_back(std::move(f));
  }
  return out;
}

VtkField displacement_field(std::string name, const Eigen::VectorXd& full)
{
  return VtkField{std::move(name), 2, std::vector<double>(full.data(), full.data() + full.size())};
}

std::string format_vtk(const Mesh& mesh, const std::vector<VtkField>& fields)
{
  const int nv = mesh.num_vertices();
  const int nt = mesh.num_triangles();
  for (const auto& f : fields)
  {
    if (f.components != 1 && f.components != 2)
    {
      throw std::invalid_argument("vtk: field '" + f.name + "' must have 1 or 2 components");
    }
    if (f.values.size() != static_cast<std::size_t>(f.components) * static_cast<std::size_t>(nv))
    {
      throw std::invalid_argument("vtk: field '" + f.name + "' has " + std::to_string(f.values.size()) +
                                  " values, expected " + std::to_string(f.components * nv));
    }
    if (f.name.empty() || f.name.find_first_of(" \t\r\n") != std::string::npos)
    {
      throw std::invalid_argument("vtk: field name must be a non-empty token");
    }
  }

  std::string out;
  out.reserve(static_cast<std::size_t>(nv) * 48 * (1 + fields.size()));
  out += "# vtk DataFile Version 3.0\neigentopo\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out += "POINTS " + std::to_string(nv) + " double\n";
  for (const auto& p : mesh.vertices())
  {
    append(out, "%.9g", p.x());
    append(out, " %.9g", p.y());
    out += " 0\n";
  }
  out += "CELLS " + std::to_string(nt) + " " + std::to_string(4 * nt) + "\n";
  for (const auto& t : mesh.triangles())
  {
    out += "3 " + std::to_string(t[0]) + " " + std::to_string(t[1]) + " " + std::to_string(t[2]) + "\n";
  }
  out += "CELL_TYPES " + std::to_string(nt) + "\n";
  for (int t = 0; t < nt; ++t)
  {
    out += "5\n";
  }
  if (!fields.empty())
  {
    out += "POINT_DATA " + std::to_string(nv) + "\n";
  }
  for (const auto& f : fields)
  {
    if (f.components == 1)
    {
      out += "SCALARS " + f.name + " double 1\nLOOKUP_TABLE default\n";
      for (double v : f.values)
      {
        append(out, "%.9g\n", v);
      }
    }
    else
    {
      out += "VECTORS " + f.name + " double\n";
      for (int v = 0; v < nv; ++v)
      {
        append(out, "%.9g", f.values[2 * static_cast<std::size_t>(v)]);
        append(out, " %.9g", f.values[2 * static_cast<std::size_t>(v) + 1]);
        out += " 0\n";
      }
    }
  }
  return out;
}

void write_vtk(const std::filesystem::path& path, const Mesh& mesh, const std::vector<VtkField>& fields)
{
  write_text(path, format_vtk(mesh, fields));
}

std::string history_header(int n_lambdas)
{
  std::string h = "iter,J,psi,gl_energy";
  for (int k = 1; k <= n_lambdas; ++k)
  {
    h += ",lambda_" + std::to_string(k);
  }
  return h + ",step,vi_residual\n";
}

std::string format_history(const OptResult& result)
{
  const std::size_t l = result.history.empty() ? result.final_eval.lambdas.size()
                                               : result.history.front().lambdas.size();
  std::string out = history_header(static_cast<int>(l));
  for (const auto& r : result.history)
  {
    if (r.lambdas.size() != l)
    {
      throw std::invalid_argument("history: inconsistent eigenvalue count");
    }
    out += std::to_string(r.iter);
    append(out, ",%.17g", r.J);
    append(out, ",%.17g", r.psi);
    append(out, ",%.17g", r.gl);
    for (double v : r.lambdas)
    {
      append(out, ",%.17g", v);
    }
    append(out, ",%.17g", r.step);
    append(out, ",%.17g", r.vi_residual);
    out += "\n";
  }
  return out;
}

void write_history(const std::filesystem::path& path, const OptResult& result)
{
  write_text(path, format_history(result));
}

}  // namespace eigentopo
