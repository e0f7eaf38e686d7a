// SPDX-License-Identifier: Apache-2.0

#include "eigentopo/config.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "eigentopo/errors.hpp"

namespace eigentopo {

BoundarySpec MeshConfig::boundary() const
{
  BoundarySpec spec;
  spec.eigen.fill(BoundaryTag::Neumann0);
  spec.load.fill(BoundaryTag::NeumannG);
  for (Side s : eigen_dirichlet)
  {
    spec.eigen[static_cast<std::size_t>(s)] = BoundaryTag::DirichletD;
  }
  for (Side s : load_dirichlet)
  {
    spec.load[static_cast<std::size_t>(s)] = BoundaryTag::DirichletC;
  }
  return spec;
}

Mesh MeshConfig::build() const
{
  return Mesh(nx, ny, lx, ly, boundary());
}

MaterialLaw MaterialsConfig::law() const
{
  if (delta)
  {
    return MaterialLaw(set, CutoffParams{*delta});
  }
  return MaterialLaw(set, CutoffParams::for_materials(set));
}

LoadCase LoadsConfig::build(const Mesh& mesh) const
{
  LoadCase lc = LoadCase::zeros(mesh);
  lc.alpha = alpha;
  lc.beta = beta;
  lc.nu = nu;
  for (int v = 0; v < mesh.num_vertices(); ++v)
  {
    const auto& p = mesh.vertices()[static_cast<std::size_t>(v)];
    for (int c = 0; c < 2; ++c)
    {
      lc.body_force[2 * v + c] = body_force[static_cast<std::size_t>(c)];
      lc.target[2 * v + c] = target[static_cast<std::size_t>(c)];
      if (!traction_box || traction_box->contains(p))
      {
        lc.traction[2 * v + c] = traction[static_cast<std::size_t>(c)];
      }
    }
    lc.weight[v] = (!weight_box || weight_box->contains(p)) ? 1.0 : 0.0;
  }
  return lc;
}

std::string_view to_string(PsiKind kind)
{
  switch (kind)
  {
    case PsiKind::WeightedSum:
      return "weighted_sum";
    case PsiKind::NegMinFirst:
      return "neg_min_first";
    case PsiKind::InverseSum:
      return "inverse_sum";
  }
  return "?";
}

namespace {

struct Entry
{
  std::string value;
  int line = 0;
  bool used = false;
};

std::string trim(const std::string& s)
{
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos)
  {
    return {};
  }
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep)
{
  std::vector<std::string> out;
  if (trim(s).empty())
  {
    return out;
  }
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep))
  {
    out.push_back(trim(item));
  }
  return out;
}

// Section/key store that remembers which keys were consumed.
class Document
{
public:
  explicit Document(const std::string& text)
  {
    std::istringstream in(text);
    std::string raw;
    std::string section;
    int lineno = 0;
    while (std::getline(in, raw))
    {
      ++lineno;
      const auto hash = raw.find('#');
      const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
      if (line.empty())
      {
        continue;
      }
      if (line.front() == '[')
      {
        if (line.back() != ']')
        {
          throw ConfigError("line " + std::to_string(lineno) + ": malformed section header");
        }
        section = trim(line.substr(1, line.size() - 2));
        if (!sections_.insert(section).second)
        {
          throw ConfigError(section + ": duplicate section (line " + std::to_string(lineno) + ")");
        }
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos)
      {
        throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
      }
      if (section.empty())
      {
        throw ConfigError("line " + std::to_string(lineno) + ": key outside of a section");
      }
      const std::string path = section + "." + trim(line.substr(0, eq));
      if (entries_.count(path) != 0)
      {
        throw ConfigError(path + ": duplicate key (line " + std::to_string(lineno) + ")");
      }
      entries_[path] = Entry{trim(line.substr(eq + 1)), lineno, false};
    }
  }

  [[nodiscard]] bool has_section(const std::string& s) const { return sections_.count(s) != 0; }

  const std::string* find(const std::string& path)
  {
    auto it = entries_.find(path);
    if (it == entries_.end())
    {
      return nullptr;
    }
    it->second.used = true;
    return &it->second.value;
  }

  const std::string& require(const std::string& path)
  {
    const std::string* v = find(path);
    if (v == nullptr)
    {
      throw ConfigError(path + ": missing key");
    }
    return *v;
  }

  void check_all_used() const
  {
    static const std::set<std::string> known{"mesh", "materials", "objective", "loads",
                                             "optimizer", "constraints", "output"};
    for (const auto& s : sections_)
    {
      if (known.count(s) == 0)
      {
        throw ConfigError(s + ": unknown section");
      }
    }
    for (const auto& [path, e] : entries_)
    {
      if (!e.used)
      {
        throw ConfigError(path + ": unknown key (line " + std::to_string(e.line) + ")");
      }
    }
  }

private:
  std::set<std::string> sections_;
  std::map<std::string, Entry> entries_;
};

double to_double(const std::string& path, const std::string& s)
{
  if (s.empty())
  {
    throw ConfigError(path + ": expected a number, got an empty value");
  }
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || errno == ERANGE || !std::isfinite(v))
  {
    throw ConfigError(path + ": expected a number, got '" + s + "'");
  }
  return v;
}

long long to_integer(const std::string& path, const std::string& s)
{
  char* end = nullptr;
  errno = 0;
  const long long v = std::strtoll(s.c_str(), &end, 10);
  if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE)
  {
    throw ConfigError(path + ": expected an integer, got '" + s + "'");
  }
  return v;
}

std::uint64_t to_unsigned(const std::string& path, const std::string& s)
{
  char* end = nullptr;
  errno = 0;
  const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
  if (s.empty() || s[0] == '-' || s[0] == '+' || end != s.c_str() + s.size() || errno == ERANGE)
  {
    throw ConfigError(path + ": expected a nonnegative integer, got '" + s + "'");
  }
  return v;
}

std::vector<double> to_doubles(const std::string& path, const std::string& s)
{
  std::vector<double> out;
  for (const auto& item : split(s, ','))
  {
    out.push_back(to_double(path, item));
  }
  return out;
}

std::array<double, 2> to_pair(const std::string& path, const std::string& s)
{
  const auto v = to_doubles(path, s);
  if (v.size() != 2)
  {
    throw ConfigError(path + ": expected 2 comma-separated numbers");
  }
  return {v[0], v[1]};
}

Box to_box(const std::string& path, const std::string& s)
{
  std::istringstream in(s);
  std::vector<double> v;
  std::string tok;
  while (in >> tok)
  {
    v.push_back(to_double(path, tok));
  }
  if (v.size() != 4)
  {
    throw ConfigError(path + ": a box needs 4 numbers 'x0 y0 x1 y1'");
  }
  if (!(v[0] <= v[2] && v[1] <= v[3]))
  {
    throw ConfigError(path + ": box corners must satisfy x0 <= x1, y0 <= y1");
  }
  return Box{v[0], v[1], v[2], v[3]};
}

std::vector<Box> to_boxes(const std::string& path, const std::string& s)
{
  std::vector<Box> out;
  for (const auto& item : split(s, ';'))
  {
    out.push_back(to_box(path, item));
  }
  return out;
}

std::vector<Side> to_sides(const std::string& path, const std::string& s)
{
  std::vector<Side> out;
  for (const auto& item : split(s, ','))
  {
    bool found = false;
    for (Side side : {Side::Bottom, Side::Right, Side::Top, Side::Left})
    {
      if (item == to_string(side))
      {
        out.push_back(side);
        found = true;
      }
    }
    if (!found)
    {
      throw ConfigError(path + ": unknown side '" + item + "' (bottom, right, top, left)");
    }
  }
  return out;
}

template <class T, class F>
void optional_key(Document& doc, const std::string& path, T& target, F convert)
{
  if (const std::string* v = doc.find(path))
  {
    target = convert(path, *v);
  }
}

int to_int(const std::string& path, const std::string& s)
{
  const long long v = to_integer(path, s);
  if (v < -2147483647LL || v > 2147483647LL)
  {
    throw ConfigError(path + ": integer out of range");
  }
  return static_cast<int>(v);
}

void invariant(bool ok, const std::string& path, const std::string& what)
{
  if (!ok)
  {
    throw ConfigError(path + ": " + what);
  }
}

bool box_inside(const Box& b, const MeshConfig& m)
{
  const double tol = 1e-12 * std::max(m.lx, m.ly);
  return b.x0 >= -tol && b.y0 >= -tol && b.x1 <= m.lx + tol && b.y1 <= m.ly + tol;
}

}  // namespace

void validate_config(const RunConfig& cfg)
{
  const auto& m = cfg.mesh;
  invariant(m.nx >= 1, "mesh.nx", "must be >= 1");
  invariant(m.ny >= 1, "mesh.ny", "must be >= 1");
  invariant(m.lx > 0.0, "mesh.lx", "must be positive");
  invariant(m.ly > 0.0, "mesh.ly", "must be positive");

  const auto& ms = cfg.materials.set;
  const auto nm1 = static_cast<std::size_t>(std::max(ms.n_phases - 1, 0));
  invariant(ms.n_phases >= 2, "materials.n", "need at least one material and the void phase");
  invariant(ms.densities.size() == nm1, "materials.densities", "expected n-1 values");
  invariant(ms.youngs.size() == nm1, "materials.youngs", "expected n-1 values");
  invariant(ms.poissons.size() == nm1, "materials.poissons", "expected n-1 values");
  invariant(ms.interface_eps > 0.0, "materials.eps", "must be positive");
  if (cfg.materials.delta)
  {
    invariant(*cfg.materials.delta > 0.0, "materials.delta", "must be positive");
  }
  try
  {
    ms.validate();
  }
  catch (const std::invalid_argument& e)
  {
    throw ConfigError(std::string("materials: ") + e.what());
  }

  const auto& ob = cfg.objective;
  invariant(ob.eps == ms.interface_eps, "objective.eps", "must equal materials.eps");
  invariant(ob.gamma >= 0.0, "objective.gamma", "must be nonnegative");
  try
  {
    ob.validate();
  }
  catch (const std::invalid_argument& e)
  {
    throw ConfigError(std::string("objective: ") + e.what());
  }

  if (cfg.loads)
  {
    const auto& l = *cfg.loads;
    invariant(l.alpha >= 0.0, "loads.alpha", "must be nonnegative");
    invariant(l.beta >= 0.0, "loads.beta", "must be nonnegative");
    invariant(l.nu > 0.0 && l.nu <= 1.0, "loads.nu", "must lie in (0, 1]");
    if (l.traction_box)
    {
      invariant(box_inside(*l.traction_box, m), "loads.traction_box", "box outside the domain");
    }
    if (l.weight_box)
    {
      invariant(box_inside(*l.weight_box, m), "loads.weight_box", "box outside the domain");
    }
    invariant(!m.load_dirichlet.empty(), "mesh.load_dirichlet", "the load case needs a clamped side");
  }

  const auto& o = cfg.optimizer;
  invariant(o.max_iter >= 0, "optimizer.max_iter", "must be nonnegative");
  invariant(o.armijo_sigma > 0.0 && o.armijo_sigma < 1.0, "optimizer.armijo_sigma", "must lie in (0, 1)");
  invariant(o.backtrack_beta > 0.0 && o.backtrack_beta < 1.0, "optimizer.backtrack_beta", "must lie in (0, 1)");
  invariant(o.step0 > 0.0, "optimizer.step0", "must be positive");
  invariant(o.conv_tol > 0.0, "optimizer.conv_tol", "must be positive");
  invariant(o.max_backtracks >= 1, "optimizer.max_backtracks", "must be >= 1");
  invariant(o.history_probes >= 0, "optimizer.history_probes", "must be nonnegative");
  invariant(o.final_probes >= 0, "optimizer.final_probes", "must be nonnegative");
  invariant(cfg.init_noise >= 0.0, "optimizer.init_noise", "must be nonnegative");

  const auto& c = cfg.constraints;
  invariant(c.mean.size() == static_cast<std::size_t>(ms.n_phases), "constraints.mean", "expected n values");
  double sum = 0.0;
  for (double v : c.mean)
  {
    invariant(v > 0.0 && v < 1.0, "constraints.mean", "mean not on simplex (entries must lie in (0, 1))");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-12)
  {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", sum);
    throw ConfigError(std::string("constraints.mean: mean not on simplex (sum = ") + buf + ")");
  }
  for (const auto& b : c.solid_boxes)
  {
    invariant(box_inside(b, m), "constraints.solid_boxes", "box outside the domain");
  }
  for (const auto& b : c.void_boxes)
  {
    invariant(box_inside(b, m), "constraints.void_boxes", "box outside the domain");
  }

  invariant(!cfg.output.directory.empty(), "output.directory", "must not be empty");
  invariant(cfg.output.vtk_every >= 0, "output.vtk_every", "must be nonnegative");
}

RunConfig parse_config_string(const std::string& text)
{
  Document doc(text);
  RunConfig cfg;

  auto& m = cfg.mesh;
  m.nx = to_int("mesh.nx", doc.require("mesh.nx"));
  m.ny = to_int("mesh.ny", doc.require("mesh.ny"));
  optional_key(doc, "mesh.lx", m.lx, to_double);
  optional_key(doc, "mesh.ly", m.ly, to_double);
  optional_key(doc, "mesh.eigen_dirichlet", m.eigen_dirichlet, to_sides);
  optional_key(doc, "mesh.load_dirichlet", m.load_dirichlet, to_sides);

  auto& ms = cfg.materials.set;
  ms.n_phases = to_int("materials.n", doc.require("materials.n"));
  const auto nm1 = static_cast<std::size_t>(std::max(ms.n_phases - 1, 0));
  optional_key(doc, "materials.densities", ms.densities, to_doubles);
  optional_key(doc, "materials.youngs", ms.youngs, to_doubles);
  optional_key(doc, "materials.poissons", ms.poissons, to_doubles);
  // Defaults repeat the single-material values for every non-void phase.
  if (doc.find("materials.densities") == nullptr)
  {
    ms.densities.assign(nm1, 1.0);
  }
  if (doc.find("materials.youngs") == nullptr)
  {
    ms.youngs.assign(nm1, 1.0);
  }
  if (doc.find("materials.poissons") == nullptr)
  {
    ms.poissons.assign(nm1, 0.3);
  }
  optional_key(doc, "materials.void_density", ms.void_density_base, to_double);
  optional_key(doc, "materials.void_young", ms.void_young_base, to_double);
  optional_key(doc, "materials.void_poisson", ms.void_poisson, to_double);
  optional_key(doc, "materials.eps", ms.interface_eps, to_double);
  if (const std::string* v = doc.find("materials.delta"))
  {
    cfg.materials.delta = to_double("materials.delta", *v);
  }

  auto& ob = cfg.objective;
  if (const std::string* v = doc.find("objective.kind"))
  {
    bool found = false;
    for (PsiKind k : {PsiKind::WeightedSum, PsiKind::NegMinFirst, PsiKind::InverseSum})
    {
      if (*v == to_string(k))
      {
        ob.kind = k;
        found = true;
      }
    }
    invariant(found, "objective.kind", "unknown kind '" + *v + "' (weighted_sum, neg_min_first, inverse_sum)");
  }
  if (const std::string* v = doc.find("objective.indices"))
  {
    ob.indices.clear();
    for (const auto& item : split(*v, ','))
    {
      ob.indices.push_back(to_int("objective.indices", item));
    }
  }
  optional_key(doc, "objective.weights", ob.weights, to_doubles);
  optional_key(doc, "objective.gamma", ob.gamma, to_double);
  optional_key(doc, "objective.lower_bound", ob.lower_bound, to_double);
  ob.eps = ms.interface_eps;

  if (doc.has_section("loads"))
  {
    LoadsConfig l;
    optional_key(doc, "loads.alpha", l.alpha, to_double);
    optional_key(doc, "loads.beta", l.beta, to_double);
    optional_key(doc, "loads.nu", l.nu, to_double);
    optional_key(doc, "loads.body_force", l.body_force, to_pair);
    optional_key(doc, "loads.traction", l.traction, to_pair);
    optional_key(doc, "loads.target", l.target, to_pair);
    if (const std::string* v = doc.find("loads.traction_box"))
    {
      l.traction_box = to_box("loads.traction_box", *v);
    }
    if (const std::string* v = doc.find("loads.weight_box"))
    {
      l.weight_box = to_box("loads.weight_box", *v);
    }
    cfg.loads = l;
  }

  auto& o = cfg.optimizer;
  optional_key(doc, "optimizer.max_iter", o.max_iter, to_int);
  optional_key(doc, "optimizer.armijo_sigma", o.armijo_sigma, to_double);
  optional_key(doc, "optimizer.backtrack_beta", o.backtrack_beta, to_double);
  optional_key(doc, "optimizer.step0", o.step0, to_double);
  optional_key(doc, "optimizer.conv_tol", o.conv_tol, to_double);
  optional_key(doc, "optimizer.max_backtracks", o.max_backtracks, to_int);
  optional_key(doc, "optimizer.history_probes", o.history_probes, to_int);
  optional_key(doc, "optimizer.final_probes", o.final_probes, to_int);
  if (const std::string* v = doc.find("optimizer.seed"))
  {
    o.seed = to_unsigned("optimizer.seed", *v);
  }
  optional_key(doc, "optimizer.init_noise", cfg.init_noise, to_double);

  auto& c = cfg.constraints;
  c.mean = to_doubles("constraints.mean", doc.require("constraints.mean"));
  optional_key(doc, "constraints.solid_boxes", c.solid_boxes, to_boxes);
  optional_key(doc, "constraints.void_boxes", c.void_boxes, to_boxes);

  if (const std::string* v = doc.find("output.directory"))
  {
    cfg.output.directory = *v;
  }
  optional_key(doc, "output.vtk_every", cfg.output.vtk_every, to_int);

  doc.check_all_used();
  validate_config(cfg);
  return cfg;
}

RunConfig parse_config(const std::filesystem::path& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
  {
    throw ConfigError(path.string() + ": cannot open config file");
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_string(ss.str());
}

namespace {

std::string num(double v)
{
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string join(const std::vector<double>& v)
{
  std::string s;
  for (std::size_t k = 0; k < v.size(); ++k)
  {
    s += (k ? ", " : "") + num(v[k]);
  }
  return s;
}

std::string box_str(const Box& b)
{
  return num(b.x0) + " " + num(b.y0) + " " + num(b.x1) + " " + num(b.y1);
}

std::string boxes_str(const std::vector<Box>& boxes)
{
  std::string s;
  for (std::size_t k = 0; k < boxes.size(); ++k)
  {
    s += (k ? "; " : "") + box_str(boxes[k]);
  }
  return s;
}

std::string sides_str(const std::vector<Side>& sides)
{
  std::string s;
  for (std::size_t k = 0; k < sides.size(); ++k)
  {
    s += (k ? ", " : "") + std::string(to_string(sides[k]));
  }
  return s;
}

}  // namespace

std::string write_config(const RunConfig& cfg)
{
  std::ostringstream o;
  const auto& m = cfg.mesh;
  o << "[mesh]\n"
    << "nx = " << m.nx << "\n"
    << "ny = " << m.ny << "\n"
    << "lx = " << num(m.lx) << "\n"
    << "ly = " << num(m.ly) << "\n"
    << "eigen_dirichlet = " << sides_str(m.eigen_dirichlet) << "\n"
    << "load_dirichlet = " << sides_str(m.load_dirichlet) << "\n\n";

  const auto& ms = cfg.materials.set;
  o << "[materials]\n"
    << "n = " << ms.n_phases << "\n"
    << "densities = " << join(ms.densities) << "\n"
    << "youngs = " << join(ms.youngs) << "\n"
    << "poissons = " << join(ms.poissons) << "\n"
    << "void_density = " << num(ms.void_density_base) << "\n"
    << "void_young = " << num(ms.void_young_base) << "\n"
    << "void_poisson = " << num(ms.void_poisson) << "\n"
    << "eps = " << num(ms.interface_eps) << "\n";
  if (cfg.materials.delta)
  {
    o << "delta = " << num(*cfg.materials.delta) << "\n";
  }
  o << "\n";

  const auto& ob = cfg.objective;
  std::string idx;
  for (std::size_t k = 0; k < ob.indices.size(); ++k)
  {
    idx += (k ? ", " : "") + std::to_string(ob.indices[k]);
  }
  o << "[objective]\n"
    << "kind = " << to_string(ob.kind) << "\n"
    << "indices = " << idx << "\n"
    << "weights = " << join(ob.weights) << "\n"
    << "gamma = " << num(ob.gamma) << "\n"
    << "lower_bound = " << num(ob.lower_bound) << "\n\n";

  if (cfg.loads)
  {
    const auto& l = *cfg.loads;
    o << "[loads]\n"
      << "alpha = " << num(l.alpha) << "\n"
      << "beta = " << num(l.beta) << "\n"
      << "nu = " << num(l.nu) << "\n"
      << "body_force = " << num(l.body_force[0]) << ", " << num(l.body_force[1]) << "\n"
      << "traction = " << num(l.traction[0]) << ", " << num(l.traction[1]) << "\n"
      << "target = " << num(l.target[0]) << ", " << num(l.target[1]) << "\n";
    if (l.traction_box)
    {
      o << "traction_box = " << box_str(*l.traction_box) << "\n";
    }
    if (l.weight_box)
    {
      o << "weight_box = " << box_str(*l.weight_box) << "\n";
    }
    o << "\n";
  }

  const auto& op = cfg.optimizer;
  o << "[optimizer]\n"
    << "max_iter = " << op.max_iter << "\n"
    << "armijo_sigma = " << num(op.armijo_sigma) << "\n"
    << "backtrack_beta = " << num(op.backtrack_beta) << "\n"
    << "step0 = " << num(op.step0) << "\n"
    << "conv_tol = " << num(op.conv_tol) << "\n"
    << "max_backtracks = " << op.max_backtracks << "\n"
    << "history_probes = " << op.history_probes << "\n"
    << "final_probes = " << op.final_probes << "\n"
    << "seed = " << op.seed << "\n"
    << "init_noise = " << num(cfg.init_noise) << "\n\n";

  const auto& c = cfg.constraints;
  o << "[constraints]\n"
    << "mean = " << join(c.mean) << "\n"
    << "solid_boxes = " << boxes_str(c.solid_boxes) << "\n"
    << "void_boxes = " << boxes_str(c.void_boxes) << "\n\n";

  o << "[output]\n"
    << "directory = " << cfg.output.directory << "\n"
    << "vtk_every = " << cfg.output.vtk_every << "\n";
  return o.str();
}

}  // namespace eigentopo
