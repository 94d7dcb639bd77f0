#include "uwvf/config.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "uwvf/tipdg.hpp"

namespace uwvf
{

namespace
{

std::string trim(const std::string &s)
{
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos)
    return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string &s, char sep)
{
  std::vector<std::string> parts;
  std::string part;
  std::istringstream in(s);
  while (std::getline(in, part, sep))
    parts.push_back(part);
  return parts;
}

double to_double(const std::string &key, const std::string &value)
{
  try
  {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used == value.size() && std::isfinite(v))
      return v;
  }
  catch (const std::exception &)
  {
  }
  throw ConfigError(fmt::format("{}: '{}' is not a number", key, value));
}

long long to_integer(const std::string &key, const std::string &value)
{
  try
  {
    std::size_t used = 0;
    const long long v = std::stoll(value, &used);
    if (used == value.size())
      return v;
  }
  catch (const std::exception &)
  {
  }
  throw ConfigError(fmt::format("{}: '{}' is not an integer", key, value));
}

int to_int(const std::string &key, const std::string &value)
{
  const long long v = to_integer(key, value);
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
    throw ConfigError(fmt::format("{}: {} is out of range", key, value));
  return static_cast<int>(v);
}

bool to_bool(const std::string &key, const std::string &value)
{
  if (value == "true" || value == "1" || value == "yes")
    return true;
  if (value == "false" || value == "0" || value == "no")
    return false;
  throw ConfigError(fmt::format("{}: '{}' is not a boolean", key, value));
}

std::vector<double> to_numbers(const std::string &key, const std::string &value)
{
  std::string spaced = value;
  std::replace(spaced.begin(), spaced.end(), ',', ' ');
  std::istringstream in(spaced);
  std::vector<double> out;
  std::string token;
  while (in >> token)
    out.push_back(to_double(key, token));
  return out;
}

Vec3 to_vec3(const std::string &key, const std::string &value)
{
  const std::vector<double> v = to_numbers(key, value);
  if (v.size() != 3)
    throw ConfigError(fmt::format("{}: expected three components, got '{}'", key, value));
  return {v[0], v[1], v[2]};
}

struct RegionEntry
{
  std::optional<double> re, im;
};

class Parser
{
public:
  explicit Parser(RunConfig &config) : c_(config) {}

  void set(const std::string &key, const std::string &value)
  {
    const std::vector<std::string> parts = split(key, '.');
    if (key == "mesh.file")
      c_.mesh_file = value;
    else if (key == "mesh.cube")
      c_.cube_n = positive_int(key, value);
    else if (key == "kappa")
    {
      c_.kappa = to_double(key, value);
      if (!(c_.kappa > 0.0))
        throw ConfigError("kappa must be positive");
      have_kappa_ = true;
    }
    else if (parts.size() == 3 && parts[0] == "region")
      region(key, parts, value);
    else if (parts.size() == 3 && parts[0] == "boundary")
      boundary(key, parts, value);
    else if (key == "interior.lambda")
      c_.interior_lambda = positive(key, value);
    else if (key == "plane_wave.direction")
    {
      wave().direction = to_vec3(key, value);
      have_direction_ = true;
    }
    else if (key == "plane_wave.polarization")
      wave().polarization = to_vec3(key, value);
    else if (key == "directions.policy")
    {
      if (value == "fixed")
        c_.policy = DirectionPolicy::fixed;
      else if (value == "adaptive")
        c_.policy = DirectionPolicy::adaptive;
      else
        throw ConfigError(fmt::format("{}: expected fixed or adaptive, got '{}'", key, value));
    }
    else if (key == "directions.p")
      c_.directions = positive_int(key, value);
    else if (key == "directions.p_min")
      c_.solver.p_min = positive_int(key, value);
    else if (key == "directions.p_max")
      c_.solver.p_max = positive_int(key, value);
    else if (key == "directions.cond_cap")
      c_.solver.condition_cap = to_double(key, value);
    else if (key == "solver.method")
    {
      if (value == "bicgstab")
        c_.solver.method = SolverMethod::bicgstab;
      else if (value == "stationary")
        c_.solver.method = SolverMethod::stationary;
      else
        throw ConfigError(fmt::format("{}: expected bicgstab or stationary, got '{}'", key, value));
    }
    else if (key == "solver.tol")
      c_.solver.tolerance = to_double(key, value);
    else if (key == "solver.max_iter")
      c_.solver.max_iterations = to_int(key, value);
    else if (key == "solver.max_restarts")
      c_.solver.max_restarts = to_int(key, value);
    else if (key == "solver.seed")
    {
      const long long seed = to_integer(key, value);
      if (seed < 0)
        throw ConfigError("solver.seed must be nonnegative");
      c_.solver.seed = static_cast<std::uint64_t>(seed);
    }
    else if (key == "quadrature.safety")
    {
      c_.quadrature_safety = to_int(key, value);
      if (c_.quadrature_safety < 0 || c_.quadrature_safety > max_quadrature_order)
        throw ConfigError(fmt::format("quadrature.safety must lie in [0, {}]", max_quadrature_order));
    }
    else if (key == "output.dir")
      c_.output_dir = value;
    else if (key == "output.residuals")
      c_.write_residuals = to_bool(key, value);
    else if (key == "output.dump_system")
      c_.dump_system = to_bool(key, value);
    else if (parts.size() == 3 && parts[0] == "slice")
      slice(key, parts, value);
    else if (key == "tipdg.check")
      c_.tipdg_check = to_bool(key, value);
    else
      throw ConfigError(fmt::format("unknown key '{}'", key));
  }

  void finish()
  {
    if (c_.mesh_file.empty() == (c_.cube_n == 0))
      throw ConfigError("exactly one of mesh.file and mesh.cube is required");
    if (!have_kappa_)
      throw ConfigError("missing required key 'kappa'");
    for (const auto &[id, entry] : regions_)
      c_.regions[id] = Complex(entry.re.value_or(1.0), entry.im.value_or(0.0));
    MaterialTable check;
    for (const auto &[id, eps] : c_.regions)
    {
      try
      {
        check.set(id, eps);
      }
      catch (const ConfigError &e)
      {
        throw ConfigError(fmt::format("region {}: {}", id, e.what()));
      }
    }
    for (const auto &[tag, bc] : c_.boundary)
      if (bc.plane_wave_data && !c_.plane_wave)
        throw ConfigError(fmt::format("boundary.{}.data = plane_wave requires plane_wave.direction", tag));
    if (c_.plane_wave && !have_direction_)
      throw ConfigError("plane_wave.direction is required when plane_wave.polarization is given");
    for (const SliceSpec &s : c_.slices)
      if (!slice_resolution_.count(s.name))
        throw ConfigError(fmt::format("slice.{}.resolution is required", s.name));
    c_.solver.validate();
    if (c_.policy == DirectionPolicy::fixed && c_.directions < 1)
      throw ConfigError("directions.p must be at least 1");
  }

private:
  static double positive(const std::string &key, const std::string &value)
  {
    const double v = to_double(key, value);
    if (!(v > 0.0))
      throw ConfigError(fmt::format("{} must be positive", key));
    return v;
  }

  static int positive_int(const std::string &key, const std::string &value)
  {
    const int v = to_int(key, value);
    if (v < 1)
      throw ConfigError(fmt::format("{} must be positive", key));
    return v;
  }

  static int id_of(const std::string &key, const std::string &part)
  {
    const int id = to_int(key, part);
    if (id < 0)
      throw ConfigError(fmt::format("{}: negative id", key));
    return id;
  }

  PlaneWaveConfig &wave()
  {
    if (!c_.plane_wave)
      c_.plane_wave.emplace();
    return *c_.plane_wave;
  }

  void region(const std::string &key, const std::vector<std::string> &parts, const std::string &value)
  {
    RegionEntry &r = regions_[id_of(key, parts[1])];
    if (parts[2] == "eps_re")
      r.re = to_double(key, value);
    else if (parts[2] == "eps_im")
      r.im = to_double(key, value);
    else
      throw ConfigError(fmt::format("unknown key '{}'", key));
  }

  void boundary(const std::string &key, const std::vector<std::string> &parts, const std::string &value)
  {
    BoundaryConfig &b = c_.boundary[id_of(key, parts[1])];
    if (parts[2] == "Q")
    {
      b.Q = to_double(key, value);
      if (std::abs(b.Q) > 1.0)
        throw ConfigError(fmt::format("{} = {} is out of range: |Q| <= 1 is required", key, value));
    }
    else if (parts[2] == "lambda")
      b.lambda = positive(key, value);
    else if (parts[2] == "data")
    {
      if (value == "none")
        b.plane_wave_data = false;
      else if (value == "plane_wave")
        b.plane_wave_data = true;
      else
        throw ConfigError(fmt::format("{}: expected none or plane_wave, got '{}'", key, value));
    }
    else
      throw ConfigError(fmt::format("unknown key '{}'", key));
  }

  void slice(const std::string &key, const std::vector<std::string> &parts, const std::string &value)
  {
    const std::string &name = parts[1];
    if (name.empty() || name.find_first_of("/\\") != std::string::npos)
      throw ConfigError(fmt::format("{}: invalid slice name", key));
    auto it = std::find_if(c_.slices.begin(), c_.slices.end(), [&](const SliceSpec &s) { return s.name == name; });
    if (it == c_.slices.end())
    {
      c_.slices.push_back(SliceSpec{});
      c_.slices.back().name = name;
      it = std::prev(c_.slices.end());
    }
    if (parts[2] == "origin")
      it->origin = to_vec3(key, value);
    else if (parts[2] == "u")
      it->u = to_vec3(key, value);
    else if (parts[2] == "v")
      it->v = to_vec3(key, value);
    else if (parts[2] == "resolution")
    {
      const std::vector<double> n = to_numbers(key, value);
      if (n.empty() || n.size() > 2)
        throw ConfigError(fmt::format("{}: expected one or two counts", key));
      for (double x : n)
        if (x < 2 || x != std::floor(x) || x > 1e6)
          throw ConfigError(fmt::format("{}: counts must be integers >= 2", key));
      it->nu = static_cast<int>(n[0]);
      it->nv = static_cast<int>(n.back());
      slice_resolution_.insert(name);
    }
    else
      throw ConfigError(fmt::format("unknown key '{}'", key));
  }

  RunConfig &c_;
  bool have_kappa_ = false;
  bool have_direction_ = false;
  std::map<int, RegionEntry> regions_;
  std::set<std::string> slice_resolution_;
};

std::string g17(double v) { return fmt::format("{:.17g}", v); }

// Re-throws the active error with the phase prepended, preserving its category.
template <class F>
auto in_phase(const char *phase, F &&body) -> decltype(body())
{
  const auto label = [phase](const std::exception &e) { return fmt::format("{}: {}", phase, e.what()); };
  try
  {
    return body();
  }
  catch (const ConfigError &e)
  {
    throw ConfigError(label(e));
  }
  catch (const MeshError &e)
  {
    throw MeshError(label(e));
  }
  catch (const AssemblyError &e)
  {
    throw AssemblyError(label(e));
  }
  catch (const SolverError &e)
  {
    throw SolverError(label(e));
  }
}

void write_file(const std::filesystem::path &path, const std::string &content)
{
  std::ofstream out(path, std::ios::binary);
  out << content;
  if (!out)
    throw std::runtime_error("cannot write " + path.string());
}

class Clock
{
public:
  double lap()
  {
    const auto now = std::chrono::steady_clock::now();
    const double dt = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    return dt;
  }

private:
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

void check_against_mesh(const RunConfig &config, const Mesh &mesh)
{
  const std::vector<int> regions = mesh.region_ids();
  for (const auto &[id, eps] : config.regions)
    if (std::find(regions.begin(), regions.end(), id) == regions.end())
      throw ConfigError(fmt::format("region {} does not exist in the mesh", id));
  const std::vector<int> tags = mesh.boundary_tags();
  for (const auto &[tag, bc] : config.boundary)
    if (std::find(tags.begin(), tags.end(), tag) == tags.end())
      throw ConfigError(fmt::format("boundary tag {} does not exist in the mesh", tag));
  for (int tag : tags)
    if (!config.boundary.count(tag))
      throw ConfigError(fmt::format("mesh boundary tag {} has no boundary.{}.* entry", tag, tag));
}

} // namespace

RunConfig parse_config(const std::string &text)
{
  RunConfig config;
  Parser parser(config);
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line))
  {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos)
      line.erase(hash);
    line = trim(line);
    if (line.empty())
      continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(fmt::format("line {}: expected 'key = value'", number));
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError(fmt::format("line {}: expected 'key = value'", number));
    if (!seen.insert(key).second)
      throw ConfigError(fmt::format("line {}: duplicate key '{}'", number, key));
    try
    {
      parser.set(key, value);
    }
    catch (const ConfigError &e)
    {
      throw ConfigError(fmt::format("line {}: {}", number, e.what()));
    }
  }
  parser.finish();
  return config;
}

RunConfig load_config(const std::string &path)
{
  std::ifstream in(path);
  if (!in)
    throw ConfigError("cannot open config file " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

std::string RunSummary::text() const
{
  std::string out;
  const auto line = [&out](const std::string &key, const std::string &value) {
    out += key + " = " + value + "\n";
  };
  line("status", report.converged ? "converged" : "not_converged");
  line("mesh.elements", std::to_string(elements));
  line("mesh.faces", std::to_string(faces));
  line("dofs", std::to_string(dofs));
  for (const auto &[p, count] : direction_histogram)
    line(fmt::format("directions.histogram.{}", p), std::to_string(count));
  line("condition.max", g17(max_condition));
  line("solver.method", report.method);
  line("solver.converged", report.converged ? "true" : "false");
  line("solver.iterations", std::to_string(report.iterations));
  line("solver.restarts", std::to_string(report.restarts));
  line("solver.residual", g17(report.final_residual));
  line("solver.residual_euclidean", g17(report.residual_euclidean));
  line("solver.residual_weighted", g17(report.residual_weighted));
  if (errors)
  {
    line("error.volume_abs", g17(errors->volume_abs));
    line("error.volume_rel", g17(errors->volume_rel));
    line("error.trace_abs", g17(errors->trace_abs));
    line("error.trace_rel", g17(errors->trace_rel));
  }
  if (tipdg_difference)
    line("tipdg.relative_difference", g17(*tipdg_difference));
  for (std::size_t i = 0; i < warnings.size(); ++i)
    line(fmt::format("warning.{}", i + 1), warnings[i]);
  for (const auto &[phase, seconds] : timings)
    line("time." + phase, g17(seconds));
  return out;
}

RunSummary run(const RunConfig &config, std::ostream *log)
{
  const auto say = [&](const std::string &message) {
    if (log)
      *log << message << '\n';
  };
  const Execution exec = config.solver.exec;
  RunSummary summary;
  Clock clock, total;

  const Mesh mesh = in_phase("mesh", [&] {
    return config.mesh_file.empty() ? generate_cube_mesh(config.cube_n) : load_mesh_file(config.mesh_file);
  });
  summary.elements = mesh.n_elements();
  summary.faces = mesh.n_faces();
  summary.timings.emplace_back("mesh", clock.lap());
  say(fmt::format("mesh: {} elements, {} faces", mesh.n_elements(), mesh.n_faces()));

  MaterialTable materials;
  ProblemSpec spec;
  std::optional<ExactSolution> exact;
  in_phase("config", [&] {
    check_against_mesh(config, mesh);
    for (const auto &[id, eps] : config.regions)
      materials.set(id, eps);
    if (config.plane_wave)
      exact = ExactSolution::plane_wave(config.plane_wave->direction, config.plane_wave->polarization, config.kappa,
                                        materials, mesh);
    if (config.tipdg_check && materials.has_complex())
      throw ConfigError("tipdg.check requires real permittivity in every region");
  });

  if (materials.has_complex())
    summary.warnings.push_back("convergence unproven for complex permittivity");
  for (const auto &[tag, bc] : config.boundary)
    if (std::abs(bc.Q) == 1.0)
      summary.warnings.push_back(
          fmt::format("|Q| = 1 on boundary tag {}: uniqueness of the boundary value problem is not guaranteed", tag));

  spec.kappa = config.kappa;
  spec.materials = materials;
  spec.interior_lambda = config.interior_lambda;
  spec.quadrature_safety = config.quadrature_safety;
  spec.condition_cap = config.solver.condition_cap;
  for (const auto &[tag, bc] : config.boundary)
  {
    BoundarySpec b;
    b.Q = bc.Q;
    b.lambda = bc.lambda;
    if (bc.plane_wave_data)
      b.data = manufacture_boundary_data(*exact, bc.Q, bc.lambda);
    spec.boundary[tag] = b;
  }

  std::vector<int> directions = in_phase("directions", [&] {
    if (config.policy == DirectionPolicy::adaptive)
      return adapt_directions(mesh, spec, config.solver).directions;
    return std::vector<int>(mesh.n_elements(), config.directions);
  });
  for (int p : directions)
    ++summary.direction_histogram[p];
  summary.dofs = dof_count(directions);
  summary.timings.emplace_back("directions", clock.lap());
  say(fmt::format("directions: {} unknowns", summary.dofs));

  const std::vector<LocalBasis> bases = make_bases(mesh, materials, config.kappa, directions);
  const AssembledSystem system = in_phase("assembly", [&] { return assemble_system(mesh, bases, spec, exec); });
  summary.warnings.insert(summary.warnings.end(), system.warnings.begin(), system.warnings.end());
  for (const HermitianFactor &f : system.D_factor)
    summary.max_condition = std::max(summary.max_condition, f.condition);
  summary.timings.emplace_back("assembly", clock.lap());
  say(fmt::format("assembly: max cond(D_K) = {:.3e}", summary.max_condition));

  const std::filesystem::path dir(config.output_dir);
  std::filesystem::create_directories(dir);
  if (config.dump_system)
    write_file(dir / "system.txt", dump_system(system));

  const SolveResult result = in_phase("solve", [&] { return solve(system, config.solver); });
  summary.report = result.report;
  summary.timings.emplace_back("solve", clock.lap());
  say(fmt::format("solve: {} after {} iterations, residual {:.3e}",
                  result.report.converged ? "converged" : "not converged", result.report.iterations,
                  result.report.final_residual));

  in_phase("postprocess", [&] {
    if (exact)
      summary.errors = error_norms(mesh, bases, result.chi, *exact, spec, exec);
    if (config.tipdg_check)
    {
      const TIPDGSystem tipdg =
          assemble_tipdg(mesh, bases, spec, TIPDGParams::uwvf_equivalent(config.interior_lambda));
      const Eigen::VectorXcd x = solve_tipdg(tipdg);
      const double scale = result.chi.values.norm();
      summary.tipdg_difference = (x - result.chi.values).norm() / (scale > 0.0 ? scale : 1.0);
    }
    for (const SliceSpec &s : config.slices)
      write_file(dir / ("slice_" + s.name + ".csv"), slice_csv(sample_slice(mesh, bases, result.chi, s, exec)));
    if (config.write_residuals)
    {
      std::string csv = "iteration,residual\n";
      for (std::size_t i = 0; i < result.report.history.size(); ++i)
        csv += fmt::format("{},{:.17g}\n", i, result.report.history[i]);
      write_file(dir / "residuals.csv", csv);
    }
  });
  summary.timings.emplace_back("postprocess", clock.lap());
  summary.timings.emplace_back("total", total.lap());

  write_file(dir / "summary.txt", summary.text());
  for (const std::string &w : summary.warnings)
    say("warning: " + w);
  return summary;
}

int exit_status(const RunSummary &summary) { return summary.report.converged ? 0 : 5; }

int exit_status(const std::exception &error)
{
  if (dynamic_cast<const ConfigError *>(&error))
    return 2;
  if (dynamic_cast<const MeshError *>(&error))
    return 3;
  if (dynamic_cast<const AssemblyError *>(&error))
    return 4;
  if (dynamic_cast<const SolverError *>(&error))
    return 5;
  return 1;
}

} // namespace uwvf
