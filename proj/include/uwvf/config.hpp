#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "uwvf/postprocess.hpp"
#include "uwvf/solve.hpp"

namespace uwvf
{

enum class DirectionPolicy
{
  fixed,
  adaptive
};

struct BoundaryConfig
{
  double Q = 0.0;
  double lambda = 1.0;
  bool plane_wave_data = false;
};

struct PlaneWaveConfig
{
  Vec3 direction = Vec3::UnitZ();
  Vec3 polarization = Vec3::UnitX();
};

struct RunConfig
{
  std::string mesh_file; // empty: generated cube
  int cube_n = 0;
  double kappa = 0.0;
  std::map<int, Complex> regions;
  std::map<int, BoundaryConfig> boundary;
  double interior_lambda = 1.0;
  std::optional<PlaneWaveConfig> plane_wave;

  DirectionPolicy policy = DirectionPolicy::fixed;
  int directions = 13;
  SolverConfig solver;
  int quadrature_safety = 14;

  std::string output_dir = ".";
  bool write_residuals = true;
  std::vector<SliceSpec> slices;
  bool dump_system = false;
  bool tipdg_check = false;
  bool verbose = false;
};

/// Parses the flat "key = value" format; '#' starts a comment. Unknown keys,
/// duplicates, missing required keys and out-of-range values throw
/// ConfigError. Consistency with the mesh is checked by run().
RunConfig parse_config(const std::string &text);
RunConfig load_config(const std::string &path);

struct RunSummary
{
  std::size_t dofs = 0;
  int elements = 0;
  int faces = 0;
  std::map<int, int> direction_histogram; // p_K -> element count
  double max_condition = 0.0;
  SolveReport report;
  std::optional<ErrorNorms> errors;
  std::optional<double> tipdg_difference;
  std::vector<std::string> warnings;
  std::vector<std::pair<std::string, double>> timings;

  /// key = value lines with 17 significant digits; timings last, under "time.".
  std::string text() const;
};

/// Runs mesh -> directions -> assembly -> solve -> post-processing and
/// writes summary.txt (plus residuals.csv, slice_<name>.csv, system.txt as
/// configured) into the output directory. Errors carry the failing phase in
/// their message. Progress goes to `log` when non-null.
RunSummary run(const RunConfig &config, std::ostream *log = nullptr);

/// Process exit status for a run: 0 converged, 5 not converged.
int exit_status(const RunSummary &summary);
/// Exit status for an exception escaping run(): 2 config, 3 mesh,
/// 4 assembly, 5 solver, 1 anything else.
int exit_status(const std::exception &error);

} // namespace uwvf
