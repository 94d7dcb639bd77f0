#include <iostream>

#include <CLI11.hpp>

#include "uwvf/config.hpp"

int main(int argc, char **argv)
{
  CLI::App app{"Plane-wave ultra weak variational formulation solver for time-harmonic Maxwell"};
  std::string config_path;
  int threads = 0;
  bool verbose = false;
  bool dump = false;
  app.add_option("--config", config_path, "Run configuration (key = value)")->required();
  app.add_option("--threads", threads, "Worker threads (default: all cores)")->check(CLI::NonNegativeNumber);
  app.add_flag("--verbose", verbose, "Print progress to stderr");
  app.add_flag("--dump-system", dump, "Write the assembled system to system.txt");
  try
  {
    app.parse(argc, argv);
  }
  catch (const CLI::ParseError &e)
  {
    const int status = app.exit(e);
    return status == 0 ? 0 : 2;
  }

  try
  {
    uwvf::RunConfig config = uwvf::load_config(config_path);
    config.solver.exec.threads = threads;
    config.verbose = config.verbose || verbose;
    config.dump_system = config.dump_system || dump;
    const uwvf::RunSummary summary = uwvf::run(config, config.verbose ? &std::cerr : nullptr);
    if (!summary.report.converged)
      std::cerr << "error: solver did not converge (residual " << summary.report.final_residual << ")\n";
    return uwvf::exit_status(summary);
  }
  catch (const std::exception &e)
  {
    std::cerr << "error: " << e.what() << '\n';
    return uwvf::exit_status(e);
  }
}
