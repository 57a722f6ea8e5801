#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "tradeoff/commands.hpp"
#include "tradeoff/error.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Risk/utility trade-off portfolio tool"};
  std::string command;
  std::string scenario_path;
  std::string out_dir;
  tradeoff::RunOverrides overrides;
  app.add_option("command", command, "Command to run")
      ->required()
      ->check(CLI::IsMember(tradeoff::command_names()));
  app.add_option("--scenario", scenario_path, "Scenario JSON file")->required();
  app.add_option("--out", out_dir, "Output directory")->required();
  app.add_option("--grid-points", overrides.grid_points, "Number of grid points")->check(CLI::PositiveNumber);
  app.add_option("--tol-solver", overrides.tol_solver, "Solver tolerance")->check(CLI::PositiveNumber);
  app.add_option("--tol-rank", overrides.tol_rank, "Relative rank tolerance")->check(CLI::PositiveNumber);
  app.add_option("--tol-shape", overrides.tol_shape, "Frontier shape tolerance")->check(CLI::PositiveNumber);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (const char* env = std::getenv("PORTCLI_THREADS")) {
    try {
      const long n = std::stol(env);
      if (n < 1) throw std::invalid_argument("non-positive");
      overrides.threads = static_cast<unsigned>(n);
    } catch (const std::exception&) {
      std::cerr << "portcli: PORTCLI_THREADS must be a positive integer\n";
      return 2;
    }
  }

  tradeoff::Scenario scenario;
  try {
    scenario = tradeoff::load_scenario(scenario_path);
  } catch (const tradeoff::Error& e) {
    std::cerr << "portcli: " << e.what() << '\n';
    return tradeoff::exit_code(e.code());
  }
  return tradeoff::run_command(command, scenario, out_dir, overrides, std::cerr);
}
