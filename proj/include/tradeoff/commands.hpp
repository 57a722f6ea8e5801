#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tradeoff/error.hpp"
#include "tradeoff/frontier.hpp"
#include "tradeoff/scenario.hpp"

namespace tradeoff {

/// Command-line overrides; each one wins over the matching scenario field.
struct RunOverrides {
  std::optional<int> grid_points;
  std::optional<double> tol_solver;
  std::optional<double> tol_rank;
  std::optional<double> tol_shape;
  std::optional<unsigned> threads;
};

const std::vector<std::string>& command_names();

/// Exit status for an error: 2 validation, 3 solver, 4 market pathology.
int exit_code(ErrorCode code);

/// Runs `command` on `scenario`, writing data files and run.json into `out_dir`.
/// Messages go to `err`; the return value is the process exit status.
int run_command(const std::string& command, const Scenario& scenario, const std::string& out_dir,
                const RunOverrides& overrides, std::ostream& err);

/// TSV with header "#mu\trisk\tx0\tx1..." and 12 significant digits per value.
std::string format_table(const FrontierCurve& curve, Index assets);
void emit_table(const FrontierCurve& curve, Index assets, const std::string& path);

}  // namespace tradeoff
