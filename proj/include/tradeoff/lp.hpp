#pragma once

#include <limits>
#include <vector>

#include <Eigen/Dense>

namespace tradeoff {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class RowSense { LessEqual, Equal, GreaterEqual };

/// Dense linear program
///
///   minimize (or maximize)  objective . x
///   subject to              constraints.row(i) . x  (<=, =, >=)  rhs(i)
///                           lower <= x <= upper
///
/// Bounds may be infinite. Empty `lower`/`upper` mean x >= 0 and no upper bound.
struct LinearProgram {
  Vector objective;
  Matrix constraints;
  Vector rhs;
  std::vector<RowSense> senses;
  Vector lower;
  Vector upper;
  bool maximize = false;

  Index variables() const { return objective.size(); }
  Index rows() const { return constraints.rows(); }

  /// Convenience builder for a free variable block.
  static LinearProgram with_variables(Index n, double lo = 0.0, double hi = kInf);
  void add_row(const Vector& coefficients, RowSense sense, double value);
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

const char* to_string(LpStatus status);

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  Vector x;
  double objective = 0.0;
  /// Sensitivity of the optimal objective to each row's right-hand side.
  Vector duals;
  double primal_residual = 0.0;
  /// Relative gap between primal and dual objective of the standard form.
  double duality_gap = 0.0;
  int iterations = 0;
};

struct LpOptions {
  double feasibility_tolerance = 1e-9;
  double optimality_tolerance = 1e-10;
  double pivot_tolerance = 1e-11;
  int max_iterations = 0;  // 0 selects 50 * (rows + columns)
};

/// Two-phase primal simplex with Bland's anti-cycling rule. The final basis is
/// re-factorized so the reported primal point and duals carry no tableau drift.
/// Throws Error(SolverFailure) when the iteration guard trips.
LpResult solve_lp(const LinearProgram& lp, const LpOptions& options = {});

}  // namespace tradeoff
