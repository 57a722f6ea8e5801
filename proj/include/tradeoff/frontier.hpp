#pragma once

#include <string>
#include <vector>

#include "tradeoff/solver.hpp"

namespace tradeoff {

struct FrontierBounds {
  double mu_min = 0.0;
  double mu_max = 0.0;
  double r_min = 0.0;
  double r_max = 0.0;
  bool mu_min_attained = false;
  bool mu_max_attained = false;
  bool r_min_attained = false;
  bool r_max_attained = false;
  /// Portfolio attaining mu_min (and r_min).
  Portfolio min_portfolio;
  /// Portfolio attaining mu_max when it is attained.
  Portfolio max_portfolio;
};

struct FrontierPoint {
  double mu = 0.0;
  double risk = 0.0;
  Portfolio portfolio;
  bool binding = true;
};

struct FrontierCurve {
  std::vector<FrontierPoint> points;
  std::string measure_id;
  std::string utility_id;
  AdmissibleSet admissible = AdmissibleSet::UnitCost;
  FrontierBounds bounds;
  /// True when grid values beyond the attainable range were dropped.
  bool truncated = false;
  /// Traced over a risk grid (points carry mu = nu(r)) rather than a utility grid.
  bool risk_grid = false;
};

/// Extreme utility and risk levels of the admissible set.
FrontierBounds frontier_bounds(const Market& market, const RiskMeasure& measure, const Utility& utility,
                               AdmissibleSet admissible = AdmissibleSet::UnitCost);

struct TraceOptions {
  SolveOptions solve;
  /// Worker threads for independent grid points; 0 uses the hardware concurrency.
  unsigned threads = 0;
};

/// gamma over a sorted utility grid. Grid values above the attainable range truncate the curve.
FrontierCurve trace_frontier(const Market& market, const RiskMeasure& measure, const Utility& utility,
                             const std::vector<double>& mu_grid, const TraceOptions& options = {});

/// nu over a sorted risk grid (points carry mu = nu(r)).
FrontierCurve trace_risk_frontier(const Market& market, const RiskMeasure& measure, const Utility& utility,
                                  const std::vector<double>& r_grid, const TraceOptions& options = {});

/// `points` uniform values on [mu_min, min(mu_max, mu_min + span_cap)].
std::vector<double> auto_mu_grid(const FrontierBounds& bounds, int points = 33, double span_cap = 10.0);

std::vector<double> uniform_grid(double lo, double hi, int points);

struct ShapeReport {
  bool pass = true;
  double monotonicity_violation = 0.0;
  double convexity_violation = 0.0;
  /// Index of the worst violating point, -1 when none.
  long violation_index = -1;
  bool convexity_checked = false;
};

/// Risk nondecreasing and convex in mu (chord test); passes iff both violations <= tolerance.
ShapeReport verify_frontier_shape(const FrontierCurve& curve, double tolerance = 1e-7);

struct ContinuityReport {
  bool pass = true;
  /// Largest ||x(mu_{i+1}) - x(mu_i)|| at the fine (h) and coarse (2h) spacing.
  double fine_jump = 0.0;
  double coarse_jump = 0.0;
  /// Largest jump divided by the mu spacing.
  double fine_modulus = 0.0;
  double coarse_modulus = 0.0;
};

/// Compares portfolio jumps on the full uniform grid against every other point. The grid
/// variable is mu, or r for curves traced over a risk grid.
ContinuityReport path_continuity(const FrontierCurve& curve);

struct DominanceReport {
  bool dominated = true;
  /// Largest gamma_full - gamma_sub over the common grid values (<= tolerance when dominated).
  double max_excess = 0.0;
  std::vector<double> tangency_mu;
  std::vector<double> tangency_risk;
  std::size_t compared = 0;
};

/// Checks gamma_full(mu) <= gamma_sub(mu) on the grid values shared by both curves and
/// reports where they touch (within `tolerance`).
DominanceReport subsystem_frontier_compare(const FrontierCurve& sub, const FrontierCurve& full,
                                           double tolerance = 1e-7);

}  // namespace tradeoff
