#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tradeoff/solver.hpp"

namespace tradeoff {

struct MasterFund {
  Portfolio portfolio;
  double r_m = 0.0;
  double mu_m = 0.0;
};

/// Efficient frontier of a positively homogeneous measure with identity utility: a ray from
/// (0, R) through (r1, R + 1).
struct AffineFrontier {
  Portfolio x1;
  double r1 = 0.0;
  double bond_return = 1.0;
  double mu1 = 2.0;
  /// Present when x1_0 < 1.
  std::optional<MasterFund> master;
  /// Non-empty when x1's bond weight is within 1e-6 of 1.
  std::string warning;
};

/// Solves the unit-cost problem at mu1 = R + 1. Requires flags r1, r1n, r2, r3
/// (ValidationError otherwise); FlatMarket when E[S1] = R S0 for every asset.
AffineFrontier basic_fund(const Market& market, const RiskMeasure& measure, const SolveOptions& options = {});

/// (mu1 - mu)(1, 0) + (mu - R) x1; BelowRiskless when mu < R.
Portfolio affine_frontier_portfolio(const AffineFrontier& frontier, double mu);

/// Zero-bond fund on the frontier; NoMasterFund when |x1_0 - 1| <= 1e-9 or x1_0 > 1.
MasterFund master_fund(const AffineFrontier& frontier);

struct CounterexampleFixture {
  Market market;
  RiskMeasure measure;
  /// The problem is posed without the bond.
  AdmissibleSet admissible = AdmissibleSet::UnitCostRiskyOnly;
};

/// Three assets priced 1 with E[S1_hat . x_hat] = x_1 and the gauge of the hull of the box
/// [-5,5]x[-1,1]x[-1,1], the point (10,0,0) and a unit square at x_1 = 9 rotated by 30 degrees.
CounterexampleFixture counterexample_fixture();

struct AffinityReport {
  bool is_affine = true;
  double max_deviation = 0.0;
};

/// Least-squares fit x(mu) ~ a + mu b; affine iff the largest residual <= 1e-7.
AffinityReport verify_affinity(const std::vector<std::pair<double, Vector>>& path);

}  // namespace tradeoff
