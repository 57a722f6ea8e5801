#pragma once

#include <string>

#include "tradeoff/market.hpp"
#include "tradeoff/measures.hpp"

namespace tradeoff {

/// Admissible portfolios: unit initial cost, optionally without the bond (x0 = 0).
enum class AdmissibleSet { UnitCost, UnitCostRiskyOnly };

const char* to_string(AdmissibleSet set);

struct SolveOptions {
  AdmissibleSet admissible = AdmissibleSet::UnitCost;
  /// Target accuracy of the constraint residual and multiplier search.
  double tolerance = 1e-10;
  /// Refuse markets with a nontrivial riskless portfolio (MarketPathology).
  bool require_all_clear = true;
  int max_iterations = 500;
};

/// Multipliers of L = r(x) + lambda1 (mu - E[u(S1.x)]) + lambda2 (1 - S0.x).
struct KktReport {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double stationarity_residual = 0.0;
  double complementary_slackness = 0.0;
};

struct SolveResult {
  Portfolio portfolio;
  double risk = 0.0;
  double expected_utility = 0.0;
  KktReport kkt;
  /// False when the optimum is interior to the constraint (slack).
  bool binding = true;
  int iterations = 0;
};

/// gamma(mu): minimal risk among admissible portfolios with E[u(S1.x)] >= mu.
SolveResult min_risk_given_utility(const Market& market, const RiskMeasure& measure,
                                   const Utility& utility, double mu,
                                   const SolveOptions& options = {});

/// nu(r): maximal expected utility among admissible portfolios with risk <= r.
SolveResult max_utility_given_risk(const Market& market, const RiskMeasure& measure,
                                   const Utility& utility, double r,
                                   const SolveOptions& options = {});

struct UtilityMaximum {
  Portfolio portfolio;
  /// sup E[u]; +inf when unbounded.
  double value = 0.0;
  bool attained = false;
  double gradient_residual = 0.0;
  int iterations = 0;
};

/// Unconstrained maximization of E[u(S1.x)] over the admissible set. Log utility uses
/// damped Newton from a strictly feasible start and reports MarketPathology when the
/// objective or the step diverges.
UtilityMaximum maximize_expected_utility(const Market& market, const Utility& utility,
                                         AdmissibleSet admissible = AdmissibleSet::UnitCost);

/// Stationarity of the Lagrangian at `portfolio` for the given multipliers. Smooth measures
/// use central differences (NonSmoothPoint when one-sided differences disagree); polyhedral
/// measures use the exact distance to the subdifferential.
KktReport kkt_residual(const Market& market, const RiskMeasure& measure, const Utility& utility,
                       const Portfolio& portfolio, double lambda1, double lambda2, double mu,
                       AdmissibleSet admissible = AdmissibleSet::UnitCost);

/// Payoff per state of an admissible portfolio written in terms of x_hat.
Vector admissible_payoff(const Market& market, const Vector& x_hat, AdmissibleSet admissible);
Portfolio admissible_portfolio(const Market& market, const Vector& x_hat, AdmissibleSet admissible);

}  // namespace tradeoff
