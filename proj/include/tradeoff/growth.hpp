#pragma once

#include <optional>
#include <vector>

#include "tradeoff/frontier.hpp"

namespace tradeoff {

struct GrowthResult {
  Portfolio kappa;
  double mu_kappa = 0.0;
  double gradient_residual = 0.0;
};

/// Maximizer of E[ln(S1.x)] over unit-cost portfolios. MarketPathology unless all-clear.
GrowthResult growth_optimal(const Market& market);

/// Optimal fraction (22 alpha - 9)/(20 alpha) for the two-state market with payoffs
/// {0.5, 1 + alpha} at probabilities {0.45, 0.55}; AlphaTooSmall for alpha <= 9/22.
double kelly_two_state(double alpha);

/// The two-state market above (R = 1, price 1).
Market two_state_market(double alpha);

/// nu(r) = 0.55 ln(1 + alpha r) + 0.45 ln(1 - r/2) on [0, kelly_two_state(alpha)].
double two_state_nu(double alpha, double r);

/// nu over a risk grid with log utility; requires flags r1, r1n, r2.
FrontierCurve leverage_path(const Market& market, const RiskMeasure& measure, const std::vector<double>& r_grid,
                            const TraceOptions& options = {});

/// `points` uniform risk levels on [0, r(kappa)].
std::vector<double> leverage_grid(const Market& market, const RiskMeasure& measure, int points);

struct RiskyOnlyGrowth {
  Portfolio portfolio;
  double mu = 0.0;
};

/// Growth optimum without the bond; NonPositivePayoff unless every payoff is > 0.
RiskyOnlyGrowth risky_only_growth(const Market& market);

double efficiency_index(const Market& market);

enum class SubsystemPosition { StrictlyBelow, TouchingAtKappa, OnFrontierInterior };

const char* to_string(SubsystemPosition position);

struct SubsystemComparison {
  SubsystemPosition position = SubsystemPosition::StrictlyBelow;
  double r_sub = 0.0;
  double mu_sub = 0.0;
  double nu_full = 0.0;
  double r_kappa = 0.0;
};

/// Places the risky-only growth point (r_sub, mu_sub) relative to the full log-utility
/// frontier by comparing nu_full(r_sub) with mu_sub at `tolerance`.
SubsystemComparison compare_risky_only_point(const Market& market, const RiskMeasure& measure,
                                             double tolerance = 1e-8);

struct MartingaleMeasure {
  Vector q;
};

/// q = lambda p / E[lambda] with lambda = u'(optimal payoff). Log utility only
/// (UnsupportedUtility otherwise); MarketPathology on arbitrage or a bond replicator.
MartingaleMeasure extract_emm(const Market& market, const Utility& utility);

/// E^Q[S1^m] - R S0^m for m = 0..M (entry 0 is the bond).
Vector verify_emm(const Market& market, const Vector& q);

struct BoundednessProbe {
  bool unbounded = false;
  /// Normalized (max-norm 1) x_hat along which the objective diverged.
  std::optional<Vector> direction;
  /// detect_arbitrage verdict, the authoritative answer.
  bool arbitrage = false;
  bool agrees = true;
};

/// Newton ascent on E[u] declaring divergence when the objective exceeds ln(1e12) or the
/// iterate norm exceeds 1e9 within `iteration_budget` steps.
BoundednessProbe utility_boundedness_probe(const Market& market, const Utility& utility, int iteration_budget = 500);

}  // namespace tradeoff
