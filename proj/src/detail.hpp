#pragma once

#include <functional>

#include "tradeoff/market.hpp"
#include "tradeoff/measures.hpp"
#include "tradeoff/solver.hpp"

namespace tradeoff::detail {

/// Payoff per state is offset + loading * x_hat; equality rows pin the budget when the
/// bond is excluded.
struct ReducedProblem {
  Vector offset;
  Matrix loading;
  Vector probabilities;
  Matrix eq_rows;
  Vector eq_rhs;
  double bond_return = 1.0;
  AdmissibleSet admissible = AdmissibleSet::UnitCost;
};

ReducedProblem reduce(const Market& market, AdmissibleSet admissible);

/// Returns false outside the domain. `grad`/`hess` may be null.
using Objective = std::function<bool(const Vector& x, double& f, Vector* grad, Matrix* hess)>;

struct NewtonResult {
  Vector x;
  double f = 0.0;
  double decrement = 0.0;
  double max_step = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct NewtonOptions {
  int max_iterations = 200;
  /// Abort when the iterate norm exceeds this (divergence detection).
  double divergence_norm = kInf;
  /// Abort when f drops below this (divergence detection).
  double divergence_value = -kInf;
};

/// Damped Newton from a strictly feasible start; steps stay in the null space of `eq_rows`.
NewtonResult newton_minimize(const Objective& objective, Vector start, const Matrix& eq_rows,
                             const NewtonOptions& options = {});

/// Newton direction for H dx = -g subject to A dx = 0.
Vector newton_direction(const Matrix& hess, const Vector& grad, const Matrix& eq_rows);

/// E[u(payoff)] with gradient/Hessian in x_hat for the reduced problem.
bool utility_terms(const ReducedProblem& problem, const Utility& utility, const Vector& x, double& value,
                   Vector* grad, Matrix* hess);

/// Strictly feasible point with all payoffs positive for the risky-only budget, via the LP
/// max s s.t. payoff >= s, budget, |x| <= box. Returns false when none exists.
bool positive_payoff_point(const ReducedProblem& problem, Vector& x);

/// Multipliers (lambda1 >= 0, lambda2) of the min-form Lagrangian that minimize the
/// distance of the stationarity condition to the subdifferential of a polyhedral measure.
KktReport polyhedral_multipliers(const Market& market, const RiskMeasure& measure, const Utility& utility,
                                 const Portfolio& portfolio, double mu, AdmissibleSet admissible);

// Polyhedral measure with log utility, solved by a log-barrier method over the
// generator weights y >= 0 (x_hat = D y).
SolveResult barrier_max_utility(const Market& market, const ReducedProblem& problem,
                                const RiskMeasure& measure, double r, const SolveOptions& options);
SolveResult barrier_min_risk(const Market& market, const ReducedProblem& problem,
                             const RiskMeasure& measure, double mu, const UtilityMaximum& top,
                             const SolveOptions& options);

}  // namespace tradeoff::detail
