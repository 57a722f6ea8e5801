#include "tradeoff/growth.hpp"

#include <cmath>

#include "detail.hpp"
#include "tradeoff/error.hpp"

namespace tradeoff {

namespace {

constexpr double kAlphaFloor = 9.0 / 22.0;

void require_alpha(double alpha) {
  if (!(alpha > kAlphaFloor)) throw Error(ErrorCode::AlphaTooSmall, "alpha must exceed 9/22");
}

}  // namespace

GrowthResult growth_optimal(const Market& market) {
  const StructureReport report = detect_nontrivial_riskless(market);
  if (!report.all_clear()) {
    throw Error(ErrorCode::MarketPathology,
                report.has_arbitrage ? "market admits arbitrage" : "market has a nontrivial riskless portfolio");
  }
  const UtilityMaximum top = maximize_expected_utility(market, Utility::log(), AdmissibleSet::UnitCost);
  return {top.portfolio, top.value, top.gradient_residual};
}

double kelly_two_state(double alpha) {
  require_alpha(alpha);
  return (22.0 * alpha - 9.0) / (20.0 * alpha);
}

Market two_state_market(double alpha) {
  Matrix payoffs(2, 1);
  payoffs << 0.5, 1.0 + alpha;
  Vector probs(2);
  probs << 0.45, 0.55;
  return Market(1.0, Vector::Ones(1), payoffs, probs);
}

double two_state_nu(double alpha, double r) {
  const double r_max = kelly_two_state(alpha);
  if (r < 0.0 || r > r_max * (1.0 + 1e-12)) {
    throw Error(ErrorCode::OutOfRange, "r must lie in [0, " + std::to_string(r_max) + "]");
  }
  return 0.55 * std::log1p(alpha * r) + 0.45 * std::log1p(-0.5 * r);
}

FrontierCurve leverage_path(const Market& market, const RiskMeasure& measure, const std::vector<double>& r_grid,
                            const TraceOptions& options) {
  const RiskAxioms& ax = measure.axioms();
  if (!(ax.r1 && ax.r1n && ax.r2)) throw Error(ErrorCode::ValidationError, "leverage path needs flags r1, r1n, r2");
  TraceOptions o = options;
  o.solve.admissible = AdmissibleSet::UnitCost;
  return trace_risk_frontier(market, measure, Utility::log(), r_grid, o);
}

std::vector<double> leverage_grid(const Market& market, const RiskMeasure& measure, int points) {
  const GrowthResult g = growth_optimal(market);
  return uniform_grid(0.0, eval_risk(measure, g.kappa.x_hat), points);
}

RiskyOnlyGrowth risky_only_growth(const Market& market) {
  if ((market.payoffs().array() <= 0.0).any()) {
    throw Error(ErrorCode::NonPositivePayoff, "risky-only growth needs strictly positive payoffs");
  }
  const UtilityMaximum top = maximize_expected_utility(market, Utility::log(), AdmissibleSet::UnitCostRiskyOnly);
  return {top.portfolio, top.value};
}

double efficiency_index(const Market& market) { return growth_optimal(market).mu_kappa; }

const char* to_string(SubsystemPosition position) {
  switch (position) {
    case SubsystemPosition::StrictlyBelow: return "strictly_below";
    case SubsystemPosition::TouchingAtKappa: return "touching_at_kappa";
    case SubsystemPosition::OnFrontierInterior: return "on_frontier_interior";
  }
  return "unknown";
}

SubsystemComparison compare_risky_only_point(const Market& market, const RiskMeasure& measure, double tolerance) {
  const RiskyOnlyGrowth sub = risky_only_growth(market);
  const GrowthResult g = growth_optimal(market);
  SubsystemComparison c;
  c.r_sub = eval_risk(measure, sub.portfolio.x_hat);
  c.mu_sub = sub.mu;
  c.r_kappa = eval_risk(measure, g.kappa.x_hat);
  SolveOptions o;
  o.require_all_clear = false;
  c.nu_full = max_utility_given_risk(market, measure, Utility::log(), c.r_sub, o).expected_utility;
  if (c.nu_full - c.mu_sub > tolerance) {
    c.position = SubsystemPosition::StrictlyBelow;
  } else if (std::abs(c.r_sub - c.r_kappa) <= tolerance * (1.0 + c.r_kappa)) {
    c.position = SubsystemPosition::TouchingAtKappa;
  } else {
    c.position = SubsystemPosition::OnFrontierInterior;
  }
  return c;
}

MartingaleMeasure extract_emm(const Market& market, const Utility& utility) {
  if (utility.kind() != UtilityKind::Log) {
    throw Error(ErrorCode::UnsupportedUtility, "martingale measure extraction needs a strictly concave utility (log)");
  }
  const StructureReport report = detect_nontrivial_riskless(market);
  if (report.has_arbitrage) throw Error(ErrorCode::MarketPathology, "market admits arbitrage");
  if (report.has_bond_replicator || report.has_nontrivial_riskless) {
    throw Error(ErrorCode::MarketPathology, "market has a nontrivial portfolio equivalent to the bond");
  }
  const UtilityMaximum top = maximize_expected_utility(market, utility, AdmissibleSet::UnitCost);
  const Vector payoff = admissible_payoff(market, top.portfolio.x_hat, AdmissibleSet::UnitCost);
  const Vector& p = market.probabilities();
  Vector lambda(payoff.size());
  for (Index i = 0; i < payoff.size(); ++i) lambda(i) = utility.derivative(payoff(i));
  const Vector weighted = lambda.cwiseProduct(p);
  MartingaleMeasure out{weighted / weighted.sum()};
  const Vector residuals = verify_emm(market, out.q);
  const double scale = 1.0 + market.prices().cwiseAbs().maxCoeff() * market.bond_return();
  if ((out.q.array() <= 0.0).any() || std::abs(out.q.sum() - 1.0) > 1e-12 ||
      residuals.cwiseAbs().maxCoeff() > 1e-8 * scale) {
    throw Error(ErrorCode::SolverFailure, "extracted measure fails the martingale check");
  }
  return out;
}

Vector verify_emm(const Market& market, const Vector& q) {
  if (q.size() != market.states()) throw Error(ErrorCode::DimensionMismatch, "q needs one weight per state");
  Vector res(market.assets() + 1);
  res(0) = market.bond_return() * (q.sum() - 1.0);
  res.tail(market.assets()) = market.payoffs().transpose() * q - market.bond_return() * market.prices();
  return res;
}

BoundednessProbe utility_boundedness_probe(const Market& market, const Utility& utility, int iteration_budget) {
  BoundednessProbe out;
  const ArbitrageResult arb = detect_arbitrage(market);
  out.arbitrage = arb.found;
  const detail::ReducedProblem problem = detail::reduce(market, AdmissibleSet::UnitCost);
  if (utility.kind() == UtilityKind::Identity) {
    const Vector gain = problem.loading.transpose() * problem.probabilities;
    if (gain.cwiseAbs().maxCoeff() > 1e-12) {
      out.unbounded = true;
      out.direction = gain / gain.cwiseAbs().maxCoeff();
    }
  } else {
    detail::Objective f = [&problem, &utility](const Vector& x, double& v, Vector* g, Matrix* h) {
      double eu = 0.0;
      if (!detail::utility_terms(problem, utility, x, eu, g, h)) return false;
      v = -eu;
      if (g) *g = -*g;
      if (h) *h = -*h;
      return true;
    };
    detail::NewtonOptions opts;
    opts.max_iterations = iteration_budget;
    opts.divergence_norm = 1e9;
    opts.divergence_value = -std::log(1e12);
    const detail::NewtonResult res = detail::newton_minimize(f, Vector::Zero(market.assets()), problem.eq_rows, opts);
    const double norm = res.x.cwiseAbs().maxCoeff();
    if (res.f < opts.divergence_value || res.x.norm() > opts.divergence_norm || (!res.converged && norm > 1e6)) {
      out.unbounded = true;
      if (norm > 0.0) out.direction = res.x / norm;
    }
  }
  out.agrees = out.unbounded == out.arbitrage;
  return out;
}

}  // namespace tradeoff
