#include "tradeoff/market.hpp"

#include <cmath>
#include <string>

#include <Eigen/SVD>

#include "tradeoff/error.hpp"

namespace tradeoff {

Market::Market(double bond_return, Vector prices, Matrix payoffs, Vector probabilities,
               MarketOptions options)
    : bond_return_(bond_return),
      prices_(std::move(prices)),
      payoffs_(std::move(payoffs)),
      probabilities_(std::move(probabilities)),
      options_(options) {
  if (payoffs_.rows() < 1 || payoffs_.cols() < 1) {
    throw Error(ErrorCode::DimensionMismatch, "market needs N >= 1 states and M >= 1 assets");
  }
  if (prices_.size() != payoffs_.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "s0_hat length " + std::to_string(prices_.size()) +
                                                  " does not match " + std::to_string(payoffs_.cols()) +
                                                  " payoff columns");
  }
  if (probabilities_.size() != payoffs_.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "probs length " + std::to_string(probabilities_.size()) +
                                                  " does not match " + std::to_string(payoffs_.rows()) +
                                                  " payoff rows");
  }
  if (!(bond_return_ > 0.0) || !std::isfinite(bond_return_)) {
    throw Error(ErrorCode::NonPositiveReturn, "R must be finite and > 0");
  }
  for (Index i = 0; i < probabilities_.size(); ++i) {
    if (!(probabilities_(i) > 0.0)) {
      throw Error(ErrorCode::NonPositiveProbability, "state " + std::to_string(i));
    }
  }
  if (std::abs(probabilities_.sum() - 1.0) > 1e-12) {
    throw Error(ErrorCode::ProbabilitySumNotOne, "sum = " + std::to_string(probabilities_.sum()));
  }
  for (Index j = 0; j < prices_.size(); ++j) {
    if (!(prices_(j) > 0.0) || !std::isfinite(prices_(j))) {
      throw Error(ErrorCode::NonPositivePrice, "asset " + std::to_string(j + 1));
    }
  }
  if (!payoffs_.allFinite()) {
    throw Error(ErrorCode::DimensionMismatch, "payoffs must be finite");
  }
  if (!options_.allow_negative_payoffs && (payoffs_.array() < 0.0).any()) {
    throw Error(ErrorCode::NegativePayoff, "payoffs must be >= 0");
  }
}

Market build_market(double bond_return, Vector prices, Matrix payoffs, Vector probabilities,
                    MarketOptions options) {
  return Market(bond_return, std::move(prices), std::move(payoffs), std::move(probabilities), options);
}

Vector Portfolio::stacked() const {
  Vector x(x_hat.size() + 1);
  x(0) = x0;
  x.tail(x_hat.size()) = x_hat;
  return x;
}

Portfolio Portfolio::from_stacked(const Vector& x) {
  return {x(0), x.tail(x.size() - 1)};
}

Portfolio unit_cost_portfolio(const Market& market, const Vector& x_hat) {
  return {1.0 - market.prices().dot(x_hat), x_hat};
}

Matrix excess_matrix(const Market& market) {
  return market.payoffs().rowwise() - (market.bond_return() * market.prices()).transpose();
}

Matrix covariance(const Market& market) {
  const Matrix centered = market.payoffs().rowwise() - market.expected_payoffs().transpose();
  Matrix sigma = centered.transpose() * market.probabilities().asDiagonal() * centered;
  return 0.5 * (sigma + sigma.transpose());
}

Index numerical_rank(const Matrix& m, double relative_tolerance) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(m);
  const Vector& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  Index rank = 0;
  for (Index i = 0; i < s.size(); ++i) {
    if (s(i) > relative_tolerance * s(0)) ++rank;
  }
  return rank;
}

namespace {

Portfolio zero_cost(const Market& market, Vector x_hat) {
  const double scale = x_hat.cwiseAbs().maxCoeff();
  if (scale > 0.0) x_hat /= scale;
  return {-market.prices().dot(x_hat), x_hat};
}

double excess_scale(const Matrix& g) {
  return 1.0 + (g.size() ? g.cwiseAbs().maxCoeff() : 0.0);
}

// Searches for x_hat with G x_hat >= 0 and x_hat_j pinned to +-1.
std::optional<Vector> riskless_direction(const Matrix& g) {
  const Index m = g.cols();
  const double tol = 1e-9 * excess_scale(g);
  for (Index j = 0; j < m; ++j) {
    for (double sign : {1.0, -1.0}) {
      LinearProgram lp = LinearProgram::with_variables(m, -kInf, kInf);
      for (Index i = 0; i < g.rows(); ++i) lp.add_row(g.row(i).transpose(), RowSense::GreaterEqual, 0.0);
      Vector pin = Vector::Zero(m);
      pin(j) = sign;
      lp.add_row(pin, RowSense::Equal, 1.0);
      // Keep the feasible region bounded so the simplex terminates on a vertex.
      lp.lower = Vector::Constant(m, -1e6);
      lp.upper = Vector::Constant(m, 1e6);
      const LpResult res = solve_lp(lp);
      if (res.status != LpStatus::Optimal) continue;
      const Vector gx = g * res.x;
      if (gx.size() == 0 || gx.minCoeff() >= -tol * res.x.cwiseAbs().maxCoeff()) return res.x;
    }
  }
  return std::nullopt;
}

}  // namespace

ArbitrageResult detect_arbitrage(const Market& market) {
  const Matrix g = excess_matrix(market);
  const Index m = market.assets();
  LinearProgram lp = LinearProgram::with_variables(m, -1.0, 1.0);
  lp.maximize = true;
  lp.objective = g.colwise().sum().transpose();
  for (Index i = 0; i < g.rows(); ++i) lp.add_row(g.row(i).transpose(), RowSense::GreaterEqual, 0.0);
  const LpResult res = solve_lp(lp);
  if (res.status != LpStatus::Optimal) {
    throw Error(ErrorCode::SolverFailure, std::string("arbitrage LP returned ") + to_string(res.status));
  }
  ArbitrageResult out;
  out.lp_optimum = res.objective;
  if (res.objective > 1e-9 * excess_scale(g)) {
    out.found = true;
    out.witness = zero_cost(market, res.x);
  }
  return out;
}

StructureReport detect_nontrivial_riskless(const Market& market, double rank_tolerance) {
  const Matrix g = excess_matrix(market);
  const Index m = market.assets();
  StructureReport report;

  const ArbitrageResult arb = detect_arbitrage(market);
  report.has_arbitrage = arb.found;

  report.rank_g = numerical_rank(g, rank_tolerance);
  // An all-zero G has rank 0 and every direction replicates the bond.
  report.has_bond_replicator = report.rank_g < m;

  const std::optional<Vector> riskless = riskless_direction(g);
  report.has_nontrivial_riskless = riskless.has_value();

  if (arb.found) {
    report.certificate = arb.witness;
  } else if (report.has_bond_replicator) {
    Eigen::JacobiSVD<Matrix> svd(g, Eigen::ComputeFullV);
    report.certificate = zero_cost(market, svd.matrixV().col(m - 1));
  } else if (riskless) {
    report.certificate = zero_cost(market, *riskless);
  }
  return report;
}

PortfolioStats portfolio_stats(const Market& market, const Portfolio& portfolio) {
  if (portfolio.x_hat.size() != market.assets()) {
    throw Error(ErrorCode::DimensionMismatch, "portfolio has " + std::to_string(portfolio.x_hat.size()) +
                                                  " risky positions, market has " +
                                                  std::to_string(market.assets()));
  }
  PortfolioStats stats;
  stats.cost = portfolio.x0 + market.prices().dot(portfolio.x_hat);
  stats.payoff_per_state =
      (market.payoffs() * portfolio.x_hat).array() + market.bond_return() * portfolio.x0;
  stats.expected_payoff = market.probabilities().dot(stats.payoff_per_state);
  return stats;
}

}  // namespace tradeoff
