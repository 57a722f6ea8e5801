#pragma once

#include "tradeoff/market.hpp"

namespace tradeoff {

/// alpha = E Sigma^-1 E', beta = E Sigma^-1 S0', gamma = S0 Sigma^-1 S0', disc = alpha gamma - beta^2.
struct MarkowitzScalars {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma_s = 0.0;
  double disc = 0.0;
};

/// Throws SingularCovariance (LDLT pivot <= 1e-12 trace) or ProportionalMeans (disc ~ 0).
MarkowitzScalars markowitz_scalars(const Matrix& sigma, const Vector& mean_payoff, const Vector& prices);

struct MarkowitzPoint {
  double sigma = 0.0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  /// mu below the vertex beta/gamma: lower, inefficient branch of the bullet.
  bool below_vertex = false;
};

/// Minimal standard deviation of a unit-cost risky portfolio with expected payoff mu.
MarkowitzPoint markowitz_frontier(const MarkowitzScalars& scalars, double mu);

/// The unique minimizer; affine in mu.
Vector markowitz_portfolio(const Matrix& sigma, const Vector& mean_payoff, const Vector& prices, double mu);

struct TwoFundResult {
  double w = 0.0;
  double residual = 0.0;
};

/// Least-squares w with target ~ w a + (1 - w) b and the Euclidean residual.
TwoFundResult two_fund_decompose(const Vector& a, const Vector& b, const Vector& target);

struct CapmSummary {
  double bond_return = 1.0;
  double delta = 0.0;
  double sigma_m = 0.0;
  double mu_m = 0.0;
  Portfolio x_m;
  double price_of_risk = 0.0;
  MarkowitzScalars scalars;
};

/// Market portfolio and capital market line. DegenerateExcess when E = R S0,
/// NoMarketPortfolio when beta - gamma R <= 0.
CapmSummary capm_summary(const Matrix& sigma, const Vector& mean_payoff, const Vector& prices, double bond_return);

/// Minimal-variance unit-cost portfolio including the bond with expected payoff mu >= R.
Portfolio capm_portfolio(const Matrix& sigma, const Vector& mean_payoff, const Vector& prices, double bond_return,
                         double mu);

double capital_market_line(const CapmSummary& summary, double sigma);

/// (mu - R) / sigma; ZeroRisk when sigma <= 0.
double sharpe_ratio(double mu, double sigma, double bond_return);

struct BetaPricing {
  double beta = 0.0;
  double covariance = 0.0;
  /// Expected return E[a1]/a0 quoted at the given price.
  double quoted_return = 0.0;
  /// R + beta (mu_M - R).
  double capm_return = 0.0;
  /// E[a1] / capm_return: the price equating the quoted return with the CAPM return at fixed beta.
  double fair_price = 0.0;
  /// Price a0 solving E[a1]/a0 = R + beta(a0)(mu_M - R) with beta recomputed at a0;
  /// NaN when no positive solution exists.
  double fixed_point_price = 0.0;
};

BetaPricing beta_price(const Market& market, const CapmSummary& summary, const Vector& asset_payoff, double a0);

struct TangencyReport {
  bool pass = false;
  double sigma_gap = 0.0;
  double bullet_slope = 0.0;
  double cml_slope = 0.0;
  double slope_gap = 0.0;
};

/// The capital market line touches the bullet at the market portfolio with equal slope.
TangencyReport tangency_check(const MarkowitzScalars& bullet, const CapmSummary& summary);

}  // namespace tradeoff
