#include "tradeoff/closedform.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Cholesky>

#include "tradeoff/error.hpp"

namespace tradeoff {

namespace {

Eigen::LDLT<Matrix> factorize(const Matrix& sigma) {
  if (sigma.rows() != sigma.cols() || sigma.rows() == 0) {
    throw Error(ErrorCode::DimensionMismatch, "covariance must be square and non-empty");
  }
  Eigen::LDLT<Matrix> ldlt(sigma);
  const double trace = sigma.trace();
  if (ldlt.info() != Eigen::Success || !(trace > 0.0) || ldlt.vectorD().minCoeff() <= 1e-12 * trace) {
    throw Error(ErrorCode::SingularCovariance, "covariance is not positive definite");
  }
  return ldlt;
}

void check_sizes(const Matrix& sigma, const Vector& mean, const Vector& prices) {
  if (mean.size() != sigma.rows() || prices.size() != sigma.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "covariance, means and prices must agree in size");
  }
}

MarkowitzScalars raw_scalars(const Eigen::LDLT<Matrix>& ldlt, const Vector& mean, const Vector& prices) {
  const Vector si_e = ldlt.solve(mean);
  const Vector si_s = ldlt.solve(prices);
  MarkowitzScalars s;
  s.alpha = mean.dot(si_e);
  s.beta = mean.dot(si_s);
  s.gamma_s = prices.dot(si_s);
  s.disc = s.alpha * s.gamma_s - s.beta * s.beta;
  return s;
}

}  // namespace

MarkowitzScalars markowitz_scalars(const Matrix& sigma, const Vector& mean_payoff, const Vector& prices) {
  check_sizes(sigma, mean_payoff, prices);
  const auto ldlt = factorize(sigma);
  const MarkowitzScalars s = raw_scalars(ldlt, mean_payoff, prices);
  if (!(s.gamma_s > 0.0)) throw Error(ErrorCode::SingularCovariance, "gamma must be positive");
  if (s.disc <= 1e-12 * s.alpha * s.gamma_s) {
    throw Error(ErrorCode::ProportionalMeans, "expected payoffs are proportional to prices");
  }
  return s;
}

MarkowitzPoint markowitz_frontier(const MarkowitzScalars& s, double mu) {
  MarkowitzPoint p;
  const double var = (s.gamma_s * mu * mu - 2.0 * s.beta * mu + s.alpha) / s.disc;
  p.sigma = std::sqrt(std::max(var, 0.0));
  p.lambda1 = (s.gamma_s * mu - s.beta) / s.disc;
  p.lambda2 = (s.alpha - s.beta * mu) / s.disc;
  p.below_vertex = mu < s.beta / s.gamma_s;
  return p;
}

Vector markowitz_portfolio(const Matrix& sigma, const Vector& mean_payoff, const Vector& prices, double mu) {
  const MarkowitzScalars s = markowitz_scalars(sigma, mean_payoff, prices);
  const auto ldlt = factorize(sigma);
  const Vector slope = ldlt.solve(s.gamma_s * mean_payoff - s.beta * prices) / s.disc;
  const Vector level = ldlt.solve(s.alpha * prices - s.beta * mean_payoff) / s.disc;
  return mu * slope + level;
}

TwoFundResult two_fund_decompose(const Vector& a, const Vector& b, const Vector& target) {
  if (a.size() != b.size() || a.size() != target.size()) {
    throw Error(ErrorCode::DimensionMismatch, "two-fund vectors must agree in size");
  }
  const Vector d = a - b;
  if (d.norm() <= 1e-14 * (1.0 + a.norm())) throw Error(ErrorCode::DegeneratePair, "the two funds coincide");
  TwoFundResult out;
  out.w = d.dot(target - b) / d.squaredNorm();
  out.residual = (target - b - out.w * d).norm();
  return out;
}

CapmSummary capm_summary(const Matrix& sigma, const Vector& mean_payoff, const Vector& prices, double bond_return) {
  check_sizes(sigma, mean_payoff, prices);
  const Vector excess = mean_payoff - bond_return * prices;
  if (excess.norm() <= 1e-14 * (1.0 + mean_payoff.norm())) {
    throw Error(ErrorCode::DegenerateExcess, "expected payoffs equal R times prices");
  }
  const auto ldlt = factorize(sigma);
  CapmSummary c;
  c.bond_return = bond_return;
  c.scalars = raw_scalars(ldlt, mean_payoff, prices);
  const MarkowitzScalars& s = c.scalars;
  const double denom = s.beta - s.gamma_s * bond_return;
  c.delta = s.alpha - 2.0 * s.beta * bond_return + s.gamma_s * bond_return * bond_return;
  if (denom <= 1e-12 * (std::abs(s.beta) + s.gamma_s * bond_return)) {
    throw Error(ErrorCode::NoMarketPortfolio, "beta - gamma R must be positive");
  }
  c.x_m = {0.0, ldlt.solve(excess) / denom};
  c.sigma_m = std::sqrt(c.delta) / denom;
  c.mu_m = bond_return + c.delta / denom;
  c.price_of_risk = std::sqrt(c.delta);
  return c;
}

Portfolio capm_portfolio(const Matrix& sigma, const Vector& mean_payoff, const Vector& prices, double bond_return,
                         double mu) {
  if (mu < bond_return) throw Error(ErrorCode::BelowRiskless, "mu must be >= R");
  const CapmSummary c = capm_summary(sigma, mean_payoff, prices, bond_return);
  const MarkowitzScalars& s = c.scalars;
  const auto ldlt = factorize(sigma);
  Portfolio p;
  p.x0 = (s.alpha - s.beta * bond_return - mu * (s.beta - s.gamma_s * bond_return)) / c.delta;
  p.x_hat = (mu - bond_return) * ldlt.solve(mean_payoff - bond_return * prices) / c.delta;
  return p;
}

double capital_market_line(const CapmSummary& summary, double sigma) {
  if (sigma < 0.0) throw Error(ErrorCode::ValidationError, "sigma must be >= 0");
  return summary.bond_return + sigma * summary.price_of_risk;
}

double sharpe_ratio(double mu, double sigma, double bond_return) {
  if (!(sigma > 0.0)) throw Error(ErrorCode::ZeroRisk, "Sharpe ratio needs sigma > 0");
  return (mu - bond_return) / sigma;
}

BetaPricing beta_price(const Market& market, const CapmSummary& summary, const Vector& asset_payoff, double a0) {
  if (!(a0 > 0.0)) throw Error(ErrorCode::NonPositivePrice, "asset price must be > 0");
  if (asset_payoff.size() != market.states()) {
    throw Error(ErrorCode::DimensionMismatch, "asset payoff needs one value per state");
  }
  const Vector& p = market.probabilities();
  const Vector mkt = market.payoffs() * summary.x_m.x_hat + market.bond_return() * summary.x_m.x0 * Vector::Ones(market.states());
  const double mean_a = p.dot(asset_payoff);
  const double mean_m = p.dot(mkt);
  const double cov_am = p.dot(((asset_payoff.array() - mean_a) * (mkt.array() - mean_m)).matrix());
  const double var_m = summary.sigma_m * summary.sigma_m;
  const double premium = summary.mu_m - summary.bond_return;

  BetaPricing out;
  out.covariance = cov_am / a0;
  out.beta = out.covariance / var_m;
  out.quoted_return = mean_a / a0;
  out.capm_return = summary.bond_return + out.beta * premium;
  out.fair_price = out.capm_return > 0.0 ? mean_a / out.capm_return : std::numeric_limits<double>::quiet_NaN();
  // E[a]/a0 = R + cov_am premium / (a0 var_m) is linear in a0.
  const double fixed = (mean_a - cov_am * premium / var_m) / summary.bond_return;
  out.fixed_point_price = fixed > 0.0 ? fixed : std::numeric_limits<double>::quiet_NaN();
  return out;
}

TangencyReport tangency_check(const MarkowitzScalars& bullet, const CapmSummary& summary) {
  TangencyReport rep;
  const double mu = summary.mu_m;
  const double sigma = markowitz_frontier(bullet, mu).sigma;
  rep.sigma_gap = std::abs(sigma - summary.sigma_m);
  const double h = 1e-5 * (1.0 + std::abs(mu));
  const double dsigma = (markowitz_frontier(bullet, mu + h).sigma - markowitz_frontier(bullet, mu - h).sigma) / (2.0 * h);
  rep.bullet_slope = dsigma != 0.0 ? 1.0 / dsigma : std::numeric_limits<double>::infinity();
  rep.cml_slope = summary.price_of_risk;
  rep.slope_gap = std::abs(rep.bullet_slope - rep.cml_slope);
  rep.pass = rep.sigma_gap <= 1e-8 && rep.slope_gap <= 1e-6;
  return rep;
}

}  // namespace tradeoff
