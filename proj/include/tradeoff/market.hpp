#pragma once

#include <optional>

#include "tradeoff/lp.hpp"

namespace tradeoff {

struct MarketOptions {
  /// Skips the nonnegative-payoff check. Off by default; only synthetic tests use it.
  bool allow_negative_payoffs = false;
};

/// Finite-state one-period market: a riskless bond paying `R` per unit price and
/// M risky assets with prices `s0_hat` and state payoffs `payoffs` (N x M).
class Market {
 public:
  /// Validates every invariant; throws Error with the violated condition.
  Market(double bond_return, Vector prices, Matrix payoffs, Vector probabilities,
         MarketOptions options = {});

  double bond_return() const noexcept { return bond_return_; }
  const Vector& prices() const noexcept { return prices_; }
  const Matrix& payoffs() const noexcept { return payoffs_; }
  const Vector& probabilities() const noexcept { return probabilities_; }
  const MarketOptions& options() const noexcept { return options_; }

  Index states() const noexcept { return payoffs_.rows(); }
  Index assets() const noexcept { return payoffs_.cols(); }

  /// E[S1^j] for each risky asset.
  Vector expected_payoffs() const { return payoffs_.transpose() * probabilities_; }

 private:
  double bond_return_;
  Vector prices_;
  Matrix payoffs_;
  Vector probabilities_;
  MarketOptions options_;
};

Market build_market(double bond_return, Vector prices, Matrix payoffs, Vector probabilities,
                    MarketOptions options = {});

/// Share vector over the bond (x0) and the risky assets (x_hat).
struct Portfolio {
  double x0 = 0.0;
  Vector x_hat;

  static Portfolio bond(Index assets) { return {1.0, Vector::Zero(assets)}; }
  /// Stacked (x0, x_hat).
  Vector stacked() const;
  static Portfolio from_stacked(const Vector& x);
};

/// Portfolio with unit cost: x0 = 1 - s0_hat . x_hat.
Portfolio unit_cost_portfolio(const Market& market, const Vector& x_hat);

/// G(i, j) = S1_hat(omega_i)^j - R * S0_hat^j.
Matrix excess_matrix(const Market& market);

/// Covariance of the risky payoffs under the state probabilities.
Matrix covariance(const Market& market);

struct ArbitrageResult {
  bool found = false;
  /// Zero-cost witness with ||x_hat||_inf = 1, present when `found`.
  std::optional<Portfolio> witness;
  double lp_optimum = 0.0;
};

/// LP: maximize 1'G x_hat s.t. G x_hat >= 0, -1 <= x_hat <= 1; arbitrage iff optimum > 0.
ArbitrageResult detect_arbitrage(const Market& market);

struct StructureReport {
  bool has_arbitrage = false;
  bool has_nontrivial_riskless = false;
  bool has_bond_replicator = false;
  Index rank_g = 0;
  std::optional<Portfolio> certificate;

  bool all_clear() const noexcept { return !has_nontrivial_riskless; }
};

inline constexpr double kDefaultRankTolerance = 1e-9;

/// Fills every field independently: the arbitrage LP, an SVD rank of G, and a
/// separate sign-pinned LP search for riskless directions.
StructureReport detect_nontrivial_riskless(const Market& market,
                                           double rank_tolerance = kDefaultRankTolerance);

/// Numerical rank with singular values below `relative_tolerance * max` counted as zero.
Index numerical_rank(const Matrix& m, double relative_tolerance = kDefaultRankTolerance);

struct PortfolioStats {
  double cost = 0.0;
  Vector payoff_per_state;
  double expected_payoff = 0.0;
};

PortfolioStats portfolio_stats(const Market& market, const Portfolio& portfolio);

}  // namespace tradeoff
