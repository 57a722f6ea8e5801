#include "tradeoff/homogeneous.hpp"

#include <cmath>

#include <Eigen/QR>

#include "tradeoff/error.hpp"

namespace tradeoff {

AffineFrontier basic_fund(const Market& market, const RiskMeasure& measure, const SolveOptions& options) {
  const RiskAxioms& ax = measure.axioms();
  if (!(ax.r1 && ax.r1n && ax.r2 && ax.r3)) {
    throw Error(ErrorCode::ValidationError, "basic fund needs a measure with flags r1, r1n, r2, r3");
  }
  const double R = market.bond_return();
  const Vector excess = market.expected_payoffs() - R * market.prices();
  if (excess.cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + market.expected_payoffs().cwiseAbs().maxCoeff())) {
    throw Error(ErrorCode::FlatMarket, "every asset has expected payoff R times its price");
  }
  SolveOptions o = options;
  o.admissible = AdmissibleSet::UnitCost;
  AffineFrontier f;
  f.bond_return = R;
  f.mu1 = R + 1.0;
  const SolveResult sol = min_risk_given_utility(market, measure, Utility::identity(), f.mu1, o);
  f.x1 = sol.portfolio;
  f.r1 = sol.risk;
  const double gap = std::abs(f.x1.x0 - 1.0);
  if (f.x1.x0 < 1.0 - 1e-9) f.master = master_fund(f);
  if (gap <= 1e-6) {
    f.warning = gap > 1e-9 ? "bond weight of x1 is within 1e-6 of 1; master fund is ill-conditioned"
                           : "bond weight of x1 equals 1 within 1e-9; only the basic fund exists";
  }
  return f;
}

Portfolio affine_frontier_portfolio(const AffineFrontier& frontier, double mu) {
  const double R = frontier.bond_return;
  if (mu < R) throw Error(ErrorCode::BelowRiskless, "mu must be >= R");
  Portfolio p;
  p.x0 = (frontier.mu1 - mu) + (mu - R) * frontier.x1.x0;
  p.x_hat = (mu - R) * frontier.x1.x_hat;
  return p;
}

MasterFund master_fund(const AffineFrontier& frontier) {
  const double x10 = frontier.x1.x0;
  if (std::abs(x10 - 1.0) <= 1e-9) throw Error(ErrorCode::NoMasterFund, "bond weight of x1 equals 1");
  // With x1_0 > 1 the purely risky point of the line sits at mu_M < R, off the frontier.
  if (x10 > 1.0) throw Error(ErrorCode::NoMasterFund, "bond weight of x1 exceeds 1; the purely risky point lies below R");
  const double scale = 1.0 / (1.0 - x10);
  MasterFund m;
  m.portfolio = {0.0, frontier.x1.x_hat * scale};
  m.mu_m = (frontier.mu1 - frontier.bond_return * x10) * scale;
  m.r_m = frontier.r1 * scale;
  return m;
}

CounterexampleFixture counterexample_fixture() {
  Matrix payoffs(2, 3);
  payoffs << 0.5, 0.0, 0.0,
             1.5, 0.0, 0.0;
  Market market(1.0, Vector::Ones(3), payoffs, Vector::Constant(2, 0.5));

  const double s3 = std::sqrt(3.0);
  Matrix v(13, 3);
  int row = 0;
  for (double a : {-5.0, 5.0}) {
    for (double b : {-1.0, 1.0}) {
      for (double c : {-1.0, 1.0}) v.row(row++) << a, b, c;
    }
  }
  v.row(row++) << 10.0, 0.0, 0.0;
  v.row(row++) << 9.0, (-1.0 + s3) / 4.0, (1.0 + s3) / 4.0;
  v.row(row++) << 9.0, (-1.0 - s3) / 4.0, (-1.0 + s3) / 4.0;
  v.row(row++) << 9.0, (1.0 - s3) / 4.0, -(1.0 + s3) / 4.0;
  v.row(row++) << 9.0, (1.0 + s3) / 4.0, (1.0 - s3) / 4.0;
  return {std::move(market), RiskMeasure::polytope_gauge(std::move(v)), AdmissibleSet::UnitCostRiskyOnly};
}

AffinityReport verify_affinity(const std::vector<std::pair<double, Vector>>& path) {
  AffinityReport rep;
  if (path.size() < 3) return rep;
  const Index n = static_cast<Index>(path.size());
  const Index dim = path.front().second.size();
  Matrix design(n, 2);
  Matrix values(n, dim);
  for (Index i = 0; i < n; ++i) {
    const auto& [mu, x] = path[static_cast<std::size_t>(i)];
    if (x.size() != dim) throw Error(ErrorCode::DimensionMismatch, "path portfolios differ in size");
    for (Index j = 0; j < i; ++j) {
      if (path[static_cast<std::size_t>(j)].first == mu) {
        throw Error(ErrorCode::ValidationError, "affinity check needs distinct mu values");
      }
    }
    design(i, 0) = 1.0;
    design(i, 1) = mu;
    values.row(i) = x.transpose();
  }
  const Matrix coef = design.colPivHouseholderQr().solve(values);
  rep.max_deviation = (design * coef - values).cwiseAbs().maxCoeff();
  rep.is_affine = rep.max_deviation <= 1e-7;
  return rep;
}

}  // namespace tradeoff
