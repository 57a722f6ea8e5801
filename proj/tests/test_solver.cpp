#include <doctest.h>

#include <random>

#include "support.hpp"
#include "tradeoff/error.hpp"
#include "tradeoff/growth.hpp"
#include "tradeoff/solver.hpp"

using namespace tradeoff;
using testing::vec;

namespace {

double nu_f1(double alpha, double r) { return 0.55 * std::log(1.0 + alpha * r) + 0.45 * std::log(1.0 - 0.5 * r); }

// Brute-force oracle for two-asset problems: grid search on [-3, 3]^2 with local refinement.
double grid_min_risk(const Market& m, const RiskMeasure& r, double mu) {
  const Vector excess = m.expected_payoffs() - m.bond_return() * m.prices();
  double best = kInf;
  Vector centre = Vector::Zero(2);
  double width = 3.0;
  for (int level = 0; level < 12; ++level) {
    Vector next = centre;
    for (int i = -40; i <= 40; ++i) {
      for (int j = -40; j <= 40; ++j) {
        Vector x = centre + width / 40.0 * vec({double(i), double(j)});
        // Project onto the constraint E[payoff] = mu along the excess direction.
        x += (mu - m.bond_return() - excess.dot(x)) / excess.squaredNorm() * excess;
        const double v = eval_risk(r, x);
        if (v < best) {
          best = v;
          next = x;
        }
      }
    }
    centre = next;
    width /= 8.0;
  }
  return best;
}

}  // namespace

TEST_CASE("minimal risk at a utility level") {
  const Market f1 = testing::f1();
  const Market f2 = testing::f2();
  const RiskMeasure abs1 = RiskMeasure::abs_exposure(vec({1.0}));
  const RiskMeasure sd = RiskMeasure::std_dev(covariance(f2));

  SUBCASE("mu = u(R) gives the pure bond") {
    for (const RiskMeasure& r : {sd, RiskMeasure::half_variance(covariance(f2)), RiskMeasure::abs_exposure(vec({1.0, 1.0}))}) {
      const SolveResult s = min_risk_given_utility(f2, r, Utility::identity(), 1.0);
      CHECK(s.risk == 0.0);
      CHECK(s.portfolio.x0 == 1.0);
      CHECK(s.portfolio.x_hat.cwiseAbs().maxCoeff() == 0.0);
    }
    const SolveResult s = min_risk_given_utility(f1, abs1, Utility::log(), 0.0);
    CHECK(s.risk == 0.0);
    CHECK(s.portfolio.x0 == 1.0);
  }
  SUBCASE("F2 with standard deviation at mu = 2") {
    const SolveResult s = min_risk_given_utility(f2, sd, Utility::identity(), 2.0);
    CHECK(s.risk == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(std::abs(s.portfolio.x0) <= 1e-8);
    CHECK(std::abs(s.portfolio.x_hat(0)) <= 1e-8);
    CHECK(s.portfolio.x_hat(1) == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(s.risk == doctest::Approx(grid_min_risk(f2, sd, 2.0)).epsilon(1e-6));
  }
  SUBCASE("F1 with absolute exposure and log utility at nu(0.3)") {
    const SolveResult s = min_risk_given_utility(f1, abs1, Utility::log(), nu_f1(1.0, 0.3));
    CHECK(s.binding);
    CHECK(s.portfolio.x_hat(0) == doctest::Approx(0.3).epsilon(1e-9));
    CHECK(s.risk == doctest::Approx(0.3).epsilon(1e-9));
  }
  SUBCASE("above the maximal utility is infeasible") {
    try {
      min_risk_given_utility(f1, abs1, Utility::log(), 0.2);
      FAIL("expected Infeasible");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::Infeasible);
    }
  }
  SUBCASE("pathological markets are refused") {
    try {
      min_risk_given_utility(testing::dominating(), RiskMeasure::abs_exposure(vec({1.0})), Utility::log(), 0.1);
      FAIL("expected MarketPathology");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::MarketPathology);
    }
  }
}

TEST_CASE("maximal utility at a risk level") {
  const Market f1 = testing::f1();
  const Market f2 = testing::f2();
  const RiskMeasure abs1 = RiskMeasure::abs_exposure(vec({1.0}));
  const SolveResult bond = max_utility_given_risk(f2, RiskMeasure::std_dev(covariance(f2)), Utility::identity(), 0.0);
  CHECK(bond.expected_utility == 1.0);
  CHECK(bond.portfolio.x0 == 1.0);

  const double f_star = testing::golden_max([](double f) { return nu_f1(1.0, f); }, 0.0, 1.9);
  const SolveResult k = max_utility_given_risk(f1, abs1, Utility::log(), 0.65);
  CHECK(k.portfolio.x_hat(0) == doctest::Approx(f_star).epsilon(1e-6));
  CHECK(k.expected_utility == doctest::Approx(nu_f1(1.0, f_star)).epsilon(1e-12));

  const SolveResult m = max_utility_given_risk(f2, RiskMeasure::std_dev(covariance(f2)), Utility::identity(), 2.0);
  CHECK(m.expected_utility == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(m.portfolio.x_hat(1) == doctest::Approx(1.0).epsilon(1e-8));

  const SolveResult slack = max_utility_given_risk(f1, abs1, Utility::log(), 1.0);
  CHECK_FALSE(slack.binding);
  CHECK(slack.portfolio.x_hat(0) == doctest::Approx(0.65).epsilon(1e-9));
}

TEST_CASE("KKT residuals") {
  const Market f2 = testing::f2();
  const RiskMeasure hv = RiskMeasure::half_variance(covariance(f2));
  const Portfolio opt{0.0, vec({0.0, 1.0})};
  const KktReport good = kkt_residual(f2, hv, Utility::identity(), opt, 4.0, -4.0, 2.0,
                                      AdmissibleSet::UnitCostRiskyOnly);
  CHECK(good.stationarity_residual <= 1e-6);
  const KktReport bad = kkt_residual(f2, hv, Utility::identity(), opt, 5.0, -4.0, 2.0,
                                     AdmissibleSet::UnitCostRiskyOnly);
  CHECK(bad.stationarity_residual > 0.1);

  const KktReport bond = kkt_residual(f2, hv, Utility::identity(), Portfolio::bond(2), 0.0, 0.0, 0.5);
  CHECK(bond.complementary_slackness == 0.0);

  const SolveResult s = min_risk_given_utility(f2, hv, Utility::identity(), 1.7, {AdmissibleSet::UnitCostRiskyOnly});
  CHECK(s.kkt.stationarity_residual <= 1e-6);
  CHECK(std::abs(s.kkt.complementary_slackness) <= 1e-8);

  const RiskMeasure sd = RiskMeasure::std_dev(covariance(f2));
  try {
    kkt_residual(f2, sd, Utility::identity(), Portfolio::bond(2), 1.0, 0.0, 1.0);
    FAIL("expected NonSmoothPoint");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonSmoothPoint);
  }
}

TEST_CASE("min-risk and max-utility are mutually inverse") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 8; ++trial) {
    const Market m = testing::random_clear_market(rng, 5, 2);
    const UtilityMaximum top = maximize_expected_utility(m, Utility::log());
    const double lo = std::log(m.bond_return());
    for (const RiskMeasure& r : {RiskMeasure::std_dev(covariance(m)), RiskMeasure::half_variance(covariance(m)),
                                 RiskMeasure::abs_exposure(vec({1.0, 0.5}))}) {
      for (double frac : {0.25, 0.6, 0.9}) {
        const double mu = lo + frac * (top.value - lo);
        const SolveResult a = min_risk_given_utility(m, r, Utility::log(), mu);
        CHECK(a.kkt.lambda1 >= 0.0);
        CHECK(std::abs(a.expected_utility - mu) <= 1e-8);
        const SolveResult b = max_utility_given_risk(m, r, Utility::log(), a.risk);
        CAPTURE(trial);
        CAPTURE(r.id());
        CHECK(std::abs(b.expected_utility - mu) <= 1e-6);
        CHECK(b.kkt.lambda1 >= 0.0);
      }
    }
  }
}

TEST_CASE("risky-only admissible set") {
  const Market f2 = testing::f2();
  const SolveResult s = min_risk_given_utility(f2, RiskMeasure::std_dev(covariance(f2)), Utility::identity(), 2.0,
                                               {AdmissibleSet::UnitCostRiskyOnly});
  CHECK(s.portfolio.x0 == 0.0);
  CHECK(s.risk == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(f2.prices().dot(s.portfolio.x_hat) == doctest::Approx(1.0).epsilon(1e-12));
}
