#include <doctest.h>

#include <random>

#include "support.hpp"
#include "tradeoff/error.hpp"
#include "tradeoff/homogeneous.hpp"

using namespace tradeoff;
using testing::vec;

namespace {

const double kS3 = std::sqrt(3.0);

SolveOptions risky_only_any_market() {
  SolveOptions o;
  o.admissible = AdmissibleSet::UnitCostRiskyOnly;
  o.require_all_clear = false;
  return o;
}

}  // namespace

TEST_CASE("basic fund on the two-state market") {
  const Market f1 = testing::f1();
  const AffineFrontier f = basic_fund(f1, RiskMeasure::abs_exposure(vec({1.0})));
  CHECK(f.mu1 == 2.0);
  CHECK(f.x1.x_hat(0) == doctest::Approx(1.0 / 0.325).epsilon(1e-10));
  CHECK(f.r1 == doctest::Approx(1.0 / 0.325).epsilon(1e-10));
  CHECK(f.x1.x0 + f1.prices().dot(f.x1.x_hat) == doctest::Approx(1.0).epsilon(1e-12));
  REQUIRE(f.master);
  CHECK(f.x1.x0 == doctest::Approx(1.0 - 1.0 / 0.325).epsilon(1e-10));
  CHECK(f.master->portfolio.x0 == 0.0);
  CHECK(f.master->portfolio.x_hat(0) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(f.master->mu_m == doctest::Approx(1.325).epsilon(1e-10));
  CHECK(f.master->r_m == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(f.warning.empty());

  const Portfolio half = affine_frontier_portfolio(f, (1.0 + f.master->mu_m) / 2.0);
  CHECK((half.stacked() - 0.5 * (Portfolio::bond(1).stacked() + f.master->portfolio.stacked())).norm() <= 1e-10);
}

TEST_CASE("basic fund preconditions") {
  try {
    basic_fund(testing::fair_game(), RiskMeasure::abs_exposure(vec({1.0, 1.0})));
    FAIL("expected FlatMarket");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::FlatMarket);
  }
  CHECK_THROWS_AS(basic_fund(testing::f2(), RiskMeasure::half_variance(covariance(testing::f2()))), Error);
}

TEST_CASE("affine frontier portfolios") {
  const Market f2 = testing::f2();
  const RiskMeasure abs2 = RiskMeasure::abs_exposure(vec({1.0, 2.0}));
  const AffineFrontier f = basic_fund(f2, abs2);
  const Portfolio atR = affine_frontier_portfolio(f, 1.0);
  CHECK(atR.x0 == 1.0);
  CHECK(atR.x_hat.isZero(0.0));
  CHECK((affine_frontier_portfolio(f, 2.0).stacked() - f.x1.stacked()).norm() == 0.0);
  const Portfolio three = affine_frontier_portfolio(f, 3.0);
  CHECK((three.stacked() - (2.0 * f.x1.stacked() - Portfolio::bond(2).stacked())).norm() <= 1e-14);
  CHECK(eval_risk(abs2, three.x_hat) == doctest::Approx(2.0 * f.r1));
  CHECK_THROWS_AS(affine_frontier_portfolio(f, 0.5), Error);

  AffineFrontier fake = f;
  fake.x1.x0 = 1.0;
  try {
    master_fund(fake);
    FAIL("expected NoMasterFund");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoMasterFund);
  }
  fake.x1.x0 = 1.5;
  try {
    master_fund(fake);
    FAIL("expected NoMasterFund");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoMasterFund);
  }
}

TEST_CASE("risk is linear in mu for homogeneous measures") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 4; ++trial) {
    const Market m = testing::random_clear_market(rng, 5, 2);
    Matrix v(6, 2);
    v << 2, 0, 0, 1, -1, 0, 0, -3, 1, 1, -1, -1;
    for (const RiskMeasure& r : {RiskMeasure::abs_exposure(vec({1.0, 0.7})), RiskMeasure::polytope_gauge(v),
                                 RiskMeasure::std_dev(covariance(m))}) {
      const AffineFrontier f = basic_fund(m, r);
      for (int i = 1; i <= 9; ++i) {
        const double mu = m.bond_return() + 2.0 * i / 9.0;
        const SolveResult s = min_risk_given_utility(m, r, Utility::identity(), mu);
        CAPTURE(r.id());
        CHECK(s.risk / (mu - m.bond_return()) == doctest::Approx(f.r1).epsilon(1e-6));
        const Portfolio a = affine_frontier_portfolio(f, mu);
        CHECK(eval_risk(r, a.x_hat) == doctest::Approx(s.risk).epsilon(1e-6));
      }
      if (f.master) {
        // The master fund lies on the risky-only frontier as well.
        SolveOptions ro;
        ro.admissible = AdmissibleSet::UnitCostRiskyOnly;
        const SolveResult s = min_risk_given_utility(m, r, Utility::identity(), f.master->mu_m, ro);
        CHECK(s.risk == doctest::Approx(f.master->r_m).epsilon(1e-6));
      }
    }
  }
}

TEST_CASE("counter-example fixture") {
  const CounterexampleFixture f = counterexample_fixture();
  CHECK(f.market.prices() == Vector::Ones(3));
  CHECK((f.market.expected_payoffs() - vec({1.0, 0.0, 0.0})).norm() == 0.0);
  CHECK(std::abs(eval_risk(f.measure, vec({1.0, 0.0, 0.0})) - 0.1) <= 1e-9);

  const SolveOptions o = risky_only_any_market();
  const Utility id = Utility::identity();
  const SolveResult at1 = min_risk_given_utility(f.market, f.measure, id, 1.0, o);
  CHECK((at1.portfolio.x_hat - vec({1.0, 0.0, 0.0})).norm() <= 1e-6);
  const double eps = 0.01;
  const Vector expected_eps = vec({1.0 + eps, eps * kS3 * (1.0 - kS3) / 6.0, eps * kS3 * (-1.0 - kS3) / 6.0});
  const SolveResult ateps = min_risk_given_utility(f.market, f.measure, id, 1.0 + eps, o);
  CHECK((ateps.portfolio.x_hat - expected_eps).cwiseAbs().maxCoeff() <= 1e-6);
  for (double d : {2.0, 5.0}) {
    const SolveResult atd = min_risk_given_utility(f.market, f.measure, id, 1.0 + d, o);
    CHECK((atd.portfolio.x_hat - vec({1.0 + d, -d / 2, -d / 2})).cwiseAbs().maxCoeff() <= 1e-6);
  }
  const AffinityReport rep = verify_affinity({{1.0, at1.portfolio.x_hat},
                                              {1.0 + eps, ateps.portfolio.x_hat},
                                              {3.0, min_risk_given_utility(f.market, f.measure, id, 3.0, o).portfolio.x_hat}});
  CHECK_FALSE(rep.is_affine);
  CHECK(rep.max_deviation > 1e-3);
}

TEST_CASE("affinity check") {
  const Market f1 = testing::f1();
  const RiskMeasure abs1 = RiskMeasure::abs_exposure(vec({1.0}));
  std::vector<std::pair<double, Vector>> path;
  for (double mu : {1.0, 1.5, 2.0, 2.5}) {
    path.emplace_back(mu, min_risk_given_utility(f1, abs1, Utility::identity(), mu).portfolio.stacked());
  }
  const AffinityReport a = verify_affinity(path);
  CHECK(a.is_affine);
  CHECK(a.max_deviation <= 1e-10);
  CHECK(verify_affinity({{1.0, vec({0.0})}, {2.0, vec({5.0})}}).is_affine);
  CHECK_THROWS_AS(verify_affinity({{1.0, vec({0.0})}, {1.0, vec({1.0})}, {2.0, vec({0.0})}}), Error);
}
