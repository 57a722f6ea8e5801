#include <doctest.h>

#include "support.hpp"
#include "tradeoff/error.hpp"
#include "tradeoff/frontier.hpp"
#include "tradeoff/growth.hpp"

using namespace tradeoff;
using testing::vec;

namespace {

double nu_f1(double r) { return 0.55 * std::log1p(r) + 0.45 * std::log1p(-0.5 * r); }

FrontierCurve hand_curve(std::vector<std::pair<double, double>> pts) {
  FrontierCurve c;
  for (auto [mu, r] : pts) c.points.push_back({mu, r, Portfolio::bond(1), true});
  return c;
}

}  // namespace

TEST_CASE("frontier bounds") {
  const Market f1 = testing::f1();
  const FrontierBounds b = frontier_bounds(f1, RiskMeasure::abs_exposure(vec({1.0})), Utility::log());
  CHECK(b.mu_min == 0.0);
  CHECK(b.r_min == 0.0);
  CHECK(b.mu_max == doctest::Approx(nu_f1(0.65)).epsilon(1e-12));
  CHECK(b.mu_max_attained);
  CHECK(b.r_max == doctest::Approx(0.65).epsilon(1e-10));
  CHECK(b.min_portfolio.x0 == 1.0);

  const Market f2 = testing::f2();
  const FrontierBounds c = frontier_bounds(f2, RiskMeasure::std_dev(covariance(f2)), Utility::identity());
  CHECK(c.mu_min == 1.0);
  CHECK(c.r_min == 0.0);
  CHECK(c.mu_max == kInf);
  CHECK_FALSE(c.mu_max_attained);
  CHECK(c.min_portfolio.x_hat.isZero(0.0));
}

TEST_CASE("tracing") {
  const Market f1 = testing::f1();
  const RiskMeasure abs1 = RiskMeasure::abs_exposure(vec({1.0}));
  const double mk = nu_f1(0.65);
  const FrontierCurve c = trace_frontier(f1, abs1, Utility::log(), {0.0, mk / 2, mk});
  REQUIRE(c.points.size() == 3);
  CHECK(c.points[0].risk == 0.0);
  CHECK(c.points[1].risk > 0.0);
  CHECK(c.points[1].risk < 0.65);
  // Oracle: invert the closed-form nu by bisection.
  double lo = 0.0, hi = 0.65;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (nu_f1(mid) < mk / 2 ? lo : hi) = mid;
  }
  CHECK(c.points[1].risk == doctest::Approx(lo).epsilon(1e-9));
  CHECK(c.points[2].risk == doctest::Approx(0.65).epsilon(1e-8));

  const Market f2 = testing::f2();
  const FrontierCurve cml = trace_frontier(f2, RiskMeasure::std_dev(covariance(f2)), Utility::identity(), {1.0, 1.5, 2.0});
  REQUIRE(cml.points.size() == 3);
  for (int i = 0; i < 3; ++i) CHECK(cml.points[i].risk == doctest::Approx(double(i)).epsilon(1e-9).scale(1.0));

  const FrontierCurve single = trace_frontier(f2, RiskMeasure::std_dev(covariance(f2)), Utility::identity(), {1.0});
  REQUIRE(single.points.size() == 1);
  CHECK(single.points[0].risk == 0.0);
  CHECK(single.points[0].portfolio.x0 == 1.0);

  const FrontierCurve cut = trace_frontier(f1, abs1, Utility::log(), {0.0, 0.05, 0.2});
  CHECK(cut.truncated);
  CHECK(cut.points.size() == 2);

  CHECK_THROWS_AS(trace_frontier(f1, abs1, Utility::log(), {0.05, 0.0}), Error);
}

TEST_CASE("threaded and sequential traces agree exactly") {
  const Market f2 = testing::f2();
  const RiskMeasure sd = RiskMeasure::std_dev(covariance(f2));
  const std::vector<double> grid = uniform_grid(1.0, 3.0, 17);
  TraceOptions one;
  one.threads = 1;
  TraceOptions many;
  many.threads = 4;
  const FrontierCurve a = trace_frontier(f2, sd, Utility::log(), uniform_grid(0.0, 0.2, 17), one);
  const FrontierCurve b = trace_frontier(f2, sd, Utility::log(), uniform_grid(0.0, 0.2, 17), many);
  REQUIRE(a.points.size() == b.points.size());
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    CHECK(a.points[i].risk == b.points[i].risk);
    CHECK(a.points[i].portfolio.x_hat == b.points[i].portfolio.x_hat);
  }
  CHECK(trace_frontier(f2, sd, Utility::identity(), grid, many).points.size() == 17);
}

TEST_CASE("shape verification") {
  const Market f1 = testing::f1();
  const FrontierCurve c = trace_frontier(f1, RiskMeasure::abs_exposure(vec({1.0})), Utility::log(),
                                         uniform_grid(0.0, nu_f1(0.65), 21));
  CHECK(verify_frontier_shape(c).pass);

  const ShapeReport dip = verify_frontier_shape(hand_curve({{0, 0}, {1, 1}, {2, 0.5}, {3, 3}}));
  CHECK_FALSE(dip.pass);
  // The bump at index 1 sits 0.75 above its chord, which outweighs the 0.5 drop after it.
  CHECK(dip.violation_index == 1);
  CHECK(dip.monotonicity_violation == doctest::Approx(0.5));
  CHECK(dip.convexity_violation == doctest::Approx(0.75));

  const ShapeReport two = verify_frontier_shape(hand_curve({{0, 0}, {1, 1}}));
  CHECK(two.pass);
  CHECK_FALSE(two.convexity_checked);

  const ShapeReport concave = verify_frontier_shape(hand_curve({{0, 0}, {1, 2}, {2, 3}}));
  CHECK_FALSE(concave.pass);
  CHECK(concave.convexity_violation > 0.0);
}

TEST_CASE("path continuity") {
  const Market f1 = testing::f1();
  const FrontierCurve path =
      leverage_path(f1, RiskMeasure::abs_exposure(vec({1.0})), uniform_grid(0.0, 0.65, 9));
  const ContinuityReport lr = path_continuity(path);
  CHECK(lr.pass);
  for (std::size_t i = 1; i < path.points.size(); ++i) {
    CHECK(path.points[i].portfolio.x_hat(0) > path.points[i - 1].portfolio.x_hat(0));
  }

  const Market f2 = testing::f2();
  SolveOptions ro;
  ro.admissible = AdmissibleSet::UnitCostRiskyOnly;
  const FrontierCurve mk = trace_frontier(f2, RiskMeasure::half_variance(covariance(f2)), Utility::identity(),
                                          uniform_grid(1.2, 2.8, 9), {ro, 0});
  const ContinuityReport m = path_continuity(mk);
  CHECK(m.pass);
  CHECK(m.fine_modulus == doctest::Approx(m.coarse_modulus).epsilon(1e-6));

  FrontierCurve flat = hand_curve({{0, 1}, {1, 1}, {2, 1}, {3, 1}, {4, 1}});
  const ContinuityReport z = path_continuity(flat);
  CHECK(z.pass);
  CHECK(z.fine_jump == 0.0);
  CHECK(z.coarse_jump == 0.0);
}

TEST_CASE("subsystem comparison") {
  const Market f2 = testing::f2();
  const RiskMeasure sd = RiskMeasure::std_dev(covariance(f2));
  const std::vector<double> grid = uniform_grid(1.2, 2.8, 9);
  TraceOptions ro;
  ro.solve.admissible = AdmissibleSet::UnitCostRiskyOnly;
  const FrontierCurve sub = trace_frontier(f2, sd, Utility::identity(), grid, ro);
  const FrontierCurve full = trace_frontier(f2, sd, Utility::identity(), grid);
  const DominanceReport d = subsystem_frontier_compare(sub, full);
  CHECK(d.dominated);
  CHECK(d.compared == grid.size());
  REQUIRE(d.tangency_mu.size() == 1);
  CHECK(d.tangency_mu[0] == doctest::Approx(2.0));
  CHECK(d.tangency_risk[0] == doctest::Approx(2.0).epsilon(1e-8));

  const DominanceReport same = subsystem_frontier_compare(full, full);
  CHECK(same.dominated);
  CHECK(same.tangency_mu.size() == grid.size());

  const FrontierCurve other = trace_frontier(f2, RiskMeasure::half_variance(covariance(f2)), Utility::identity(), grid);
  try {
    subsystem_frontier_compare(sub, other);
    FAIL("expected IncompatibleCurves");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::IncompatibleCurves);
  }
}

TEST_CASE("mu_max portfolio does not depend on the risk measure") {
  const Market f1 = testing::f1();
  Matrix v(2, 1);
  v << -2.0, 1.0;
  const FrontierBounds a = frontier_bounds(f1, RiskMeasure::abs_exposure(vec({1.0})), Utility::log());
  const FrontierBounds b = frontier_bounds(f1, RiskMeasure::polytope_gauge(v), Utility::log());
  CHECK((a.max_portfolio.x_hat - b.max_portfolio.x_hat).norm() <= 1e-6);
  const FrontierCurve pa = leverage_path(f1, RiskMeasure::abs_exposure(vec({1.0})), leverage_grid(f1, RiskMeasure::abs_exposure(vec({1.0})), 5));
  const FrontierCurve pb = leverage_path(f1, RiskMeasure::polytope_gauge(v), leverage_grid(f1, RiskMeasure::polytope_gauge(v), 5));
  CHECK((pa.points.back().portfolio.x_hat - pb.points.back().portfolio.x_hat).norm() <= 1e-6);
}

TEST_CASE("endpoint identities for normalized measures") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 5; ++trial) {
    const Market m = testing::random_clear_market(rng, 6, 3);
    for (const RiskMeasure& r : {RiskMeasure::std_dev(covariance(m)), RiskMeasure::abs_exposure(Vector::Ones(3))}) {
      for (const Utility& u : {Utility::identity(), Utility::log()}) {
        const FrontierBounds b = frontier_bounds(m, r, u);
        const FrontierCurve c = trace_frontier(m, r, u, {b.mu_min});
        REQUIRE(c.points.size() == 1);
        CAPTURE(r.id());
        CAPTURE(u.id());
        CHECK(c.points[0].risk == 0.0);
        CHECK(c.points[0].portfolio.x0 == 1.0);
        CHECK(c.points[0].portfolio.x_hat.isZero(0.0));
      }
    }
  }
}
