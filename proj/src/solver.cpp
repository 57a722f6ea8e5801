#include "tradeoff/solver.hpp"

#include <cmath>
#include <cstdint>
#include <limits>

#include <boost/math/tools/toms748_solve.hpp>

#include "detail.hpp"
#include "tradeoff/error.hpp"

namespace tradeoff {

using detail::ReducedProblem;

const char* to_string(AdmissibleSet set) {
  return set == AdmissibleSet::UnitCost ? "unit_cost" : "unit_cost_risky_only";
}

Vector admissible_payoff(const Market& market, const Vector& x_hat, AdmissibleSet admissible) {
  const Portfolio p = admissible_portfolio(market, x_hat, admissible);
  return (market.payoffs() * x_hat).array() + market.bond_return() * p.x0;
}

Portfolio admissible_portfolio(const Market& market, const Vector& x_hat, AdmissibleSet admissible) {
  if (x_hat.size() != market.assets()) {
    throw Error(ErrorCode::DimensionMismatch, "portfolio dimension");
  }
  if (admissible == AdmissibleSet::UnitCost) return unit_cost_portfolio(market, x_hat);
  return {0.0, x_hat};
}

namespace {

void check_inputs(const Market& market, const RiskMeasure& measure, const SolveOptions& options) {
  if (measure.dimension() != market.assets()) {
    throw Error(ErrorCode::DimensionMismatch, "measure dimension " + std::to_string(measure.dimension()) +
                                                  " vs " + std::to_string(market.assets()) + " assets");
  }
  if (options.require_all_clear) {
    const StructureReport report = detect_nontrivial_riskless(market);
    if (!report.all_clear()) {
      throw Error(ErrorCode::MarketPathology,
                  report.has_arbitrage ? "market admits arbitrage" : "market has a nontrivial riskless portfolio");
    }
  }
}

double expected_marginal(const ReducedProblem& problem, const Utility& utility, const Vector& x) {
  const Vector payoff = problem.offset + problem.loading * x;
  double total = 0.0;
  for (Index i = 0; i < payoff.size(); ++i) total += problem.probabilities(i) * utility.derivative(payoff(i));
  return total;
}

double utility_value(const ReducedProblem& problem, const Utility& utility, const Vector& x) {
  return expected_utility(utility, problem.probabilities, problem.offset + problem.loading * x);
}

Vector canonical_start(const Market& market, const ReducedProblem& problem, const Utility& utility) {
  const Index m = market.assets();
  if (problem.admissible == AdmissibleSet::UnitCost) return Vector::Zero(m);
  Vector x;
  if (utility.kind() == UtilityKind::Log) {
    if (!detail::positive_payoff_point(problem, x)) {
      throw Error(ErrorCode::NonPositivePayoff, "no risky-only unit-cost portfolio has positive payoff in every state");
    }
    return x;
  }
  const Vector& s0 = market.prices();
  return s0 / s0.squaredNorm();
}

// ---------------------------------------------------------------------------
// Smooth measures: the Lagrangian family z(lambda) = argmin hv(x) - lambda E[u].

class LagrangianFamily {
 public:
  LagrangianFamily(const Market& market, const ReducedProblem& problem, const RiskMeasure& measure,
                   const Utility& utility)
      : market_(market), problem_(problem), sigma_(measure.sigma()), utility_(utility) {}

  /// Minimizer of the risk alone over the admissible set.
  Vector risk_minimizer() const {
    if (problem_.admissible == AdmissibleSet::UnitCost) return Vector::Zero(market_.assets());
    const Vector start = market_.prices() / market_.prices().squaredNorm();
    const Matrix& sigma = sigma_;
    detail::Objective f = [&sigma](const Vector& x, double& v, Vector* g, Matrix* h) {
      v = 0.5 * x.dot(sigma * x);
      if (g) *g = sigma * x;
      if (h) *h = sigma;
      return true;
    };
    return detail::newton_minimize(f, start, problem_.eq_rows).x;
  }

  Vector solve(double lambda) {
    if (warm_.size() == 0) warm_ = canonical_start(market_, problem_, utility_);
    const Matrix& sigma = sigma_;
    const ReducedProblem& problem = problem_;
    const Utility& utility = utility_;
    detail::Objective f = [&](const Vector& x, double& v, Vector* g, Matrix* h) {
      double eu = 0.0;
      Vector ug;
      Matrix uh;
      if (!detail::utility_terms(problem, utility, x, eu, g ? &ug : nullptr, h ? &uh : nullptr)) return false;
      v = 0.5 * x.dot(sigma * x) - lambda * eu;
      if (g) *g = sigma * x - lambda * ug;
      if (h) *h = sigma - lambda * uh;
      return true;
    };
    detail::NewtonResult res = detail::newton_minimize(f, warm_, problem_.eq_rows);
    if (!res.converged) {
      res = detail::newton_minimize(f, canonical_start(market_, problem_, utility_), problem_.eq_rows);
      if (!res.converged) throw Error(ErrorCode::SolverFailure, "inner Lagrangian minimization did not converge");
    }
    iterations_ += res.iterations;
    warm_ = res.x;
    return res.x;
  }

  double half_variance(const Vector& x) const { return 0.5 * x.dot(sigma_ * x); }
  int iterations() const { return iterations_; }

 private:
  const Market& market_;
  const ReducedProblem& problem_;
  const Matrix& sigma_;
  const Utility& utility_;
  Vector warm_;
  int iterations_ = 0;
};

/// Finds the root of an increasing function of lambda > 0 and returns the bracket end closest
/// to it. When the function is still nonnegative at `floor`, returns the smallest tried value.
template <class F>
double solve_multiplier(F&& phi, double floor, double& residual) {
  double hi = 1.0;
  double phi_hi = phi(hi);
  double lo = hi;
  double phi_lo = phi_hi;
  if (phi_hi < 0.0) {
    while (phi_hi < 0.0) {
      lo = hi;
      phi_lo = phi_hi;
      hi *= 4.0;
      if (hi > 1e30) throw Error(ErrorCode::SolverFailure, "multiplier bracket search exceeded 1e30");
      phi_hi = phi(hi);
    }
  } else {
    while (phi_lo >= 0.0) {
      hi = lo;
      phi_hi = phi_lo;
      lo *= 0.25;
      if (lo < floor) {
        residual = phi_hi;
        return hi;
      }
      phi_lo = phi(lo);
    }
  }
  if (phi_hi == 0.0) {
    residual = 0.0;
    return hi;
  }
  std::uintmax_t max_iter = 300;
  const auto tol = [](double a, double b) { return std::abs(b - a) <= 1e-15 * std::max(std::abs(a), std::abs(b)); };
  const auto bracket = boost::math::tools::toms748_solve(phi, lo, hi, phi_lo, phi_hi, tol, max_iter);
  const double a = bracket.first;
  const double b = bracket.second;
  const double fa = phi(a);
  const double fb = phi(b);
  if (std::abs(fa) < std::abs(fb)) {
    residual = fa;
    return a;
  }
  residual = fb;
  return b;
}

/// lambda2 from stationarity along x0 (unit cost) or by least squares along x_hat (risky only).
double budget_multiplier(const ReducedProblem& problem, const Utility& utility, const Vector& x,
                         double lambda1, const Vector& risk_grad, const Vector& prices) {
  if (problem.admissible == AdmissibleSet::UnitCost) {
    return -lambda1 * problem.bond_return * expected_marginal(problem, utility, x);
  }
  double eu = 0.0;
  Vector ug;
  detail::utility_terms(problem, utility, x, eu, &ug, nullptr);
  const Vector residual = risk_grad - lambda1 * ug;
  return prices.dot(residual) / prices.squaredNorm();
}

double smooth_stationarity(const ReducedProblem& problem, const Utility& utility, const Vector& x,
                           double lambda1, double lambda2, const Vector& risk_grad, const Vector& prices) {
  double eu = 0.0;
  Vector ug;
  detail::utility_terms(problem, utility, x, eu, &ug, nullptr);
  Vector grad_hat;
  if (problem.admissible == AdmissibleSet::UnitCost) {
    // In (x0, x_hat) coordinates d/dx_hat of E[u] is E[u'] S1_hat = ug + R E[u'] S0_hat.
    const double em = expected_marginal(problem, utility, x);
    const Vector full = ug + problem.bond_return * em * prices;
    grad_hat = risk_grad - lambda1 * full - lambda2 * prices;
    const double g0 = -lambda1 * problem.bond_return * em - lambda2;
    return std::sqrt(grad_hat.squaredNorm() + g0 * g0);
  }
  grad_hat = risk_grad - lambda1 * ug - lambda2 * prices;
  return grad_hat.norm();
}

SolveResult package(const Market& market, const ReducedProblem& problem, const RiskMeasure& measure,
                    const Utility& utility, const Vector& x, bool binding) {
  SolveResult out;
  out.portfolio = admissible_portfolio(market, x, problem.admissible);
  out.risk = eval_risk(measure, x);
  out.expected_utility = utility_value(problem, utility, x);
  out.binding = binding;
  return out;
}

double measure_to_hv(const RiskMeasure& measure, double r) {
  return measure.kind() == MeasureKind::StdDev ? 0.5 * r * r : r;
}

/// Converts a half-variance multiplier to the measure's own units.
double measure_lambda(const RiskMeasure& measure, double lambda_hv, double risk) {
  if (measure.kind() != MeasureKind::StdDev) return lambda_hv;
  return risk > 0.0 ? lambda_hv / risk : 0.0;
}

Vector smooth_gradient(const RiskMeasure& measure, const Vector& x) {
  if (measure.kind() == MeasureKind::StdDev && eval_risk(measure, x) <= 0.0) return Vector::Zero(x.size());
  return risk_gradient(measure, x);
}

void fill_min_form_kkt(SolveResult& out, const Market& market, const ReducedProblem& problem,
                       const RiskMeasure& measure, const Utility& utility, double lambda1, double mu) {
  const Vector& x = out.portfolio.x_hat;
  const Vector rg = smooth_gradient(measure, x);
  out.kkt.lambda1 = lambda1;
  out.kkt.lambda2 = budget_multiplier(problem, utility, x, lambda1, rg, market.prices());
  out.kkt.stationarity_residual =
      smooth_stationarity(problem, utility, x, lambda1, out.kkt.lambda2, rg, market.prices());
  out.kkt.complementary_slackness = lambda1 * (out.expected_utility - mu);
}

bool near(double a, double b, double tol) { return std::abs(a - b) <= tol * (1.0 + std::abs(b)); }

SolveResult top_result(const Market& market, const ReducedProblem& problem, const RiskMeasure& measure,
                       const Utility& utility, const UtilityMaximum& top) {
  SolveResult out = package(market, problem, measure, utility, top.portfolio.x_hat, true);
  out.kkt.lambda1 = kInf;
  out.kkt.lambda2 = problem.admissible == AdmissibleSet::UnitCost ? -kInf : 0.0;
  out.kkt.stationarity_residual = top.gradient_residual;
  out.iterations = top.iterations;
  return out;
}

SolveResult smooth_min_risk(const Market& market, const ReducedProblem& problem, const RiskMeasure& measure,
                            const Utility& utility, double mu, const SolveOptions& options) {
  const UtilityMaximum top = maximize_expected_utility(market, utility, problem.admissible);
  if (top.attained) {
    if (mu > top.value + 1e-12 * (1.0 + std::abs(top.value))) {
      throw Error(ErrorCode::Infeasible, "mu exceeds the maximal expected utility " + std::to_string(top.value));
    }
    if (near(mu, top.value, 1e-12)) return top_result(market, problem, measure, utility, top);
  }
  LagrangianFamily family(market, problem, measure, utility);
  const Vector base = family.risk_minimizer();
  // Rounding in E[u] of the bond (probabilities summing to 1 only up to an ulp) must not push
  // mu_min past the risk minimizer.
  if (utility_value(problem, utility, base) >= mu - 1e-14 * (1.0 + std::abs(mu))) {
    SolveResult out = package(market, problem, measure, utility, base, false);
    fill_min_form_kkt(out, market, problem, measure, utility, 0.0, mu);
    return out;
  }
  Vector x_last;
  const auto phi = [&](double lambda) {
    x_last = family.solve(lambda);
    return utility_value(problem, utility, x_last) - mu;
  };
  double residual = 0.0;
  const double lambda = solve_multiplier(phi, 1e-30, residual);
  const Vector x = family.solve(lambda);
  SolveResult out = package(market, problem, measure, utility, x, true);
  if (std::abs(out.expected_utility - mu) > std::max(1e-8, 100.0 * options.tolerance) * (1.0 + std::abs(mu))) {
    throw Error(ErrorCode::SolverFailure, "utility constraint residual " + std::to_string(out.expected_utility - mu));
  }
  fill_min_form_kkt(out, market, problem, measure, utility, measure_lambda(measure, lambda, out.risk), mu);
  out.iterations = family.iterations();
  return out;
}

/// Max-form report: L = -E[u] + lambda1 (r(x) - r) + lambda2 (1 - S0.x); equals
/// lambda1 times the min-form Lagrangian with multipliers (1/lambda1, lambda2/lambda1).
void to_max_form(SolveResult& out) {
  const double l1 = out.kkt.lambda1;
  if (l1 > 0.0 && std::isfinite(l1)) {
    const double eta = 1.0 / l1;
    out.kkt.lambda1 = eta;
    out.kkt.lambda2 *= eta;
    out.kkt.stationarity_residual *= eta;
  } else if (l1 == 0.0) {
    // Zero utility multiplier means zero risk at a point of positive marginal utility: vertical frontier.
    out.kkt.lambda1 = kInf;
  } else {
    out.kkt.lambda1 = 0.0;
  }
  out.kkt.complementary_slackness = 0.0;
}

SolveResult smooth_max_utility(const Market& market, const ReducedProblem& problem, const RiskMeasure& measure,
                               const Utility& utility, double r, const SolveOptions& options) {
  if (r < 0.0) throw Error(ErrorCode::Infeasible, "risk level must be >= 0");
  const UtilityMaximum top = maximize_expected_utility(market, utility, problem.admissible);
  if (top.attained) {
    const double r_top = eval_risk(measure, top.portfolio.x_hat);
    if (r >= r_top) {
      SolveResult out = package(market, problem, measure, utility, top.portfolio.x_hat, false);
      out.kkt.lambda1 = 0.0;
      out.kkt.lambda2 = problem.admissible == AdmissibleSet::UnitCost
                            ? -problem.bond_return * expected_marginal(problem, utility, top.portfolio.x_hat)
                            : -1.0;
      out.kkt.stationarity_residual = top.gradient_residual;
      out.iterations = top.iterations;
      return out;
    }
  }
  LagrangianFamily family(market, problem, measure, utility);
  const Vector base = family.risk_minimizer();
  const double r_base = eval_risk(measure, base);
  if (r < r_base - 1e-12 * (1.0 + r_base)) {
    throw Error(ErrorCode::Infeasible, "risk level below the minimal admissible risk " + std::to_string(r_base));
  }
  if (r <= r_base + 1e-14 * (1.0 + r_base)) {
    SolveResult out = package(market, problem, measure, utility, base, true);
    fill_min_form_kkt(out, market, problem, measure, utility, 0.0, out.expected_utility);
    to_max_form(out);
    return out;
  }
  const double target = measure_to_hv(measure, r);
  const auto psi = [&](double lambda) { return family.half_variance(family.solve(lambda)) - target; };
  double residual = 0.0;
  const double lambda = solve_multiplier(psi, 1e-30, residual);
  const Vector x = family.solve(lambda);
  SolveResult out = package(market, problem, measure, utility, x, true);
  if (std::abs(out.risk - r) > std::max(1e-8, 100.0 * options.tolerance) * (1.0 + r)) {
    throw Error(ErrorCode::SolverFailure, "risk constraint residual " + std::to_string(out.risk - r));
  }
  fill_min_form_kkt(out, market, problem, measure, utility, measure_lambda(measure, lambda, out.risk),
                    out.expected_utility);
  to_max_form(out);
  out.iterations = family.iterations();
  return out;
}

// ---------------------------------------------------------------------------
// Polyhedral measures with identity utility: linear programs over generator weights.

struct PolyLp {
  Matrix gen;         // D (M x K)
  Vector mean_gain;   // E[payoff] = base + mean_gain . y
  double base = 0.0;
  Matrix eq;          // budget rows in y
};

PolyLp poly_lp(const ReducedProblem& problem, const RiskMeasure& measure) {
  PolyLp out;
  out.gen = measure.generators();
  out.mean_gain = (problem.loading * out.gen).transpose() * problem.probabilities;
  out.base = problem.probabilities.dot(problem.offset);
  out.eq = problem.eq_rows * out.gen;
  return out;
}

void fill_poly_kkt(SolveResult& out, const Market& market, const RiskMeasure& measure, const Utility& utility,
                   AdmissibleSet admissible, double mu) {
  out.kkt.stationarity_residual = kkt_residual(market, measure, utility, out.portfolio, out.kkt.lambda1,
                                               out.kkt.lambda2, mu, admissible)
                                      .stationarity_residual;
  out.kkt.complementary_slackness = out.kkt.lambda1 * (out.expected_utility - mu);
}

SolveResult lp_min_risk(const Market& market, const ReducedProblem& problem, const RiskMeasure& measure,
                        const Utility& utility, double mu) {
  const PolyLp d = poly_lp(problem, measure);
  const Index k = d.gen.cols();
  LinearProgram lp = LinearProgram::with_variables(k);
  lp.objective = measure.generator_costs();
  lp.add_row(d.mean_gain, RowSense::GreaterEqual, mu - d.base);
  for (Index r = 0; r < d.eq.rows(); ++r) lp.add_row(d.eq.row(r).transpose(), RowSense::Equal, problem.eq_rhs(r));
  const LpResult res = solve_lp(lp);
  if (res.status == LpStatus::Infeasible) throw Error(ErrorCode::Infeasible, "no admissible portfolio reaches mu");
  if (res.status != LpStatus::Optimal) throw Error(ErrorCode::SolverFailure, "risk LP unbounded");
  const Vector x = d.gen * res.x;
  SolveResult out = package(market, problem, measure, utility, x, true);
  out.binding = out.expected_utility - mu <= 1e-9 * (1.0 + std::abs(mu));
  out.kkt.lambda1 = std::max(res.duals(0), 0.0);
  out.kkt.lambda2 = problem.admissible == AdmissibleSet::UnitCost ? -out.kkt.lambda1 * problem.bond_return
                                                                   : res.duals(1);
  out.iterations = res.iterations;
  fill_poly_kkt(out, market, measure, utility, problem.admissible, mu);
  return out;
}

SolveResult lp_max_utility(const Market& market, const ReducedProblem& problem, const RiskMeasure& measure,
                           const Utility& utility, double r) {
  if (r < 0.0) throw Error(ErrorCode::Infeasible, "risk level must be >= 0");
  const PolyLp d = poly_lp(problem, measure);
  const Index k = d.gen.cols();
  LinearProgram lp = LinearProgram::with_variables(k);
  lp.objective = d.mean_gain;
  lp.maximize = true;
  lp.add_row(measure.generator_costs(), RowSense::LessEqual, r);
  for (Index q = 0; q < d.eq.rows(); ++q) lp.add_row(d.eq.row(q).transpose(), RowSense::Equal, problem.eq_rhs(q));
  const LpResult res = solve_lp(lp);
  if (res.status == LpStatus::Infeasible) throw Error(ErrorCode::Infeasible, "risk level below the minimal admissible risk");
  if (res.status != LpStatus::Optimal) throw Error(ErrorCode::SolverFailure, "expected utility unbounded at this risk level");
  const Vector x = d.gen * res.x;
  SolveResult out = package(market, problem, measure, utility, x, true);
  const double eta = std::max(res.duals(0), 0.0);
  out.binding = eta > 0.0 || out.risk >= r - 1e-9 * (1.0 + r);
  out.kkt.lambda1 = eta;
  out.kkt.lambda2 = problem.admissible == AdmissibleSet::UnitCost ? -problem.bond_return : -res.duals(1);
  out.iterations = res.iterations;
  if (eta > 0.0) {
    const KktReport min_form = kkt_residual(market, measure, utility, out.portfolio, 1.0 / eta,
                                            out.kkt.lambda2 / eta, out.expected_utility, problem.admissible);
    out.kkt.stationarity_residual = eta * min_form.stationarity_residual;
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

UtilityMaximum maximize_expected_utility(const Market& market, const Utility& utility, AdmissibleSet admissible) {
  const ReducedProblem problem = detail::reduce(market, admissible);
  const Index m = market.assets();
  const Vector& s0 = market.prices();
  UtilityMaximum out;

  const auto projected = [&](const Vector& g) -> Vector {
    if (admissible == AdmissibleSet::UnitCost) return g;
    return g - (g.dot(s0) / s0.squaredNorm()) * s0;
  };

  if (utility.kind() == UtilityKind::Identity) {
    const Vector x = canonical_start(market, problem, utility);
    const Vector gain = problem.loading.transpose() * problem.probabilities;
    const Vector pg = projected(gain);
    out.portfolio = admissible_portfolio(market, x, admissible);
    out.gradient_residual = pg.norm();
    if (pg.cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + gain.cwiseAbs().maxCoeff())) {
      out.value = utility_value(problem, utility, x);
      out.attained = true;
    } else {
      out.value = kInf;
    }
    return out;
  }

  const Vector start = canonical_start(market, problem, utility);
  detail::Objective f = [&problem, &utility](const Vector& x, double& v, Vector* g, Matrix* h) {
    double eu = 0.0;
    if (!detail::utility_terms(problem, utility, x, eu, g, h)) return false;
    v = -eu;
    if (g) *g = -*g;
    if (h) *h = -*h;
    return true;
  };
  detail::NewtonOptions opts;
  opts.divergence_norm = 1e9;
  opts.divergence_value = -std::log(1e12);
  opts.max_iterations = 500;
  const detail::NewtonResult res = detail::newton_minimize(f, start, problem.eq_rows, opts);
  if (res.x.norm() > opts.divergence_norm || res.f < opts.divergence_value || res.max_step > 1e9) {
    throw Error(ErrorCode::MarketPathology, "expected log utility diverges (arbitrage)");
  }
  if (!res.converged) throw Error(ErrorCode::SolverFailure, "growth-optimal Newton iteration did not converge");
  double eu = 0.0;
  Vector g;
  detail::utility_terms(problem, utility, res.x, eu, &g, nullptr);
  out.portfolio = admissible_portfolio(market, res.x, admissible);
  out.value = eu;
  out.gradient_residual = projected(g).cwiseAbs().maxCoeff();
  out.attained = out.gradient_residual <= 1e-8;
  out.iterations = res.iterations;
  if (!out.attained) {
    throw Error(ErrorCode::SolverFailure, "growth-optimal gradient residual " + std::to_string(out.gradient_residual));
  }
  (void)m;
  return out;
}

SolveResult min_risk_given_utility(const Market& market, const RiskMeasure& measure, const Utility& utility,
                                   double mu, const SolveOptions& options) {
  check_inputs(market, measure, options);
  const ReducedProblem problem = detail::reduce(market, options.admissible);
  if (measure.is_smooth()) return smooth_min_risk(market, problem, measure, utility, mu, options);
  if (utility.kind() == UtilityKind::Identity) return lp_min_risk(market, problem, measure, utility, mu);
  const UtilityMaximum top = maximize_expected_utility(market, utility, options.admissible);
  if (mu > top.value + 1e-12 * (1.0 + std::abs(top.value))) {
    throw Error(ErrorCode::Infeasible, "mu exceeds the maximal expected utility " + std::to_string(top.value));
  }
  if (near(mu, top.value, 1e-12)) return top_result(market, problem, measure, utility, top);
  return detail::barrier_min_risk(market, problem, measure, mu, top, options);
}

SolveResult max_utility_given_risk(const Market& market, const RiskMeasure& measure, const Utility& utility,
                                   double r, const SolveOptions& options) {
  check_inputs(market, measure, options);
  const ReducedProblem problem = detail::reduce(market, options.admissible);
  if (measure.is_smooth()) return smooth_max_utility(market, problem, measure, utility, r, options);
  if (utility.kind() == UtilityKind::Identity) return lp_max_utility(market, problem, measure, utility, r);
  return detail::barrier_max_utility(market, problem, measure, r, options);
}

// ---------------------------------------------------------------------------

namespace {

double subgradient_distance(const RiskMeasure& measure, const Vector& x, const Vector& v) {
  const Matrix& gen = measure.generators();
  const Vector& cost = measure.generator_costs();
  const Index m = x.size();
  const double r = eval_risk(measure, x);
  // Variables z (free, m) and e >= 0; minimize e subject to z in the subdifferential, |z - v| <= e.
  LinearProgram lp = LinearProgram::with_variables(m + 1, -kInf, kInf);
  lp.lower(m) = 0.0;
  lp.objective(m) = 1.0;
  for (Index k = 0; k < gen.cols(); ++k) {
    Vector row = Vector::Zero(m + 1);
    row.head(m) = gen.col(k);
    lp.add_row(row, RowSense::LessEqual, cost(k));
  }
  Vector support = Vector::Zero(m + 1);
  support.head(m) = x;
  lp.add_row(support, RowSense::GreaterEqual, r - 1e-9 * (1.0 + r));
  for (Index j = 0; j < m; ++j) {
    Vector up = Vector::Zero(m + 1);
    up(j) = 1.0;
    up(m) = -1.0;
    lp.add_row(up, RowSense::LessEqual, v(j));
    Vector down = Vector::Zero(m + 1);
    down(j) = -1.0;
    down(m) = -1.0;
    lp.add_row(down, RowSense::LessEqual, -v(j));
  }
  const LpResult res = solve_lp(lp);
  if (res.status != LpStatus::Optimal) return kInf;
  return std::max(res.objective, 0.0);
}

}  // namespace

namespace detail {

KktReport polyhedral_multipliers(const Market& market, const RiskMeasure& measure, const Utility& utility,
                                 const Portfolio& portfolio, double mu, AdmissibleSet admissible) {
  const Matrix& gen = measure.generators();
  const Vector& cost = measure.generator_costs();
  const Vector& x = portfolio.x_hat;
  const Vector& s0 = market.prices();
  const Index m = x.size();
  const double R = market.bond_return();
  const Vector& p = market.probabilities();
  const Vector payoff = (market.payoffs() * x).array() + R * portfolio.x0;
  Vector marg(payoff.size());
  for (Index i = 0; i < payoff.size(); ++i) marg(i) = p(i) * utility.derivative(payoff(i));
  const Vector a = market.payoffs().transpose() * marg;
  const double r = eval_risk(measure, x);

  // Variables: z (m, free), lambda1 >= 0, lambda2 (free), e >= 0.
  const Index l1 = m, l2 = m + 1, e = m + 2;
  LinearProgram lp = LinearProgram::with_variables(m + 3, -kInf, kInf);
  lp.lower(l1) = 0.0;
  lp.lower(e) = 0.0;
  lp.objective(e) = 1.0;
  for (Index k = 0; k < gen.cols(); ++k) {
    Vector row = Vector::Zero(m + 3);
    row.head(m) = gen.col(k);
    lp.add_row(row, RowSense::LessEqual, cost(k));
  }
  Vector support = Vector::Zero(m + 3);
  support.head(m) = x;
  lp.add_row(support, RowSense::GreaterEqual, r - 1e-9 * (1.0 + r));
  for (Index j = 0; j < m; ++j) {
    Vector up = Vector::Zero(m + 3);
    up(j) = 1.0;
    up(l1) = -a(j);
    up(l2) = -s0(j);
    up(e) = -1.0;
    lp.add_row(up, RowSense::LessEqual, 0.0);
    Vector down = -up;
    down(e) = -1.0;
    lp.add_row(down, RowSense::LessEqual, 0.0);
  }
  if (admissible == AdmissibleSet::UnitCost) {
    Vector row = Vector::Zero(m + 3);
    row(l1) = R * marg.sum();
    row(l2) = 1.0;
    lp.add_row(row, RowSense::Equal, 0.0);
  }
  const LpResult res = solve_lp(lp);
  if (res.status != LpStatus::Optimal) {
    throw Error(ErrorCode::SolverFailure, "multiplier LP returned " + std::string(to_string(res.status)));
  }
  KktReport out;
  out.lambda1 = res.x(l1);
  out.lambda2 = res.x(l2);
  out.stationarity_residual = std::max(res.objective, 0.0);
  const double eu = expected_utility(utility, p, payoff);
  out.complementary_slackness = out.lambda1 == 0.0 ? 0.0 : out.lambda1 * (eu - mu);
  return out;
}

}  // namespace detail

KktReport kkt_residual(const Market& market, const RiskMeasure& measure, const Utility& utility,
                       const Portfolio& portfolio, double lambda1, double lambda2, double mu,
                       AdmissibleSet admissible) {
  if (portfolio.x_hat.size() != market.assets() || measure.dimension() != market.assets()) {
    throw Error(ErrorCode::DimensionMismatch, "portfolio/measure dimension");
  }
  const Vector& x = portfolio.x_hat;
  const Vector& s0 = market.prices();
  const Index m = x.size();
  const double R = market.bond_return();
  const Vector& p = market.probabilities();
  const Vector payoff = (market.payoffs() * x).array() + R * portfolio.x0;

  KktReport out;
  out.lambda1 = lambda1;
  out.lambda2 = lambda2;
  const double eu = expected_utility(utility, p, payoff);
  out.complementary_slackness = lambda1 == 0.0 ? 0.0 : lambda1 * (eu - mu);

  // E[u'(payoff) S1] in (x0, x_hat) coordinates.
  Vector marg(payoff.size());
  for (Index i = 0; i < payoff.size(); ++i) marg(i) = p(i) * utility.derivative(payoff(i));
  const Vector grad_u_hat = market.payoffs().transpose() * marg;
  const double grad_u0 = R * marg.sum();
  const double g0 = admissible == AdmissibleSet::UnitCost ? -lambda1 * grad_u0 - lambda2 : 0.0;

  if (measure.is_polyhedral()) {
    const Vector v = lambda1 * grad_u_hat + lambda2 * s0;
    const double e = subgradient_distance(measure, x, v);
    out.stationarity_residual = std::sqrt(e * e + g0 * g0);
    return out;
  }

  Vector risk_grad(m);
  for (Index j = 0; j < m; ++j) {
    const double h = 1e-6 * (1.0 + std::abs(x(j)));
    Vector xp = x, xm = x;
    xp(j) += h;
    xm(j) -= h;
    const double r0 = eval_risk(measure, x);
    const double rp = eval_risk(measure, xp);
    const double rm = eval_risk(measure, xm);
    const double forward = (rp - r0) / h;
    const double backward = (r0 - rm) / h;
    const double central = 0.5 * (rp - rm) / h;
    Vector xp2 = x, xm2 = x;
    xp2(j) += 0.25 * h;
    xm2(j) -= 0.25 * h;
    const double central2 = 0.5 * (eval_risk(measure, xp2) - eval_risk(measure, xm2)) / (0.25 * h);
    if (std::abs(forward - backward) > 1e-2 * (1.0 + std::abs(central)) ||
        std::abs(central - central2) > 1e-4 * (1.0 + std::abs(central))) {
      throw Error(ErrorCode::NonSmoothPoint, "risk is not differentiable along asset " + std::to_string(j + 1));
    }
    risk_grad(j) = central2;
  }
  const Vector g_hat = risk_grad - lambda1 * grad_u_hat - lambda2 * s0;
  out.stationarity_residual = std::sqrt(g_hat.squaredNorm() + g0 * g0);
  return out;
}

}  // namespace tradeoff
