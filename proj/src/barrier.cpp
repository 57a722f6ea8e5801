#include <cmath>

#include "detail.hpp"
#include "tradeoff/error.hpp"

namespace tradeoff::detail {

namespace {

// Cap on the total generator weight; keeps the barrier bounded below when some generators
// are free of cost.
constexpr double kWeightCap = 1e8;

struct PolyData {
  Matrix gen;      // D (M x K)
  Vector cost;     // c (K)
  Matrix loading;  // payoff = offset + loading * y
  Vector offset;
  Vector probs;
  Matrix eq;       // budget rows in y
  Vector eq_rhs;
};

PolyData poly_data(const ReducedProblem& problem, const RiskMeasure& measure) {
  PolyData d;
  d.gen = measure.generators();
  d.cost = measure.generator_costs();
  d.loading = problem.loading * d.gen;
  d.offset = problem.offset;
  d.probs = problem.probabilities;
  d.eq = problem.eq_rows * d.gen;
  d.eq_rhs = problem.eq_rhs;
  return d;
}

/// Adds -sum ln y - ln(cap - 1'y) to (f, g, H); false outside the domain.
bool weight_barrier(const Vector& y, double& f, Vector* g, Matrix* h) {
  if ((y.array() <= 0.0).any()) return false;
  const double room = kWeightCap - y.sum();
  if (room <= 0.0) return false;
  f += -y.array().log().sum() - std::log(room);
  if (g) *g += -y.cwiseInverse() + Vector::Constant(y.size(), 1.0 / room);
  if (h) {
    h->diagonal() += y.cwiseInverse().cwiseAbs2();
    h->array() += 1.0 / (room * room);
  }
  return true;
}

/// E[ln payoff] and derivatives in y.
bool log_terms(const PolyData& d, const Vector& y, double& v, Vector* g, Matrix* h) {
  const Vector payoff = d.offset + d.loading * y;
  if ((payoff.array() <= 0.0).any()) return false;
  v = d.probs.dot(payoff.array().log().matrix());
  if (g) *g = d.loading.transpose() * (d.probs.array() / payoff.array()).matrix();
  if (h) *h = -d.loading.transpose() * (d.probs.array() / payoff.array().square()).matrix().asDiagonal() * d.loading;
  return true;
}

double mean_inverse_payoff(const ReducedProblem& problem, const Vector& x) {
  const Vector payoff = problem.offset + problem.loading * x;
  return problem.probabilities.dot(payoff.cwiseInverse());
}

/// Runs the barrier continuation t -> 10 t until barrier_terms / t <= gap. A centering step
/// that fails once the gap is already within `fallback` keeps the last centered point.
template <class MakeObjective>
Vector follow_path(const MakeObjective& make, Vector y, const Matrix& eq, double barrier_terms, double gap,
                   double fallback, double& t_final, int& iterations) {
  double t = 1.0;
  for (int outer = 0; outer < 60; ++outer) {
    const NewtonResult res = newton_minimize(make(t), y, eq);
    iterations += res.iterations;
    if (!res.converged && res.decrement > 1e-3) {
      if (outer > 0 && barrier_terms / (t / 10.0) <= fallback) {
        t /= 10.0;
        break;
      }
      throw Error(ErrorCode::SolverFailure, "barrier centering step did not converge");
    }
    y = res.x;
    if (barrier_terms / t <= gap) break;
    t *= 10.0;
  }
  t_final = t;
  return y;
}

Vector interior_start(const RiskMeasure& measure, const Vector& x, double room) {
  Vector y = polyhedral_representation(measure, x);
  const Vector& y0 = measure.interior_weights();
  const double eps = std::min(1e-3 * std::max(1.0, y.cwiseAbs().maxCoeff()), room / (2.0 * y0.sum()));
  return y + eps * y0;
}

SolveResult finish(const Market& market, const ReducedProblem& problem, const RiskMeasure& measure,
                   const Vector& x, bool binding, int iterations) {
  SolveResult out;
  out.portfolio = admissible_portfolio(market, x, problem.admissible);
  out.risk = eval_risk(measure, x);
  out.expected_utility = expected_utility(Utility::log(), problem.probabilities, problem.offset + problem.loading * x);
  out.binding = binding;
  out.iterations = iterations;
  return out;
}

}  // namespace

SolveResult barrier_max_utility(const Market& market, const ReducedProblem& problem, const RiskMeasure& measure,
                                double r, const SolveOptions& options) {
  (void)options;
  if (r < 0.0) throw Error(ErrorCode::Infeasible, "risk level must be >= 0");
  const Utility log_u = Utility::log();
  const bool unit_cost = problem.admissible == AdmissibleSet::UnitCost;
  const UtilityMaximum top = maximize_expected_utility(market, log_u, problem.admissible);
  if (eval_risk(measure, top.portfolio.x_hat) <= r + 1e-9 * (1.0 + r)) {
    SolveResult out = finish(market, problem, measure, top.portfolio.x_hat, false, top.iterations);
    out.kkt.lambda1 = 0.0;
    out.kkt.lambda2 = unit_cost ? -problem.bond_return * mean_inverse_payoff(problem, top.portfolio.x_hat) : -1.0;
    out.kkt.stationarity_residual = top.gradient_residual;
    return out;
  }
  const PolyData d = poly_data(problem, measure);
  const Index k = d.gen.cols();
  if (unit_cost && r <= 1e-14) {
    // Only zero-risk portfolios qualify; the bond is the canonical one.
    SolveResult out = finish(market, problem, measure, Vector::Zero(market.assets()), true, 0);
    out.kkt.lambda1 = kInf;
    out.kkt.lambda2 = -1.0;
    return out;
  }

  Vector y;
  if (unit_cost) {
    const Vector& y0 = measure.interior_weights();
    const double cy0 = d.cost.dot(y0);
    double eps = std::min(1.0, 0.25 * kWeightCap / y0.sum());
    if (cy0 > 0.0) eps = std::min(eps, 0.5 * r / cy0);
    y = eps * y0;
  } else {
    // Phase one: max s with payoff >= s, c.y + s <= r, y >= s, budget.
    LinearProgram lp = LinearProgram::with_variables(k + 1, 0.0, kInf);
    lp.lower(k) = -kInf;
    lp.upper(k) = 1.0;
    lp.objective(k) = 1.0;
    lp.maximize = true;
    for (Index i = 0; i < d.loading.rows(); ++i) {
      Vector row(k + 1);
      row.head(k) = d.loading.row(i).transpose();
      row(k) = -1.0;
      lp.add_row(row, RowSense::GreaterEqual, -d.offset(i));
    }
    Vector risk_row(k + 1);
    risk_row.head(k) = d.cost;
    risk_row(k) = 1.0;
    lp.add_row(risk_row, RowSense::LessEqual, r);
    for (Index j = 0; j < k; ++j) {
      Vector row = Vector::Zero(k + 1);
      row(j) = 1.0;
      row(k) = -1.0;
      lp.add_row(row, RowSense::GreaterEqual, 0.0);
    }
    Vector cap_row = Vector::Ones(k + 1);
    cap_row(k) = 0.0;
    lp.add_row(cap_row, RowSense::LessEqual, 0.5 * kWeightCap);
    for (Index q = 0; q < d.eq.rows(); ++q) {
      Vector row = Vector::Zero(k + 1);
      row.head(k) = d.eq.row(q).transpose();
      lp.add_row(row, RowSense::Equal, d.eq_rhs(q));
    }
    const LpResult res = solve_lp(lp);
    if (res.status != LpStatus::Optimal || res.objective <= 1e-12) {
      throw Error(ErrorCode::Infeasible, "no risky-only portfolio with positive payoff within the risk level");
    }
    y = res.x.head(k);
  }

  const auto make = [&](double t) -> Objective {
    return [&, t](const Vector& yy, double& f, Vector* g, Matrix* h) {
      double v = 0.0;
      Vector lg;
      Matrix lh;
      if (!log_terms(d, yy, v, g ? &lg : nullptr, h ? &lh : nullptr)) return false;
      const double slack = r - d.cost.dot(yy);
      if (slack <= 0.0) return false;
      f = -t * v - std::log(slack);
      if (g) *g = -t * lg + d.cost / slack;
      if (h) *h = -t * lh + d.cost * d.cost.transpose() / (slack * slack);
      return weight_barrier(yy, f, g, h);
    };
  };
  double t = 1.0;
  int iterations = 0;
  const double terms = static_cast<double>(k + 2);
  y = follow_path(make, y, d.eq, terms, 1e-12, 1e-9, t, iterations);
  const Vector x = d.gen * y;
  SolveResult out = finish(market, problem, measure, x, true, iterations);
  const KktReport min_form =
      polyhedral_multipliers(market, measure, log_u, out.portfolio, out.expected_utility, problem.admissible);
  const double eta = min_form.lambda1 > 0.0 ? 1.0 / min_form.lambda1 : kInf;
  out.kkt.lambda1 = eta;
  out.kkt.lambda2 = min_form.lambda2 * eta;
  out.kkt.stationarity_residual = eta * min_form.stationarity_residual;
  out.kkt.complementary_slackness = eta * (out.risk - r);
  return out;
}

SolveResult barrier_min_risk(const Market& market, const ReducedProblem& problem, const RiskMeasure& measure,
                             double mu, const UtilityMaximum& top, const SolveOptions& options) {
  (void)options;
  const Utility log_u = Utility::log();
  const bool unit_cost = problem.admissible == AdmissibleSet::UnitCost;
  const PolyData d = poly_data(problem, measure);
  const Index k = d.gen.cols();
  const Index m = market.assets();

  Vector start_x;
  if (unit_cost) {
    const double base = std::log(problem.bond_return);
    if (mu <= base) {
      SolveResult out = finish(market, problem, measure, Vector::Zero(m), false, 0);
      out.kkt.lambda2 = 0.0;
      out.kkt.stationarity_residual =
          kkt_residual(market, measure, log_u, out.portfolio, 0.0, 0.0, mu, problem.admissible).stationarity_residual;
      return out;
    }
    const double theta0 = (mu - base) / (top.value - base);
    start_x = 0.5 * (1.0 + theta0) * top.portfolio.x_hat;
  } else {
    // The least-risk budget portfolio may already meet the utility level.
    LinearProgram lp = LinearProgram::with_variables(k);
    lp.objective = d.cost;
    for (Index q = 0; q < d.eq.rows(); ++q) lp.add_row(d.eq.row(q).transpose(), RowSense::Equal, d.eq_rhs(q));
    const LpResult res = solve_lp(lp);
    if (res.status == LpStatus::Optimal) {
      const Vector x = d.gen * res.x;
      const double eu = expected_utility(log_u, problem.probabilities, problem.offset + problem.loading * x);
      if (eu >= mu) {
        SolveResult out = finish(market, problem, measure, x, false, res.iterations);
        out.kkt.lambda2 = res.duals(0);
        out.kkt.stationarity_residual =
            kkt_residual(market, measure, log_u, out.portfolio, 0.0, out.kkt.lambda2, mu, problem.admissible)
                .stationarity_residual;
        return out;
      }
    }
    start_x = top.portfolio.x_hat;
  }

  const double room = 0.25 * kWeightCap;
  Vector y = interior_start(measure, start_x, room);
  double check = 0.0;
  if (!log_terms(d, y, check, nullptr, nullptr) || check <= mu) {
    throw Error(ErrorCode::SolverFailure, "could not construct a strictly feasible barrier start");
  }
  const auto make = [&](double t) -> Objective {
    return [&, t](const Vector& yy, double& f, Vector* g, Matrix* h) {
      double v = 0.0;
      Vector lg;
      Matrix lh;
      if (!log_terms(d, yy, v, (g || h) ? &lg : nullptr, h ? &lh : nullptr)) return false;
      const double slack = v - mu;
      if (slack <= 0.0) return false;
      f = t * d.cost.dot(yy) - std::log(slack);
      if (g) *g = t * d.cost - lg / slack;
      if (h) *h = -lh / slack + lg * lg.transpose() / (slack * slack);
      return weight_barrier(yy, f, g, h);
    };
  };
  double t = 1.0;
  int iterations = 0;
  const double terms = static_cast<double>(k + 2);
  const double scale = 1.0 + d.cost.dot(y);
  y = follow_path(make, y, d.eq, terms, 1e-12 * scale, 1e-9 * scale, t, iterations);
  const Vector x = d.gen * y;
  SolveResult out = finish(market, problem, measure, x, true, iterations);
  const KktReport rep = polyhedral_multipliers(market, measure, log_u, out.portfolio, mu, problem.admissible);
  out.kkt.lambda1 = rep.lambda1;
  out.kkt.lambda2 = rep.lambda2;
  out.kkt.stationarity_residual = rep.stationarity_residual;
  out.kkt.complementary_slackness = rep.complementary_slackness;
  return out;
}

}  // namespace tradeoff::detail
