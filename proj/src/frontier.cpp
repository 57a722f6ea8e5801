#include "tradeoff/frontier.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <thread>

#include <Eigen/Cholesky>

#include "tradeoff/error.hpp"

namespace tradeoff {

namespace {

void require_all_clear(const Market& market) {
  const StructureReport report = detect_nontrivial_riskless(market);
  if (!report.all_clear()) {
    throw Error(ErrorCode::MarketPathology,
                report.has_arbitrage ? "market admits arbitrage" : "market has a nontrivial riskless portfolio");
  }
}

Vector risky_only_min_risk(const Market& market, const RiskMeasure& measure) {
  const Vector& s0 = market.prices();
  if (measure.is_smooth()) {
    Eigen::LDLT<Matrix> ldlt(measure.sigma());
    const Vector w = ldlt.solve(s0);
    return w / s0.dot(w);
  }
  const Matrix& gen = measure.generators();
  LinearProgram lp = LinearProgram::with_variables(gen.cols());
  lp.objective = measure.generator_costs();
  lp.add_row(gen.transpose() * s0, RowSense::Equal, 1.0);
  const LpResult res = solve_lp(lp);
  if (res.status != LpStatus::Optimal) throw Error(ErrorCode::SolverFailure, "risky-only minimal-risk LP failed");
  return gen * res.x;
}

unsigned worker_count(unsigned requested, std::size_t jobs) {
  unsigned n = requested == 0 ? std::max(1u, std::thread::hardware_concurrency()) : requested;
  return static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(jobs, 1)));
}

/// Runs solve(i) for every grid index on a small thread pool; results keep grid order.
std::vector<std::pair<SolveResult, std::exception_ptr>> solve_all(std::size_t count, unsigned threads,
                                                                  const std::function<SolveResult(std::size_t)>& solve) {
  std::vector<std::pair<SolveResult, std::exception_ptr>> out(count);
  std::atomic<std::size_t> next{0};
  const auto work = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        out[i].first = solve(i);
      } catch (...) {
        out[i].second = std::current_exception();
      }
    }
  };
  const unsigned n = worker_count(threads, count);
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  return out;
}

void require_sorted(const std::vector<double>& grid, const char* name) {
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!std::isfinite(grid[i])) throw Error(ErrorCode::ValidationError, std::string(name) + " grid has non-finite values");
    if (i > 0 && !(grid[i] > grid[i - 1])) {
      throw Error(ErrorCode::ValidationError, std::string(name) + " grid must be strictly increasing");
    }
  }
}

FrontierCurve assemble(const Market& market, const RiskMeasure& measure, const Utility& utility,
                       const std::vector<double>& grid, const TraceOptions& options, bool risk_grid) {
  require_sorted(grid, risk_grid ? "r" : "mu");
  require_all_clear(market);
  FrontierCurve curve;
  curve.measure_id = measure.id();
  curve.utility_id = utility.id();
  curve.admissible = options.solve.admissible;
  curve.risk_grid = risk_grid;
  curve.bounds = frontier_bounds(market, measure, utility, options.solve.admissible);

  SolveOptions solve = options.solve;
  solve.require_all_clear = false;
  const auto results = solve_all(grid.size(), options.threads, [&](std::size_t i) {
    return risk_grid ? max_utility_given_risk(market, measure, utility, grid[i], solve)
                     : min_risk_given_utility(market, measure, utility, grid[i], solve);
  });
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (results[i].second) {
      try {
        std::rethrow_exception(results[i].second);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::Infeasible) throw;
        curve.truncated = true;
        break;
      }
    }
    const SolveResult& r = results[i].first;
    FrontierPoint p;
    p.mu = risk_grid ? r.expected_utility : grid[i];
    p.risk = risk_grid ? grid[i] : r.risk;
    p.portfolio = r.portfolio;
    p.binding = r.binding;
    if (risk_grid && !curve.points.empty() && !curve.points.back().binding) {
      // Beyond the unconstrained optimum nu is flat; the efficient part has ended.
      curve.truncated = true;
      break;
    }
    curve.points.push_back(std::move(p));
  }
  return curve;
}

}  // namespace

FrontierBounds frontier_bounds(const Market& market, const RiskMeasure& measure, const Utility& utility,
                               AdmissibleSet admissible) {
  require_all_clear(market);
  FrontierBounds b;
  const Index m = market.assets();
  if (admissible == AdmissibleSet::UnitCost) {
    b.r_min = 0.0;
    b.r_min_attained = true;
    b.min_portfolio = Portfolio::bond(m);
    b.mu_min = utility.value(market.bond_return());
    if (!measure.axioms().r1n) {
      // Other zero-risk portfolios may carry more utility.
      SolveOptions o;
      o.require_all_clear = false;
      const SolveResult top0 = max_utility_given_risk(market, measure, utility, 0.0, o);
      b.mu_min = top0.expected_utility;
      b.min_portfolio = top0.portfolio;
    }
  } else {
    const Vector x = risky_only_min_risk(market, measure);
    b.r_min = eval_risk(measure, x);
    b.r_min_attained = true;
    b.min_portfolio = {0.0, x};
    b.mu_min = expected_utility(utility, market.probabilities(), market.payoffs() * x);
  }
  b.mu_min_attained = std::isfinite(b.mu_min);

  const UtilityMaximum top = maximize_expected_utility(market, utility, admissible);
  b.mu_max = top.value;
  b.mu_max_attained = top.attained;
  if (top.attained) {
    b.max_portfolio = top.portfolio;
    b.r_max = eval_risk(measure, top.portfolio.x_hat);
    b.r_max_attained = true;
  } else {
    b.r_max = kInf;
  }
  return b;
}

FrontierCurve trace_frontier(const Market& market, const RiskMeasure& measure, const Utility& utility,
                             const std::vector<double>& mu_grid, const TraceOptions& options) {
  return assemble(market, measure, utility, mu_grid, options, false);
}

FrontierCurve trace_risk_frontier(const Market& market, const RiskMeasure& measure, const Utility& utility,
                                  const std::vector<double>& r_grid, const TraceOptions& options) {
  return assemble(market, measure, utility, r_grid, options, true);
}

std::vector<double> uniform_grid(double lo, double hi, int points) {
  if (points < 1) throw Error(ErrorCode::ValidationError, "grid needs at least one point");
  if (!(hi >= lo) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw Error(ErrorCode::ValidationError, "grid bounds must be finite with lo <= hi");
  }
  if (points == 1 || hi == lo) return {lo};
  std::vector<double> g(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) g[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (points - 1);
  g.back() = hi;
  return g;
}

std::vector<double> auto_mu_grid(const FrontierBounds& bounds, int points, double span_cap) {
  const double hi = std::min(bounds.mu_max, bounds.mu_min + span_cap);
  return uniform_grid(bounds.mu_min, hi, points);
}

ShapeReport verify_frontier_shape(const FrontierCurve& curve, double tolerance) {
  ShapeReport rep;
  const auto& pts = curve.points;
  double worst = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double v = pts[i].risk - pts[i + 1].risk;
    if (v > rep.monotonicity_violation) rep.monotonicity_violation = v;
    if (v > tolerance && v > worst) {
      worst = v;
      rep.violation_index = static_cast<long>(i + 1);
    }
  }
  if (pts.size() >= 3) {
    rep.convexity_checked = true;
    for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
      const double h0 = pts[i].mu - pts[i - 1].mu;
      const double h1 = pts[i + 1].mu - pts[i].mu;
      if (!(h0 > 0.0) || !(h1 > 0.0)) continue;
      const double chord = (h1 * pts[i - 1].risk + h0 * pts[i + 1].risk) / (h0 + h1);
      const double v = pts[i].risk - chord;
      if (v > rep.convexity_violation) rep.convexity_violation = v;
      if (v > tolerance && v > worst) {
        worst = v;
        rep.violation_index = static_cast<long>(i);
      }
    }
  }
  rep.pass = rep.monotonicity_violation <= tolerance && rep.convexity_violation <= tolerance;
  return rep;
}

ContinuityReport path_continuity(const FrontierCurve& curve) {
  const auto& pts = curve.points;
  if (pts.size() < 3) throw Error(ErrorCode::ValidationError, "path continuity needs at least 3 points");
  const auto param = [&](std::size_t i) { return curve.risk_grid ? pts[i].risk : pts[i].mu; };
  const double h = param(1) - param(0);
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const double step = param(i) - param(i - 1);
    if (std::abs(step - h) > 1e-9 * (std::abs(h) + std::abs(param(i)))) {
      throw Error(ErrorCode::ValidationError, "path continuity needs a uniform grid");
    }
  }
  ContinuityReport rep;
  const auto jump = [&](std::size_t a, std::size_t b) {
    return (pts[b].portfolio.stacked() - pts[a].portfolio.stacked()).norm();
  };
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double j = jump(i, i + 1);
    rep.fine_jump = std::max(rep.fine_jump, j);
    rep.fine_modulus = std::max(rep.fine_modulus, j / (param(i + 1) - param(i)));
  }
  for (std::size_t i = 0; i + 2 < pts.size(); i += 2) {
    const double j = jump(i, i + 2);
    rep.coarse_jump = std::max(rep.coarse_jump, j);
    rep.coarse_modulus = std::max(rep.coarse_modulus, j / (param(i + 2) - param(i)));
  }
  rep.pass = rep.fine_jump <= rep.coarse_jump + 1e-9;
  return rep;
}

DominanceReport subsystem_frontier_compare(const FrontierCurve& sub, const FrontierCurve& full, double tolerance) {
  if (sub.measure_id != full.measure_id || sub.utility_id != full.utility_id) {
    throw Error(ErrorCode::IncompatibleCurves, "curves use different measures or utilities");
  }
  DominanceReport rep;
  rep.max_excess = -kInf;
  for (const FrontierPoint& s : sub.points) {
    const auto it = std::find_if(full.points.begin(), full.points.end(), [&](const FrontierPoint& f) {
      return std::abs(f.mu - s.mu) <= 1e-12 * (1.0 + std::abs(s.mu));
    });
    if (it == full.points.end()) continue;
    ++rep.compared;
    const double excess = it->risk - s.risk;
    rep.max_excess = std::max(rep.max_excess, excess);
    if (std::abs(excess) <= tolerance) {
      rep.tangency_mu.push_back(s.mu);
      rep.tangency_risk.push_back(s.risk);
    }
  }
  if (rep.compared == 0) throw Error(ErrorCode::IncompatibleCurves, "curves share no grid values");
  rep.dominated = rep.max_excess <= tolerance;
  return rep;
}

}  // namespace tradeoff
