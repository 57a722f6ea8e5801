#include "tradeoff/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>

#include <json.hpp>

#include "tradeoff/closedform.hpp"
#include "tradeoff/error.hpp"
#include "tradeoff/growth.hpp"
#include "tradeoff/homogeneous.hpp"

namespace tradeoff {

using nlohmann::json;

namespace {

constexpr int kDefaultPoints = 33;

json to_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json to_json(const Portfolio& p) { return {{"x0", p.x0}, {"x_hat", to_json(p.x_hat)}}; }

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "failed writing " + path.string());
}

void write_json(const std::filesystem::path& path, const json& doc) { write_text(path, doc.dump(2) + "\n"); }

std::string format_value(double v) {
  if (v == 0.0) v = 0.0;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

struct Context {
  const Scenario& scenario;
  std::filesystem::path out;
  Market market;
  int points = kDefaultPoints;
  SolveOptions solve;
  unsigned threads = 0;
  double rank_tolerance = kDefaultRankTolerance;
  double shape_tolerance = 1e-7;

  TraceOptions trace() const { return {solve, threads}; }
};

std::vector<double> mu_grid_or(const Context& c, double lo, double hi) {
  if (!c.scenario.grid.mu.empty()) return c.scenario.grid.mu;
  if (c.scenario.grid.span_cap) hi = std::min(hi, lo + *c.scenario.grid.span_cap);
  return uniform_grid(lo, hi, c.points);
}

FrontierCurve closed_form_curve(const std::vector<double>& grid,
                                const std::function<std::pair<double, Portfolio>(double)>& point) {
  FrontierCurve curve;
  for (double mu : grid) {
    auto [risk, portfolio] = point(mu);
    curve.points.push_back({mu, risk, std::move(portfolio), true});
  }
  curve.measure_id = "std_dev";
  curve.utility_id = "identity";
  return curve;
}

json scalars_json(const MarkowitzScalars& s) {
  return {{"alpha", s.alpha}, {"beta", s.beta}, {"gamma", s.gamma_s}, {"disc", s.disc}};
}

json run_check(const Context& c) {
  const StructureReport r = detect_nontrivial_riskless(c.market, c.rank_tolerance);
  return {{"has_arbitrage", r.has_arbitrage},
          {"has_nontrivial_riskless", r.has_nontrivial_riskless},
          {"has_bond_replicator", r.has_bond_replicator},
          {"rank_g", r.rank_g},
          {"all_clear", r.all_clear()},
          {"certificate", r.certificate ? to_json(*r.certificate) : json(nullptr)}};
}

void run_markowitz(const Context& c) {
  const Matrix sigma = covariance(c.market);
  const Vector mean = c.market.expected_payoffs();
  const Vector& prices = c.market.prices();
  const MarkowitzScalars s = markowitz_scalars(sigma, mean, prices);
  const double mu_min = s.beta / s.gamma_s;
  const double top = mean.cwiseQuotient(prices).maxCoeff();
  const std::vector<double> grid = mu_grid_or(c, mu_min, top > mu_min ? top : mu_min + 1.0);
  const FrontierCurve curve = closed_form_curve(grid, [&](double mu) {
    const MarkowitzPoint p = markowitz_frontier(s, mu);
    return std::make_pair(p.sigma, Portfolio{0.0, markowitz_portfolio(sigma, mean, prices, mu)});
  });
  emit_table(curve, c.market.assets(), (c.out / "frontier.tsv").string());
  json doc = scalars_json(s);
  doc["mu_min"] = mu_min;
  doc["sigma_min"] = 1.0 / std::sqrt(s.gamma_s);
  doc["min_variance_portfolio"] = to_json(Portfolio{0.0, markowitz_portfolio(sigma, mean, prices, mu_min)});
  write_json(c.out / "markowitz.json", doc);
}

void run_capm(const Context& c) {
  const Matrix sigma = covariance(c.market);
  const Vector mean = c.market.expected_payoffs();
  const Vector& prices = c.market.prices();
  const double R = c.market.bond_return();
  const CapmSummary s = capm_summary(sigma, mean, prices, R);
  const std::vector<double> grid = mu_grid_or(c, R, s.mu_m);
  const FrontierCurve curve = closed_form_curve(grid, [&](double mu) {
    Portfolio p = capm_portfolio(sigma, mean, prices, R, mu);
    return std::make_pair((mu - R) / s.price_of_risk, std::move(p));
  });
  emit_table(curve, c.market.assets(), (c.out / "frontier.tsv").string());
  json doc = {{"bond_return", R},
              {"delta", s.delta},
              {"sigma_m", s.sigma_m},
              {"mu_m", s.mu_m},
              {"x_m", to_json(s.x_m)},
              {"price_of_risk", s.price_of_risk},
              {"scalars", scalars_json(s.scalars)}};
  if (s.scalars.disc > 0.0) {
    const TangencyReport t = tangency_check(s.scalars, s);
    doc["tangency"] = {{"pass", t.pass}, {"sigma_gap", t.sigma_gap}, {"bullet_slope", t.bullet_slope},
                       {"cml_slope", t.cml_slope}};
  }
  write_json(c.out / "capm.json", doc);
}

json bounds_json(const FrontierBounds& b) {
  return {{"mu_min", finite_or_null(b.mu_min)}, {"mu_max", finite_or_null(b.mu_max)},
          {"r_min", finite_or_null(b.r_min)},   {"r_max", finite_or_null(b.r_max)},
          {"mu_max_attained", b.mu_max_attained}};
}

void run_frontier(const Context& c) {
  const RiskMeasure measure = build_measure(c.scenario, c.market);
  const Utility utility = build_utility(c.scenario);
  const AdmissibleSet admissible = build_admissible(c.scenario);
  std::vector<double> grid = c.scenario.grid.mu;
  if (grid.empty()) {
    const FrontierBounds b = frontier_bounds(c.market, measure, utility, admissible);
    grid = auto_mu_grid(b, c.points, c.scenario.grid.span_cap.value_or(10.0));
  }
  const FrontierCurve curve = trace_frontier(c.market, measure, utility, grid, c.trace());
  emit_table(curve, c.market.assets(), (c.out / "frontier.tsv").string());
  const ShapeReport shape = verify_frontier_shape(curve, c.shape_tolerance);
  json doc = {{"measure", curve.measure_id},
              {"utility", curve.utility_id},
              {"admissible", to_string(curve.admissible)},
              {"points", curve.points.size()},
              {"truncated", curve.truncated},
              {"bounds", bounds_json(curve.bounds)},
              {"shape", {{"pass", shape.pass},
                         {"monotonicity_violation", shape.monotonicity_violation},
                         {"convexity_violation", shape.convexity_violation}}}};
  write_json(c.out / "frontier.json", doc);
}

void run_leverage_path(const Context& c) {
  const RiskMeasure measure = build_measure(c.scenario, c.market);
  std::vector<double> grid = c.scenario.grid.r;
  if (grid.empty()) grid = leverage_grid(c.market, measure, c.points);
  const FrontierCurve curve = leverage_path(c.market, measure, grid, c.trace());
  emit_table(curve, c.market.assets(), (c.out / "frontier.tsv").string());
}

void run_growth(const Context& c) {
  json doc;
  if (build_admissible(c.scenario) == AdmissibleSet::UnitCostRiskyOnly) {
    const RiskyOnlyGrowth g = risky_only_growth(c.market);
    doc = {{"admissible", "unit_cost_risky_only"}, {"kappa", to_json(g.portfolio)}, {"mu_kappa", g.mu}};
  } else {
    const GrowthResult g = growth_optimal(c.market);
    doc = {{"admissible", "unit_cost"},
           {"kappa", to_json(g.kappa)},
           {"mu_kappa", g.mu_kappa},
           {"gradient_residual", g.gradient_residual}};
  }
  write_json(c.out / "growth.json", doc);
}

void run_emm(const Context& c) {
  const MartingaleMeasure m = extract_emm(c.market, build_utility(c.scenario));
  write_json(c.out / "emm.json", {{"q", to_json(m.q)}, {"residuals", to_json(verify_emm(c.market, m.q))}});
}

void run_beta(const Context& c) {
  if (!c.scenario.asset) throw Error(ErrorCode::ValidationError, "beta needs an asset block");
  const CapmSummary s =
      capm_summary(covariance(c.market), c.market.expected_payoffs(), c.market.prices(), c.market.bond_return());
  const AssetBlock& a = *c.scenario.asset;
  const Vector payoff = Eigen::Map<const Vector>(a.payoff.data(), static_cast<Index>(a.payoff.size()));
  const BetaPricing b = beta_price(c.market, s, payoff, a.price);
  write_json(c.out / "beta.json", {{"beta", b.beta},
                                   {"covariance", b.covariance},
                                   {"quoted_return", b.quoted_return},
                                   {"capm_return", b.capm_return},
                                   {"fair_price", b.fair_price},
                                   {"fixed_point_price", finite_or_null(b.fixed_point_price)}});
}

void run_counterexample(const Context& c) {
  const RiskMeasure measure = build_measure(c.scenario, c.market);
  const Utility utility = build_utility(c.scenario);
  SolveOptions o = c.solve;
  o.admissible = build_admissible(c.scenario);
  // The replay market is deliberately not all-clear; the LP is well posed regardless.
  o.require_all_clear = false;
  const std::vector<double> grid = c.scenario.grid.mu.empty() ? std::vector<double>{1.0, 1.01, 3.0} : c.scenario.grid.mu;
  std::vector<std::pair<double, Vector>> path;
  json rows = json::array();
  for (double mu : grid) {
    const SolveResult r = min_risk_given_utility(c.market, measure, utility, mu, o);
    path.emplace_back(mu, r.portfolio.x_hat);
    rows.push_back({{"mu", mu}, {"risk", r.risk}, {"x_hat", to_json(r.portfolio.x_hat)}});
  }
  const AffinityReport rep = verify_affinity(path);
  write_json(c.out / "counterexample.json",
             {{"is_affine", rep.is_affine}, {"max_deviation", rep.max_deviation}, {"path", rows}});
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"check", "markowitz", "capm",  "frontier",      "growth",
                                                 "leverage-path", "emm", "beta", "counterexample"};
  return names;
}

int exit_code(ErrorCode code) {
  switch (category(code)) {
    case ErrorCategory::Validation: return 2;
    case ErrorCategory::Solver: return 3;
    case ErrorCategory::Pathology: return 4;
  }
  return 3;
}

std::string format_table(const FrontierCurve& curve, Index assets) {
  std::string out = "#mu\trisk\tx0";
  for (Index j = 1; j <= assets; ++j) out += "\tx" + std::to_string(j);
  out += '\n';
  for (const FrontierPoint& p : curve.points) {
    out += format_value(p.mu) + '\t' + format_value(p.risk) + '\t' + format_value(p.portfolio.x0);
    for (Index j = 0; j < assets; ++j) out += '\t' + format_value(p.portfolio.x_hat(j));
    out += '\n';
  }
  return out;
}

void emit_table(const FrontierCurve& curve, Index assets, const std::string& path) {
  write_text(path, format_table(curve, assets));
}

int run_command(const std::string& command, const Scenario& scenario, const std::string& out_dir,
                const RunOverrides& overrides, std::ostream& err) {
  using Runner = std::function<void(const Context&)>;
  static const std::map<std::string, Runner> runners = {
      {"check", [](const Context& c) { write_json(c.out / "structure.json", run_check(c)); }},
      {"markowitz", run_markowitz},
      {"capm", run_capm},
      {"frontier", run_frontier},
      {"growth", run_growth},
      {"leverage-path", run_leverage_path},
      {"emm", run_emm},
      {"beta", run_beta},
      {"counterexample", run_counterexample},
  };
  const auto it = runners.find(command);
  if (it == runners.end()) {
    err << "unknown command '" << command << "'\n";
    return 2;
  }

  int status = 0;
  std::string message;
  std::optional<Context> ctx;
  try {
    std::filesystem::create_directories(out_dir);
    ctx.emplace(Context{scenario, out_dir, build_market(scenario), kDefaultPoints, {}, 0, kDefaultRankTolerance, 1e-7});
    Context& c = *ctx;
    c.points = overrides.grid_points.value_or(scenario.grid.points.value_or(kDefaultPoints));
    if (c.points < 2) throw Error(ErrorCode::ValidationError, "grid points must be >= 2");
    c.solve.tolerance = overrides.tol_solver.value_or(scenario.tolerances.solver.value_or(c.solve.tolerance));
    if (!(c.solve.tolerance > 0.0)) throw Error(ErrorCode::ValidationError, "solver tolerance must be > 0");
    c.solve.admissible = build_admissible(scenario);
    c.rank_tolerance = overrides.tol_rank.value_or(scenario.tolerances.rank.value_or(c.rank_tolerance));
    c.shape_tolerance = overrides.tol_shape.value_or(scenario.tolerances.shape.value_or(c.shape_tolerance));
    if (!(c.rank_tolerance > 0.0) || !(c.shape_tolerance > 0.0)) {
      throw Error(ErrorCode::ValidationError, "tolerances must be > 0");
    }
    c.threads = overrides.threads.value_or(0);
    it->second(c);
  } catch (const Error& e) {
    status = exit_code(e.code());
    message = e.what();
  } catch (const std::filesystem::filesystem_error& e) {
    status = 2;
    message = std::string("IoError: ") + e.what();
  } catch (const std::exception& e) {
    status = 3;
    message = e.what();
  }
  if (!message.empty()) err << "portcli " << command << ": " << message << '\n';

  try {
    if (std::filesystem::is_directory(out_dir)) {
      write_json(std::filesystem::path(out_dir) / "run.json",
                 {{"command", command},
                  {"scenario", scenario.name},
                  {"exit_status", status},
                  {"error", message.empty() ? json(nullptr) : json(message)},
                  {"threads", overrides.threads.value_or(0)},
                  {"started_utc", utc_timestamp()}});
    }
  } catch (const std::exception& e) {
    err << "portcli: " << e.what() << '\n';
    if (status == 0) status = 2;
  }
  return status;
}

}  // namespace tradeoff
