#include "tradeoff/scenario.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "tradeoff/error.hpp"
#include "tradeoff/homogeneous.hpp"

namespace tradeoff {

using nlohmann::json;

namespace {

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorCode::ValidationError, what); }

void allow_keys(const json& obj, const std::string& where, std::initializer_list<const char*> keys) {
  if (!obj.is_object()) invalid("TypeError: " + where + " must be an object");
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& item : obj.items()) {
    if (!allowed.count(item.key())) invalid("UnknownKey: " + item.key());
  }
}

const json& require(const json& obj, const char* key, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end()) invalid("MissingKey: " + where + "." + key);
  return *it;
}

double number(const json& v, const std::string& where) {
  if (!v.is_number()) invalid("TypeError: " + where + " must be a number");
  return v.get<double>();
}

std::vector<double> numbers(const json& v, const std::string& where) {
  if (!v.is_array()) invalid("TypeError: " + where + " must be an array of numbers");
  std::vector<double> out;
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

std::vector<std::vector<double>> rows(const json& v, const std::string& where) {
  if (!v.is_array()) invalid("TypeError: " + where + " must be an array of arrays");
  std::vector<std::vector<double>> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(numbers(v[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

std::string text(const json& v, const std::string& where) {
  if (!v.is_string()) invalid("TypeError: " + where + " must be a string");
  return v.get<std::string>();
}

Matrix to_matrix(const std::vector<std::vector<double>>& r, Index cols_expected, const std::string& where) {
  const Index n = static_cast<Index>(r.size());
  const Index m = n ? static_cast<Index>(r.front().size()) : cols_expected;
  Matrix out(n, m);
  for (Index i = 0; i < n; ++i) {
    if (static_cast<Index>(r[static_cast<std::size_t>(i)].size()) != m) {
      throw Error(ErrorCode::DimensionMismatch, where + " rows must have equal length");
    }
    for (Index j = 0; j < m; ++j) out(i, j) = r[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  return out;
}

Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size()));
}

void check_grid(const std::vector<double>& g, const char* name) {
  for (std::size_t i = 1; i < g.size(); ++i) {
    if (!(g[i] > g[i - 1])) invalid(std::string("GridNotIncreasing: grid.") + name);
  }
}

}  // namespace

Scenario parse_scenario(const std::string& input) {
  json doc;
  try {
    doc = json::parse(input);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, column = 1;
    const std::size_t limit = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, input.size());
    for (std::size_t i = 0; i < limit; ++i) {
      if (input[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + e.what());
  }
  allow_keys(doc, "scenario", {"name", "market", "measure", "utility", "admissible", "grid", "tolerances", "asset"});

  Scenario s;
  if (doc.contains("name")) s.name = text(doc["name"], "name");

  const json& mk = require(doc, "market", "scenario");
  allow_keys(mk, "market", {"R", "s0_hat", "payoffs", "probs", "allow_negative_payoffs"});
  s.market.bond_return = number(require(mk, "R", "market"), "market.R");
  s.market.prices = numbers(require(mk, "s0_hat", "market"), "market.s0_hat");
  s.market.payoffs = rows(require(mk, "payoffs", "market"), "market.payoffs");
  s.market.probabilities = numbers(require(mk, "probs", "market"), "market.probs");
  if (mk.contains("allow_negative_payoffs")) {
    if (!mk["allow_negative_payoffs"].is_boolean()) invalid("TypeError: market.allow_negative_payoffs must be a boolean");
    s.market.allow_negative_payoffs = mk["allow_negative_payoffs"].get<bool>();
  }

  if (doc.contains("measure")) {
    const json& me = doc["measure"];
    allow_keys(me, "measure", {"kind", "weights", "vertices"});
    s.measure.kind = text(require(me, "kind", "measure"), "measure.kind");
    if (me.contains("weights")) s.measure.weights = numbers(me["weights"], "measure.weights");
    if (me.contains("vertices")) s.measure.vertices = rows(me["vertices"], "measure.vertices");
  }
  if (doc.contains("utility")) {
    const json& ut = doc["utility"];
    allow_keys(ut, "utility", {"kind"});
    s.utility = text(require(ut, "kind", "utility"), "utility.kind");
  }
  if (doc.contains("admissible")) s.admissible = text(doc["admissible"], "admissible");
  if (doc.contains("grid")) {
    const json& gr = doc["grid"];
    allow_keys(gr, "grid", {"mu", "r", "points", "span_cap"});
    if (gr.contains("mu")) s.grid.mu = numbers(gr["mu"], "grid.mu");
    if (gr.contains("r")) s.grid.r = numbers(gr["r"], "grid.r");
    if (gr.contains("points")) {
      if (!gr["points"].is_number_integer() || gr["points"].get<long>() < 1) invalid("TypeError: grid.points must be a positive integer");
      s.grid.points = gr["points"].get<int>();
    }
    if (gr.contains("span_cap")) s.grid.span_cap = number(gr["span_cap"], "grid.span_cap");
  }
  if (doc.contains("tolerances")) {
    const json& tl = doc["tolerances"];
    allow_keys(tl, "tolerances", {"solver", "rank", "shape"});
    if (tl.contains("solver")) s.tolerances.solver = number(tl["solver"], "tolerances.solver");
    if (tl.contains("rank")) s.tolerances.rank = number(tl["rank"], "tolerances.rank");
    if (tl.contains("shape")) s.tolerances.shape = number(tl["shape"], "tolerances.shape");
  }
  if (doc.contains("asset")) {
    const json& as = doc["asset"];
    allow_keys(as, "asset", {"payoff", "price"});
    AssetBlock a;
    a.payoff = numbers(require(as, "payoff", "asset"), "asset.payoff");
    if (as.contains("price")) a.price = number(as["price"], "asset.price");
    s.asset = a;
  }

  // Validate by construction.
  const Market market = build_market(s);
  build_measure(s, market);
  build_utility(s);
  build_admissible(s);
  check_grid(s.grid.mu, "mu");
  check_grid(s.grid.r, "r");
  if (s.grid.span_cap && !(*s.grid.span_cap > 0.0)) invalid("grid.span_cap must be > 0");
  for (const auto* tol : {&s.tolerances.solver, &s.tolerances.rank, &s.tolerances.shape}) {
    if (*tol && !(**tol > 0.0)) invalid("tolerances must be > 0");
  }
  if (s.asset) {
    if (static_cast<Index>(s.asset->payoff.size()) != market.states()) {
      throw Error(ErrorCode::DimensionMismatch, "asset.payoff needs one value per state");
    }
    if (!(s.asset->price > 0.0)) throw Error(ErrorCode::NonPositivePrice, "asset.price");
  }
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario(buffer.str());
}

std::string serialize_scenario(const Scenario& s) {
  json doc = json::object();
  if (!s.name.empty()) doc["name"] = s.name;
  json mk = {{"R", s.market.bond_return},
             {"s0_hat", s.market.prices},
             {"payoffs", s.market.payoffs},
             {"probs", s.market.probabilities}};
  if (s.market.allow_negative_payoffs) mk["allow_negative_payoffs"] = true;
  doc["market"] = mk;
  json me = {{"kind", s.measure.kind}};
  if (!s.measure.weights.empty()) me["weights"] = s.measure.weights;
  if (!s.measure.vertices.empty()) me["vertices"] = s.measure.vertices;
  doc["measure"] = me;
  doc["utility"] = {{"kind", s.utility}};
  doc["admissible"] = s.admissible;
  json gr = json::object();
  if (!s.grid.mu.empty()) gr["mu"] = s.grid.mu;
  if (!s.grid.r.empty()) gr["r"] = s.grid.r;
  if (s.grid.points) gr["points"] = *s.grid.points;
  if (s.grid.span_cap) gr["span_cap"] = *s.grid.span_cap;
  if (!gr.empty()) doc["grid"] = gr;
  json tl = json::object();
  if (s.tolerances.solver) tl["solver"] = *s.tolerances.solver;
  if (s.tolerances.rank) tl["rank"] = *s.tolerances.rank;
  if (s.tolerances.shape) tl["shape"] = *s.tolerances.shape;
  if (!tl.empty()) doc["tolerances"] = tl;
  if (s.asset) doc["asset"] = {{"payoff", s.asset->payoff}, {"price", s.asset->price}};
  return doc.dump(2) + "\n";
}

Market build_market(const Scenario& s) {
  const Matrix payoffs = to_matrix(s.market.payoffs, static_cast<Index>(s.market.prices.size()), "market.payoffs");
  MarketOptions o;
  o.allow_negative_payoffs = s.market.allow_negative_payoffs;
  return Market(s.market.bond_return, to_vector(s.market.prices), payoffs, to_vector(s.market.probabilities), o);
}

RiskMeasure build_measure(const Scenario& s, const Market& market) {
  const std::string& kind = s.measure.kind;
  const bool has_weights = !s.measure.weights.empty();
  const bool has_vertices = !s.measure.vertices.empty();
  if (kind == "std_dev" || kind == "half_variance") {
    if (has_weights || has_vertices) invalid("measure." + kind + " takes no parameters");
    const Matrix sigma = covariance(market);
    return kind == "std_dev" ? RiskMeasure::std_dev(sigma) : RiskMeasure::half_variance(sigma);
  }
  if (kind == "abs_exposure") {
    if (has_vertices) invalid("measure.abs_exposure takes weights only");
    const Vector w = has_weights ? to_vector(s.measure.weights) : Vector::Ones(market.assets());
    if (w.size() != market.assets()) throw Error(ErrorCode::DimensionMismatch, "measure.weights needs one entry per asset");
    return RiskMeasure::abs_exposure(w);
  }
  if (kind == "polytope_gauge") {
    if (has_weights || !has_vertices) invalid("measure.polytope_gauge needs vertices");
    const Matrix v = to_matrix(s.measure.vertices, market.assets(), "measure.vertices");
    if (v.cols() != market.assets()) throw Error(ErrorCode::DimensionMismatch, "measure.vertices needs one column per asset");
    return RiskMeasure::polytope_gauge(v);
  }
  invalid("UnknownMeasure: " + kind);
}

Utility build_utility(const Scenario& s) {
  if (s.utility == "identity") return Utility::identity();
  if (s.utility == "log") return Utility::log();
  invalid("UnknownUtility: " + s.utility);
}

AdmissibleSet build_admissible(const Scenario& s) {
  if (s.admissible == "unit_cost") return AdmissibleSet::UnitCost;
  if (s.admissible == "unit_cost_risky_only") return AdmissibleSet::UnitCostRiskyOnly;
  invalid("UnknownAdmissibleSet: " + s.admissible);
}

Scenario counterexample_scenario() {
  const CounterexampleFixture f = counterexample_fixture();
  Scenario s;
  s.name = "gauge counter-example";
  s.market.bond_return = f.market.bond_return();
  for (Index j = 0; j < f.market.assets(); ++j) s.market.prices.push_back(f.market.prices()(j));
  for (Index i = 0; i < f.market.states(); ++i) {
    std::vector<double> row;
    for (Index j = 0; j < f.market.assets(); ++j) row.push_back(f.market.payoffs()(i, j));
    s.market.payoffs.push_back(row);
    s.market.probabilities.push_back(f.market.probabilities()(i));
  }
  s.measure.kind = "polytope_gauge";
  const Matrix& v = f.measure.vertices();
  for (Index i = 0; i < v.rows(); ++i) {
    std::vector<double> row;
    for (Index j = 0; j < v.cols(); ++j) row.push_back(v(i, j));
    s.measure.vertices.push_back(row);
  }
  s.utility = "identity";
  s.admissible = "unit_cost_risky_only";
  s.grid.mu = {1.0, 1.01, 3.0};
  return s;
}

}  // namespace tradeoff
