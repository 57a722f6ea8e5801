#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tradeoff/measures.hpp"
#include "tradeoff/solver.hpp"

namespace tradeoff {

struct MarketBlock {
  double bond_return = 1.0;
  std::vector<double> prices;
  std::vector<std::vector<double>> payoffs;
  std::vector<double> probabilities;
  bool allow_negative_payoffs = false;
  bool operator==(const MarketBlock&) const = default;
};

struct MeasureBlock {
  std::string kind = "std_dev";
  std::vector<double> weights;
  std::vector<std::vector<double>> vertices;
  bool operator==(const MeasureBlock&) const = default;
};

struct GridBlock {
  std::vector<double> mu;
  std::vector<double> r;
  std::optional<int> points;
  std::optional<double> span_cap;
  bool operator==(const GridBlock&) const = default;
};

struct ToleranceBlock {
  std::optional<double> solver;
  std::optional<double> rank;
  std::optional<double> shape;
  bool operator==(const ToleranceBlock&) const = default;
};

struct AssetBlock {
  std::vector<double> payoff;
  double price = 1.0;
  bool operator==(const AssetBlock&) const = default;
};

struct Scenario {
  std::string name;
  MarketBlock market;
  MeasureBlock measure;
  std::string utility = "identity";
  std::string admissible = "unit_cost";
  GridBlock grid;
  ToleranceBlock tolerances;
  std::optional<AssetBlock> asset;
  bool operator==(const Scenario&) const = default;
};

/// Strict parse: unknown keys raise ValidationError("UnknownKey: <key>"), malformed JSON raises
/// ParseError with line and column, and every block is validated by building the objects.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::string& path);

/// Pretty JSON; parse_scenario(serialize_scenario(s)) == s.
std::string serialize_scenario(const Scenario& scenario);

Market build_market(const Scenario& scenario);
RiskMeasure build_measure(const Scenario& scenario, const Market& market);
Utility build_utility(const Scenario& scenario);
AdmissibleSet build_admissible(const Scenario& scenario);

/// Scenario replaying the three-asset gauge counter-example.
Scenario counterexample_scenario();

}  // namespace tradeoff
