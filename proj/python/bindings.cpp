#include <iostream>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "tradeoff/closedform.hpp"
#include "tradeoff/commands.hpp"
#include "tradeoff/growth.hpp"
#include "tradeoff/homogeneous.hpp"

namespace py = pybind11;
using namespace tradeoff;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Risk/utility trade-off portfolio frontiers";

  py::register_exception<Error>(m, "TradeoffError", PyExc_RuntimeError);

  py::enum_<AdmissibleSet>(m, "AdmissibleSet")
      .value("UNIT_COST", AdmissibleSet::UnitCost)
      .value("UNIT_COST_RISKY_ONLY", AdmissibleSet::UnitCostRiskyOnly);

  py::class_<Market>(m, "Market")
      .def(py::init([](double R, Vector prices, Matrix payoffs, Vector probs, bool allow_negative) {
             return Market(R, std::move(prices), std::move(payoffs), std::move(probs), {allow_negative});
           }),
           py::arg("bond_return"), py::arg("prices"), py::arg("payoffs"), py::arg("probabilities"),
           py::arg("allow_negative_payoffs") = false)
      .def_property_readonly("bond_return", &Market::bond_return)
      .def_property_readonly("prices", &Market::prices)
      .def_property_readonly("payoffs", &Market::payoffs)
      .def_property_readonly("probabilities", &Market::probabilities)
      .def_property_readonly("expected_payoffs", &Market::expected_payoffs);

  py::class_<Portfolio>(m, "Portfolio")
      .def(py::init<double, Vector>(), py::arg("x0"), py::arg("x_hat"))
      .def_readwrite("x0", &Portfolio::x0)
      .def_readwrite("x_hat", &Portfolio::x_hat)
      .def("stacked", &Portfolio::stacked);

  py::class_<RiskMeasure>(m, "RiskMeasure")
      .def_static("half_variance", &RiskMeasure::half_variance)
      .def_static("std_dev", &RiskMeasure::std_dev)
      .def_static("abs_exposure", &RiskMeasure::abs_exposure)
      .def_static("polytope_gauge", &RiskMeasure::polytope_gauge)
      .def_property_readonly("id", &RiskMeasure::id)
      .def("__call__", [](const RiskMeasure& r, const Vector& x_hat) { return eval_risk(r, x_hat); });

  py::class_<Utility>(m, "Utility")
      .def_static("identity", &Utility::identity)
      .def_static("log", &Utility::log)
      .def_property_readonly("id", &Utility::id)
      .def("__call__", &Utility::value);

  m.def("covariance", &covariance);

  py::class_<StructureReport>(m, "StructureReport")
      .def_readonly("has_arbitrage", &StructureReport::has_arbitrage)
      .def_readonly("has_nontrivial_riskless", &StructureReport::has_nontrivial_riskless)
      .def_readonly("has_bond_replicator", &StructureReport::has_bond_replicator)
      .def_readonly("rank_g", &StructureReport::rank_g)
      .def_property_readonly("all_clear", &StructureReport::all_clear);
  m.def("detect_nontrivial_riskless", &detect_nontrivial_riskless, py::arg("market"),
        py::arg("rank_tolerance") = kDefaultRankTolerance);
  m.def("detect_arbitrage", [](const Market& market) { return detect_arbitrage(market).found; });

  py::class_<KktReport>(m, "KktReport")
      .def_readonly("lambda1", &KktReport::lambda1)
      .def_readonly("lambda2", &KktReport::lambda2)
      .def_readonly("stationarity_residual", &KktReport::stationarity_residual)
      .def_readonly("complementary_slackness", &KktReport::complementary_slackness);
  py::class_<SolveResult>(m, "SolveResult")
      .def_readonly("portfolio", &SolveResult::portfolio)
      .def_readonly("risk", &SolveResult::risk)
      .def_readonly("expected_utility", &SolveResult::expected_utility)
      .def_readonly("kkt", &SolveResult::kkt)
      .def_readonly("binding", &SolveResult::binding);

  auto options = [](AdmissibleSet admissible, double tolerance) {
    SolveOptions o;
    o.admissible = admissible;
    o.tolerance = tolerance;
    return o;
  };
  m.def(
      "min_risk_given_utility",
      [options](const Market& market, const RiskMeasure& measure, const Utility& utility, double mu,
                AdmissibleSet admissible, double tolerance) {
        return min_risk_given_utility(market, measure, utility, mu, options(admissible, tolerance));
      },
      py::arg("market"), py::arg("measure"), py::arg("utility"), py::arg("mu"),
      py::arg("admissible") = AdmissibleSet::UnitCost, py::arg("tolerance") = 1e-10);
  m.def(
      "max_utility_given_risk",
      [options](const Market& market, const RiskMeasure& measure, const Utility& utility, double r,
                AdmissibleSet admissible, double tolerance) {
        return max_utility_given_risk(market, measure, utility, r, options(admissible, tolerance));
      },
      py::arg("market"), py::arg("measure"), py::arg("utility"), py::arg("r"),
      py::arg("admissible") = AdmissibleSet::UnitCost, py::arg("tolerance") = 1e-10);

  py::class_<FrontierPoint>(m, "FrontierPoint")
      .def_readonly("mu", &FrontierPoint::mu)
      .def_readonly("risk", &FrontierPoint::risk)
      .def_readonly("portfolio", &FrontierPoint::portfolio);
  py::class_<FrontierCurve>(m, "FrontierCurve")
      .def_readonly("points", &FrontierCurve::points)
      .def_readonly("truncated", &FrontierCurve::truncated);
  m.def(
      "trace_frontier",
      [options](const Market& market, const RiskMeasure& measure, const Utility& utility,
                const std::vector<double>& grid, AdmissibleSet admissible) {
        return trace_frontier(market, measure, utility, grid, {options(admissible, 1e-10), 1});
      },
      py::arg("market"), py::arg("measure"), py::arg("utility"), py::arg("mu_grid"),
      py::arg("admissible") = AdmissibleSet::UnitCost);

  py::class_<MarkowitzScalars>(m, "MarkowitzScalars")
      .def_readonly("alpha", &MarkowitzScalars::alpha)
      .def_readonly("beta", &MarkowitzScalars::beta)
      .def_readonly("gamma", &MarkowitzScalars::gamma_s)
      .def_readonly("disc", &MarkowitzScalars::disc);
  m.def("markowitz_scalars", &markowitz_scalars);
  m.def("markowitz_sigma", [](const MarkowitzScalars& s, double mu) { return markowitz_frontier(s, mu).sigma; });
  m.def("markowitz_portfolio", &markowitz_portfolio);

  py::class_<CapmSummary>(m, "CapmSummary")
      .def_readonly("delta", &CapmSummary::delta)
      .def_readonly("sigma_m", &CapmSummary::sigma_m)
      .def_readonly("mu_m", &CapmSummary::mu_m)
      .def_readonly("x_m", &CapmSummary::x_m)
      .def_readonly("price_of_risk", &CapmSummary::price_of_risk);
  m.def("capm_summary", &capm_summary);

  py::class_<GrowthResult>(m, "GrowthResult")
      .def_readonly("kappa", &GrowthResult::kappa)
      .def_readonly("mu_kappa", &GrowthResult::mu_kappa)
      .def_readonly("gradient_residual", &GrowthResult::gradient_residual);
  m.def("growth_optimal", &growth_optimal);
  m.def("kelly_two_state", &kelly_two_state);
  m.def("two_state_market", &two_state_market);
  m.def("extract_emm", [](const Market& market, const Utility& utility) { return extract_emm(market, utility).q; });
  m.def("verify_emm", &verify_emm);

  py::class_<AffinityReport>(m, "AffinityReport")
      .def_readonly("is_affine", &AffinityReport::is_affine)
      .def_readonly("max_deviation", &AffinityReport::max_deviation);
  m.def("verify_affinity", &verify_affinity);

  m.def("command_names", &command_names);
  m.def(
      "run_command",
      [](const std::string& command, const std::string& scenario_path, const std::string& out_dir) {
        return run_command(command, load_scenario(scenario_path), out_dir, {}, std::cerr);
      },
      py::arg("command"), py::arg("scenario"), py::arg("out_dir"));
}
