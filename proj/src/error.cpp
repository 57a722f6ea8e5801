#include "tradeoff/error.hpp"

namespace tradeoff {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonPositiveProbability: return "NonPositiveProbability";
    case ErrorCode::ProbabilitySumNotOne: return "ProbabilitySumNotOne";
    case ErrorCode::NegativePayoff: return "NegativePayoff";
    case ErrorCode::NonPositivePrice: return "NonPositivePrice";
    case ErrorCode::NonPositiveReturn: return "NonPositiveReturn";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::DegenerateGauge: return "DegenerateGauge";
    case ErrorCode::SolverFailure: return "SolverFailure";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::MarketPathology: return "MarketPathology";
    case ErrorCode::NonSmoothPoint: return "NonSmoothPoint";
    case ErrorCode::IncompatibleCurves: return "IncompatibleCurves";
    case ErrorCode::SingularCovariance: return "SingularCovariance";
    case ErrorCode::ProportionalMeans: return "ProportionalMeans";
    case ErrorCode::DegeneratePair: return "DegeneratePair";
    case ErrorCode::NoMarketPortfolio: return "NoMarketPortfolio";
    case ErrorCode::DegenerateExcess: return "DegenerateExcess";
    case ErrorCode::ZeroRisk: return "ZeroRisk";
    case ErrorCode::FlatMarket: return "FlatMarket";
    case ErrorCode::BelowRiskless: return "BelowRiskless";
    case ErrorCode::NoMasterFund: return "NoMasterFund";
    case ErrorCode::AlphaTooSmall: return "AlphaTooSmall";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::NonPositivePayoff: return "NonPositivePayoff";
    case ErrorCode::UnsupportedUtility: return "UnsupportedUtility";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

ErrorCategory category(ErrorCode code) {
  switch (code) {
    case ErrorCode::SolverFailure:
    case ErrorCode::Infeasible:
    case ErrorCode::NonSmoothPoint:
      return ErrorCategory::Solver;
    case ErrorCode::MarketPathology:
    case ErrorCode::SingularCovariance:
    case ErrorCode::ProportionalMeans:
    case ErrorCode::NoMarketPortfolio:
    case ErrorCode::DegenerateExcess:
    case ErrorCode::FlatMarket:
    case ErrorCode::NoMasterFund:
    case ErrorCode::NonPositivePayoff:
      return ErrorCategory::Pathology;
    default:
      return ErrorCategory::Validation;
  }
}

Error::Error(ErrorCode code, const std::string& detail)
    : std::runtime_error(std::string(to_string(code)) + (detail.empty() ? "" : ": " + detail)),
      code_(code) {}

}  // namespace tradeoff
