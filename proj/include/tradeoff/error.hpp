#pragma once

#include <stdexcept>
#include <string>

namespace tradeoff {

enum class ErrorCode {
  // market construction
  NonPositiveProbability,
  ProbabilitySumNotOne,
  NegativePayoff,
  NonPositivePrice,
  NonPositiveReturn,
  DimensionMismatch,
  // measures
  DegenerateGauge,
  // numerical core
  SolverFailure,
  Infeasible,
  MarketPathology,
  NonSmoothPoint,
  // frontier
  IncompatibleCurves,
  // closed forms
  SingularCovariance,
  ProportionalMeans,
  DegeneratePair,
  NoMarketPortfolio,
  DegenerateExcess,
  ZeroRisk,
  // homogeneous measures
  FlatMarket,
  BelowRiskless,
  NoMasterFund,
  // growth
  AlphaTooSmall,
  OutOfRange,
  NonPositivePayoff,
  UnsupportedUtility,
  // scenario / io
  ParseError,
  ValidationError,
  IoError,
};

const char* to_string(ErrorCode code);

/// Coarse grouping used to map failures onto process exit codes.
enum class ErrorCategory { Validation, Solver, Pathology };

ErrorCategory category(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace tradeoff
