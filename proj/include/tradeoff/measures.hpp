#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tradeoff/lp.hpp"

namespace tradeoff {

/// Declared axiom flags of a risk measure:
///   r1  depends only on the risky part x_hat
///   r1n zero exactly on pure-bond portfolios
///   r2  convex;  r2s strictly convex
///   r3  positively homogeneous of degree one
struct RiskAxioms {
  bool r1 = true;
  bool r1n = true;
  bool r2 = true;
  bool r2s = false;
  bool r3 = false;
};

enum class MeasureKind { HalfVariance, StdDev, AbsExposure, PolytopeGauge };

const char* to_string(MeasureKind kind);

/// Risk of a portfolio's risky part. Smooth kinds carry a covariance matrix; polyhedral
/// kinds are represented as r(x) = min{ cost . y : generators * y = x, y >= 0 }.
class RiskMeasure {
 public:
  static RiskMeasure half_variance(Matrix sigma);
  static RiskMeasure std_dev(Matrix sigma);
  /// Weighted l1 norm sum_j w_j |x_j|; weights must be >= 0.
  static RiskMeasure abs_exposure(Vector weights);
  /// Minkowski gauge of conv(rows of `vertices`); 0 must be interior (DegenerateGauge otherwise).
  static RiskMeasure polytope_gauge(Matrix vertices);

  MeasureKind kind() const noexcept { return kind_; }
  const RiskAxioms& axioms() const noexcept { return axioms_; }
  Index dimension() const noexcept { return dimension_; }

  /// Returns a copy with different declared flags (the measure itself is unchanged).
  RiskMeasure with_axioms(RiskAxioms axioms) const;

  bool is_smooth() const noexcept {
    return kind_ == MeasureKind::HalfVariance || kind_ == MeasureKind::StdDev;
  }
  bool is_polyhedral() const noexcept { return !is_smooth(); }

  const Matrix& sigma() const noexcept { return sigma_; }
  const Vector& weights() const noexcept { return weights_; }
  const Matrix& vertices() const noexcept { return vertices_; }

  /// Polyhedral representation (empty for smooth kinds).
  const Matrix& generators() const noexcept { return generators_; }
  const Vector& generator_costs() const noexcept { return generator_costs_; }
  /// Strictly positive y0 with generators * y0 = 0.
  const Vector& interior_weights() const noexcept { return interior_weights_; }

  std::string id() const;

 private:
  RiskMeasure() = default;
  MeasureKind kind_ = MeasureKind::HalfVariance;
  RiskAxioms axioms_;
  Index dimension_ = 0;
  Matrix sigma_;
  Vector weights_;
  Matrix vertices_;
  Matrix generators_;
  Vector generator_costs_;
  Vector interior_weights_;
};

double eval_risk(const RiskMeasure& measure, const Vector& x_hat);

/// Gradient of a smooth measure (HalfVariance everywhere, StdDev away from zero).
Vector risk_gradient(const RiskMeasure& measure, const Vector& x_hat);

/// Minkowski gauge inf{t > 0 : x in t conv(V)} via the LP
///   min sum(l) s.t. V' l = x, l >= 0.
double gauge_evaluate(const Matrix& vertices, const Vector& x_hat);

/// Nonnegative representation y with generators * y = x_hat attaining eval_risk.
Vector polyhedral_representation(const RiskMeasure& measure, const Vector& x_hat);

/// Margin of the LP max{ s : V' l = 0, sum l = 1, l >= s }; 0 is interior iff margin > 1e-9
/// and V spans R^M. Also returns the maximizing weights.
struct GaugeInteriority {
  bool interior = false;
  double margin = 0.0;
  Vector weights;
};
GaugeInteriority gauge_interiority(const Matrix& vertices);

// ---------------------------------------------------------------------------

struct UtilityAxioms {
  bool u1 = true;   // increasing
  bool u2 = true;   // concave
  bool u2s = false; // strictly concave
  bool u3 = false;  // u(t) = -inf for t < 0
  bool u4 = true;   // unbounded above
};

enum class UtilityKind { Identity, Log };

const char* to_string(UtilityKind kind);

class Utility {
 public:
  static Utility identity();
  static Utility log();

  UtilityKind kind() const noexcept { return kind_; }
  const UtilityAxioms& axioms() const noexcept { return axioms_; }
  Utility with_axioms(UtilityAxioms axioms) const;

  /// -inf outside the domain of log.
  double value(double t) const;
  double derivative(double t) const;
  double second_derivative(double t) const;
  std::string id() const { return to_string(kind_); }

 private:
  explicit Utility(UtilityKind kind);
  UtilityKind kind_;
  UtilityAxioms axioms_;
};

double eval_utility(const Utility& utility, double t);

/// sum_i p_i u(payoff_i) with -inf propagating.
double expected_utility(const Utility& utility, const Vector& probabilities, const Vector& payoffs);

// ---------------------------------------------------------------------------

struct AxiomViolation {
  std::string axiom;
  std::string detail;
};

/// Randomized check of the declared flags: midpoint convexity, positive homogeneity,
/// normalization (measures); monotonicity, concavity, bankruptcy barrier (utilities).
/// An empty result means no counterexample was found.
std::vector<AxiomViolation> axiom_probe(const RiskMeasure& measure, int sample_count,
                                        std::uint64_t seed);
std::vector<AxiomViolation> axiom_probe(const Utility& utility, int sample_count,
                                        std::uint64_t seed);

}  // namespace tradeoff
