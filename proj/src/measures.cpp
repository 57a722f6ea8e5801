#include "tradeoff/measures.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "tradeoff/error.hpp"
#include "tradeoff/market.hpp"

namespace tradeoff {

const char* to_string(MeasureKind kind) {
  switch (kind) {
    case MeasureKind::HalfVariance: return "half_variance";
    case MeasureKind::StdDev: return "std_dev";
    case MeasureKind::AbsExposure: return "abs_exposure";
    case MeasureKind::PolytopeGauge: return "polytope_gauge";
  }
  return "unknown";
}

const char* to_string(UtilityKind kind) {
  switch (kind) {
    case UtilityKind::Identity: return "identity";
    case UtilityKind::Log: return "log";
  }
  return "unknown";
}

namespace {

void require_square(const Matrix& sigma) {
  if (sigma.rows() != sigma.cols() || sigma.rows() == 0) {
    throw Error(ErrorCode::DimensionMismatch, "covariance must be square and non-empty");
  }
}

bool positive_definite(const Matrix& sigma) {
  Eigen::LLT<Matrix> llt(sigma);
  return llt.info() == Eigen::Success;
}

}  // namespace

RiskMeasure RiskMeasure::half_variance(Matrix sigma) {
  require_square(sigma);
  RiskMeasure m;
  m.kind_ = MeasureKind::HalfVariance;
  m.dimension_ = sigma.rows();
  const bool pd = positive_definite(sigma);
  m.axioms_ = {true, pd, true, pd, false};
  m.sigma_ = std::move(sigma);
  return m;
}

RiskMeasure RiskMeasure::std_dev(Matrix sigma) {
  require_square(sigma);
  RiskMeasure m;
  m.kind_ = MeasureKind::StdDev;
  m.dimension_ = sigma.rows();
  m.axioms_ = {true, positive_definite(sigma), true, false, true};
  m.sigma_ = std::move(sigma);
  return m;
}

RiskMeasure RiskMeasure::abs_exposure(Vector weights) {
  if (weights.size() == 0) throw Error(ErrorCode::DimensionMismatch, "abs_exposure needs weights");
  if ((weights.array() < 0.0).any()) {
    throw Error(ErrorCode::ValidationError, "abs_exposure weights must be >= 0");
  }
  RiskMeasure m;
  m.kind_ = MeasureKind::AbsExposure;
  const Index n = weights.size();
  m.dimension_ = n;
  m.axioms_ = {true, (weights.array() > 0.0).all(), true, false, true};
  m.generators_.resize(n, 2 * n);
  m.generators_ << Matrix::Identity(n, n), -Matrix::Identity(n, n);
  m.generator_costs_.resize(2 * n);
  m.generator_costs_ << weights, weights;
  m.interior_weights_ = Vector::Ones(2 * n);
  m.weights_ = std::move(weights);
  return m;
}

RiskMeasure RiskMeasure::polytope_gauge(Matrix vertices) {
  if (vertices.rows() == 0 || vertices.cols() == 0) {
    throw Error(ErrorCode::DegenerateGauge, "empty vertex list");
  }
  const GaugeInteriority interiority = gauge_interiority(vertices);
  if (!interiority.interior) {
    std::ostringstream os;
    os << "origin is not interior to the vertex hull (margin " << interiority.margin << ")";
    throw Error(ErrorCode::DegenerateGauge, os.str());
  }
  RiskMeasure m;
  m.kind_ = MeasureKind::PolytopeGauge;
  m.dimension_ = vertices.cols();
  m.axioms_ = {true, true, true, false, true};
  m.generators_ = vertices.transpose();
  m.generator_costs_ = Vector::Ones(vertices.rows());
  m.interior_weights_ = interiority.weights;
  m.vertices_ = std::move(vertices);
  return m;
}

RiskMeasure RiskMeasure::with_axioms(RiskAxioms axioms) const {
  RiskMeasure copy = *this;
  copy.axioms_ = axioms;
  return copy;
}

std::string RiskMeasure::id() const { return to_string(kind_); }

GaugeInteriority gauge_interiority(const Matrix& vertices) {
  const Index k = vertices.rows();
  const Index dim = vertices.cols();
  GaugeInteriority out;
  if (numerical_rank(vertices) < dim) return out;

  // Variables: l (k), s (free).
  LinearProgram lp = LinearProgram::with_variables(k + 1, 0.0, kInf);
  lp.lower(k) = -kInf;
  lp.objective(k) = 1.0;
  lp.maximize = true;
  for (Index d = 0; d < dim; ++d) {
    Vector row = Vector::Zero(k + 1);
    row.head(k) = vertices.col(d);
    lp.add_row(row, RowSense::Equal, 0.0);
  }
  Vector sum_row = Vector::Zero(k + 1);
  sum_row.head(k).setOnes();
  lp.add_row(sum_row, RowSense::Equal, 1.0);
  for (Index v = 0; v < k; ++v) {
    Vector row = Vector::Zero(k + 1);
    row(v) = 1.0;
    row(k) = -1.0;
    lp.add_row(row, RowSense::GreaterEqual, 0.0);
  }
  const LpResult res = solve_lp(lp);
  if (res.status != LpStatus::Optimal) return out;
  out.margin = res.objective;
  out.weights = res.x.head(k);
  out.interior = out.margin > 1e-9;
  return out;
}

namespace {

LpResult gauge_lp(const Matrix& vertices, const Vector& x_hat) {
  const Index k = vertices.rows();
  LinearProgram lp = LinearProgram::with_variables(k, 0.0, kInf);
  lp.objective.setOnes();
  for (Index d = 0; d < vertices.cols(); ++d) {
    lp.add_row(vertices.col(d), RowSense::Equal, x_hat(d));
  }
  LpResult res = solve_lp(lp);
  if (res.status != LpStatus::Optimal) {
    throw Error(ErrorCode::SolverFailure, std::string("gauge LP returned ") + to_string(res.status));
  }
  return res;
}

}  // namespace

double gauge_evaluate(const Matrix& vertices, const Vector& x_hat) {
  if (x_hat.size() != vertices.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "gauge point dimension");
  }
  if (x_hat.isZero(0.0)) return 0.0;
  return std::max(gauge_lp(vertices, x_hat).objective, 0.0);
}

double eval_risk(const RiskMeasure& measure, const Vector& x_hat) {
  if (x_hat.size() != measure.dimension()) {
    throw Error(ErrorCode::DimensionMismatch, "risk measure expects dimension " +
                                                  std::to_string(measure.dimension()) + ", got " +
                                                  std::to_string(x_hat.size()));
  }
  switch (measure.kind()) {
    case MeasureKind::HalfVariance:
      return std::max(0.5 * x_hat.dot(measure.sigma() * x_hat), 0.0);
    case MeasureKind::StdDev:
      return std::sqrt(std::max(x_hat.dot(measure.sigma() * x_hat), 0.0));
    case MeasureKind::AbsExposure:
      return measure.weights().dot(x_hat.cwiseAbs());
    case MeasureKind::PolytopeGauge:
      return gauge_evaluate(measure.vertices(), x_hat);
  }
  return 0.0;
}

Vector risk_gradient(const RiskMeasure& measure, const Vector& x_hat) {
  switch (measure.kind()) {
    case MeasureKind::HalfVariance:
      return measure.sigma() * x_hat;
    case MeasureKind::StdDev: {
      const double s = eval_risk(measure, x_hat);
      if (s <= 0.0) throw Error(ErrorCode::NonSmoothPoint, "std_dev at zero risk");
      return measure.sigma() * x_hat / s;
    }
    default:
      throw Error(ErrorCode::NonSmoothPoint, "polyhedral measure has no gradient");
  }
}

Vector polyhedral_representation(const RiskMeasure& measure, const Vector& x_hat) {
  switch (measure.kind()) {
    case MeasureKind::AbsExposure: {
      Vector y(2 * x_hat.size());
      y << x_hat.cwiseMax(0.0), (-x_hat).cwiseMax(0.0);
      return y;
    }
    case MeasureKind::PolytopeGauge:
      if (x_hat.isZero(0.0)) return Vector::Zero(measure.vertices().rows());
      return gauge_lp(measure.vertices(), x_hat).x.cwiseMax(0.0);
    default:
      throw Error(ErrorCode::ValidationError, "measure is not polyhedral");
  }
}

// ---------------------------------------------------------------------------

Utility::Utility(UtilityKind kind) : kind_(kind) {
  if (kind == UtilityKind::Identity) {
    axioms_ = {true, true, false, false, true};
  } else {
    axioms_ = {true, true, true, true, true};
  }
}

Utility Utility::identity() { return Utility(UtilityKind::Identity); }
Utility Utility::log() { return Utility(UtilityKind::Log); }

Utility Utility::with_axioms(UtilityAxioms axioms) const {
  Utility copy = *this;
  copy.axioms_ = axioms;
  return copy;
}

double Utility::value(double t) const {
  if (kind_ == UtilityKind::Identity) return t;
  return t > 0.0 ? std::log(t) : -kInf;
}

double Utility::derivative(double t) const {
  if (kind_ == UtilityKind::Identity) return 1.0;
  return t > 0.0 ? 1.0 / t : kInf;
}

double Utility::second_derivative(double t) const {
  if (kind_ == UtilityKind::Identity) return 0.0;
  return t > 0.0 ? -1.0 / (t * t) : -kInf;
}

double eval_utility(const Utility& utility, double t) { return utility.value(t); }

double expected_utility(const Utility& utility, const Vector& probabilities, const Vector& payoffs) {
  // A riskless payoff has E[u] = u(c) exactly; summing p_i u(c) would only add rounding.
  if (payoffs.size() > 0 && (payoffs.array() == payoffs(0)).all()) return utility.value(payoffs(0));
  double total = 0.0;
  for (Index i = 0; i < payoffs.size(); ++i) {
    const double v = utility.value(payoffs(i));
    if (v == -kInf) return -kInf;
    total += probabilities(i) * v;
  }
  return total;
}

// ---------------------------------------------------------------------------

namespace {

std::string describe(const Vector& x) {
  std::ostringstream os;
  os.precision(6);
  os << "(";
  for (Index i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x(i);
  os << ")";
  return os.str();
}

}  // namespace

std::vector<AxiomViolation> axiom_probe(const RiskMeasure& measure, int sample_count,
                                        std::uint64_t seed) {
  if (sample_count < 1) throw Error(ErrorCode::ValidationError, "sample_count must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(-2.0, 2.0);
  std::uniform_real_distribution<double> scale(0.1, 5.0);
  const Index dim = measure.dimension();
  const RiskAxioms& ax = measure.axioms();
  const auto draw = [&] {
    Vector x(dim);
    for (Index i = 0; i < dim; ++i) x(i) = coord(rng);
    return x;
  };

  std::vector<AxiomViolation> found;
  const auto report = [&](const char* axiom, std::string detail) {
    for (const auto& v : found) {
      if (v.axiom == axiom) return;  // one counterexample per axiom is enough
    }
    found.push_back({axiom, std::move(detail)});
  };

  if (ax.r1n && std::abs(eval_risk(measure, Vector::Zero(dim))) > 1e-12) {
    report("r1n", "risk of the pure bond is nonzero");
  }
  for (int s = 0; s < sample_count; ++s) {
    const Vector a = draw();
    const Vector b = (s % 2 == 0) ? draw() : Vector(scale(rng) * a);
    const double ra = eval_risk(measure, a);
    const double rb = eval_risk(measure, b);
    const double rm = eval_risk(measure, 0.5 * (a + b));
    const double avg = 0.5 * (ra + rb);
    if (ra < 0.0) report("nonnegativity", "negative risk at " + describe(a));
    if (ax.r1n && !(ra > 0.0) && a.norm() > 0.0) report("r1n", "zero risk at risky portfolio " + describe(a));
    if (ax.r2 && rm > avg + 1e-10 * (1.0 + avg)) {
      report("r2", "midpoint above chord between " + describe(a) + " and " + describe(b));
    }
    if (ax.r2s && !(rm < avg - 1e-12 * (1.0 + avg))) {
      report("r2s", "midpoint not strictly below chord between " + describe(a) + " and " + describe(b));
    }
    if (ax.r3) {
      const double t = scale(rng);
      const double rt = eval_risk(measure, t * a);
      if (std::abs(rt - t * ra) > 1e-10 * (1.0 + std::abs(t * ra))) {
        std::ostringstream os;
        os << "r(" << t << " x) = " << rt << " but " << t << " r(x) = " << t * ra << " at x = " << describe(a);
        report("r3", os.str());
      }
    }
  }
  return found;
}

std::vector<AxiomViolation> axiom_probe(const Utility& utility, int sample_count, std::uint64_t seed) {
  if (sample_count < 1) throw Error(ErrorCode::ValidationError, "sample_count must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> domain(1e-6, 10.0);
  std::uniform_real_distribution<double> negative(-10.0, -1e-9);
  const UtilityAxioms& ax = utility.axioms();
  std::vector<AxiomViolation> found;
  const auto report = [&](const char* axiom, std::string detail) {
    for (const auto& v : found) {
      if (v.axiom == axiom) return;
    }
    found.push_back({axiom, std::move(detail)});
  };

  for (int s = 0; s < sample_count; ++s) {
    double a = domain(rng);
    double b = domain(rng);
    if (a > b) std::swap(a, b);
    const double ua = utility.value(a);
    const double ub = utility.value(b);
    const double um = utility.value(0.5 * (a + b));
    const double avg = 0.5 * (ua + ub);
    std::ostringstream pair;
    pair << "t1 = " << a << ", t2 = " << b;
    if (ax.u1 && ua > ub) report("u1", "decrease between " + pair.str());
    if (ax.u2 && um < avg - 1e-12 * (1.0 + std::abs(avg))) report("u2", "midpoint below chord, " + pair.str());
    if (ax.u2s && b - a > 1e-6 && !(um > avg + 1e-14 * (1.0 + std::abs(avg)))) {
      report("u2s", "midpoint not strictly above chord, " + pair.str());
    }
    if (ax.u3) {
      const double t = negative(rng);
      if (utility.value(t) != -kInf) {
        std::ostringstream os;
        os << "u(" << t << ") is finite";
        report("u3", os.str());
      }
    }
  }
  if (ax.u4) {
    double previous = utility.value(1.0);
    for (double t = 1e3; t <= 1e300; t *= 1e3) {
      const double v = utility.value(t);
      if (!(v > previous)) {
        report("u4", "utility stops growing");
        break;
      }
      previous = v;
    }
    if (previous < 100.0) report("u4", "utility bounded on the probe range");
  }
  return found;
}

}  // namespace tradeoff
