#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include "detail.hpp"
#include "tradeoff/error.hpp"

namespace tradeoff::detail {

ReducedProblem reduce(const Market& market, AdmissibleSet admissible) {
  ReducedProblem p;
  p.probabilities = market.probabilities();
  p.bond_return = market.bond_return();
  p.admissible = admissible;
  if (admissible == AdmissibleSet::UnitCost) {
    p.offset = Vector::Constant(market.states(), market.bond_return());
    p.loading = excess_matrix(market);
    p.eq_rows.resize(0, market.assets());
    p.eq_rhs.resize(0);
  } else {
    p.offset = Vector::Zero(market.states());
    p.loading = market.payoffs();
    p.eq_rows = market.prices().transpose();
    p.eq_rhs = Vector::Ones(1);
  }
  return p;
}

Vector newton_direction(const Matrix& hess, const Vector& grad, const Matrix& eq_rows) {
  const Index n = grad.size();
  const double scale = 1.0 + (n ? hess.cwiseAbs().maxCoeff() : 0.0);
  double shift = 0.0;
  for (int attempt = 0; attempt < 40; ++attempt) {
    const Matrix h = hess + shift * Matrix::Identity(n, n);
    Vector dx;
    if (eq_rows.rows() == 0) {
      Eigen::LLT<Matrix> llt(h);
      if (llt.info() == Eigen::Success) dx = llt.solve(-grad);
    } else {
      const Index m = eq_rows.rows();
      Matrix kkt = Matrix::Zero(n + m, n + m);
      kkt.topLeftCorner(n, n) = h;
      kkt.topRightCorner(n, m) = eq_rows.transpose();
      kkt.bottomLeftCorner(m, n) = eq_rows;
      Vector rhs = Vector::Zero(n + m);
      rhs.head(n) = -grad;
      Eigen::FullPivLU<Matrix> lu(kkt);
      if (lu.isInvertible()) dx = lu.solve(rhs).head(n);
    }
    if (dx.size() == n && dx.allFinite() && grad.dot(dx) <= 0.0) return dx;
    shift = shift == 0.0 ? 1e-14 * scale : shift * 10.0;
  }
  throw Error(ErrorCode::SolverFailure, "Newton system could not be factorized");
}

NewtonResult newton_minimize(const Objective& objective, Vector x, const Matrix& eq_rows,
                             const NewtonOptions& options) {
  NewtonResult out;
  double f = 0.0;
  Vector g;
  Matrix h;
  if (!objective(x, f, &g, &h)) {
    throw Error(ErrorCode::SolverFailure, "Newton start point outside the domain");
  }
  int quadratic_steps = 0;
  for (int it = 0; it < options.max_iterations; ++it) {
    out.iterations = it + 1;
    const Vector dx = newton_direction(h, g, eq_rows);
    const double dec2 = std::max(-g.dot(dx), 0.0);
    out.decrement = std::sqrt(dec2);
    if (dec2 <= 1e-26 || quadratic_steps >= 8) {
      out.converged = true;
      break;
    }
    const bool damped = out.decrement > 0.25;
    if (!damped) ++quadratic_steps;
    double step = 1.0;
    double f_new = 0.0;
    Vector x_new;
    bool accepted = false;
    while (step > 1e-30) {
      x_new = x + step * dx;
      if (objective(x_new, f_new, nullptr, nullptr) && std::isfinite(f_new) &&
          (!damped || f_new <= f - 0.25 * step * dec2)) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      out.converged = dec2 <= 1e-14 * (1.0 + std::abs(f));
      break;
    }
    out.max_step = std::max(out.max_step, step * dx.norm());
    x = std::move(x_new);
    if (!objective(x, f, &g, &h)) {
      throw Error(ErrorCode::SolverFailure, "Newton iterate left the domain");
    }
    if (x.norm() > options.divergence_norm || f < options.divergence_value) {
      out.x = x;
      out.f = f;
      out.converged = false;
      return out;
    }
  }
  out.x = std::move(x);
  out.f = f;
  return out;
}

bool utility_terms(const ReducedProblem& problem, const Utility& utility, const Vector& x, double& value,
                   Vector* grad, Matrix* hess) {
  const Vector payoff = problem.offset + problem.loading * x;
  const Vector& p = problem.probabilities;
  if (utility.kind() == UtilityKind::Identity) {
    value = p.dot(payoff);
    if (grad) *grad = problem.loading.transpose() * p;
    if (hess) *hess = Matrix::Zero(x.size(), x.size());
    return true;
  }
  if ((payoff.array() <= 0.0).any()) {
    value = -kInf;
    return false;
  }
  value = p.dot(payoff.array().log().matrix());
  if (grad) *grad = problem.loading.transpose() * (p.array() / payoff.array()).matrix();
  if (hess) {
    const Vector w = p.array() / payoff.array().square();
    *hess = -problem.loading.transpose() * w.asDiagonal() * problem.loading;
  }
  return true;
}

bool positive_payoff_point(const ReducedProblem& problem, Vector& x) {
  const Index m = problem.loading.cols();
  LinearProgram lp = LinearProgram::with_variables(m + 1, -1e3, 1e3);
  lp.upper(m) = 1.0;
  lp.objective(m) = 1.0;
  lp.maximize = true;
  for (Index i = 0; i < problem.loading.rows(); ++i) {
    Vector row(m + 1);
    row.head(m) = problem.loading.row(i).transpose();
    row(m) = -1.0;
    lp.add_row(row, RowSense::GreaterEqual, -problem.offset(i));
  }
  for (Index k = 0; k < problem.eq_rows.rows(); ++k) {
    Vector row = Vector::Zero(m + 1);
    row.head(m) = problem.eq_rows.row(k).transpose();
    lp.add_row(row, RowSense::Equal, problem.eq_rhs(k));
  }
  const LpResult res = solve_lp(lp);
  if (res.status != LpStatus::Optimal || res.objective <= 1e-12) return false;
  x = res.x.head(m);
  return true;
}

}  // namespace tradeoff::detail
