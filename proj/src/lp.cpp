#include "tradeoff/lp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tradeoff/error.hpp"

namespace tradeoff {

LinearProgram LinearProgram::with_variables(Index n, double lo, double hi) {
  LinearProgram lp;
  lp.objective = Vector::Zero(n);
  lp.constraints = Matrix::Zero(0, n);
  lp.rhs = Vector::Zero(0);
  lp.lower = Vector::Constant(n, lo);
  lp.upper = Vector::Constant(n, hi);
  return lp;
}

void LinearProgram::add_row(const Vector& coefficients, RowSense sense, double value) {
  if (coefficients.size() != variables()) {
    throw Error(ErrorCode::DimensionMismatch, "LP row has wrong length");
  }
  const Index r = constraints.rows();
  constraints.conservativeResize(r + 1, variables());
  constraints.row(r) = coefficients.transpose();
  rhs.conservativeResize(r + 1);
  rhs(r) = value;
  senses.push_back(sense);
}

const char* to_string(LpStatus status) {
  switch (status) {
    case LpStatus::Optimal: return "Optimal";
    case LpStatus::Infeasible: return "Infeasible";
    case LpStatus::Unbounded: return "Unbounded";
  }
  return "Unknown";
}

namespace {

// Column of the standard form: contributes `sign * value` to original variable `var`.
struct StdColumn {
  Index var;
  double sign;
};

struct StandardForm {
  Matrix a;
  Vector b;
  Vector c;
  std::vector<StdColumn> columns;  // structural columns only; slacks follow
  Index structural = 0;
  Vector offset;                   // x = offset + sum(sign * column value)
  std::vector<double> row_sign;    // +1 / -1 applied to make b >= 0
  Index original_rows = 0;
};

StandardForm to_standard_form(const LinearProgram& lp) {
  const Index n = lp.variables();
  const Index m = lp.rows();
  Vector lower = lp.lower.size() == n ? lp.lower : Vector::Zero(n);
  Vector upper = lp.upper.size() == n ? lp.upper : Vector::Constant(n, kInf);

  StandardForm sf;
  sf.offset = Vector::Zero(n);
  std::vector<std::pair<Index, double>> bound_rows;  // structural column, upper limit
  for (Index j = 0; j < n; ++j) {
    if (lower(j) > upper(j)) {
      // Empty box; encode as an infeasible bound row.
      sf.offset(j) = lower(j);
      sf.columns.push_back({j, 1.0});
      bound_rows.emplace_back(static_cast<Index>(sf.columns.size()) - 1, upper(j) - lower(j));
    } else if (std::isfinite(lower(j))) {
      sf.offset(j) = lower(j);
      sf.columns.push_back({j, 1.0});
      if (std::isfinite(upper(j))) {
        bound_rows.emplace_back(static_cast<Index>(sf.columns.size()) - 1, upper(j) - lower(j));
      }
    } else if (std::isfinite(upper(j))) {
      sf.offset(j) = upper(j);
      sf.columns.push_back({j, -1.0});
    } else {
      sf.columns.push_back({j, 1.0});
      sf.columns.push_back({j, -1.0});
    }
  }
  sf.structural = static_cast<Index>(sf.columns.size());

  Index slack_count = static_cast<Index>(bound_rows.size());
  for (Index i = 0; i < m; ++i) {
    if (lp.senses[i] != RowSense::Equal) ++slack_count;
  }
  const Index rows = m + static_cast<Index>(bound_rows.size());
  const Index cols = sf.structural + slack_count;
  sf.a = Matrix::Zero(rows, cols);
  sf.b = Vector::Zero(rows);
  sf.c = Vector::Zero(cols);
  sf.original_rows = m;

  const double obj_sign = lp.maximize ? -1.0 : 1.0;
  for (Index k = 0; k < sf.structural; ++k) {
    sf.c(k) = obj_sign * lp.objective(sf.columns[k].var) * sf.columns[k].sign;
  }

  Index slack = sf.structural;
  for (Index i = 0; i < m; ++i) {
    for (Index k = 0; k < sf.structural; ++k) {
      sf.a(i, k) = lp.constraints(i, sf.columns[k].var) * sf.columns[k].sign;
    }
    sf.b(i) = lp.rhs(i) - lp.constraints.row(i).dot(sf.offset);
    if (lp.senses[i] == RowSense::LessEqual) sf.a(i, slack++) = 1.0;
    if (lp.senses[i] == RowSense::GreaterEqual) sf.a(i, slack++) = -1.0;
  }
  for (std::size_t r = 0; r < bound_rows.size(); ++r) {
    const Index i = m + static_cast<Index>(r);
    sf.a(i, bound_rows[r].first) = 1.0;
    sf.a(i, slack++) = 1.0;
    sf.b(i) = bound_rows[r].second;
  }
  sf.row_sign.assign(static_cast<std::size_t>(rows), 1.0);
  for (Index i = 0; i < rows; ++i) {
    if (sf.b(i) < 0.0) {
      sf.a.row(i) *= -1.0;
      sf.b(i) *= -1.0;
      sf.row_sign[static_cast<std::size_t>(i)] = -1.0;
    }
  }
  return sf;
}

class RevisedSimplex {
 public:
  RevisedSimplex(const Matrix& a, const Vector& b, const LpOptions& options, int max_iterations)
      : a_(a), b_(b), options_(options), max_iterations_(max_iterations) {}

  enum class Outcome { Optimal, Unbounded };

  // Runs the simplex on columns [0, usable) with the given costs starting from `basis`.
  Outcome run(const Vector& cost, Index usable, std::vector<Index>& basis) {
    const Index m = a_.rows();
    const double cost_scale = 1.0 + (cost.size() ? cost.cwiseAbs().maxCoeff() : 0.0);
    while (true) {
      if (++iterations_ > max_iterations_) {
        throw Error(ErrorCode::SolverFailure, "simplex iteration guard exceeded");
      }
      factorize(basis);
      Vector cb(m);
      for (Index i = 0; i < m; ++i) cb(i) = cost(basis[i]);
      const Vector y = lu_.transpose().solve(cb);
      const Vector xb = lu_.solve(b_);

      Index entering = -1;
      for (Index j = 0; j < usable; ++j) {
        if (std::find(basis.begin(), basis.end(), j) != basis.end()) continue;
        const double reduced = cost(j) - a_.col(j).dot(y);
        if (reduced < -options_.optimality_tolerance * cost_scale) {
          entering = j;  // Bland: lowest index
          break;
        }
      }
      if (entering < 0) return Outcome::Optimal;

      const Vector w = lu_.solve(a_.col(entering));
      // Harris two-pass ratio test: relax each bound by the feasibility tolerance, then take
      // the largest pivot among the rows that block within the relaxed step.
      const double pivot_floor = options_.pivot_tolerance * std::max(1.0, w.cwiseAbs().maxCoeff());
      const double relax = options_.feasibility_tolerance;
      double relaxed_step = kInf;
      for (Index i = 0; i < m; ++i) {
        if (w(i) > pivot_floor) relaxed_step = std::min(relaxed_step, (std::max(xb(i), 0.0) + relax) / w(i));
      }
      Index leave_row = -1;
      double best_pivot = 0.0;
      for (Index i = 0; i < m; ++i) {
        if (w(i) > pivot_floor && std::max(xb(i), 0.0) / w(i) <= relaxed_step &&
            (w(i) > best_pivot || (w(i) == best_pivot && basis[i] < basis[leave_row]))) {
          best_pivot = w(i);
          leave_row = i;
        }
      }
      if (leave_row < 0) return Outcome::Unbounded;
      basis[leave_row] = entering;
    }
  }

  void factorize(const std::vector<Index>& basis) {
    const Index m = a_.rows();
    Matrix bm(m, m);
    for (Index i = 0; i < m; ++i) bm.col(i) = a_.col(basis[i]);
    lu_.compute(bm);
  }

  const Eigen::PartialPivLU<Matrix>& lu() const { return lu_; }
  int iterations() const { return iterations_; }

 private:
  const Matrix& a_;
  const Vector& b_;
  LpOptions options_;
  int max_iterations_;
  int iterations_ = 0;
  Eigen::PartialPivLU<Matrix> lu_;
};

double primal_residual(const LinearProgram& lp, const Vector& x) {
  double worst = 0.0;
  const Index n = lp.variables();
  for (Index j = 0; j < n; ++j) {
    const double lo = lp.lower.size() == n ? lp.lower(j) : 0.0;
    const double hi = lp.upper.size() == n ? lp.upper(j) : kInf;
    worst = std::max({worst, lo - x(j), x(j) - hi});
  }
  for (Index i = 0; i < lp.rows(); ++i) {
    const double lhs = lp.constraints.row(i).dot(x);
    const double scale = 1.0 + std::abs(lp.rhs(i));
    double v = 0.0;
    switch (lp.senses[i]) {
      case RowSense::LessEqual: v = lhs - lp.rhs(i); break;
      case RowSense::GreaterEqual: v = lp.rhs(i) - lhs; break;
      case RowSense::Equal: v = std::abs(lhs - lp.rhs(i)); break;
    }
    worst = std::max(worst, v / scale);
  }
  return std::max(worst, 0.0);
}

}  // namespace

LpResult solve_lp(const LinearProgram& lp, const LpOptions& options) {
  const Index n = lp.variables();
  if (lp.constraints.cols() != n || lp.rhs.size() != lp.rows() ||
      static_cast<Index>(lp.senses.size()) != lp.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "inconsistent linear program");
  }

  StandardForm sf = to_standard_form(lp);
  Index m = sf.a.rows();
  const Index cols = sf.a.cols();
  const int max_iterations =
      options.max_iterations > 0 ? options.max_iterations : static_cast<int>(50 * (m + cols + 1));

  LpResult result;
  const auto finish_optimal = [&](const Vector& xs, const Vector& y_std,
                                  const std::vector<Index>& kept_rows) {
    Vector x = sf.offset;
    for (Index k = 0; k < sf.structural; ++k) x(sf.columns[k].var) += sf.columns[k].sign * xs(k);
    result.status = LpStatus::Optimal;
    result.x = x;
    result.objective = lp.objective.dot(x);
    result.duals = Vector::Zero(lp.rows());
    const double obj_sign = lp.maximize ? -1.0 : 1.0;
    for (std::size_t r = 0; r < kept_rows.size(); ++r) {
      const Index i = kept_rows[r];
      if (i < sf.original_rows) {
        result.duals(i) = obj_sign * sf.row_sign[static_cast<std::size_t>(i)] * y_std(static_cast<Index>(r));
      }
    }
    result.primal_residual = primal_residual(lp, x);
  };

  if (m == 0) {
    // Only sign constraints on the standard-form columns.
    for (Index j = 0; j < cols; ++j) {
      if (sf.c(j) < -options.optimality_tolerance) {
        result.status = LpStatus::Unbounded;
        return result;
      }
    }
    finish_optimal(Vector::Zero(cols), Vector::Zero(0), {});
    return result;
  }

  // Phase 1 on [A | I] with artificial costs.
  Matrix a1(m, cols + m);
  a1 << sf.a, Matrix::Identity(m, m);
  Vector c1 = Vector::Zero(cols + m);
  c1.tail(m).setOnes();
  std::vector<Index> basis(static_cast<std::size_t>(m));
  for (Index i = 0; i < m; ++i) basis[i] = cols + i;

  RevisedSimplex phase1(a1, sf.b, options, max_iterations);
  phase1.run(c1, cols + m, basis);
  phase1.factorize(basis);
  const Vector xb1 = phase1.lu().solve(sf.b);
  double infeasibility = 0.0;
  for (Index i = 0; i < m; ++i) {
    if (basis[i] >= cols) infeasibility += std::max(xb1(i), 0.0);
  }
  result.iterations = phase1.iterations();
  if (infeasibility > options.feasibility_tolerance * (1.0 + sf.b.cwiseAbs().maxCoeff())) {
    result.status = LpStatus::Infeasible;
    return result;
  }

  // Drive zero-level artificials out of the basis; drop rows that are redundant.
  std::vector<Index> kept_rows;
  for (Index i = 0; i < m; ++i) kept_rows.push_back(i);
  for (Index i = 0; i < m;) {
    if (basis[i] < cols) {
      ++i;
      continue;
    }
    phase1.factorize(basis);
    Vector row_i = Vector::Zero(m);
    row_i(i) = 1.0;
    const Vector brow = phase1.lu().transpose().solve(row_i);  // row i of B^-1
    Index replacement = -1;
    double best = 1e-9;
    for (Index j = 0; j < cols; ++j) {
      if (std::find(basis.begin(), basis.end(), j) != basis.end()) continue;
      const double v = std::abs(brow.dot(a1.col(j)));
      if (v > best) {
        best = v;
        replacement = j;
      }
    }
    if (replacement >= 0) {
      basis[i] = replacement;
      ++i;
      continue;
    }
    // Redundant row: remove it from the problem.
    Matrix reduced_a(m - 1, a1.cols());
    Vector reduced_b(m - 1);
    std::vector<Index> reduced_basis;
    std::vector<Index> reduced_kept;
    Index r = 0;
    for (Index k = 0; k < m; ++k) {
      if (k == i) continue;
      reduced_a.row(r) = a1.row(k);
      reduced_b(r) = sf.b(k);
      reduced_basis.push_back(basis[k]);
      reduced_kept.push_back(kept_rows[k]);
      ++r;
    }
    a1 = reduced_a;
    sf.b = reduced_b;
    basis = reduced_basis;
    kept_rows = reduced_kept;
    m -= 1;
    if (m == 0) break;
  }

  Matrix a2 = a1.leftCols(cols);
  if (m == 0) {
    for (Index j = 0; j < cols; ++j) {
      if (sf.c(j) < -options.optimality_tolerance) {
        result.status = LpStatus::Unbounded;
        return result;
      }
    }
    finish_optimal(Vector::Zero(cols), Vector::Zero(0), kept_rows);
    return result;
  }

  RevisedSimplex phase2(a2, sf.b, options, max_iterations);
  const auto outcome = phase2.run(sf.c, cols, basis);
  result.iterations += phase2.iterations();
  if (outcome == RevisedSimplex::Outcome::Unbounded) {
    result.status = LpStatus::Unbounded;
    return result;
  }

  phase2.factorize(basis);
  Vector xb = phase2.lu().solve(sf.b);
  Vector cb(m);
  for (Index i = 0; i < m; ++i) cb(i) = sf.c(basis[i]);
  const Vector y = phase2.lu().transpose().solve(cb);
  Vector xs = Vector::Zero(cols);
  for (Index i = 0; i < m; ++i) xs(basis[i]) = std::max(xb(i), 0.0);

  finish_optimal(xs, y, kept_rows);
  if (result.primal_residual > 1e-6) {
    throw Error(ErrorCode::SolverFailure,
                "simplex lost feasibility (residual " + std::to_string(result.primal_residual) + ")");
  }
  const double primal_obj = sf.c.dot(xs);
  const double dual_obj = sf.b.dot(y);
  result.duality_gap = std::abs(primal_obj - dual_obj) / (1.0 + std::abs(primal_obj));
  return result;
}

}  // namespace tradeoff
