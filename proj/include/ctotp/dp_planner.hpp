#pragma once

// Minimum-time phase-plane planning by dynamic programming over a
// rectangular (lambda, lambda_dot) grid.
//
// Transitions connect adjacent columns. Moving from (l_i, ld_i) to
// (l_i + dl, ld_next) implies the constant pseudo-acceleration
// (ld_next^2 - ld_i^2) / (2 dl), which must lie in [L, U] evaluated at the
// source state, and costs dt = 2 dl / (ld_i + ld_next).

#include "ctotp/limits.hpp"
#include "ctotp/projected_dynamics.hpp"
#include "ctotp/types.hpp"
#include "ctotp/wrench_constraints.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

namespace ctotp {

struct PhaseGrid {
  std::size_t n_lambda = 500;
  std::size_t n_lambdadot = 5000;
  double lambda_end = 1.0;  // path length
  double lambdadot_max = 1.0;

  void validate() const {
    if (n_lambda < 1) throw ConfigError("grid needs at least one lambda column");
    if (n_lambdadot < 2) throw ConfigError("grid needs at least two lambda_dot rows");
    if (!(lambdadot_max > 0.0)) throw ConfigError("lambda_dot upper bound must be > 0");
    if (!(lambda_end >= 0.0)) throw ConfigError("path length must be >= 0");
  }

  bool degenerate() const { return n_lambda == 1 || lambda_end == 0.0; }

  double dlambda() const {
    return n_lambda > 1 ? lambda_end / static_cast<double>(n_lambda - 1) : 0.0;
  }
  double dlambdadot() const {
    return lambdadot_max / static_cast<double>(n_lambdadot - 1);
  }
  double lambda_at(std::size_t i) const {
    return i + 1 == n_lambda ? lambda_end : static_cast<double>(i) * dlambda();
  }
  double lambdadot_at(std::size_t r) const {
    return static_cast<double>(r) * dlambdadot();
  }

  std::vector<double> columns() const {
    std::vector<double> out(n_lambda);
    for (std::size_t i = 0; i < n_lambda; ++i) out[i] = lambda_at(i);
    return out;
  }
};

struct PhasePlaneTrajectory {
  std::vector<double> lambda;
  std::vector<double> lambdadot;
  /// Pseudo-acceleration of the transition leaving each node; 0 at the goal.
  std::vector<double> lambdaddot;
  std::vector<double> time;
  std::vector<std::size_t> rows;

  std::size_t size() const { return lambda.size(); }
  double total_time() const { return time.empty() ? 0.0 : time.back(); }
};

/// Time to traverse dl with pseudo-velocity going linearly from ld_i to
/// ld_next in time.
inline double transition_cost(double ld_i, double ld_next, double dl) {
  const double sum = ld_i + ld_next;
  if (!(sum > 0.0)) {
    throw ConfigError("transition with zero pseudo-velocity at both ends");
  }
  return 2.0 * dl / sum;
}

/// Closed-interval test of the implied pseudo-acceleration against the
/// bounds at the source state, plus the velocity ceiling at the target.
inline bool reachable(double ld_i, double ld_next, double dl,
                      const AccelBounds& bounds, double ld_max_next) {
  if (!bounds.feasible()) return false;
  if (ld_next > ld_max_next) return false;
  const double ldd = (ld_next * ld_next - ld_i * ld_i) / (2.0 * dl);
  return bounds.lower <= ldd && ldd <= bounds.upper;
}

/// Per-column coefficients, effective torque limits and velocity ceilings on
/// the grid columns, stored contiguously for the solver's inner loop.
class PlanningProblem {
 public:
  PlanningProblem(const ProjectedDynamics& projected,
                  const ModifiedTorqueLimits& limits,
                  const std::vector<VelocityLimit>& velocity)
      : dof_(static_cast<std::size_t>(projected.dof())),
        lambda_(projected.lambda()) {
    const std::size_t n = projected.size();
    if (limits.lambda != projected.lambda() || velocity.size() != n) {
      throw DimensionError("planning inputs must share one lambda grid");
    }
    limits.throw_if_infeasible();
    auto pack = [&](const MatrixXd& m, std::vector<double>& out) {
      out.resize(n * dof_);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < dof_; ++j)
          out[i * dof_ + j] = m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    };
    pack(projected.a(), a_);
    pack(projected.b(), b_);
    pack(projected.c(), c_);
    pack(projected.g(), g_);
    pack(limits.lower, lower_);
    pack(limits.upper, upper_);
    for (const auto& v : velocity) ld_max_.push_back(v.value);
  }

  std::size_t columns() const { return lambda_.size(); }
  std::size_t dof() const { return dof_; }
  const std::vector<double>& lambda() const { return lambda_; }
  double lambdadot_max(std::size_t i) const { return ld_max_[i]; }

  NodeView node(std::size_t i) const {
    const std::size_t o = i * dof_;
    return {{a_.data() + o, dof_},     {b_.data() + o, dof_},
            {c_.data() + o, dof_},     {g_.data() + o, dof_},
            {lower_.data() + o, dof_}, {upper_.data() + o, dof_}};
  }

 private:
  std::size_t dof_;
  std::vector<double> lambda_;
  std::vector<double> a_, b_, c_, g_, lower_, upper_;
  std::vector<double> ld_max_;
};

/// Transition rules shared by the DP solver and the exhaustive search.
class TransitionRules {
 public:
  TransitionRules(const PlanningProblem& problem, const PhaseGrid& grid)
      : problem_(problem), grid_(grid) {
    grid.validate();
    if (problem.columns() != grid.n_lambda) {
      throw DimensionError("planning problem has " +
                           std::to_string(problem.columns()) +
                           " columns, grid has " + std::to_string(grid.n_lambda));
    }
    const auto cols = grid.columns();
    for (std::size_t i = 0; i < cols.size(); ++i) {
      if (std::abs(cols[i] - problem.lambda()[i]) >
          1e-12 * std::max(1.0, grid.lambda_end)) {
        throw DimensionError("planning problem columns do not match the grid");
      }
    }
  }

  const PhaseGrid& grid() const { return grid_; }

  AccelBounds bounds(std::size_t column, std::size_t row) const {
    return accel_bounds(problem_.node(column), grid_.lambdadot_at(row));
  }

  /// Rows a path may occupy in `column`: rest at both ends, strictly
  /// positive pseudo-velocity in between.
  bool row_allowed(std::size_t column, std::size_t row) const {
    const bool end = column == 0 || column + 1 == grid_.n_lambda;
    if (end) {
      if (row != 0) return false;
      if (column == 0) return true;
      // the goal state must be holdable at rest
      const AccelBounds b = bounds(column, 0);
      return b.feasible() && b.lower <= 0.0 && 0.0 <= b.upper;
    }
    return row != 0;
  }

  /// Transition from (column, row) with precomputed source bounds.
  bool valid(std::size_t column, std::size_t row, const AccelBounds& source,
             std::size_t next_row) const {
    if (!row_allowed(column + 1, next_row)) return false;
    if (row == 0 && next_row == 0) return false;
    return reachable(grid_.lambdadot_at(row), grid_.lambdadot_at(next_row),
                     grid_.dlambda(), source, problem_.lambdadot_max(column + 1));
  }

  double cost(std::size_t row, std::size_t next_row) const {
    return transition_cost(grid_.lambdadot_at(row), grid_.lambdadot_at(next_row),
                           grid_.dlambda());
  }

 private:
  const PlanningProblem& problem_;
  PhaseGrid grid_;
};

namespace detail {

inline PhasePlaneTrajectory degenerate_trajectory() {
  return {{0.0}, {0.0}, {0.0}, {0.0}, {0}};
}

inline PhasePlaneTrajectory assemble(const TransitionRules& rules,
                                     const std::vector<std::size_t>& rows) {
  const PhaseGrid& grid = rules.grid();
  PhasePlaneTrajectory ppt;
  double t = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double ld = grid.lambdadot_at(rows[i]);
    ppt.lambda.push_back(grid.lambda_at(i));
    ppt.lambdadot.push_back(ld);
    ppt.rows.push_back(rows[i]);
    ppt.time.push_back(t);
    if (i + 1 < rows.size()) {
      const double next = grid.lambdadot_at(rows[i + 1]);
      ppt.lambdaddot.push_back((next * next - ld * ld) / (2.0 * grid.dlambda()));
      t += rules.cost(rows[i], rows[i + 1]);
    } else {
      ppt.lambdaddot.push_back(0.0);
    }
  }
  return ppt;
}

}  // namespace detail

struct DpSolution {
  PhasePlaneTrajectory trajectory;
  /// Highest pseudo-velocity reachable from the start in each column.
  std::vector<double> max_reachable_lambdadot;
};

inline DpSolution solve_dp(const PlanningProblem& problem, const PhaseGrid& grid) {
  const TransitionRules rules(problem, grid);
  if (grid.degenerate()) return {detail::degenerate_trajectory(), {0.0}};

  const std::size_t cols = grid.n_lambda, rows = grid.n_lambdadot;
  const double dl = grid.dlambda(), dld = grid.dlambdadot();
  constexpr double kUnreached = std::numeric_limits<double>::infinity();
  constexpr std::int32_t kNoPred = -1;

  std::vector<double> value(rows, kUnreached), next(rows, kUnreached);
  std::vector<std::int32_t> pred(cols * rows, kNoPred);
  std::vector<double> max_ld(cols, 0.0);
  value[0] = 0.0;

  for (std::size_t i = 0; i + 1 < cols; ++i) {
    std::fill(next.begin(), next.end(), kUnreached);
    std::int32_t* pred_next = pred.data() + (i + 1) * rows;
    for (std::size_t r = 0; r < rows; ++r) {
      if (value[r] == kUnreached) continue;
      const AccelBounds b = rules.bounds(i, r);
      if (!b.feasible()) continue;
      // Candidate rows from ld_next^2 in [ld^2 + 2 dl L, ld^2 + 2 dl U],
      // widened by one row and re-checked exactly below.
      const double ld = grid.lambdadot_at(r);
      const double lo2 = ld * ld + 2.0 * dl * b.lower;
      const double hi2 = ld * ld + 2.0 * dl * b.upper;
      if (hi2 < 0.0) continue;
      const double lo_row = std::sqrt(std::max(lo2, 0.0)) / dld;
      const double hi_row = std::sqrt(hi2) / dld;
      const std::size_t first =
          lo_row > 1.0 ? static_cast<std::size_t>(std::floor(lo_row)) - 1 : 0;
      const std::size_t last = std::min(
          rows - 1,
          hi_row + 1.0 < static_cast<double>(rows) ? static_cast<std::size_t>(hi_row) + 1
                                                   : rows - 1);
      for (std::size_t r2 = first; r2 <= last; ++r2) {
        if (!rules.valid(i, r, b, r2)) continue;
        const double v = value[r] + rules.cost(r, r2);
        // ascending r with <= keeps the faster predecessor on ties
        if (v <= next[r2]) {
          next[r2] = v;
          pred_next[r2] = static_cast<std::int32_t>(r);
        }
      }
    }
    bool any = false;
    for (std::size_t r2 = 0; r2 < rows; ++r2) {
      if (next[r2] != kUnreached) {
        any = true;
        max_ld[i + 1] = grid.lambdadot_at(r2);
      }
    }
    if (!any) throw InfeasiblePlanError(i + 1, grid.lambda_at(i + 1));
    value.swap(next);
  }

  if (value[0] == kUnreached) {
    throw InfeasiblePlanError(cols - 1, grid.lambda_at(cols - 1));
  }
  std::vector<std::size_t> path(cols, 0);
  for (std::size_t i = cols - 1; i > 0; --i) {
    const std::int32_t p = pred[i * rows + path[i]];
    path[i - 1] = static_cast<std::size_t>(p);
  }
  return {detail::assemble(rules, path), std::move(max_ld)};
}

inline PhasePlaneTrajectory plan(const PlanningProblem& problem,
                                 const PhaseGrid& grid) {
  return solve_dp(problem, grid).trajectory;
}

inline PhasePlaneTrajectory plan(const ProjectedDynamics& projected,
                                 const ModifiedTorqueLimits& limits,
                                 const std::vector<VelocityLimit>& velocity,
                                 const PhaseGrid& grid) {
  return plan(PlanningProblem(projected, limits, velocity), grid);
}

/// Exhaustive search over every sequence of rows, one per column. Test
/// oracle for the DP solver; limited to 12 x 12 grids.
inline PhasePlaneTrajectory brute_force_plan(const PlanningProblem& problem,
                                             const PhaseGrid& grid) {
  if (grid.n_lambda > 12 || grid.n_lambdadot > 12) {
    throw ConfigError("grid too large for exhaustive search (max 12 x 12)");
  }
  const TransitionRules rules(problem, grid);
  if (grid.degenerate()) return detail::degenerate_trajectory();

  const std::size_t cols = grid.n_lambda, rows = grid.n_lambdadot;
  std::vector<std::size_t> current(cols, 0), best;
  double best_cost = std::numeric_limits<double>::infinity();
  std::size_t deepest = 0;

  auto search = [&](auto&& self, std::size_t i, double cost) -> void {
    deepest = std::max(deepest, i);
    if (i + 1 == cols) {
      if (cost < best_cost) {
        best_cost = cost;
        best = current;
      }
      return;
    }
    const std::size_t r = current[i];
    const AccelBounds b = rules.bounds(i, r);
    for (std::size_t r2 = 0; r2 < rows; ++r2) {
      if (!rules.valid(i, r, b, r2)) continue;
      current[i + 1] = r2;
      self(self, i + 1, cost + rules.cost(r, r2));
    }
  };
  search(search, 0, 0.0);

  if (best.empty()) {
    throw InfeasiblePlanError(deepest + 1, grid.lambda_at(deepest + 1));
  }
  return detail::assemble(rules, best);
}

inline PhasePlaneTrajectory brute_force_plan(
    const ProjectedDynamics& projected, const ModifiedTorqueLimits& limits,
    const std::vector<VelocityLimit>& velocity, const PhaseGrid& grid) {
  return brute_force_plan(PlanningProblem(projected, limits, velocity), grid);
}

/// Velocity ceilings on the columns of `projected` from the path tangent.
inline std::vector<VelocityLimit> velocity_limits(const PathSpec& path,
                                                  const std::vector<double>& lambdas,
                                                  const VectorXd& qd_lower,
                                                  const VectorXd& qd_upper) {
  std::vector<VelocityLimit> out;
  out.reserve(lambdas.size());
  for (double l : lambdas) {
    out.push_back(velocity_limit(path.eval(l).dq, qd_lower, qd_upper));
  }
  return out;
}

}  // namespace ctotp
