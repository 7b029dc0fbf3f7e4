#pragma once

// Bounds on the end-effector wrench along the path, and their conversion
// into path-dependent joint torque limits.
//
// For joint j the wrench torque gamma_j = J_j^T h_e ranges between
// J_j^T h_lower and J_j^T h_upper; the torque left for motion must satisfy
//
//   tau_lower_j - min(gamma_lo, gamma_hi) <= tau_j - gamma_j
//                                         <= tau_upper_j - max(gamma_lo, gamma_hi)

#include "ctotp/csv.hpp"
#include "ctotp/path.hpp"
#include "ctotp/projected_dynamics.hpp"
#include "ctotp/types.hpp"

#include <array>
#include <cmath>
#include <vector>

namespace ctotp {

/// Per-lambda lower/upper wrench bounds (6-vectors: force, moment).
class WrenchProfile {
 public:
  WrenchProfile() = default;
  WrenchProfile(std::vector<double> lambda, MatrixXd lower, MatrixXd upper)
      : lambda_(std::move(lambda)), lower_(std::move(lower)), upper_(std::move(upper)) {
    const auto n = static_cast<Eigen::Index>(lambda_.size());
    if (lower_.rows() != n || upper_.rows() != n || lower_.cols() != 6 ||
        upper_.cols() != 6) {
      throw DimensionError("wrench profile must be N x 6 on its lambda grid");
    }
    if (!lower_.allFinite() || !upper_.allFinite()) {
      throw ConfigError("wrench profile entries must be finite");
    }
  }

  static WrenchProfile zero(std::vector<double> lambda) {
    const auto n = static_cast<Eigen::Index>(lambda.size());
    return {std::move(lambda), MatrixXd::Zero(n, 6), MatrixXd::Zero(n, 6)};
  }

  /// Table layout: lambda, lo_1..lo_6, hi_1..hi_6. Requires lo <= hi.
  static WrenchProfile from_table(const csv::Table& t) {
    if (t.columns() != 13) {
      throw ConfigError("wrench profile CSV needs 13 columns (lambda, 6 lower, "
                        "6 upper), got " + std::to_string(t.columns()));
    }
    const auto n = static_cast<Eigen::Index>(t.rows.size());
    std::vector<double> lambda;
    MatrixXd lo(n, 6), hi(n, 6);
    for (Eigen::Index k = 0; k < n; ++k) {
      const auto& r = t.rows[static_cast<std::size_t>(k)];
      lambda.push_back(r[0]);
      for (Eigen::Index c = 0; c < 6; ++c) {
        lo(k, c) = r[static_cast<std::size_t>(1 + c)];
        hi(k, c) = r[static_cast<std::size_t>(7 + c)];
      }
    }
    if (lambda.size() < 1) throw ConfigError("wrench profile CSV has no rows");
    if (!detail::strictly_increasing(lambda)) {
      throw ConfigError("wrench profile lambda grid must be strictly increasing");
    }
    WrenchProfile p(std::move(lambda), std::move(lo), std::move(hi));
    if (!p.is_ordered()) {
      throw ConfigError("wrench profile has lower > upper at some node");
    }
    return p;
  }

  std::size_t size() const { return lambda_.size(); }
  const std::vector<double>& lambda() const { return lambda_; }
  const MatrixXd& lower() const { return lower_; }
  const MatrixXd& upper() const { return upper_; }

  Vector6d lower_at(std::size_t k) const {
    return lower_.row(static_cast<Eigen::Index>(k)).transpose();
  }
  Vector6d upper_at(std::size_t k) const {
    return upper_.row(static_cast<Eigen::Index>(k)).transpose();
  }

  bool is_ordered() const { return (lower_.array() <= upper_.array()).all(); }
  bool is_zero() const { return lower_.isZero(0.0) && upper_.isZero(0.0); }

  /// Bounds linearly interpolated onto `at` (clamped at the ends).
  WrenchProfile resample(const std::vector<double>& at) const {
    if (lambda_.empty()) throw ConfigError("empty wrench profile");
    const auto n = static_cast<Eigen::Index>(at.size());
    MatrixXd lo(n, 6), hi(n, 6);
    for (Eigen::Index k = 0; k < n; ++k) {
      const double x = at[static_cast<std::size_t>(k)];
      const std::size_t i = detail::bracket(lambda_, x);
      const auto ii = static_cast<Eigen::Index>(i);
      if (lambda_.size() == 1 || x <= lambda_[i]) {
        lo.row(k) = lower_.row(ii);
        hi.row(k) = upper_.row(ii);
      } else if (x >= lambda_[i + 1]) {
        lo.row(k) = lower_.row(ii + 1);
        hi.row(k) = upper_.row(ii + 1);
      } else {
        const double w = (x - lambda_[i]) / (lambda_[i + 1] - lambda_[i]);
        lo.row(k) = (1 - w) * lower_.row(ii) + w * lower_.row(ii + 1);
        hi.row(k) = (1 - w) * upper_.row(ii) + w * upper_.row(ii + 1);
      }
    }
    return {at, std::move(lo), std::move(hi)};
  }

  /// Componentwise midpoint of the bounds at node k.
  Wrench midpoint(std::size_t k) const {
    return Wrench::from_vector(0.5 * (lower_at(k) + upper_at(k)));
  }

 private:
  std::vector<double> lambda_;
  MatrixXd lower_, upper_;
};

/// Normal-force bounds, either constant or tabulated over lambda.
struct NormalForceBounds {
  std::vector<double> lambda;  // empty => constant
  std::vector<double> lower, upper;

  static NormalForceBounds constant(double lo, double hi) {
    return {{}, {lo}, {hi}};
  }

  /// Table layout: lambda, lower, upper.
  static NormalForceBounds from_table(const csv::Table& t) {
    if (t.columns() != 3) {
      throw ConfigError("normal force CSV needs 3 columns (lambda, lower, upper), got " +
                        std::to_string(t.columns()));
    }
    if (t.rows.empty()) throw ConfigError("normal force CSV has no rows");
    NormalForceBounds b{t.column(0), t.column(1), t.column(2)};
    b.validate();
    return b;
  }

  std::pair<double, double> at(double x) const {
    if (lambda.empty()) return {lower.at(0), upper.at(0)};
    const std::size_t i = detail::bracket(lambda, x);
    if (lambda.size() == 1 || x <= lambda[i]) return {lower[i], upper[i]};
    if (x >= lambda[i + 1]) return {lower[i + 1], upper[i + 1]};
    const double w = (x - lambda[i]) / (lambda[i + 1] - lambda[i]);
    return {(1 - w) * lower[i] + w * lower[i + 1],
            (1 - w) * upper[i] + w * upper[i + 1]};
  }

  void validate() const {
    if (lower.empty() || lower.size() != upper.size()) {
      throw ConfigError("normal force bounds need matching lower/upper values");
    }
    if (!lambda.empty()) {
      if (lambda.size() != lower.size()) {
        throw ConfigError("normal force table grid and value counts differ");
      }
      if (!detail::strictly_increasing(lambda)) {
        throw ConfigError("normal force table lambda must be strictly increasing");
      }
    }
    for (std::size_t i = 0; i < lower.size(); ++i) {
      if (!(0.0 <= lower[i] && lower[i] <= upper[i])) {
        throw ConfigError("normal force bounds need 0 <= lower <= upper");
      }
    }
  }
};

/// Single-direction contact: normal force along one base axis, Coulomb-type
/// tangential bounds in the plane of the other two axes.
struct ContactSpec {
  int normal_axis = 0;  // 0 = x, 1 = y, 2 = z
  NormalForceBounds normal = NormalForceBounds::constant(0.0, 0.0);
  double mu = 0.0;

  void validate() const {
    if (normal_axis < 0 || normal_axis > 2) {
      throw ConfigError("normal axis must be 0, 1 or 2");
    }
    if (!(mu >= 0.0)) throw ConfigError("friction coefficient must be >= 0");
    normal.validate();
  }
};

/// The two base axes spanning the tangential plane, in increasing order.
inline std::array<int, 2> tangential_axes(int normal_axis) {
  switch (normal_axis) {
    case 0: return {1, 2};
    case 1: return {0, 2};
    default: return {0, 1};
  }
}

/// Unit direction of end-effector motion in the tangential plane at each
/// requested lambda, from the translational Jacobian and q'. Zero where the
/// end-effector does not move in that plane.
inline std::vector<Eigen::Vector2d> motion_tangents(
    const ProjectedDynamics& projected, const PathSpec& path, int normal_axis) {
  const auto axes = tangential_axes(normal_axis);
  std::vector<Eigen::Vector2d> out;
  out.reserve(projected.size());
  for (std::size_t k = 0; k < projected.size(); ++k) {
    const VectorXd dq = path.eval(projected.lambda()[k]).dq;
    const Vector3d v = projected.J()[k].topRows<3>() * dq;
    Eigen::Vector2d t(v(axes[0]), v(axes[1]));
    const double norm = t.norm();
    out.push_back(norm > 1e-12 ? Eigen::Vector2d(t / norm) : Eigen::Vector2d::Zero());
  }
  return out;
}

/// Wrench bounds for a single-direction contact. Tangential components are
/// mu * f_N * t_i paired lower-with-lower and upper-with-upper, so a negative
/// t_i yields lower > upper in that component; the torque-limit
/// conversion resolves the ordering.
inline WrenchProfile contact_wrench_bounds(
    const ContactSpec& spec, const std::vector<double>& lambda,
    const std::vector<Eigen::Vector2d>& tangents) {
  spec.validate();
  if (tangents.size() != lambda.size()) {
    throw DimensionError("one tangent direction per lambda node is required");
  }
  const auto axes = tangential_axes(spec.normal_axis);
  const auto n = static_cast<Eigen::Index>(lambda.size());
  MatrixXd lo = MatrixXd::Zero(n, 6), hi = MatrixXd::Zero(n, 6);
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto kk = static_cast<std::size_t>(k);
    const auto [f_lo, f_hi] = spec.normal.at(lambda[kk]);
    lo(k, spec.normal_axis) = f_lo;
    hi(k, spec.normal_axis) = f_hi;
    if (spec.mu == 0.0) continue;
    const Eigen::Vector2d& t = tangents[kk];
    const double norm = t.norm();
    if (norm == 0.0) {
      if (f_hi == 0.0) continue;
      throw ConfigError("zero-length tangent direction at lambda=" +
                        std::to_string(lambda[kk]) + " with nonzero friction");
    }
    if (std::abs(norm - 1.0) > 1e-9) {
      throw ConfigError("tangent direction at lambda=" +
                        std::to_string(lambda[kk]) + " is not a unit vector");
    }
    for (int i = 0; i < 2; ++i) {
      lo(k, axes[static_cast<std::size_t>(i)]) = spec.mu * f_lo * t(i);
      hi(k, axes[static_cast<std::size_t>(i)]) = spec.mu * f_hi * t(i);
    }
  }
  return {lambda, std::move(lo), std::move(hi)};
}

enum class GammaMode {
  /// gamma bounds are J_j^T h_lower and J_j^T h_upper.
  kLiteral,
  /// Extremes of J_j^T h over the whole box h_lower <= h <= h_upper.
  kBoxCorner,
};

struct GammaRange {
  double lower = 0.0;  // from the lower wrench bound; may exceed `upper`
  double upper = 0.0;
};

inline GammaRange gamma_bounds(const Vector6d& jacobian_column,
                               const Vector6d& h_lower, const Vector6d& h_upper,
                               GammaMode mode = GammaMode::kLiteral) {
  if (mode == GammaMode::kLiteral) {
    return {jacobian_column.dot(h_lower), jacobian_column.dot(h_upper)};
  }
  const Vector6d a = jacobian_column.cwiseProduct(h_lower);
  const Vector6d b = jacobian_column.cwiseProduct(h_upper);
  return {a.cwiseMin(b).sum(), a.cwiseMax(b).sum()};
}

/// Torque limits shifted by the extreme wrench torques, per (lambda, joint).
struct ModifiedTorqueLimits {
  std::vector<double> lambda;
  MatrixXd gamma_lower, gamma_upper;  // raw J^T h_lower, J^T h_upper
  MatrixXd lower, upper;              // effective limits on a ldd + b ld^2 + c ld + g
  std::vector<InfeasibleNode> violations;

  bool feasible() const { return violations.empty(); }

  void throw_if_infeasible() const {
    if (!feasible()) throw InfeasibleLimitsError(violations);
  }
};

namespace detail {

inline void check_raw_limits(const VectorXd& lo, const VectorXd& hi) {
  if (lo.size() != hi.size()) throw DimensionError("torque limit sizes differ");
  for (Eigen::Index j = 0; j < lo.size(); ++j) {
    if (!(lo(j) < hi(j))) {
      throw ConfigError("torque limits must satisfy lower < upper for joint " +
                        std::to_string(j + 1));
    }
  }
}

}  // namespace detail

inline ModifiedTorqueLimits modified_torque_limits(
    const VectorXd& tau_lower, const VectorXd& tau_upper,
    const WrenchProfile& profile, const ProjectedDynamics& projected,
    GammaMode mode = GammaMode::kLiteral) {
  detail::check_raw_limits(tau_lower, tau_upper);
  detail::require_dim(tau_lower.size(), projected.dof(), "torque limits");
  if (profile.lambda() != projected.lambda()) {
    throw DimensionError("wrench profile and projected dynamics grids differ");
  }
  const auto n = static_cast<Eigen::Index>(projected.size());
  const Eigen::Index dof = projected.dof();
  ModifiedTorqueLimits m;
  m.lambda = projected.lambda();
  m.gamma_lower.resize(n, dof);
  m.gamma_upper.resize(n, dof);
  m.lower.resize(n, dof);
  m.upper.resize(n, dof);
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto kk = static_cast<std::size_t>(k);
    const Vector6d h_lo = profile.lower_at(kk), h_hi = profile.upper_at(kk);
    for (Eigen::Index j = 0; j < dof; ++j) {
      const GammaRange g =
          gamma_bounds(projected.J()[kk].col(j), h_lo, h_hi, mode);
      m.gamma_lower(k, j) = g.lower;
      m.gamma_upper(k, j) = g.upper;
      m.lower(k, j) = tau_lower(j) - std::min(g.lower, g.upper);
      m.upper(k, j) = tau_upper(j) - std::max(g.lower, g.upper);
      if (m.lower(k, j) > m.upper(k, j)) {
        m.violations.push_back({kk, m.lambda[kk], static_cast<std::size_t>(j),
                                m.lower(k, j), m.upper(k, j)});
      }
    }
  }
  return m;
}

/// Raw actuator limits on every node, ignoring interaction wrenches.
inline ModifiedTorqueLimits unmodified_limits(const VectorXd& tau_lower,
                                              const VectorXd& tau_upper,
                                              const std::vector<double>& lambda) {
  detail::check_raw_limits(tau_lower, tau_upper);
  const auto n = static_cast<Eigen::Index>(lambda.size());
  const Eigen::Index dof = tau_lower.size();
  ModifiedTorqueLimits m;
  m.lambda = lambda;
  m.gamma_lower = MatrixXd::Zero(n, dof);
  m.gamma_upper = MatrixXd::Zero(n, dof);
  m.lower = tau_lower.transpose().replicate(n, 1);
  m.upper = tau_upper.transpose().replicate(n, 1);
  return m;
}

}  // namespace ctotp
