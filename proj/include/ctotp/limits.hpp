#pragma once

// Phase-plane bounds: the admissible pseudo-acceleration interval [L, U] at a
// state (lambda, lambda_dot), and the pseudo-velocity ceiling implied by the
// joint velocity limits.

#include "ctotp/projected_dynamics.hpp"
#include "ctotp/types.hpp"

#include <cmath>
#include <span>

namespace ctotp {

/// |a_j| below this is treated as a zero-inertia point for joint j.
inline constexpr double kZeroInertia = 1e-12;

/// Per-joint coefficients and effective torque limits at one lambda.
struct NodeView {
  std::span<const double> a, b, c, g;
  std::span<const double> lower, upper;

  std::size_t dof() const { return a.size(); }
};

struct AccelBounds {
  double lower = -kInfinity;
  double upper = kInfinity;
  int lower_joint = -1;  // joint attaining `lower`, -1 if unbounded
  int upper_joint = -1;
  /// False when a zero-inertia joint cannot hold its torque within limits.
  bool state_valid = true;

  bool feasible() const { return state_valid && lower <= upper; }
};

inline AccelBounds accel_bounds(const NodeView& node, double lambdadot) {
  AccelBounds out;
  const double ld2 = lambdadot * lambdadot;
  for (std::size_t j = 0; j < node.dof(); ++j) {
    const double rest = node.b[j] * ld2 + node.c[j] * lambdadot + node.g[j];
    const double a = node.a[j];
    if (std::abs(a) < kZeroInertia) {
      if (rest < node.lower[j] || rest > node.upper[j]) out.state_valid = false;
      continue;
    }
    const double delta = a > 0.0 ? 1.0 : 0.0;
    const double lj =
        (node.lower[j] * delta + node.upper[j] * (1.0 - delta) - rest) / a;
    const double uj =
        (node.upper[j] * delta + node.lower[j] * (1.0 - delta) - rest) / a;
    if (lj > out.lower) {
      out.lower = lj;
      out.lower_joint = static_cast<int>(j);
    }
    if (uj < out.upper) {
      out.upper = uj;
      out.upper_joint = static_cast<int>(j);
    }
  }
  return out;
}

/// Convenience overload over owning vectors.
inline AccelBounds accel_bounds(const DynamicsCoefficients& k,
                                const VectorXd& lower, const VectorXd& upper,
                                double lambdadot) {
  const auto n = static_cast<std::size_t>(k.a.size());
  const NodeView v{{k.a.data(), n},       {k.b.data(), n},
                   {k.c.data(), n},       {k.g.data(), n},
                   {lower.data(), n},     {upper.data(), n}};
  return accel_bounds(v, lambdadot);
}

struct VelocityLimit {
  double value = kInfinity;  // kInfinity when no joint moves
  int joint = -1;

  bool bounded() const { return std::isfinite(value); }
};

/// Largest lambda_dot keeping qd = q' lambda_dot within [qd_lower, qd_upper]
/// (with qd_lower < 0 < qd_upper).
inline VelocityLimit velocity_limit(std::span<const double> dq,
                                    std::span<const double> qd_lower,
                                    std::span<const double> qd_upper) {
  VelocityLimit out;
  for (std::size_t j = 0; j < dq.size(); ++j) {
    if (dq[j] == 0.0) continue;
    const double bound = dq[j] > 0.0 ? qd_upper[j] / dq[j] : qd_lower[j] / dq[j];
    if (bound < out.value) {
      out.value = bound;
      out.joint = static_cast<int>(j);
    }
  }
  return out;
}

inline VelocityLimit velocity_limit(const VectorXd& dq, const VectorXd& qd_lower,
                                    const VectorXd& qd_upper) {
  detail::require_dim(qd_lower.size(), dq.size(), "velocity lower limits");
  detail::require_dim(qd_upper.size(), dq.size(), "velocity upper limits");
  for (Eigen::Index j = 0; j < dq.size(); ++j) {
    if (!(qd_lower(j) < 0.0 && 0.0 < qd_upper(j))) {
      throw ConfigError("velocity limits must satisfy lower < 0 < upper for joint " +
                        std::to_string(j + 1));
    }
  }
  const auto n = static_cast<std::size_t>(dq.size());
  using Span = std::span<const double>;
  return velocity_limit(Span(dq.data(), n), Span(qd_lower.data(), n),
                        Span(qd_upper.data(), n));
}

}  // namespace ctotp
