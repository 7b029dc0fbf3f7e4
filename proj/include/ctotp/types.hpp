#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace ctotp {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using Vector3d = Eigen::Vector3d;
using Vector6d = Eigen::Matrix<double, 6, 1>;
using Matrix6Xd = Eigen::Matrix<double, 6, Eigen::Dynamic>;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Stacked end-effector wrench (force, moment) in base-frame coordinates.
/// Sign convention: the wrench the end-effector exerts on the environment.
struct Wrench {
  Vector3d force = Vector3d::Zero();
  Vector3d moment = Vector3d::Zero();

  static Wrench from_vector(const Vector6d& h) {
    return {h.head<3>(), h.tail<3>()};
  }

  Vector6d stacked() const {
    Vector6d h;
    h << force, moment;
    return h;
  }

  bool is_finite() const { return force.allFinite() && moment.allFinite(); }
};

// ---------------------------------------------------------------------------
// Errors

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input (configuration, tables, arguments).
/// `field` names the offending configuration key path when known.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what, std::string field = {})
      : Error(field.empty() ? what : field + ": " + what),
        message_(what),
        field_(std::move(field)) {}

  const std::string& field() const { return field_; }
  /// The message without the field prefix.
  const std::string& message() const { return message_; }

 private:
  std::string message_;
  std::string field_;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Operation requested on a model kind that cannot support it.
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

/// Node where the modified torque interval is empty.
struct InfeasibleNode {
  std::size_t node = 0;
  double lambda = 0.0;
  std::size_t joint = 0;
  double lower = 0.0;
  double upper = 0.0;
};

class InfeasibleLimitsError : public Error {
 public:
  explicit InfeasibleLimitsError(std::vector<InfeasibleNode> nodes)
      : Error(describe(nodes)), nodes_(std::move(nodes)) {}

  const std::vector<InfeasibleNode>& nodes() const { return nodes_; }

 private:
  static std::string describe(const std::vector<InfeasibleNode>& nodes) {
    std::string msg = "modified torque limits infeasible at " +
                      std::to_string(nodes.size()) + " (lambda, joint) pair(s)";
    if (!nodes.empty()) {
      msg += "; first at lambda=" + std::to_string(nodes.front().lambda) +
             ", joint " + std::to_string(nodes.front().joint + 1);
    }
    return msg;
  }

  std::vector<InfeasibleNode> nodes_;
};

/// No phase-plane path connects the start and goal states.
class InfeasiblePlanError : public Error {
 public:
  InfeasiblePlanError(std::size_t column, double lambda)
      : Error("no feasible phase-plane path: column " + std::to_string(column) +
              " (lambda=" + std::to_string(lambda) + ") is unreachable"),
        column_(column),
        lambda_(lambda) {}

  std::size_t blocking_column() const { return column_; }
  double blocking_lambda() const { return lambda_; }

 private:
  std::size_t column_;
  double lambda_;
};

class SimulationDivergedError : public Error {
 public:
  SimulationDivergedError(double time, double norm)
      : Error("admittance state diverged at t=" + std::to_string(time) +
              " (|z|=" + std::to_string(norm) + ")"),
        time_(time) {}

  double time() const { return time_; }

 private:
  double time_;
};

namespace detail {

inline void require(bool cond, const std::string& what) {
  if (!cond) throw ConfigError(what);
}

inline void require_dim(Eigen::Index got, Eigen::Index want,
                        const char* what) {
  if (got != want) {
    throw DimensionError(std::string(what) + ": expected size " +
                         std::to_string(want) + ", got " + std::to_string(got));
  }
}

inline bool strictly_increasing(const std::vector<double>& xs) {
  for (std::size_t i = 1; i < xs.size(); ++i) {
    if (!(xs[i] > xs[i - 1])) return false;
  }
  return true;
}

/// Index k of the interval [xs[k], xs[k+1]] containing x (clamped).
inline std::size_t bracket(const std::vector<double>& xs, double x) {
  if (xs.size() < 2) return 0;
  auto it = std::upper_bound(xs.begin(), xs.end(), x);
  std::size_t k = static_cast<std::size_t>(it - xs.begin());
  if (k == 0) return 0;
  if (k >= xs.size()) return xs.size() - 2;
  return k - 1;
}

}  // namespace detail

}  // namespace ctotp
