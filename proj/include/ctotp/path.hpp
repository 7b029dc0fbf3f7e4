#pragma once

// Geometric joint path q(lambda) with its first and second lambda
// derivatives, plus the planar two-link inverse kinematics used to turn a
// task-space path into a joint path.

#include "ctotp/robot_model.hpp"
#include "ctotp/types.hpp"

#include <cmath>
#include <numbers>
#include <vector>

namespace ctotp {

enum class DiffScheme {
  /// Natural cubic spline through the samples (default).
  kCubicSpline,
  /// Second-order finite differences; one-sided stencils at the endpoints.
  kCentralDifference,
};

struct PathPoint {
  VectorXd q, dq, ddq;  // q, q', q''
};

class PathSpec {
 public:
  PathSpec() = default;

  Eigen::Index dof() const { return q_.cols(); }
  std::size_t size() const { return lambda_.size(); }
  double length() const { return lambda_.empty() ? 0.0 : lambda_.back(); }
  DiffScheme scheme() const { return scheme_; }

  const std::vector<double>& lambda() const { return lambda_; }
  const MatrixXd& q() const { return q_; }
  const MatrixXd& dq() const { return dq_; }
  const MatrixXd& ddq() const { return ddq_; }

  PathPoint node(std::size_t k) const {
    const auto i = static_cast<Eigen::Index>(k);
    return {q_.row(i).transpose(), dq_.row(i).transpose(),
            ddq_.row(i).transpose()};
  }

  /// Interpolated (q, q', q'') at lambda. Exact stored samples at nodes.
  PathPoint eval(double lambda) const {
    if (lambda_.empty()) throw ConfigError("empty path");
    if (!(lambda >= lambda_.front() && lambda <= lambda_.back())) {
      throw ConfigError("lambda=" + std::to_string(lambda) +
                        " outside path range [0, " +
                        std::to_string(length()) + "]");
    }
    const std::size_t k = detail::bracket(lambda_, lambda);
    if (lambda == lambda_[k]) return node(k);
    if (lambda == lambda_[k + 1]) return node(k + 1);

    const auto i = static_cast<Eigen::Index>(k);
    const double h = lambda_[k + 1] - lambda_[k];
    const double t = lambda - lambda_[k];
    const double u = lambda_[k + 1] - lambda;
    PathPoint p;
    if (scheme_ == DiffScheme::kCentralDifference) {
      const double w = t / h;
      p.q = ((1.0 - w) * q_.row(i) + w * q_.row(i + 1)).transpose();
      p.dq = ((1.0 - w) * dq_.row(i) + w * dq_.row(i + 1)).transpose();
      p.ddq = ((1.0 - w) * ddq_.row(i) + w * ddq_.row(i + 1)).transpose();
      return p;
    }
    // Cubic segment written in terms of the nodal second derivatives M.
    const VectorXd y0 = q_.row(i).transpose(), y1 = q_.row(i + 1).transpose();
    const VectorXd m0 = ddq_.row(i).transpose(),
                   m1 = ddq_.row(i + 1).transpose();
    const VectorXd c0 = y0 / h - m0 * (h / 6.0);
    const VectorXd c1 = y1 / h - m1 * (h / 6.0);
    p.q = m0 * (u * u * u / (6.0 * h)) + m1 * (t * t * t / (6.0 * h)) +
          c0 * u + c1 * t;
    p.dq = -m0 * (u * u / (2.0 * h)) + m1 * (t * t / (2.0 * h)) - c0 + c1;
    p.ddq = m0 * (u / h) + m1 * (t / h);
    return p;
  }

  friend PathSpec build_path(std::vector<double> lambda, MatrixXd samples,
                             DiffScheme scheme);

 private:
  std::vector<double> lambda_;
  MatrixXd q_, dq_, ddq_;
  DiffScheme scheme_ = DiffScheme::kCubicSpline;
};

namespace detail {

/// Finite-difference weights for the `order`-th derivative at x0 from the
/// stencil nodes xs (Fornberg's recursion).
inline std::vector<double> fd_weights(double x0, const std::vector<double>& xs,
                                      int order) {
  const int n = static_cast<int>(xs.size()) - 1;
  std::vector<std::vector<double>> c(
      static_cast<std::size_t>(n + 1),
      std::vector<double>(static_cast<std::size_t>(order + 1), 0.0));
  double c1 = 1.0;
  double c4 = xs[0] - x0;
  c[0][0] = 1.0;
  for (int i = 1; i <= n; ++i) {
    const int mn = std::min(i, order);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = xs[static_cast<std::size_t>(i)] - x0;
    for (int j = 0; j < i; ++j) {
      const double c3 = xs[static_cast<std::size_t>(i)] -
                        xs[static_cast<std::size_t>(j)];
      c2 *= c3;
      auto& ci = c[static_cast<std::size_t>(i)];
      auto& cj = c[static_cast<std::size_t>(j)];
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) {
          ci[static_cast<std::size_t>(k)] =
              c1 * (k * c[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(k - 1)] -
                    c5 * c[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(k)]) /
              c2;
        }
        ci[0] = -c1 * c5 * c[static_cast<std::size_t>(i - 1)][0] / c2;
      }
      for (int k = mn; k >= 1; --k) {
        cj[static_cast<std::size_t>(k)] =
            (c4 * cj[static_cast<std::size_t>(k)] -
             k * cj[static_cast<std::size_t>(k - 1)]) /
            c3;
      }
      cj[0] = c4 * cj[0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w;
  w.reserve(static_cast<std::size_t>(n + 1));
  for (const auto& row : c) w.push_back(row[static_cast<std::size_t>(order)]);
  return w;
}

/// Nodal second derivatives of the natural cubic spline through (x, y).
inline VectorXd natural_spline_moments(const std::vector<double>& x,
                                       const VectorXd& y) {
  const std::size_t n = x.size();
  VectorXd m = VectorXd::Zero(static_cast<Eigen::Index>(n));
  if (n < 3) return m;
  // Thomas algorithm on the interior equations.
  const std::size_t k = n - 2;
  std::vector<double> diag(k), upper(k), rhs(k);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double h0 = x[i] - x[i - 1], h1 = x[i + 1] - x[i];
    const auto ii = static_cast<Eigen::Index>(i);
    diag[i - 1] = 2.0 * (h0 + h1);
    upper[i - 1] = h1;
    rhs[i - 1] = 6.0 * ((y(ii + 1) - y(ii)) / h1 - (y(ii) - y(ii - 1)) / h0);
  }
  for (std::size_t i = 1; i < k; ++i) {
    const double lower = x[i + 1] - x[i];  // h_{i} multiplies M_{i}
    const double f = lower / diag[i - 1];
    diag[i] -= f * upper[i - 1];
    rhs[i] -= f * rhs[i - 1];
  }
  for (std::size_t i = k; i-- > 0;) {
    double v = rhs[i];
    if (i + 1 < k) v -= upper[i] * m(static_cast<Eigen::Index>(i + 2));
    m(static_cast<Eigen::Index>(i + 1)) = v / diag[i];
  }
  return m;
}

}  // namespace detail

/// Builds q' and q'' from joint samples (rows) on a strictly increasing grid
/// starting at 0.
inline PathSpec build_path(std::vector<double> lambda, MatrixXd samples,
                           DiffScheme scheme = DiffScheme::kCubicSpline) {
  const std::size_t n = lambda.size();
  if (n < 4) {
    throw ConfigError("path needs at least 4 samples, got " + std::to_string(n));
  }
  if (static_cast<Eigen::Index>(n) != samples.rows()) {
    throw DimensionError("path grid and sample counts differ");
  }
  if (samples.cols() < 1) throw DimensionError("path has no joints");
  if (!detail::strictly_increasing(lambda)) {
    throw ConfigError("path lambda grid must be strictly increasing "
                      "(duplicate or decreasing values)");
  }
  if (lambda.front() != 0.0) throw ConfigError("path lambda grid must start at 0");
  if (!samples.allFinite()) throw ConfigError("path samples must be finite");

  PathSpec p;
  p.scheme_ = scheme;
  p.q_ = std::move(samples);
  p.dq_.resize(p.q_.rows(), p.q_.cols());
  p.ddq_.resize(p.q_.rows(), p.q_.cols());

  if (scheme == DiffScheme::kCubicSpline) {
    for (Eigen::Index j = 0; j < p.q_.cols(); ++j) {
      p.ddq_.col(j) = detail::natural_spline_moments(lambda, p.q_.col(j));
    }
    for (std::size_t k = 0; k + 1 < n; ++k) {
      const auto i = static_cast<Eigen::Index>(k);
      const double h = lambda[k + 1] - lambda[k];
      p.dq_.row(i) = (p.q_.row(i + 1) - p.q_.row(i)) / h -
                     h * (2.0 * p.ddq_.row(i) + p.ddq_.row(i + 1)) / 6.0;
    }
    const auto last = static_cast<Eigen::Index>(n - 1);
    const double h = lambda[n - 1] - lambda[n - 2];
    p.dq_.row(last) = (p.q_.row(last) - p.q_.row(last - 1)) / h +
                      h * (p.ddq_.row(last - 1) + 2.0 * p.ddq_.row(last)) / 6.0;
  } else {
    for (std::size_t k = 0; k < n; ++k) {
      std::vector<std::size_t> s1, s2;
      if (k == 0) {
        s1 = {0, 1, 2};
        s2 = {0, 1, 2, 3};
      } else if (k == n - 1) {
        s1 = {n - 3, n - 2, n - 1};
        s2 = {n - 4, n - 3, n - 2, n - 1};
      } else {
        s1 = s2 = {k - 1, k, k + 1};
      }
      auto apply = [&](const std::vector<std::size_t>& s, int order) {
        std::vector<double> xs;
        for (auto idx : s) xs.push_back(lambda[idx]);
        const auto w = detail::fd_weights(lambda[k], xs, order);
        Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(p.q_.cols());
        for (std::size_t m = 0; m < s.size(); ++m) {
          acc += w[m] * p.q_.row(static_cast<Eigen::Index>(s[m]));
        }
        return acc;
      };
      p.dq_.row(static_cast<Eigen::Index>(k)) = apply(s1, 1);
      p.ddq_.row(static_cast<Eigen::Index>(k)) = apply(s2, 2);
    }
  }
  p.lambda_ = std::move(lambda);
  return p;
}

/// Planar task-space path: positions (x, y) on a lambda grid.
struct TaskPath {
  std::vector<double> lambda;
  MatrixXd xy;  // N x 2
};

enum class ElbowBranch {
  /// q2 >= 0
  kUp,
  /// q2 <= 0
  kDown,
};

/// Joint samples (N x 2) reaching every pose of `task` on a single elbow
/// branch. Poses exactly on the outer or inner workspace boundary are
/// accepted; poses beyond it are rejected.
inline MatrixXd planar_ik(const TaskPath& task, const RobotModel& model,
                          ElbowBranch branch) {
  const Planar2R& arm = model.planar_2r();
  const double l1 = arm.params().l1, l2 = arm.params().l2;
  if (task.xy.cols() != 2) throw DimensionError("planar task path needs x, y");
  if (task.xy.rows() != static_cast<Eigen::Index>(task.lambda.size())) {
    throw DimensionError("task path grid and pose counts differ");
  }
  const double sign = branch == ElbowBranch::kUp ? 1.0 : -1.0;
  constexpr double kBoundaryTol = 1e-12;
  MatrixXd q(task.xy.rows(), 2);
  for (Eigen::Index k = 0; k < task.xy.rows(); ++k) {
    const double x = task.xy(k, 0), y = task.xy(k, 1);
    double c2 = (x * x + y * y - l1 * l1 - l2 * l2) / (2.0 * l1 * l2);
    if (c2 > 1.0 + kBoundaryTol || c2 < -1.0 - kBoundaryTol) {
      throw ConfigError("pose " + std::to_string(k) + " (" + std::to_string(x) +
                        ", " + std::to_string(y) + ") is unreachable");
    }
    c2 = std::clamp(c2, -1.0, 1.0);
    const double s2 = sign * std::sqrt(std::max(0.0, 1.0 - c2 * c2));
    const double q2 = std::atan2(s2, c2);
    double q1 = std::atan2(y, x) - std::atan2(l2 * s2, l1 + l2 * c2);
    if (k > 0) {
      // keep q1 continuous across the atan2 cut
      const double prev = q(k - 1, 0);
      q1 += 2.0 * std::numbers::pi * std::round((prev - q1) / (2.0 * std::numbers::pi));
    }
    q(k, 0) = q1;
    q(k, 1) = q2;
  }
  return q;
}

}  // namespace ctotp
