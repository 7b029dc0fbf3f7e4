#pragma once

// Dynamics projected onto the path coordinate:
//
//   a(l) ldd + b(l) ld^2 + c(l) ld + g(l) = tau - J^T(l) h_e
//
// with a = B q', b = B q'' + q'^T C q', c = F q', g = g(q), J = J(q).

#include "ctotp/path.hpp"
#include "ctotp/robot_model.hpp"
#include "ctotp/types.hpp"

#include <vector>

namespace ctotp {

struct DynamicsCoefficients {
  VectorXd a, b, c, g;
  Matrix6Xd J;

  /// b ld^2 + c ld + g
  VectorXd velocity_terms(double ld) const { return b * (ld * ld) + c * ld + g; }

  /// Joint torque net of the wrench term, a ldd + b ld^2 + c ld + g.
  VectorXd motion_torque(double ldd, double ld) const {
    return a * ldd + velocity_terms(ld);
  }
};

/// Coefficients at a single path point of an analytic model.
inline DynamicsCoefficients project_point(const RobotModel& model,
                                          const PathPoint& p) {
  const MatrixXd B = model.inertia(p.q);
  DynamicsCoefficients k;
  k.a = B * p.dq;
  k.b = B * p.ddq + model.coriolis_quadratic(p.q, p.dq);
  k.c = model.friction() * p.dq;
  k.g = model.gravity(p.q);
  k.J = model.eval_jacobian(p.q);
  return k;
}

class ProjectedDynamics {
 public:
  ProjectedDynamics() = default;

  ProjectedDynamics(std::vector<double> lambda, Eigen::Index dof)
      : lambda_(std::move(lambda)) {
    const auto n = static_cast<Eigen::Index>(lambda_.size());
    a_ = b_ = c_ = g_ = MatrixXd::Zero(n, dof);
    J_.assign(lambda_.size(), Matrix6Xd::Zero(6, dof));
  }

  explicit ProjectedDynamics(const SampledModel& s)
      : lambda_(s.lambda), a_(s.a), b_(s.b), c_(s.c), g_(s.g), J_(s.J) {}

  std::size_t size() const { return lambda_.size(); }
  Eigen::Index dof() const { return a_.cols(); }
  const std::vector<double>& lambda() const { return lambda_; }
  const MatrixXd& a() const { return a_; }
  const MatrixXd& b() const { return b_; }
  const MatrixXd& c() const { return c_; }
  const MatrixXd& g() const { return g_; }
  const std::vector<Matrix6Xd>& J() const { return J_; }

  DynamicsCoefficients at(std::size_t k) const {
    const auto i = static_cast<Eigen::Index>(k);
    return {a_.row(i).transpose(), b_.row(i).transpose(),
            c_.row(i).transpose(), g_.row(i).transpose(), J_[k]};
  }

  void set(std::size_t k, const DynamicsCoefficients& v) {
    const auto i = static_cast<Eigen::Index>(k);
    a_.row(i) = v.a.transpose();
    b_.row(i) = v.b.transpose();
    c_.row(i) = v.c.transpose();
    g_.row(i) = v.g.transpose();
    J_[k] = v.J;
  }

  /// Linear interpolation between nodes (clamped to the grid).
  DynamicsCoefficients interpolate(double lambda) const {
    const std::size_t k = detail::bracket(lambda_, lambda);
    if (lambda_.size() == 1 || lambda <= lambda_[k]) return at(k);
    if (lambda >= lambda_[k + 1]) return at(k + 1);
    const double w = (lambda - lambda_[k]) / (lambda_[k + 1] - lambda_[k]);
    const DynamicsCoefficients lo = at(k), hi = at(k + 1);
    return {(1 - w) * lo.a + w * hi.a, (1 - w) * lo.b + w * hi.b,
            (1 - w) * lo.c + w * hi.c, (1 - w) * lo.g + w * hi.g,
            (1 - w) * lo.J + w * hi.J};
  }

  SampledModel to_sampled_model() const {
    return SampledModel{lambda_, a_, b_, c_, g_, J_};
  }

 private:
  std::vector<double> lambda_;
  MatrixXd a_, b_, c_, g_;
  std::vector<Matrix6Xd> J_;
};

/// Coefficients at the requested lambda values. Analytic models are
/// evaluated exactly along the interpolated path; sampled models are
/// linearly interpolated from their tables.
inline ProjectedDynamics project_dynamics(const RobotModel& model,
                                          const PathSpec& path,
                                          const std::vector<double>& at) {
  ProjectedDynamics out(at, model.dof());
  if (model.is_analytic()) {
    detail::require_dim(path.dof(), model.dof(), "path joint count");
    for (std::size_t k = 0; k < at.size(); ++k) {
      out.set(k, project_point(model, path.eval(at[k])));
    }
    return out;
  }
  const ProjectedDynamics tables(model.sampled());
  if (path.size() > 0) detail::require_dim(path.dof(), model.dof(), "path joint count");
  for (std::size_t k = 0; k < at.size(); ++k) {
    out.set(k, tables.interpolate(at[k]));
  }
  return out;
}

/// Coefficients at the path's own nodes; sampled tables are adopted as-is.
inline ProjectedDynamics project_dynamics(const RobotModel& model,
                                          const PathSpec& path) {
  if (!model.is_analytic()) return ProjectedDynamics(model.sampled());
  return project_dynamics(model, path, path.lambda());
}

/// Point-wise coefficient source along a path, used wherever coefficients
/// are needed off the planning grid.
class PathDynamics {
 public:
  PathDynamics(const RobotModel& model, const PathSpec& path)
      : model_(model), path_(path) {
    if (!model.is_analytic()) tables_ = ProjectedDynamics(model.sampled());
  }

  DynamicsCoefficients at(double lambda) const {
    if (model_.is_analytic()) return project_point(model_, path_.eval(lambda));
    return tables_.interpolate(lambda);
  }

  ProjectedDynamics sample(const std::vector<double>& lambdas) const {
    return project_dynamics(model_, path_, lambdas);
  }

  const RobotModel& model() const { return model_; }
  const PathSpec& path() const { return path_; }

 private:
  const RobotModel& model_;
  const PathSpec& path_;
  ProjectedDynamics tables_;
};

}  // namespace ctotp
