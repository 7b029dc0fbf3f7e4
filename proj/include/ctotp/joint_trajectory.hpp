#pragma once

// Joint-space reconstruction of a phase-plane trajectory:
//   qd = q' ld,  qdd = q' ldd + q'' ld^2,
//   tau = a ldd + b ld^2 + c ld + g + J^T h_nominal.

#include "ctotp/dp_planner.hpp"
#include "ctotp/projected_dynamics.hpp"
#include "ctotp/wrench_constraints.hpp"

#include <cmath>
#include <vector>

namespace ctotp {

/// Raw limits and wrench bounds defining the modified-limit envelope
/// attached to every trajectory sample.
struct TorqueEnvelope {
  VectorXd tau_lower, tau_upper;
  WrenchProfile profile;
  GammaMode mode = GammaMode::kLiteral;
};

enum class NominalWrench { kMidpoint, kLower, kUpper, kZero };

struct JointTrajectory {
  std::vector<double> time, lambda, lambdadot, lambdaddot;
  MatrixXd q, qd, qdd;
  /// a ldd + b ld^2 + c ld + g, the torque bounded by the envelope.
  MatrixXd tau_motion;
  /// tau_motion plus the nominal wrench torque J^T h.
  MatrixXd tau;
  MatrixXd envelope_lower, envelope_upper;

  std::size_t size() const { return time.size(); }
};

namespace detail {

struct PhaseSample {
  double t, lambda, lambdadot, lambdaddot;
};

inline void append_sample(JointTrajectory& out, std::size_t s,
                          const PhaseSample& p, const PathDynamics& dyn,
                          const TorqueEnvelope& env, NominalWrench nominal) {
  const auto i = static_cast<Eigen::Index>(s);
  const PathPoint pt = dyn.path().eval(p.lambda);
  const DynamicsCoefficients k = dyn.at(p.lambda);
  out.time[s] = p.t;
  out.lambda[s] = p.lambda;
  out.lambdadot[s] = p.lambdadot;
  out.lambdaddot[s] = p.lambdaddot;
  out.q.row(i) = pt.q.transpose();
  out.qd.row(i) = (pt.dq * p.lambdadot).transpose();
  out.qdd.row(i) = (pt.dq * p.lambdaddot + pt.ddq * (p.lambdadot * p.lambdadot)).transpose();
  const VectorXd motion = k.motion_torque(p.lambdaddot, p.lambdadot);
  out.tau_motion.row(i) = motion.transpose();

  const WrenchProfile local = env.profile.resample({p.lambda});
  const Vector6d lo = local.lower_at(0), hi = local.upper_at(0);
  Vector6d h = Vector6d::Zero();
  switch (nominal) {
    case NominalWrench::kMidpoint: h = 0.5 * (lo + hi); break;
    case NominalWrench::kLower: h = lo; break;
    case NominalWrench::kUpper: h = hi; break;
    case NominalWrench::kZero: break;
  }
  out.tau.row(i) = (motion + k.J.transpose() * h).transpose();
  for (Eigen::Index j = 0; j < k.a.size(); ++j) {
    const GammaRange g = gamma_bounds(k.J.col(j), lo, hi, env.mode);
    out.envelope_lower(i, j) = env.tau_lower(j) - std::min(g.lower, g.upper);
    out.envelope_upper(i, j) = env.tau_upper(j) - std::max(g.lower, g.upper);
  }
}

inline JointTrajectory allocate(std::size_t samples, Eigen::Index dof) {
  JointTrajectory out;
  const auto n = static_cast<Eigen::Index>(samples);
  out.time.resize(samples);
  out.lambda.resize(samples);
  out.lambdadot.resize(samples);
  out.lambdaddot.resize(samples);
  out.q = out.qd = out.qdd = out.tau_motion = out.tau = MatrixXd::Zero(n, dof);
  out.envelope_lower = out.envelope_upper = MatrixXd::Zero(n, dof);
  return out;
}

}  // namespace detail

/// Uniform-in-time samples t = 0, dt, 2 dt, ... plus the final time. Between
/// nodes lambda follows the constant pseudo-acceleration of the transition.
inline JointTrajectory to_joint_trajectory(const PhasePlaneTrajectory& ppt,
                                           const PathDynamics& dyn,
                                           const TorqueEnvelope& env,
                                           double sample_dt,
                                           NominalWrench nominal = NominalWrench::kMidpoint) {
  const double tf = ppt.total_time();
  if (!(sample_dt > 0.0)) throw ConfigError("sample_dt must be > 0");
  if (sample_dt > tf) {
    throw ConfigError("sample_dt " + std::to_string(sample_dt) +
                      " exceeds the trajectory duration " + std::to_string(tf));
  }
  std::vector<detail::PhaseSample> samples;
  std::size_t seg = 0;
  for (std::size_t s = 0;; ++s) {
    const double t = static_cast<double>(s) * sample_dt;
    if (t >= tf) break;
    while (seg + 2 < ppt.size() && ppt.time[seg + 1] <= t) ++seg;
    const double tau = t - ppt.time[seg];
    const double ldd = ppt.lambdaddot[seg];
    const double ld = ppt.lambdadot[seg] + ldd * tau;
    const double l = std::min(
        ppt.lambda[seg] + ppt.lambdadot[seg] * tau + 0.5 * ldd * tau * tau,
        ppt.lambda.back());
    samples.push_back({t, l, std::max(ld, 0.0), ldd});
  }
  const std::size_t last = ppt.size() - 1;
  samples.push_back({tf, ppt.lambda[last], ppt.lambdadot[last],
                     last > 0 ? ppt.lambdaddot[last - 1] : 0.0});

  JointTrajectory out = detail::allocate(samples.size(), dyn.path().dof());
  for (std::size_t s = 0; s < samples.size(); ++s) {
    detail::append_sample(out, s, samples[s], dyn, env, nominal);
  }
  return out;
}

/// One sample per planned node, with the pseudo-acceleration of the
/// transition leaving that node.
inline JointTrajectory node_trajectory(const PhasePlaneTrajectory& ppt,
                                       const PathDynamics& dyn,
                                       const TorqueEnvelope& env,
                                       NominalWrench nominal = NominalWrench::kMidpoint) {
  JointTrajectory out = detail::allocate(ppt.size(), dyn.path().dof());
  for (std::size_t k = 0; k < ppt.size(); ++k) {
    detail::append_sample(out, k,
                          {ppt.time[k], ppt.lambda[k], ppt.lambdadot[k],
                           ppt.lambdaddot[k]},
                          dyn, env, nominal);
  }
  return out;
}

struct EnvelopeViolation {
  std::size_t sample = 0;
  std::size_t joint = 0;
  double lambda = 0.0;
  double excess = 0.0;  // amount outside the envelope [N m]
};

inline std::vector<EnvelopeViolation> envelope_violations(
    const JointTrajectory& traj, double tolerance) {
  std::vector<EnvelopeViolation> out;
  for (Eigen::Index s = 0; s < traj.tau_motion.rows(); ++s) {
    for (Eigen::Index j = 0; j < traj.tau_motion.cols(); ++j) {
      const double v = traj.tau_motion(s, j);
      const double excess = std::max(traj.envelope_lower(s, j) - v,
                                     v - traj.envelope_upper(s, j));
      if (excess > tolerance) {
        out.push_back({static_cast<std::size_t>(s), static_cast<std::size_t>(j),
                       traj.lambda[static_cast<std::size_t>(s)], excess});
      }
    }
  }
  return out;
}

}  // namespace ctotp
