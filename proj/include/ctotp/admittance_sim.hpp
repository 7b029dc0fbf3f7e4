#pragma once

// Translational admittance control against a compliant surface:
//
//   M zdd + K_D zd + K_P z = -(h_d - h_e),   x_c = x_d - z,
//
// with an ideal inner position loop (x_m = x_c). The surface occupies the
// half-space below x_e along the contact axis; h_e and h_d are the forces
// the end-effector exerts on the surface, so pressing means a negative
// component along the axis.

#include "ctotp/joint_trajectory.hpp"
#include "ctotp/robot_model.hpp"
#include "ctotp/types.hpp"

#include <cmath>
#include <vector>

namespace ctotp {

struct AdmittanceParams {
  Vector3d mass = Vector3d(0.1, 0.1, 0.02);
  Vector3d damping = Vector3d(300.0, 300.0, 1200.0);
  Vector3d stiffness = Vector3d(5500.0, 5500.0, 625.0);
  double desired_force = 20.0;  // pressing force magnitude [N]

  void validate() const {
    if (!(mass.array() > 0.0).all()) throw ConfigError("admittance mass must be > 0");
    if (!(damping.array() > 0.0).all()) throw ConfigError("admittance damping must be > 0");
    if (!(stiffness.array() > 0.0).all()) {
      throw ConfigError("admittance stiffness must be > 0");
    }
    if (!(desired_force >= 0.0)) throw ConfigError("desired force must be >= 0");
  }
};

struct EnvironmentModel {
  int normal_axis = 2;
  double surface = 0.0;       // rest position x_e along the axis [m]
  double stiffness = 1.0e4;   // k_e [N/m]
  double mu = 0.0;

  void validate() const {
    if (normal_axis < 0 || normal_axis > 2) throw ConfigError("normal axis must be 0..2");
    if (!(stiffness > 0.0)) throw ConfigError("contact stiffness must be > 0");
    if (!(mu >= 0.0)) throw ConfigError("friction coefficient must be >= 0");
  }
};

struct ContactForce {
  double normal = 0.0;      // magnitude [N]
  double tangential = 0.0;  // magnitude [N]
  /// Force the surface applies to the end-effector.
  Vector3d reaction = Vector3d::Zero();

  /// Force the end-effector exerts on the surface.
  Vector3d exerted() const { return -reaction; }
};

/// Unilateral linear spring with Coulomb friction opposing the tangential
/// velocity. Zero force without penetration.
inline ContactForce contact_force(const EnvironmentModel& env, const Vector3d& x_m,
                                  const Vector3d& xd_m) {
  ContactForce f;
  const double penetration = env.surface - x_m(env.normal_axis);
  if (penetration <= 0.0) return f;
  f.normal = env.stiffness * penetration;
  f.reaction(env.normal_axis) = f.normal;
  Vector3d v = xd_m;
  v(env.normal_axis) = 0.0;
  const double speed = v.norm();
  if (env.mu > 0.0 && speed > 1e-9) {
    f.tangential = env.mu * f.normal;
    f.reaction -= f.tangential * v / speed;
  }
  return f;
}

/// Desired end-effector positions sampled in time (linear in between).
struct TaskReference {
  std::vector<double> time;
  std::vector<Vector3d> position;

  Vector3d at(double t) const {
    if (time.empty()) throw ConfigError("empty task reference");
    const std::size_t k = detail::bracket(time, t);
    if (time.size() == 1 || t <= time[k]) return position[k];
    if (t >= time[k + 1]) return position[k + 1];
    const double w = (t - time[k]) / (time[k + 1] - time[k]);
    return (1.0 - w) * position[k] + w * position[k + 1];
  }

  double duration() const { return time.empty() ? 0.0 : time.back(); }
};

/// Planar 2R end-effector reference on the plane at `height` along the
/// contact axis (which must be z, the arm's plane normal). The first pose is
/// held for `settle_time` seconds before the motion starts.
inline TaskReference reference_from_trajectory(const JointTrajectory& traj,
                                               const Planar2R& arm, int normal_axis,
                                               double height, double settle_time) {
  if (normal_axis != 2) {
    throw ConfigError("planar 2R simulation needs the contact normal along z");
  }
  TaskReference ref;
  for (std::size_t s = 0; s < traj.size(); ++s) {
    const Eigen::Vector2d p =
        arm.forward_kinematics(traj.q.row(static_cast<Eigen::Index>(s)).transpose());
    if (s == 0 && settle_time > 0.0) {
      ref.time.push_back(0.0);
      ref.position.emplace_back(p.x(), p.y(), height);
    }
    ref.time.push_back(settle_time + traj.time[s]);
    ref.position.emplace_back(p.x(), p.y(), height);
  }
  return ref;
}

struct SimOptions {
  double dt = 0.002;
  double divergence_guard = 1.0;  // max |z| [m]
};

struct SimTrace {
  std::vector<double> time;
  std::vector<Vector3d> x_d, x_c, z;
  std::vector<Vector3d> h_e;    // exerted on the surface
  std::vector<Vector3d> h_err;  // h_d - h_e
  std::vector<double> normal_force, tangential_force;

  std::size_t size() const { return time.size(); }
};

/// Fixed-step simulation. Each step uses the wrench measured at the current
/// compliant pose and advances z with a velocity-implicit update.
inline SimTrace simulate(const TaskReference& ref, const AdmittanceParams& params,
                         const EnvironmentModel& env, const SimOptions& opt = {}) {
  params.validate();
  env.validate();
  if (!(opt.dt > 0.0)) throw ConfigError("simulation dt must be > 0");
  const auto steps = static_cast<std::size_t>(std::floor(ref.duration() / opt.dt + 1e-9));

  Vector3d h_d = Vector3d::Zero();
  h_d(env.normal_axis) = -params.desired_force;

  SimTrace trace;
  Vector3d z = Vector3d::Zero(), zd = Vector3d::Zero();
  Vector3d x_prev = ref.at(0.0);
  for (std::size_t k = 0; k <= steps; ++k) {
    const double t = static_cast<double>(k) * opt.dt;
    const Vector3d x_d = ref.at(t);
    const Vector3d x_c = x_d - z;
    const Vector3d v_m = k == 0 ? Vector3d::Zero() : Vector3d((x_c - x_prev) / opt.dt);
    x_prev = x_c;
    const ContactForce f = contact_force(env, x_c, v_m);
    const Vector3d h_e = f.exerted();
    const Vector3d h_err = h_d - h_e;

    trace.time.push_back(t);
    trace.x_d.push_back(x_d);
    trace.x_c.push_back(x_c);
    trace.z.push_back(z);
    trace.h_e.push_back(h_e);
    trace.h_err.push_back(h_err);
    trace.normal_force.push_back(f.normal);
    trace.tangential_force.push_back(f.tangential);

    for (int a = 0; a < 3; ++a) {
      const double m = params.mass(a), d = params.damping(a), kp = params.stiffness(a);
      zd(a) = (m * zd(a) - opt.dt * (h_err(a) + kp * z(a))) /
              (m + opt.dt * d + opt.dt * opt.dt * kp);
      z(a) += opt.dt * zd(a);
    }
    if (!z.allFinite() || z.norm() > opt.divergence_guard) {
      throw SimulationDivergedError(t, z.norm());
    }
  }
  return trace;
}

struct ForceViolation {
  double time = 0.0;
  double force = 0.0;
};

/// Samples after `transient` seconds whose normal force leaves [lower, upper].
inline std::vector<ForceViolation> verify_force_bounds(const SimTrace& trace,
                                                       double lower, double upper,
                                                       double transient) {
  std::vector<ForceViolation> out;
  for (std::size_t k = 0; k < trace.size(); ++k) {
    if (trace.time[k] < transient) continue;
    const double f = trace.normal_force[k];
    if (f < lower || f > upper) out.push_back({trace.time[k], f});
  }
  return out;
}

}  // namespace ctotp
