#include "test_support.hpp"

#include <gtest/gtest.h>

using namespace ctotp;
using namespace ctotp::test;

namespace {

TaskReference hold(const Vector3d& x, double duration) {
  return {{0.0, duration}, {x, x}};
}

/// Steady pressing force from K_P z = h_e - h_d and h_e = -k_e (x_e - x_d + z)
/// along the normal, solved as a 2x2 linear system in (z, h_e).
double steady_force(double kp, double ke, double fd, double x_e, double x_d) {
  Eigen::Matrix2d a;
  a << kp, -1.0, ke, 1.0;
  const Eigen::Vector2d rhs(fd, -ke * (x_e - x_d));
  const Eigen::Vector2d sol = a.partialPivLu().solve(rhs);
  return -sol(1);
}

}  // namespace

TEST(ContactForce, NoPenetrationNoForce) {
  const EnvironmentModel env;
  const ContactForce f = contact_force(env, Vector3d(0.1, 0.2, 0.001), Vector3d(1, 0, 0));
  EXPECT_EQ(f.normal, 0.0);
  EXPECT_EQ(f.reaction.norm(), 0.0);
}

TEST(ContactForce, LinearSpring) {
  const EnvironmentModel env;
  const ContactForce f = contact_force(env, Vector3d(0.0, 0.0, -0.002), Vector3d::Zero());
  EXPECT_NEAR(f.normal, 20.0, 1e-12);
  EXPECT_NEAR(f.reaction.z(), 20.0, 1e-12);
  EXPECT_NEAR(f.exerted().z(), -20.0, 1e-12);
  EXPECT_EQ(f.tangential, 0.0);
}

TEST(ContactForce, FrictionOpposesSliding) {
  EnvironmentModel env;
  env.mu = 0.519;
  const ContactForce f = contact_force(env, Vector3d(0.0, 0.0, -0.002), Vector3d(0.3, 0.0, 0.0));
  EXPECT_NEAR(f.tangential, 10.38, 1e-9);
  EXPECT_NEAR(f.reaction.x(), -10.38, 1e-9);
  EXPECT_NEAR(f.reaction.y(), 0.0, 1e-12);
  const ContactForce g =
      contact_force(env, Vector3d(0.0, 0.0, -0.002), Vector3d(0.0, -0.2, 0.5));
  EXPECT_NEAR(g.reaction.y(), 10.38, 1e-9);
}

TEST(Simulate, FreeMotionDecaysToReference) {
  AdmittanceParams p;
  p.desired_force = 0.0;
  const EnvironmentModel env;
  // press below the surface, then lift far away
  TaskReference ref{{0.0, 0.5, 0.5 + 1e-9, 40.0},
                    {Vector3d(0.5, 0, -0.004), Vector3d(0.5, 0, -0.004),
                     Vector3d(0.5, 0, 0.5), Vector3d(0.5, 0, 0.5)}};
  const SimTrace t = simulate(ref, p, env);
  std::size_t lift = 0;
  while (t.time[lift] < 0.5 + 1e-6) ++lift;
  EXPECT_GT(t.z[lift].norm(), 1e-4);
  const std::size_t half = lift + (t.size() - lift) / 2;
  for (std::size_t k = half + 1; k < t.size(); ++k) {
    EXPECT_LE(t.z[k].norm(), t.z[k - 1].norm());
  }
  EXPECT_LT(t.z.back().norm(), 1e-6);
  EXPECT_LT((t.x_c.back() - t.x_d.back()).norm(), 1e-6);
  EXPECT_EQ(t.normal_force.back(), 0.0);
}

TEST(Simulate, SteadyPressingForceMatchesCoupledSprings) {
  for (int i = 0; i < 20; ++i) {
    AdmittanceParams p;
    p.stiffness.z() = uniform(200.0, 6000.0);
    p.desired_force = uniform(5.0, 60.0);
    EnvironmentModel env;
    env.stiffness = uniform(2.0e3, 5.0e4);
    const double x_d = uniform(-0.002, 0.001);
    const SimTrace t = simulate(hold(Vector3d(0.5, 0.1, x_d), 8.0), p, env);
    const double expected =
        steady_force(p.stiffness.z(), env.stiffness, p.desired_force, env.surface, x_d);
    ASSERT_GT(expected, 0.0);
    EXPECT_NEAR(t.normal_force.back(), expected, 1e-3 * expected)
        << "K_P=" << p.stiffness.z() << " k_e=" << env.stiffness
        << " f_d=" << p.desired_force;
  }
}

TEST(Simulate, PaperTuningSettlesNearDesiredForce) {
  const AdmittanceParams p;
  const EnvironmentModel env;
  const SimTrace t = simulate(hold(Vector3d(0.6, 0.0, 0.0), 2.0), p, env);
  const double expected = steady_force(625.0, 1.0e4, 20.0, 0.0, 0.0);
  EXPECT_NEAR(t.normal_force.back(), expected, 1e-3 * expected);
  EXPECT_TRUE(verify_force_bounds(t, 1.0, 80.0, 0.5).empty());
}

TEST(Simulate, DivergenceGuard) {
  const AdmittanceParams p;
  const EnvironmentModel env;
  SimOptions opt;
  opt.divergence_guard = 1e-4;
  EXPECT_THROW(simulate(hold(Vector3d(0.6, 0.0, 0.0), 1.0), p, env, opt),
               SimulationDivergedError);
}

TEST(Simulate, RejectsInvalidParameters) {
  AdmittanceParams p;
  p.mass.x() = 0.0;
  EXPECT_THROW(simulate(hold(Vector3d::Zero(), 1.0), p, {}), ConfigError);
  SimOptions opt;
  opt.dt = 0.0;
  EXPECT_THROW(simulate(hold(Vector3d::Zero(), 1.0), {}, {}, opt), ConfigError);
  EnvironmentModel env;
  env.stiffness = -1.0;
  EXPECT_THROW(simulate(hold(Vector3d::Zero(), 1.0), {}, env), ConfigError);
}

TEST(Simulate, TraceSampledAtControlPeriod) {
  const SimTrace t = simulate(hold(Vector3d(0.6, 0.0, 0.01), 0.1), {}, {});
  ASSERT_EQ(t.size(), 51u);
  for (std::size_t k = 0; k < t.size(); ++k) {
    EXPECT_NEAR(t.time[k], 0.002 * static_cast<double>(k), 1e-12);
    EXPECT_TRUE((t.h_err[k] - (Vector3d(0, 0, -20.0) - t.h_e[k])).isZero(0.0));
  }
}

TEST(VerifyForceBounds, FlagsSamplesAfterTransient) {
  SimTrace t;
  t.time = {0.0, 0.1, 0.2, 0.3, 0.4};
  t.normal_force = {0.0, 90.0, 20.0, 0.5, 81.0};
  const auto v = verify_force_bounds(t, 1.0, 80.0, 0.15);
  ASSERT_EQ(v.size(), 2u);
  EXPECT_DOUBLE_EQ(v[0].time, 0.3);
  EXPECT_DOUBLE_EQ(v[1].force, 81.0);
  EXPECT_EQ(verify_force_bounds(t, 0.0, 100.0, 0.0).size(), 0u);
}

TEST(Reference, HoldsFirstPoseDuringSettle) {
  const PathSpec path = sine_path();
  const RobotModel model{Planar2R(unit_arm())};
  const PathDynamics dyn(model, path);
  PhasePlaneTrajectory ppt;
  ppt.lambda = {0.0, std::numbers::pi};
  ppt.lambdadot = {0.0, std::sqrt(2.0 * std::numbers::pi)};
  ppt.lambdaddot = {1.0, 0.0};
  ppt.time = {0.0, std::sqrt(2.0 * std::numbers::pi)};
  ppt.rows = {0, 0};
  const TorqueEnvelope env{Eigen::Vector2d(-9, -9), Eigen::Vector2d(9, 9),
                           WrenchProfile::zero({0.0, std::numbers::pi}), GammaMode::kLiteral};
  const JointTrajectory traj = to_joint_trajectory(ppt, dyn, env, 0.01);
  const Planar2R& arm = model.planar_2r();
  const TaskReference ref = reference_from_trajectory(traj, arm, 2, 0.0, 0.5);
  const Eigen::Vector2d p0 = arm.forward_kinematics(traj.q.row(0).transpose());
  EXPECT_EQ(ref.at(0.25), Vector3d(p0.x(), p0.y(), 0.0));
  EXPECT_NEAR(ref.duration(), 0.5 + traj.time.back(), 1e-12);
  EXPECT_THROW(reference_from_trajectory(traj, arm, 0, 0.0, 0.5), ConfigError);
}
