#include "test_support.hpp"

#include <gtest/gtest.h>

using namespace ctotp;
using namespace ctotp::test;

namespace {

PhasePlaneTrajectory two_nodes(double lambda_end, double ld0, double ldd) {
  PhasePlaneTrajectory t;
  const double ld1 = std::sqrt(ld0 * ld0 + 2.0 * ldd * lambda_end);
  t.lambda = {0.0, lambda_end};
  t.lambdadot = {ld0, ld1};
  t.lambdaddot = {ldd, 0.0};
  t.time = {0.0, transition_cost(ld0, ld1, lambda_end)};
  t.rows = {0, 0};
  return t;
}

TorqueEnvelope open_envelope(Eigen::Index dof, const std::vector<double>& lambda) {
  return {VectorXd::Constant(dof, -100.0), VectorXd::Constant(dof, 100.0),
          WrenchProfile::zero(lambda), GammaMode::kLiteral};
}

double max_fd_error(const JointTrajectory& t, double dt) {
  double worst = 0.0;
  for (Eigen::Index s = 1; s + 2 < t.q.rows(); ++s) {
    const VectorXd fd = (t.q.row(s + 1) - t.q.row(s - 1)).transpose() / (2.0 * dt);
    worst = std::max(worst, (fd - t.qd.row(s).transpose()).cwiseAbs().maxCoeff());
  }
  return worst;
}

}  // namespace

TEST(JointTrajectory, ConstantPseudoVelocityOnStraightLine) {
  std::vector<double> lambda(11);
  MatrixXd q(11, 2);
  const Eigen::Vector2d start(0.2, -0.1), dir(0.5, 0.3);
  for (int k = 0; k < 11; ++k) {
    lambda[static_cast<std::size_t>(k)] = 0.1 * k;
    q.row(k) = (start + 0.1 * k * dir).transpose();
  }
  lambda.back() = 1.0;
  const PathSpec path = build_path(lambda, q, DiffScheme::kCubicSpline);
  const RobotModel model{Planar2R(unit_arm())};
  const PathDynamics dyn(model, path);
  const JointTrajectory t =
      to_joint_trajectory(two_nodes(1.0, 0.5, 0.0), dyn, open_envelope(2, lambda), 0.1);
  ASSERT_EQ(t.size(), 21u);
  for (std::size_t s = 0; s < t.size(); ++s) {
    const auto i = static_cast<Eigen::Index>(s);
    EXPECT_NEAR(t.qd(i, 0), 0.25, 1e-12);
    EXPECT_NEAR(t.qd(i, 1), 0.15, 1e-12);
    EXPECT_NEAR(t.qdd.row(i).norm(), 0.0, 1e-10);
  }
}

TEST(JointTrajectory, FiniteDifferenceOfPositionsMatchesVelocities) {
  const PathSpec path = sine_path();
  const RobotModel model{Planar2R(loaded_arm())};
  const PathDynamics dyn(model, path);
  const PhasePlaneTrajectory ppt = two_nodes(std::numbers::pi, 0.0, 1.0);
  const auto env = open_envelope(2, {0.0, std::numbers::pi});
  const double e1 = max_fd_error(to_joint_trajectory(ppt, dyn, env, 0.01), 0.01);
  const double e2 = max_fd_error(to_joint_trajectory(ppt, dyn, env, 0.005), 0.005);
  EXPECT_LT(e1, 1e-3);
  EXPECT_GT(e1 / e2, 3.0) << e1 << " " << e2;
}

TEST(JointTrajectory, SampleTimesAndEndpoints) {
  const PathSpec path = sine_path();
  const RobotModel model{Planar2R(loaded_arm())};
  const PathDynamics dyn(model, path);
  const PhasePlaneTrajectory ppt = two_nodes(std::numbers::pi, 0.0, 1.0);
  const JointTrajectory t =
      to_joint_trajectory(ppt, dyn, open_envelope(2, {0.0, std::numbers::pi}), 0.05);
  EXPECT_EQ(t.time.front(), 0.0);
  EXPECT_EQ(t.time.back(), ppt.total_time());
  for (std::size_t s = 1; s + 1 < t.size(); ++s) {
    EXPECT_NEAR(t.time[s] - t.time[s - 1], 0.05, 1e-12);
  }
  EXPECT_EQ(t.lambda.back(), std::numbers::pi);
  EXPECT_NEAR((t.q.row(0) - path.eval(0.0).q.transpose()).norm(), 0.0, 1e-12);
}

TEST(JointTrajectory, SampleIntervalLongerThanTrajectory) {
  const PathSpec path = sine_path();
  const RobotModel model{Planar2R(loaded_arm())};
  const PathDynamics dyn(model, path);
  const PhasePlaneTrajectory ppt = two_nodes(std::numbers::pi, 0.0, 1.0);
  const auto env = open_envelope(2, {0.0, std::numbers::pi});
  EXPECT_THROW(to_joint_trajectory(ppt, dyn, env, 10.0), ConfigError);
  EXPECT_THROW(to_joint_trajectory(ppt, dyn, env, 0.0), ConfigError);
}

TEST(JointTrajectory, PlannedNodesStayInsideModifiedEnvelope) {
  const PathSpec path = sine_path();
  const RobotModel model{Planar2R(loaded_arm())};
  const PathDynamics dyn(model, path);
  PhaseGrid g;
  g.n_lambda = 80;
  g.n_lambdadot = 160;
  g.lambda_end = std::numbers::pi;
  g.lambdadot_max = 2.0;
  const ProjectedDynamics pd = dyn.sample(g.columns());
  const auto n = static_cast<Eigen::Index>(pd.size());
  MatrixXd lo = MatrixXd::Zero(n, 6), hi = MatrixXd::Zero(n, 6);
  lo.col(0).setConstant(-8.0);
  hi.col(0).setConstant(5.0);
  lo.col(1).setConstant(2.0);
  hi.col(1).setConstant(6.0);
  const WrenchProfile profile(pd.lambda(), lo, hi);
  const Eigen::Vector2d tlo(-40.0, -25.0), thi(40.0, 25.0);
  const ModifiedTorqueLimits lim = modified_torque_limits(tlo, thi, profile, pd);
  const auto vel = velocity_limits(path, pd.lambda(), Eigen::Vector2d(-3.0, -3.0),
                                   Eigen::Vector2d(3.0, 3.0));
  const PhasePlaneTrajectory ppt = plan(PlanningProblem(pd, lim, vel), g);
  const TorqueEnvelope env{tlo, thi, profile, GammaMode::kLiteral};
  const JointTrajectory nodes = node_trajectory(ppt, dyn, env);
  EXPECT_TRUE(envelope_violations(nodes, 1e-6).empty());
  for (std::size_t k = 0; k < ppt.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    EXPECT_NEAR(nodes.envelope_lower(i, 0), lim.lower(i, 0), 1e-12);
    EXPECT_NEAR(nodes.envelope_upper(i, 1), lim.upper(i, 1), 1e-12);
  }
  // the wrench torque is added on top of the motion torque
  const DynamicsCoefficients c = dyn.at(ppt.lambda[10]);
  Vector6d mid = Vector6d::Zero();
  mid(0) = -1.5;
  mid(1) = 4.0;
  const VectorXd extra = c.J.transpose() * mid;
  const VectorXd added = (nodes.tau.row(10) - nodes.tau_motion.row(10)).transpose();
  EXPECT_TRUE(added.isApprox(extra, 1e-12));
}

TEST(JointTrajectory, ViolationsReportJointAndExcess) {
  JointTrajectory t;
  t.lambda = {0.0, 1.0};
  t.tau_motion = MatrixXd::Zero(2, 2);
  t.envelope_lower = MatrixXd::Constant(2, 2, -1.0);
  t.envelope_upper = MatrixXd::Constant(2, 2, 1.0);
  t.tau_motion(1, 1) = 1.5;
  const auto v = envelope_violations(t, 1e-6);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].sample, 1u);
  EXPECT_EQ(v[0].joint, 1u);
  EXPECT_DOUBLE_EQ(v[0].excess, 0.5);
}
