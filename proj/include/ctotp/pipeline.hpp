#pragma once

// End-to-end runs driven by a RunConfig: plan, plan-compare, plan-simulate.

#include "ctotp/admittance_sim.hpp"
#include "ctotp/config.hpp"
#include "ctotp/csv.hpp"
#include "ctotp/dp_planner.hpp"
#include "ctotp/joint_trajectory.hpp"
#include "ctotp/limits.hpp"
#include "ctotp/path.hpp"
#include "ctotp/projected_dynamics.hpp"
#include "ctotp/robot_model.hpp"
#include "ctotp/wrench_constraints.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace ctotp {

enum class RunMode { kPlan, kPlanCompare, kPlanSimulate };

/// Envelope tolerance for planned torques [N m].
inline constexpr double kEnvelopeTolerance = 1e-6;

/// Everything derived from the configuration before planning.
struct PlanningSetup {
  std::unique_ptr<RobotModel> model;
  PathSpec path;
  PhaseGrid grid;
  ProjectedDynamics projected;  // on the grid columns
  std::vector<VelocityLimit> velocity;
  TorqueEnvelope envelope;      // raw limits plus the wrench profile on the columns
};

inline RobotModel load_model(const RunConfig& cfg) {
  if (cfg.model.kind == ModelKind::kPlanar2R) {
    return RobotModel(Planar2R(cfg.model.planar));
  }
  const std::string file = cfg.resolve(cfg.model.table);
  if (!std::filesystem::exists(file)) {
    throw ConfigError("file not found: " + file, "model.table");
  }
  try {
    return RobotModel(load_sampled_table(file));
  } catch (const ConfigError& e) {
    throw ConfigError(e.message(), "model.table");
  }
}

inline PathSpec load_path(const RunConfig& cfg, const RobotModel& model) {
  const std::string file = cfg.resolve(cfg.path.file);
  if (!std::filesystem::exists(file)) {
    throw ConfigError("file not found: " + file, "path.file");
  }
  try {
    const csv::Table t = csv::read(file);
    if (t.columns() < 2) throw ConfigError("path table needs lambda plus coordinates");
    const std::vector<double> lambda = t.column(0);
    const auto n = static_cast<Eigen::Index>(t.rows.size());
    const auto m = static_cast<Eigen::Index>(t.columns() - 1);
    MatrixXd values(n, m);
    for (Eigen::Index k = 0; k < n; ++k)
      for (Eigen::Index j = 0; j < m; ++j)
        values(k, j) = t.rows[static_cast<std::size_t>(k)][static_cast<std::size_t>(j + 1)];
    if (cfg.path.source == PathSource::kTask) {
      if (m != 2) throw ConfigError("task path table needs columns lambda, x, y");
      return build_path(lambda, planar_ik({lambda, values}, model, cfg.path.branch),
                        cfg.path.scheme);
    }
    if (m != model.dof()) {
      throw ConfigError("joint path has " + std::to_string(m) + " joints, model has " +
                        std::to_string(model.dof()));
    }
    return build_path(lambda, values, cfg.path.scheme);
  } catch (const ConfigError& e) {
    if (!e.field().empty() && e.field() != file) throw;
    throw ConfigError(e.message(), "path.file");
  } catch (const UnsupportedError& e) {
    throw ConfigError(e.what(), "path.source");
  }
}

inline WrenchProfile load_wrench_profile(const RunConfig& cfg, const PathSpec& path,
                                         const ProjectedDynamics& projected) {
  const std::vector<double>& columns = projected.lambda();
  switch (cfg.wrench.kind) {
    case WrenchKind::kNone:
      return WrenchProfile::zero(columns);
    case WrenchKind::kContact: {
      ContactSpec contact = cfg.wrench.contact;
      if (!cfg.wrench.normal_table.empty()) {
        const std::string file = cfg.resolve(cfg.wrench.normal_table);
        if (!std::filesystem::exists(file)) {
          throw ConfigError("file not found: " + file, "wrench.normal_table");
        }
        try {
          contact.normal = NormalForceBounds::from_table(csv::read(file));
        } catch (const ConfigError& e) {
          throw ConfigError(e.message(), "wrench.normal_table");
        }
      }
      try {
        const auto tangents = motion_tangents(projected, path, contact.normal_axis);
        return contact_wrench_bounds(contact, columns, tangents);
      } catch (const ConfigError& e) {
        throw ConfigError(e.message(), "wrench");
      }
    }
    case WrenchKind::kTable: {
      const std::string file = cfg.resolve(cfg.wrench.file);
      if (!std::filesystem::exists(file)) {
        throw ConfigError("file not found: " + file, "wrench.file");
      }
      try {
        return WrenchProfile::from_table(csv::read(file)).resample(columns);
      } catch (const ConfigError& e) {
        throw ConfigError(e.message(), "wrench.file");
      }
    }
  }
  return WrenchProfile::zero(columns);
}

/// Loads model, path and limits; `with_wrench` false replaces the wrench
/// profile by zero bounds.
inline PlanningSetup prepare(const RunConfig& cfg, bool with_wrench = true) {
  PlanningSetup s;
  s.model = std::make_unique<RobotModel>(load_model(cfg));
  const RobotModel& model = *s.model;
  s.path = load_path(cfg, model);
  detail::require_dim(cfg.limits.torque_lower.size(), model.dof(), "limits.torque_lower");
  if (!model.is_analytic()) {
    const auto& table = model.sampled().lambda;
    if (std::abs(table.front()) > 1e-12 ||
        std::abs(table.back() - s.path.length()) > 1e-9 * std::max(1.0, s.path.length())) {
      throw ConfigError("sampled model must cover the path lambda range", "model.table");
    }
  }

  s.grid = cfg.grid;
  s.grid.lambda_end = s.path.length();
  const std::vector<double> columns = s.grid.columns();
  s.projected = project_dynamics(model, s.path, columns);
  s.velocity = velocity_limits(s.path, columns, cfg.limits.velocity_lower,
                               cfg.limits.velocity_upper);
  s.envelope.tau_lower = cfg.limits.torque_lower;
  s.envelope.tau_upper = cfg.limits.torque_upper;
  s.envelope.mode = cfg.wrench.mode;
  s.envelope.profile = with_wrench ? load_wrench_profile(cfg, s.path, s.projected)
                                   : WrenchProfile::zero(columns);
  return s;
}

struct PlanOutcome {
  bool wrench_aware = true;
  ModifiedTorqueLimits planning_limits;
  ModifiedTorqueLimits envelope_limits;
  DpSolution solution;
  JointTrajectory samples;  // uniform in time
  JointTrajectory nodes;    // one sample per planned node
  std::vector<EnvelopeViolation> violations;

  const PhasePlaneTrajectory& ppt() const { return solution.trajectory; }
};

/// Plans on the setup's grid. The wrench-blind planner uses the raw limits;
/// both outcomes are checked against the modified-limit envelope.
inline PlanOutcome plan_run(const PlanningSetup& s, bool wrench_aware,
                            const OutputConfig& out) {
  PlanOutcome r;
  r.wrench_aware = wrench_aware;
  r.envelope_limits = modified_torque_limits(s.envelope.tau_lower, s.envelope.tau_upper,
                                             s.envelope.profile, s.projected,
                                             s.envelope.mode);
  if (wrench_aware) {
    r.planning_limits = r.envelope_limits;
  } else {
    r.planning_limits = unmodified_limits(s.envelope.tau_lower, s.envelope.tau_upper,
                                          s.projected.lambda());
  }
  r.solution = solve_dp(PlanningProblem(s.projected, r.planning_limits, s.velocity), s.grid);
  const PathDynamics dyn(*s.model, s.path);
  if (r.ppt().total_time() > 0.0) {
    r.samples = to_joint_trajectory(r.ppt(), dyn, s.envelope,
                                    std::min(out.sample_dt, r.ppt().total_time()),
                                    out.nominal);
  } else {
    r.samples = node_trajectory(r.ppt(), dyn, s.envelope, out.nominal);
  }
  r.nodes = node_trajectory(r.ppt(), dyn, s.envelope, out.nominal);
  r.violations = envelope_violations(r.nodes, kEnvelopeTolerance);
  return r;
}

// ---------------------------------------------------------------------------
// Artifacts

namespace detail {

inline std::vector<std::string> joint_names(const std::string& prefix, Eigen::Index n) {
  std::vector<std::string> out;
  for (Eigen::Index j = 1; j <= n; ++j) out.push_back(prefix + std::to_string(j));
  return out;
}

inline void append(std::vector<std::string>& a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
}

inline void append_row(std::vector<double>& r, const MatrixXd& m, Eigen::Index i) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
}

}  // namespace detail

inline void write_ppt(const std::string& file, const PhasePlaneTrajectory& ppt) {
  csv::Writer w(file);
  w.header({"lambda", "lambdadot", "lambdaddot", "t"});
  for (std::size_t k = 0; k < ppt.size(); ++k) {
    w.row({ppt.lambda[k], ppt.lambdadot[k], ppt.lambdaddot[k], ppt.time[k]});
  }
}

inline void write_joint_trajectory(const std::string& file, const JointTrajectory& t) {
  const Eigen::Index n = t.q.cols();
  std::vector<std::string> h{"t", "lambda"};
  detail::append(h, detail::joint_names("q", n));
  detail::append(h, detail::joint_names("qd", n));
  detail::append(h, detail::joint_names("qdd", n));
  detail::append(h, detail::joint_names("tau", n));
  csv::Writer w(file);
  w.header(h);
  for (std::size_t s = 0; s < t.size(); ++s) {
    const auto i = static_cast<Eigen::Index>(s);
    std::vector<double> r{t.time[s], t.lambda[s]};
    detail::append_row(r, t.q, i);
    detail::append_row(r, t.qd, i);
    detail::append_row(r, t.qdd, i);
    detail::append_row(r, t.tau, i);
    w.row(r);
  }
}

inline void write_envelopes(const std::string& file, const ModifiedTorqueLimits& m) {
  const Eigen::Index n = m.lower.cols();
  std::vector<std::string> h{"lambda"};
  detail::append(h, detail::joint_names("tau_lower", n));
  detail::append(h, detail::joint_names("tau_upper", n));
  csv::Writer w(file);
  w.header(h);
  for (std::size_t k = 0; k < m.lambda.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    std::vector<double> r{m.lambda[k]};
    detail::append_row(r, m.lower, i);
    detail::append_row(r, m.upper, i);
    w.row(r);
  }
}

/// Per column: velocity ceiling, acceleration bounds at rest and the highest
/// pseudo-velocity the planner could reach.
inline void write_limits(const std::string& file, const PlanningSetup& s,
                         const PlanOutcome& r) {
  const PlanningProblem problem(s.projected, r.planning_limits, s.velocity);
  csv::Writer w(file);
  w.header({"lambda", "lambdadot_max", "accel_lower_at_rest", "accel_upper_at_rest",
            "max_reachable_lambdadot"});
  for (std::size_t i = 0; i < problem.columns(); ++i) {
    const AccelBounds b = accel_bounds(problem.node(i), 0.0);
    w.row({problem.lambda()[i], problem.lambdadot_max(i), b.lower, b.upper,
           r.solution.max_reachable_lambdadot[i]});
  }
}

inline void write_plan_artifacts(const std::filesystem::path& dir, const PlanningSetup& s,
                                 const PlanOutcome& r) {
  std::filesystem::create_directories(dir);
  write_ppt((dir / "ppt.csv").string(), r.ppt());
  write_joint_trajectory((dir / "joint_traj.csv").string(), r.samples);
  write_envelopes((dir / "envelopes.csv").string(), r.envelope_limits);
  write_limits((dir / "limits.csv").string(), s, r);
}

inline void write_ppt_compare(const std::string& file, const PlanOutcome& with,
                              const PlanOutcome& without) {
  csv::Writer w(file);
  w.header({"lambda", "lambdadot_with_wrench", "lambdadot_without_wrench", "difference",
            "max_reachable_with_wrench", "max_reachable_without_wrench"});
  for (std::size_t k = 0; k < with.ppt().size(); ++k) {
    const double a = with.ppt().lambdadot[k], b = without.ppt().lambdadot[k];
    w.row({with.ppt().lambda[k], a, b, a - b, with.solution.max_reachable_lambdadot[k],
           without.solution.max_reachable_lambdadot[k]});
  }
}

inline void write_sim_trace(const std::string& file, const SimTrace& t) {
  csv::Writer w(file);
  w.header({"t", "x_d_x", "x_d_y", "x_d_z", "x_c_x", "x_c_y", "x_c_z", "h_e_normal",
            "h_e_tangential", "h_err_x", "h_err_y", "h_err_z"});
  for (std::size_t k = 0; k < t.size(); ++k) {
    const Vector3d& xd = t.x_d[k];
    const Vector3d& xc = t.x_c[k];
    const Vector3d& he = t.h_err[k];
    w.row({t.time[k], xd.x(), xd.y(), xd.z(), xc.x(), xc.y(), xc.z(), t.normal_force[k],
           t.tangential_force[k], he.x(), he.y(), he.z()});
  }
}

// ---------------------------------------------------------------------------
// Report

struct PptDifference {
  double max_abs = 0.0;
  double mean_abs = 0.0;
  std::size_t lower_with_wrench = 0;   // columns where the wrench-aware PPT is lower
  std::size_t higher_with_wrench = 0;
  std::size_t reach_higher_with_wrench = 0;  // columns with higher max reachable
};

inline PptDifference ppt_difference(const PlanOutcome& with, const PlanOutcome& without) {
  PptDifference d;
  const std::size_t n = with.ppt().size();
  for (std::size_t k = 0; k < n; ++k) {
    const double diff = with.ppt().lambdadot[k] - without.ppt().lambdadot[k];
    d.max_abs = std::max(d.max_abs, std::abs(diff));
    d.mean_abs += std::abs(diff);
    if (diff < 0.0) ++d.lower_with_wrench;
    if (diff > 0.0) ++d.higher_with_wrench;
    if (with.solution.max_reachable_lambdadot[k] >
        without.solution.max_reachable_lambdadot[k]) {
      ++d.reach_higher_with_wrench;
    }
  }
  if (n > 0) d.mean_abs /= static_cast<double>(n);
  return d;
}

class Report {
 public:
  void line(const std::string& key, const std::string& value) {
    text_ += key + ": " + value + "\n";
  }
  void line(const std::string& key, double value) { line(key, csv::format(value)); }
  void line(const std::string& key, std::size_t value) { line(key, std::to_string(value)); }
  void blank() { text_ += "\n"; }

  void violations(const std::string& prefix, const std::vector<EnvelopeViolation>& v) {
    line(prefix + "_violations", v.size());
    if (v.empty()) return;
    const auto worst = std::max_element(
        v.begin(), v.end(), [](const auto& a, const auto& b) { return a.excess < b.excess; });
    line(prefix + "_max_excess", worst->excess);
    line(prefix + "_worst_lambda", worst->lambda);
    line(prefix + "_worst_joint", worst->joint + 1);
    line(prefix + "_first_lambda", v.front().lambda);
  }

  void plan(const std::string& prefix, const PlanOutcome& r) {
    line(prefix + "_final_time", r.ppt().total_time());
    line(prefix + "_nodes", r.ppt().size());
    violations(prefix, r.violations);
  }

  const std::string& text() const { return text_; }

  void write(const std::string& file) const {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + file);
    out << text_;
  }

 private:
  std::string text_;
};

inline std::string grid_label(const PhaseGrid& g) {
  return std::to_string(g.n_lambda) + " x " + std::to_string(g.n_lambdadot);
}

struct ForceVerdict {
  std::size_t checked = 0;
  double min_force = 0.0, max_force = 0.0;
  std::vector<ForceViolation> violations;

  bool ok() const { return violations.empty(); }
};

inline ForceVerdict check_forces(const SimTrace& trace, const SimulationConfig& s) {
  ForceVerdict v;
  v.min_force = kInfinity;
  v.max_force = -kInfinity;
  for (std::size_t k = 0; k < trace.size(); ++k) {
    if (trace.time[k] < s.transient_window) continue;
    ++v.checked;
    v.min_force = std::min(v.min_force, trace.normal_force[k]);
    v.max_force = std::max(v.max_force, trace.normal_force[k]);
  }
  v.violations =
      verify_force_bounds(trace, s.force_lower, s.force_upper, s.transient_window);
  return v;
}

/// Task-space reference for the planar 2R from the planned joint samples.
inline SimTrace simulate_plan(const PlanningSetup& s, const PlanOutcome& r,
                              const SimulationConfig& sim) {
  const TaskReference ref =
      reference_from_trajectory(r.samples, s.model->planar_2r(), sim.environment.normal_axis,
                                sim.reference_height, sim.settle_time);
  return simulate(ref, sim.params, sim.environment, sim.options);
}

struct RunResult {
  int exit_code = 0;
  std::string report;
};

/// Executes one pipeline run and writes its artifacts below `out_dir`.
/// `wrench_blind` plans plan/plan-simulate runs with the raw limits and a
/// zero wrench profile.
inline RunResult run(const RunConfig& cfg, RunMode mode, const std::filesystem::path& out_dir,
                     bool wrench_blind = false) {
  std::filesystem::create_directories(out_dir);
  Report rep;
  RunResult result;
  const std::string report_file = (out_dir / "report.txt").string();

  if (mode == RunMode::kPlanCompare) {
    const PlanningSetup s = prepare(cfg, !wrench_blind);
    rep.line("mode", "plan-compare");
    rep.line("grid", grid_label(s.grid));
    rep.line("path_length", s.path.length());
    const PlanOutcome with = plan_run(s, true, cfg.output);
    const PlanOutcome without = plan_run(s, false, cfg.output);
    write_plan_artifacts(out_dir / "wrench_aware", s, with);
    write_plan_artifacts(out_dir / "wrench_blind", s, without);
    write_ppt_compare((out_dir / "ppt_compare.csv").string(), with, without);
    rep.line("final_time_with_wrench", with.ppt().total_time());
    rep.line("final_time_without_wrench", without.ppt().total_time());
    rep.line("final_time_difference", with.ppt().total_time() - without.ppt().total_time());
    const PptDifference d = ppt_difference(with, without);
    rep.line("ppt_max_abs_difference", d.max_abs);
    rep.line("ppt_mean_abs_difference", d.mean_abs);
    rep.line("ppt_columns_lower_with_wrench", d.lower_with_wrench);
    rep.line("ppt_columns_higher_with_wrench", d.higher_with_wrench);
    rep.line("reach_columns_higher_with_wrench", d.reach_higher_with_wrench);
    rep.violations("wrench_aware", with.violations);
    rep.violations("wrench_blind", without.violations);
    rep.write(report_file);
    result.report = rep.text();
    return result;
  }

  const PlanningSetup s = prepare(cfg, !wrench_blind);
  const PlanOutcome r = plan_run(s, !wrench_blind, cfg.output);
  write_plan_artifacts(out_dir, s, r);
  rep.line("mode", mode == RunMode::kPlan ? "plan" : "plan-simulate");
  rep.line("planner", wrench_blind ? "wrench-blind" : "wrench-aware");
  rep.line("grid", grid_label(s.grid));
  rep.line("path_length", s.path.length());
  rep.plan("plan", r);

  if (mode == RunMode::kPlanSimulate) {
    const SimTrace trace = simulate_plan(s, r, cfg.simulation);
    write_sim_trace((out_dir / "sim_trace.csv").string(), trace);
    const ForceVerdict v = check_forces(trace, cfg.simulation);
    rep.line("sim_duration", trace.time.empty() ? 0.0 : trace.time.back());
    rep.line("sim_transient_window", cfg.simulation.transient_window);
    rep.line("force_bounds", csv::format(cfg.simulation.force_lower) + " .. " +
                                 csv::format(cfg.simulation.force_upper));
    rep.line("force_samples_checked", v.checked);
    if (v.checked > 0) {
      rep.line("force_min", v.min_force);
      rep.line("force_max", v.max_force);
    }
    rep.line("force_violations", v.violations.size());
    rep.line("force_verdict", v.ok() ? "within bounds" : "out of bounds");
    if (!v.ok()) result.exit_code = 4;
  }
  rep.write(report_file);
  result.report = rep.text();
  return result;
}

}  // namespace ctotp
