// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails.

#include "test_support.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>

using namespace ctotp;
using namespace ctotp::test;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond) pass = false;
    if (!detail.empty()) detail += "; ";
    detail += what + (cond ? "" : " [failed]");
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string slurp(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Relative paths of all CSV files below `dir`, sorted.
std::vector<fs::path> csv_files(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.path().extension() == ".csv") out.push_back(fs::relative(e.path(), dir));
  }
  std::sort(out.begin(), out.end());
  return out;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("ctotp_acceptance_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

PhaseGrid make_grid(std::size_t nl, std::size_t nld, double end, double ld_max) {
  PhaseGrid g;
  g.n_lambda = nl;
  g.n_lambdadot = nld;
  g.lambda_end = end;
  g.lambdadot_max = ld_max;
  return g;
}

/// Every trajectory produced along the way, for the boundary-condition check.
std::vector<std::pair<std::string, PhasePlaneTrajectory>>& produced() {
  static std::vector<std::pair<std::string, PhasePlaneTrajectory>> all;
  return all;
}

void keep(const std::string& name, const PhasePlaneTrajectory& t) {
  produced().emplace_back(name, t);
}

Verdict projection_identity() {
  Verdict v;
  const auto start = Clock::now();
  const RobotModel model{Planar2R(loaded_arm())};
  const PathSpec path = sine_path();
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double l = uniform(0.0, std::numbers::pi);
    const double ld = uniform(0.0, 3.0), ldd = uniform(-5.0, 5.0);
    const PathPoint p = path.eval(l);
    const DynamicsCoefficients c = project_point(model, p);
    const VectorXd qd = p.dq * ld;
    const VectorXd qdd = p.dq * ldd + p.ddq * ld * ld;
    const VectorXd direct = model.eval_dynamics(p.q, qd, qdd, Wrench{});
    worst = std::max(worst, (c.motion_torque(ldd, ld) - direct).cwiseAbs().maxCoeff());
  }
  const double elapsed = seconds_since(start);
  v.require(worst <= 1e-9, "max |tau_projected - tau_direct| = " + fmt("%.3g", worst));
  v.require(elapsed < 1.0, "runtime " + fmt("%.3g", elapsed) + " s");
  return v;
}

Verdict zero_wrench_reduction() {
  Verdict v;
  const fs::path dir = scratch("zero_wrench");
  const RunConfig cfg = load_config(demo("writing_no_wrench.toml"));
  run(cfg, RunMode::kPlanCompare, dir);
  const auto aware = csv_files(dir / "wrench_aware");
  const auto blind = csv_files(dir / "wrench_blind");
  v.require(!aware.empty() && aware == blind, std::to_string(aware.size()) + " files each");
  std::size_t identical = 0;
  for (const auto& f : aware) {
    if (slurp(dir / "wrench_aware" / f) == slurp(dir / "wrench_blind" / f)) ++identical;
  }
  v.require(identical == aware.size(),
            std::to_string(identical) + " byte-identical (ppt, joint_traj, envelopes, limits)");
  fs::remove_all(dir);
  return v;
}

double bang_bang(std::size_t nl, std::size_t nld) {
  const PhaseGrid g = make_grid(nl, nld, 1.0, 1.2);
  ProjectedDynamics pd(g.columns(), 1);
  for (std::size_t k = 0; k < pd.size(); ++k) {
    DynamicsCoefficients c = pd.at(k);
    c.a(0) = 1.0;
    pd.set(k, c);
  }
  const ModifiedTorqueLimits lim = unmodified_limits(
      VectorXd::Constant(1, -1.0), VectorXd::Constant(1, 1.0), pd.lambda());
  const PhasePlaneTrajectory t =
      plan(PlanningProblem(pd, lim, std::vector<VelocityLimit>(pd.size())), g);
  keep("bang-bang " + std::to_string(nl) + "x" + std::to_string(nld), t);
  return t.total_time();
}

Verdict bang_bang_oracle() {
  Verdict v;
  const auto start = Clock::now();
  const double coarse = bang_bang(200, 400);
  const double fine = bang_bang(400, 800);
  const double elapsed = seconds_since(start);
  const double e1 = std::abs(coarse - 2.0) / 2.0, e2 = std::abs(fine - 2.0) / 2.0;
  v.require(e1 <= 0.03, "200x400 t_f=" + fmt("%.6g", coarse) + " err " + fmt("%.3g%%", 100 * e1));
  v.require(e2 <= 0.015, "400x800 t_f=" + fmt("%.6g", fine) + " err " + fmt("%.3g%%", 100 * e2));
  v.require(e2 <= e1, "monotone improvement");
  v.require(elapsed < 30.0, "runtime " + fmt("%.3g", elapsed) + " s");
  return v;
}

Verdict brute_force_equivalence() {
  Verdict v;
  std::size_t feasible = 0, infeasible = 0, mismatches = 0;
  for (int attempt = 0; attempt < 400 && feasible < 25; ++attempt) {
    const auto nl = static_cast<std::size_t>(uniform(2.0, 10.999));
    const auto nld = static_cast<std::size_t>(uniform(2.0, 10.999));
    const PhaseGrid g = make_grid(nl, nld, uniform(0.3, 2.0), uniform(0.5, 3.0));
    const Eigen::Index dof = attempt % 2 == 0 ? 1 : 2;
    ProjectedDynamics pd(g.columns(), dof);
    for (std::size_t k = 0; k < pd.size(); ++k) {
      DynamicsCoefficients c = pd.at(k);
      c.a = random_vector(dof, -2.0, 2.0);
      c.b = random_vector(dof, -1.0, 1.0);
      c.c = random_vector(dof, 0.0, 0.5);
      c.g = random_vector(dof, -1.0, 1.0);
      pd.set(k, c);
    }
    const ModifiedTorqueLimits lim = unmodified_limits(
        VectorXd::Constant(dof, -4.0), VectorXd::Constant(dof, 4.0), pd.lambda());
    std::vector<VelocityLimit> vel(pd.size());
    for (auto& x : vel) x.value = uniform(1.0, 4.0);
    const PlanningProblem problem(pd, lim, vel);
    std::optional<PhasePlaneTrajectory> dp, bf;
    std::optional<std::size_t> dp_col, bf_col;
    try {
      dp = plan(problem, g);
    } catch (const InfeasiblePlanError& e) {
      dp_col = e.blocking_column();
    }
    try {
      bf = brute_force_plan(problem, g);
    } catch (const InfeasiblePlanError& e) {
      bf_col = e.blocking_column();
    }
    if (dp && bf) {
      ++feasible;
      if (dp->total_time() != bf->total_time()) ++mismatches;
      keep("random tiny " + std::to_string(attempt), *dp);
      keep("random tiny brute force " + std::to_string(attempt), *bf);
    } else {
      ++infeasible;
      if (dp.has_value() != bf.has_value() || dp_col != bf_col) ++mismatches;
    }
  }
  v.require(feasible >= 20, std::to_string(feasible) + " feasible instances");
  v.require(mismatches == 0, std::to_string(mismatches) + " cost mismatches (" +
                                 std::to_string(infeasible) + " infeasible, same failure)");
  return v;
}

struct DemoPlans {
  PlanningSetup writing;
  PlanOutcome writing_with, writing_without;
  PlanningSetup relaxing;
  PlanOutcome relaxing_with, relaxing_without;
};

const DemoPlans& demo_plans() {
  static const DemoPlans plans = [] {
    DemoPlans d;
    const RunConfig w = load_config(demo("writing.toml"));
    d.writing = prepare(w);
    d.writing_with = plan_run(d.writing, true, w.output);
    d.writing_without = plan_run(d.writing, false, w.output);
    const RunConfig r = load_config(demo("relaxing.toml"));
    d.relaxing = prepare(r);
    d.relaxing_with = plan_run(d.relaxing, true, r.output);
    d.relaxing_without = plan_run(d.relaxing, false, r.output);
    keep("writing wrench-aware", d.writing_with.ppt());
    keep("writing wrench-blind", d.writing_without.ppt());
    keep("relaxing wrench-aware", d.relaxing_with.ppt());
    keep("relaxing wrench-blind", d.relaxing_without.ppt());
    return d;
  }();
  return plans;
}

double worst_excess(const std::vector<EnvelopeViolation>& v) {
  double worst = 0.0;
  for (const auto& e : v) worst = std::max(worst, e.excess);
  return worst;
}

Verdict envelope_respect() {
  Verdict v;
  const DemoPlans& d = demo_plans();
  const auto aware = envelope_violations(d.writing_with.nodes, kEnvelopeTolerance);
  const auto relaxing = envelope_violations(d.relaxing_with.nodes, kEnvelopeTolerance);
  const auto blind = envelope_violations(d.writing_without.nodes, kEnvelopeTolerance);
  v.require(aware.empty() && relaxing.empty(),
            "wrench-aware samples outside envelope: writing " + std::to_string(aware.size()) +
                ", relaxing " + std::to_string(relaxing.size()) + " (tol 1e-6 N m)");
  v.require(!blind.empty(), "wrench-blind writing samples outside envelope: " +
                                std::to_string(blind.size()) + ", worst " +
                                fmt("%.4g", worst_excess(blind)) + " N m");
  return v;
}

Verdict ppt_dominance() {
  Verdict v;
  const DemoPlans& d = demo_plans();
  const double with = d.writing_with.ppt().total_time();
  const double without = d.writing_without.ppt().total_time();
  v.require(with >= without, "writing t_f with " + fmt("%.6g", with) + " s >= without " +
                                 fmt("%.6g", without) + " s");
  const auto& a = d.relaxing_with.solution.max_reachable_lambdadot;
  const auto& b = d.relaxing_without.solution.max_reachable_lambdadot;
  std::size_t higher = 0;
  for (std::size_t k = 0; k < a.size() && k < b.size(); ++k) {
    if (a[k] > b[k]) ++higher;
  }
  v.require(higher >= 1, "relaxing columns with higher reachable lambdadot: " +
                             std::to_string(higher) + " of " + std::to_string(a.size()));
  return v;
}

Verdict admittance_steady_state() {
  Verdict v;
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    AdmittanceParams p;
    p.stiffness.z() = uniform(200.0, 6000.0);
    p.desired_force = uniform(5.0, 60.0);
    EnvironmentModel env;
    env.stiffness = uniform(2.0e3, 5.0e4);
    const double x_d = uniform(-0.002, 0.001);
    const Vector3d x(0.5, 0.1, x_d);
    const SimTrace t = simulate(TaskReference{{0.0, 8.0}, {x, x}}, p, env);
    // K_P z = h_e - h_d, h_e = -k_e (x_e - x_d + z) along the normal
    Eigen::Matrix2d a;
    a << p.stiffness.z(), -1.0, env.stiffness, 1.0;
    const Eigen::Vector2d sol =
        a.partialPivLu().solve(Eigen::Vector2d(p.desired_force, -env.stiffness * (env.surface - x_d)));
    const double expected = -sol(1);
    worst = std::max(worst, std::abs(t.normal_force.back() - expected) / expected);
  }
  v.require(worst <= 1e-3, "20 random triples, worst relative error " + fmt("%.3g", worst));

  const RunConfig cfg = load_config(demo("writing.toml"));
  const DemoPlans& d = demo_plans();
  const SimTrace trace = simulate_plan(d.writing, d.writing_with, cfg.simulation);
  const auto bad = verify_force_bounds(trace, 1.0, 80.0, 0.5);
  double lo = kInfinity, hi = -kInfinity;
  for (std::size_t k = 0; k < trace.size(); ++k) {
    if (trace.time[k] < 0.5) continue;
    lo = std::min(lo, trace.normal_force[k]);
    hi = std::max(hi, trace.normal_force[k]);
  }
  v.require(bad.empty() && trace.time.back() > 0.5,
            "writing demo force after 0.5 s in [" + fmt("%.4g", lo) + ", " + fmt("%.4g", hi) +
                "] N, bounds [1, 80] N");
  return v;
}

Verdict boundary_conditions() {
  Verdict v;
  std::size_t bad = 0;
  std::string first_bad;
  for (const auto& [name, t] : produced()) {
    bool ok = t.size() >= 1 && t.lambdadot.front() == 0.0 && t.lambdadot.back() == 0.0;
    for (std::size_t k = 1; k < t.size(); ++k) ok = ok && t.lambda[k] > t.lambda[k - 1];
    if (!ok) {
      ++bad;
      if (first_bad.empty()) first_bad = name;
    }
  }
  v.require(!produced().empty() && bad == 0,
            std::to_string(produced().size()) + " trajectories checked" +
                (first_bad.empty() ? "" : ", first failing: " + first_bad));
  return v;
}

Verdict determinism() {
  Verdict v;
  std::size_t files = 0, identical = 0;
  const std::vector<std::pair<const char*, RunMode>> runs{
      {"writing.toml", RunMode::kPlanSimulate},
      {"writing.toml", RunMode::kPlanCompare},
      {"relaxing.toml", RunMode::kPlanCompare}};
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const RunConfig cfg = load_config(demo(runs[i].first));
    const fs::path a = scratch("repeat_a"), b = scratch("repeat_b");
    run(cfg, runs[i].second, a);
    run(cfg, runs[i].second, b);
    const auto fa = csv_files(a);
    if (fa != csv_files(b)) v.require(false, "file sets differ for " + std::string(runs[i].first));
    for (const auto& f : fa) {
      ++files;
      if (slurp(a / f) == slurp(b / f)) ++identical;
    }
    if (slurp(a / "report.txt") != slurp(b / "report.txt")) {
      v.require(false, "report differs for " + std::string(runs[i].first));
    }
    fs::remove_all(a);
    fs::remove_all(b);
  }
  v.require(files > 0 && identical == files,
            std::to_string(identical) + "/" + std::to_string(files) +
                " CSV artifacts byte-identical across repeated runs");
  return v;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"projection identity", projection_identity},
      {"zero-wrench reduction", zero_wrench_reduction},
      {"bang-bang oracle", bang_bang_oracle},
      {"brute-force DP equivalence", brute_force_equivalence},
      {"torque-envelope respect", envelope_respect},
      {"PPT dominance direction", ppt_dominance},
      {"admittance steady state and force bounds", admittance_steady_state},
      {"boundary conditions", boundary_conditions},
      {"determinism and idempotence", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail = std::string("exception: ") + e.what();
    }
    if (!v.pass) ++failed;
    std::printf("%s %zu %s: %s\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                v.detail.c_str());
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
