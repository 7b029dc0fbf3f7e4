#pragma once

// TOML run configuration. Relative file paths are resolved against the
// directory containing the configuration file.

#include "ctotp/admittance_sim.hpp"
#include "ctotp/dp_planner.hpp"
#include "ctotp/joint_trajectory.hpp"
#include "ctotp/path.hpp"
#include "ctotp/robot_model.hpp"
#include "ctotp/types.hpp"
#include "ctotp/wrench_constraints.hpp"

#include <toml.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace ctotp {

enum class PathSource { kJoint, kTask };
enum class WrenchKind { kNone, kContact, kTable };

struct ModelConfig {
  ModelKind kind = ModelKind::kPlanar2R;
  Planar2RParams planar;
  std::string table;  // sampled model CSV
};

struct PathConfig {
  PathSource source = PathSource::kJoint;
  std::string file;
  ElbowBranch branch = ElbowBranch::kUp;
  DiffScheme scheme = DiffScheme::kCubicSpline;
};

struct LimitsConfig {
  VectorXd torque_lower, torque_upper;
  VectorXd velocity_lower, velocity_upper;
};

struct WrenchConfig {
  WrenchKind kind = WrenchKind::kNone;
  ContactSpec contact;
  std::string file;          // tabulated profile CSV
  std::string normal_table;  // per-lambda normal force bounds CSV (contact)
  GammaMode mode = GammaMode::kLiteral;
};

struct SimulationConfig {
  AdmittanceParams params;
  EnvironmentModel environment;
  SimOptions options;
  double reference_height = 0.0;  // x_d along the contact axis
  double settle_time = 0.5;
  double transient_window = 0.5;
  double force_lower = 1.0, force_upper = 80.0;
};

struct OutputConfig {
  std::string dir = "out";
  double sample_dt = 0.01;
  NominalWrench nominal = NominalWrench::kMidpoint;
};

struct RunConfig {
  std::filesystem::path base_dir;
  ModelConfig model;
  PathConfig path;
  LimitsConfig limits;
  WrenchConfig wrench;
  PhaseGrid grid;
  SimulationConfig simulation;
  OutputConfig output;

  std::string resolve(const std::string& file) const {
    const std::filesystem::path p(file);
    return (p.is_absolute() ? p : base_dir / p).lexically_normal().string();
  }
};

namespace detail {

/// Typed accessors that report the dotted key path on failure.
class TomlSection {
 public:
  TomlSection(const toml::table* t, std::string prefix)
      : t_(t), prefix_(std::move(prefix)) {}

  bool present() const { return t_ != nullptr; }
  bool has(const std::string& key) const { return t_ && t_->contains(key); }
  std::string field(const std::string& key) const { return prefix_ + "." + key; }

  TomlSection section(const std::string& key) const {
    const toml::table* sub = t_ ? t_->get_as<toml::table>(key) : nullptr;
    if (t_ && t_->contains(key) && !sub) {
      throw ConfigError("expected a table", field(key));
    }
    return {sub, field(key)};
  }

  double number(const std::string& key, std::optional<double> fallback = {}) const {
    const toml::node* n = t_ ? t_->get(key) : nullptr;
    if (!n) return required(key, fallback);
    if (auto v = n->value<double>()) return *v;
    throw ConfigError("expected a number", field(key));
  }

  std::size_t count(const std::string& key, std::size_t fallback) const {
    const toml::node* n = t_ ? t_->get(key) : nullptr;
    if (!n) return fallback;
    const auto v = n->value<std::int64_t>();
    if (!v || *v <= 0) throw ConfigError("expected a positive integer", field(key));
    return static_cast<std::size_t>(*v);
  }

  std::string text(const std::string& key,
                   std::optional<std::string> fallback = {}) const {
    const toml::node* n = t_ ? t_->get(key) : nullptr;
    if (!n) {
      if (fallback) return *fallback;
      throw ConfigError("missing required key", field(key));
    }
    if (auto v = n->value<std::string>()) return *v;
    throw ConfigError("expected a string", field(key));
  }

  VectorXd vector(const std::string& key,
                  std::optional<VectorXd> fallback = {}) const {
    const toml::node* n = t_ ? t_->get(key) : nullptr;
    if (!n) {
      if (fallback) return *fallback;
      throw ConfigError("missing required key", field(key));
    }
    const toml::array* arr = n->as_array();
    if (!arr || arr->empty()) throw ConfigError("expected a non-empty array", field(key));
    VectorXd out(static_cast<Eigen::Index>(arr->size()));
    for (std::size_t i = 0; i < arr->size(); ++i) {
      const auto v = (*arr)[i].value<double>();
      if (!v) throw ConfigError("expected numeric array entries", field(key));
      out(static_cast<Eigen::Index>(i)) = *v;
    }
    return out;
  }

  Vector3d vector3(const std::string& key, const Vector3d& fallback) const {
    const VectorXd v = vector(key, VectorXd(fallback));
    if (v.size() != 3) throw ConfigError("expected 3 entries", field(key));
    return v;
  }

  template <class E>
  E choice(const std::string& key, E fallback,
           std::initializer_list<std::pair<const char*, E>> options) const {
    if (!has(key)) return fallback;
    const std::string s = text(key);
    for (const auto& [name, value] : options) {
      if (s == name) return value;
    }
    std::string names;
    for (const auto& o : options) names += std::string(names.empty() ? "" : ", ") + o.first;
    throw ConfigError("unknown value '" + s + "' (expected one of: " + names + ")",
                      field(key));
  }

 private:
  double required(const std::string& key, std::optional<double> fallback) const {
    if (fallback) return *fallback;
    throw ConfigError("missing required key", field(key));
  }

  const toml::table* t_;
  std::string prefix_;
};

inline int parse_axis(const TomlSection& s, const std::string& key, int fallback) {
  return s.choice<int>(key, fallback, {{"x", 0}, {"y", 1}, {"z", 2}});
}

template <class F>
void with_field(const std::string& field, F&& f) {
  try {
    f();
  } catch (const ConfigError& e) {
    if (!e.field().empty()) throw;
    throw ConfigError(e.message(), field);
  }
}

}  // namespace detail

inline RunConfig parse_config(const toml::table& root, std::filesystem::path base_dir) {
  RunConfig cfg;
  cfg.base_dir = std::move(base_dir);
  auto section = [&](const char* name) {
    const toml::table* t = root.get_as<toml::table>(name);
    if (root.contains(name) && !t) throw ConfigError("expected a table", name);
    return detail::TomlSection(t, name);
  };

  // [model]
  const auto model = section("model");
  if (!model.present()) throw ConfigError("missing section", "model");
  cfg.model.kind = model.choice<ModelKind>(
      "kind", ModelKind::kPlanar2R,
      {{"planar_2r", ModelKind::kPlanar2R}, {"sampled", ModelKind::kSampled}});
  if (cfg.model.kind == ModelKind::kPlanar2R) {
    Planar2RParams& p = cfg.model.planar;
    p.l1 = model.number("l1", p.l1);
    p.l2 = model.number("l2", p.l2);
    p.m1 = model.number("m1", p.m1);
    p.m2 = model.number("m2", p.m2);
    p.r1 = model.number("r1", p.r1);
    p.r2 = model.number("r2", p.r2);
    p.I1 = model.number("I1", p.I1);
    p.I2 = model.number("I2", p.I2);
    p.F1 = model.number("F1", p.F1);
    p.F2 = model.number("F2", p.F2);
    p.g0 = model.number("g0", p.g0);
    p.gravity = model.choice<GravityPlane>(
        "gravity", p.gravity,
        {{"in_plane", GravityPlane::kInPlane}, {"out_of_plane", GravityPlane::kOutOfPlane}});
    try {
      p.validate();
    } catch (const ConfigError& e) {
      throw ConfigError(e.message(), e.field().empty() ? "model" : "model." + e.field());
    }
  } else {
    cfg.model.table = model.text("table");
  }

  // [path]
  const auto path = section("path");
  if (!path.present()) throw ConfigError("missing section", "path");
  cfg.path.source = path.choice<PathSource>(
      "source", PathSource::kJoint, {{"joint", PathSource::kJoint}, {"task", PathSource::kTask}});
  cfg.path.file = path.text("file");
  cfg.path.branch = path.choice<ElbowBranch>(
      "branch", ElbowBranch::kUp, {{"elbow_up", ElbowBranch::kUp}, {"elbow_down", ElbowBranch::kDown}});
  cfg.path.scheme = path.choice<DiffScheme>(
      "scheme", DiffScheme::kCubicSpline,
      {{"cubic_spline", DiffScheme::kCubicSpline},
       {"central_difference", DiffScheme::kCentralDifference}});

  // [limits]
  const auto limits = section("limits");
  if (!limits.present()) throw ConfigError("missing section", "limits");
  cfg.limits.torque_lower = limits.vector("torque_lower");
  cfg.limits.torque_upper = limits.vector("torque_upper");
  cfg.limits.velocity_lower = limits.vector("velocity_lower");
  cfg.limits.velocity_upper = limits.vector("velocity_upper");
  const Eigen::Index n = cfg.limits.torque_lower.size();
  for (const char* key : {"torque_upper", "velocity_lower", "velocity_upper"}) {
    if (limits.vector(key).size() != n) {
      throw ConfigError("expected " + std::to_string(n) + " entries", limits.field(key));
    }
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    if (!(cfg.limits.torque_lower(j) < cfg.limits.torque_upper(j))) {
      throw ConfigError("torque_lower must be < torque_upper for joint " +
                            std::to_string(j + 1),
                        "limits.torque_lower");
    }
    if (!(cfg.limits.velocity_lower(j) < 0.0 && 0.0 < cfg.limits.velocity_upper(j))) {
      throw ConfigError("velocity limits must satisfy lower < 0 < upper for joint " +
                            std::to_string(j + 1),
                        "limits.velocity_lower");
    }
  }

  // [wrench]
  const auto wrench = section("wrench");
  cfg.wrench.kind = wrench.choice<WrenchKind>(
      "type", WrenchKind::kNone,
      {{"none", WrenchKind::kNone}, {"contact", WrenchKind::kContact}, {"table", WrenchKind::kTable}});
  cfg.wrench.mode = wrench.choice<GammaMode>(
      "gamma_mode", GammaMode::kLiteral,
      {{"literal", GammaMode::kLiteral}, {"box_corner", GammaMode::kBoxCorner}});
  if (cfg.wrench.kind == WrenchKind::kContact) {
    ContactSpec& c = cfg.wrench.contact;
    c.normal_axis = detail::parse_axis(wrench, "normal_axis", 2);
    c.mu = wrench.number("mu", 0.0);
    if (wrench.has("normal_table")) {
      cfg.wrench.normal_table = wrench.text("normal_table");
      c.normal = NormalForceBounds::constant(0.0, 0.0);
    } else {
      c.normal = NormalForceBounds::constant(wrench.number("normal_min"),
                                             wrench.number("normal_max"));
    }
    detail::with_field("wrench", [&] { c.validate(); });
  } else if (cfg.wrench.kind == WrenchKind::kTable) {
    cfg.wrench.file = wrench.text("file");
  }

  // [grid]
  const auto grid = section("grid");
  cfg.grid.n_lambda = grid.count("n_lambda", cfg.grid.n_lambda);
  cfg.grid.n_lambdadot = grid.count("n_lambdadot", cfg.grid.n_lambdadot);
  cfg.grid.lambdadot_max = grid.number("lambdadot_max", cfg.grid.lambdadot_max);
  detail::with_field("grid", [&] { cfg.grid.validate(); });

  // [simulation]
  const auto sim = section("simulation");
  SimulationConfig& s = cfg.simulation;
  s.params.mass = sim.vector3("mass", s.params.mass);
  s.params.damping = sim.vector3("damping", s.params.damping);
  s.params.stiffness = sim.vector3("stiffness", s.params.stiffness);
  s.params.desired_force = sim.number("desired_force", s.params.desired_force);
  s.environment.normal_axis =
      detail::parse_axis(sim, "contact_axis", cfg.wrench.contact.normal_axis);
  s.environment.surface = sim.number("surface", s.environment.surface);
  s.environment.stiffness = sim.number("contact_stiffness", s.environment.stiffness);
  s.environment.mu = sim.number("mu", cfg.wrench.contact.mu);
  s.options.dt = sim.number("dt", s.options.dt);
  s.options.divergence_guard = sim.number("guard", s.options.divergence_guard);
  s.reference_height = sim.number("reference_height", s.environment.surface);
  s.settle_time = sim.number("settle_time", s.settle_time);
  s.transient_window = sim.number("transient_window", s.transient_window);
  if (cfg.wrench.kind == WrenchKind::kContact && cfg.wrench.normal_table.empty()) {
    s.force_lower = cfg.wrench.contact.normal.lower.front();
    s.force_upper = cfg.wrench.contact.normal.upper.front();
  }
  s.force_lower = sim.number("force_min", s.force_lower);
  s.force_upper = sim.number("force_max", s.force_upper);
  detail::with_field("simulation", [&] {
    s.params.validate();
    s.environment.validate();
    if (!(s.options.dt > 0.0)) throw ConfigError("dt must be > 0");
    if (!(s.options.divergence_guard > 0.0)) throw ConfigError("guard must be > 0");
    if (!(s.settle_time >= 0.0)) throw ConfigError("settle_time must be >= 0");
    if (!(s.transient_window >= 0.0)) throw ConfigError("transient_window must be >= 0");
    if (!(s.force_lower <= s.force_upper)) throw ConfigError("force_min must be <= force_max");
  });

  // [output]
  const auto out = section("output");
  cfg.output.dir = out.text("dir", cfg.output.dir);
  cfg.output.sample_dt = out.number("sample_dt", cfg.output.sample_dt);
  if (!(cfg.output.sample_dt > 0.0)) {
    throw ConfigError("must be > 0", "output.sample_dt");
  }
  cfg.output.nominal = out.choice<NominalWrench>(
      "nominal_wrench", NominalWrench::kMidpoint,
      {{"midpoint", NominalWrench::kMidpoint}, {"lower", NominalWrench::kLower},
       {"upper", NominalWrench::kUpper}, {"zero", NominalWrench::kZero}});
  return cfg;
}

inline RunConfig load_config(const std::string& file) {
  toml::table root;
  try {
    root = toml::parse_file(file);
  } catch (const toml::parse_error& e) {
    throw ConfigError(std::string(e.description()) + " at line " +
                      std::to_string(e.source().begin.line), file);
  }
  return parse_config(root, std::filesystem::path(file).parent_path());
}

inline RunConfig config_from_string(const std::string& text,
                                    std::filesystem::path base_dir = ".") {
  toml::table root;
  try {
    root = toml::parse(text);
  } catch (const toml::parse_error& e) {
    throw ConfigError(std::string(e.description()) + " at line " +
                      std::to_string(e.source().begin.line), "<config>");
  }
  return parse_config(root, std::move(base_dir));
}

}  // namespace ctotp
