#pragma once

// Manipulator dynamic models for
//
//   tau = B(q) qdd + qd^T C(q) qd + F qd + g(q) + J^T(q) h_e
//
// where h_e is the wrench the end-effector exerts on the environment.
// Two kinds are supported: an analytic planar two-link arm, and tables of the
// path-projected coefficients sampled along a fixed path (for robots whose
// model lives outside this library).

#include "ctotp/csv.hpp"
#include "ctotp/types.hpp"

#include <array>
#include <cmath>
#include <string>
#include <variant>
#include <vector>

namespace ctotp {

enum class GravityPlane {
  /// Gravity acts along -y of the arm plane.
  kInPlane,
  /// Gravity is normal to the arm plane; g(q) == 0.
  kOutOfPlane,
};

struct Planar2RParams {
  double l1 = 0.5, l2 = 0.5;    // link lengths [m]
  double m1 = 1.0, m2 = 1.0;    // link masses [kg]
  double r1 = 0.25, r2 = 0.25;  // COM distance from the proximal joint [m]
  double I1 = 1.0 / 48.0;       // link inertia about the COM [kg m^2]
  double I2 = 1.0 / 48.0;
  double F1 = 0.0, F2 = 0.0;    // viscous friction [N m s/rad]
  double g0 = 9.81;
  GravityPlane gravity = GravityPlane::kOutOfPlane;

  void validate() const {
    auto positive = [](double v, const char* name) {
      if (!(v > 0.0) || !std::isfinite(v)) {
        throw ConfigError("must be strictly positive", name);
      }
    };
    positive(l1, "l1");
    positive(l2, "l2");
    positive(m1, "m1");
    positive(m2, "m2");
    positive(r1, "r1");
    positive(r2, "r2");
    positive(I1, "I1");
    positive(I2, "I2");
    if (!(F1 >= 0.0)) throw ConfigError("must be non-negative", "F1");
    if (!(F2 >= 0.0)) throw ConfigError("must be non-negative", "F2");
    if (!(g0 >= 0.0)) throw ConfigError("must be non-negative", "g0");
  }
};

/// Planar revolute-revolute arm moving in the base x-y plane; both joint
/// axes are parallel to base z.
class Planar2R {
 public:
  static constexpr Eigen::Index kDof = 2;

  explicit Planar2R(const Planar2RParams& p) : p_(p) { p_.validate(); }

  const Planar2RParams& params() const { return p_; }

  MatrixXd inertia(const VectorXd& q) const {
    const double c2 = std::cos(q(1));
    const double k = p_.m2 * p_.l1 * p_.r2;
    const double b22 = p_.I2 + p_.m2 * p_.r2 * p_.r2;
    const double b12 = b22 + k * c2;
    const double b11 = p_.I1 + p_.m1 * p_.r1 * p_.r1 + p_.I2 +
                       p_.m2 * (p_.l1 * p_.l1 + p_.r2 * p_.r2) + 2.0 * k * c2;
    MatrixXd B(2, 2);
    B << b11, b12, b12, b22;
    return B;
  }

  /// Partial derivatives dB/dq_k, k = 0, 1.
  std::array<MatrixXd, 2> inertia_partials(const VectorXd& q) const {
    const double h = p_.m2 * p_.l1 * p_.r2 * std::sin(q(1));
    MatrixXd d0 = MatrixXd::Zero(2, 2);
    MatrixXd d1(2, 2);
    d1 << -2.0 * h, -h, -h, 0.0;
    return {d0, d1};
  }

  /// Christoffel symbols of the first kind: result[i](j, k) = c_ijk with
  /// c_ijk = 1/2 (dB_ij/dq_k + dB_ik/dq_j - dB_jk/dq_i).
  std::array<MatrixXd, 2> christoffel(const VectorXd& q) const {
    const auto dB = inertia_partials(q);
    std::array<MatrixXd, 2> c{MatrixXd(2, 2), MatrixXd(2, 2)};
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k)
          c[i](j, k) = 0.5 * (dB[k](i, j) + dB[j](i, k) - dB[i](j, k));
    return c;
  }

  /// (v^T C(q) v)_i = sum_jk c_ijk v_j v_k.
  VectorXd coriolis_quadratic(const VectorXd& q, const VectorXd& v) const {
    const auto c = christoffel(q);
    VectorXd out(2);
    for (int i = 0; i < 2; ++i) out(i) = v.dot(c[i] * v);
    return out;
  }

  /// C(q, qd) with C_ij = sum_k c_ijk qd_k; Bdot - 2C is skew-symmetric.
  MatrixXd coriolis_matrix(const VectorXd& q, const VectorXd& qd) const {
    const auto c = christoffel(q);
    MatrixXd C(2, 2);
    for (int i = 0; i < 2; ++i) C.row(i) = (c[i] * qd).transpose();
    return C;
  }

  VectorXd gravity(const VectorXd& q) const {
    VectorXd g = VectorXd::Zero(2);
    if (p_.gravity == GravityPlane::kOutOfPlane) return g;
    const double c1 = std::cos(q(0));
    const double c12 = std::cos(q(0) + q(1));
    g(1) = p_.m2 * p_.r2 * p_.g0 * c12;
    g(0) = (p_.m1 * p_.r1 + p_.m2 * p_.l1) * p_.g0 * c1 + g(1);
    return g;
  }

  MatrixXd friction() const {
    MatrixXd F = MatrixXd::Zero(2, 2);
    F(0, 0) = p_.F1;
    F(1, 1) = p_.F2;
    return F;
  }

  Eigen::Vector2d forward_kinematics(const VectorXd& q) const {
    const double s12 = std::sin(q(0) + q(1)), c12 = std::cos(q(0) + q(1));
    return {p_.l1 * std::cos(q(0)) + p_.l2 * c12,
            p_.l1 * std::sin(q(0)) + p_.l2 * s12};
  }

  /// Geometric Jacobian, rows (vx, vy, vz, wx, wy, wz) in the base frame.
  Matrix6Xd jacobian(const VectorXd& q) const {
    const double s1 = std::sin(q(0)), c1 = std::cos(q(0));
    const double s12 = std::sin(q(0) + q(1)), c12 = std::cos(q(0) + q(1));
    Matrix6Xd J = Matrix6Xd::Zero(6, 2);
    J(0, 0) = -p_.l1 * s1 - p_.l2 * s12;
    J(1, 0) = p_.l1 * c1 + p_.l2 * c12;
    J(0, 1) = -p_.l2 * s12;
    J(1, 1) = p_.l2 * c12;
    J(5, 0) = 1.0;
    J(5, 1) = 1.0;
    return J;
  }

 private:
  Planar2RParams p_;
};

/// Path-projected coefficient tables a, b, c, g (N x n) and J (6 x n per
/// node) on a strictly increasing lambda grid.
struct SampledModel {
  std::vector<double> lambda;
  MatrixXd a, b, c, g;
  std::vector<Matrix6Xd> J;

  Eigen::Index dof() const { return a.cols(); }

  void validate() const {
    const auto n = static_cast<Eigen::Index>(lambda.size());
    if (n < 2) throw ConfigError("sampled model needs at least 2 rows");
    if (!detail::strictly_increasing(lambda)) {
      throw ConfigError("lambda grid must be strictly increasing");
    }
    if (a.cols() < 1) throw ConfigError("sampled model needs n >= 1 joints");
    for (const MatrixXd* m : {&a, &b, &c, &g}) {
      if (m->rows() != n || m->cols() != a.cols()) {
        throw DimensionError("sampled model tables have inconsistent shapes");
      }
      if (!m->allFinite()) throw ConfigError("sampled model has non-finite entries");
    }
    if (static_cast<Eigen::Index>(J.size()) != n) {
      throw DimensionError("sampled model Jacobian count differs from grid");
    }
    for (const auto& Jk : J) {
      if (Jk.cols() != a.cols()) {
        throw DimensionError("sampled model Jacobian has wrong column count");
      }
    }
  }

  /// Reads the table layout lambda, a_1..a_n, b_1..b_n, c_1..c_n, g_1..g_n,
  /// J_11..J_1n, J_21..J_6n (Jacobian row-major).
  static SampledModel from_table(const csv::Table& t) {
    const std::size_t cols = t.columns();
    if (cols < 11 || (cols - 1) % 10 != 0) {
      throw ConfigError("sampled model CSV must have 1 + 10n columns, got " +
                        std::to_string(cols));
    }
    const Eigen::Index n = static_cast<Eigen::Index>((cols - 1) / 10);
    const Eigen::Index rows = static_cast<Eigen::Index>(t.rows.size());
    SampledModel m;
    m.a.resize(rows, n);
    m.b.resize(rows, n);
    m.c.resize(rows, n);
    m.g.resize(rows, n);
    m.J.assign(static_cast<std::size_t>(rows), Matrix6Xd::Zero(6, n));
    for (Eigen::Index k = 0; k < rows; ++k) {
      const auto& r = t.rows[static_cast<std::size_t>(k)];
      m.lambda.push_back(r[0]);
      for (Eigen::Index j = 0; j < n; ++j) {
        m.a(k, j) = r[static_cast<std::size_t>(1 + j)];
        m.b(k, j) = r[static_cast<std::size_t>(1 + n + j)];
        m.c(k, j) = r[static_cast<std::size_t>(1 + 2 * n + j)];
        m.g(k, j) = r[static_cast<std::size_t>(1 + 3 * n + j)];
      }
      for (Eigen::Index row = 0; row < 6; ++row)
        for (Eigen::Index j = 0; j < n; ++j)
          m.J[static_cast<std::size_t>(k)](row, j) =
              r[static_cast<std::size_t>(1 + 4 * n + row * n + j)];
    }
    m.validate();
    return m;
  }

  static std::vector<std::string> table_header(Eigen::Index n) {
    std::vector<std::string> h{"lambda"};
    for (const char* p : {"a", "b", "c", "g"})
      for (Eigen::Index j = 1; j <= n; ++j)
        h.push_back(std::string(p) + "_" + std::to_string(j));
    for (int row = 1; row <= 6; ++row)
      for (Eigen::Index j = 1; j <= n; ++j)
        h.push_back("J_" + std::to_string(row) + std::to_string(j));
    return h;
  }

  void write(const std::string& path) const {
    csv::Writer w(path);
    w.header(table_header(dof()));
    for (std::size_t k = 0; k < lambda.size(); ++k) {
      const auto i = static_cast<Eigen::Index>(k);
      std::vector<double> r{lambda[k]};
      for (const MatrixXd* m : {&a, &b, &c, &g})
        for (Eigen::Index j = 0; j < dof(); ++j) r.push_back((*m)(i, j));
      for (Eigen::Index row = 0; row < 6; ++row)
        for (Eigen::Index j = 0; j < dof(); ++j) r.push_back(J[k](row, j));
      w.row(r);
    }
  }
};

enum class ModelKind { kPlanar2R, kSampled };

/// Immutable model handle. Evaluation at arbitrary configurations is only
/// available for the analytic kind.
class RobotModel {
 public:
  explicit RobotModel(Planar2R arm) : impl_(std::move(arm)) {}
  explicit RobotModel(SampledModel tables) : impl_(std::move(tables)) {
    std::get<SampledModel>(impl_).validate();
  }

  ModelKind kind() const {
    return std::holds_alternative<Planar2R>(impl_) ? ModelKind::kPlanar2R
                                                   : ModelKind::kSampled;
  }
  bool is_analytic() const { return kind() == ModelKind::kPlanar2R; }

  Eigen::Index dof() const {
    if (std::holds_alternative<Planar2R>(impl_)) return Planar2R::kDof;
    return std::get<SampledModel>(impl_).dof();
  }

  const Planar2R& planar_2r() const {
    if (const auto* arm = std::get_if<Planar2R>(&impl_)) return *arm;
    throw UnsupportedError("model is not a planar 2R arm");
  }

  const SampledModel& sampled() const {
    if (const auto* s = std::get_if<SampledModel>(&impl_)) return *s;
    throw UnsupportedError("model is not a sampled-table model");
  }

  MatrixXd inertia(const VectorXd& q) const { return arm(q).inertia(q); }
  VectorXd coriolis_quadratic(const VectorXd& q, const VectorXd& v) const {
    detail::require_dim(v.size(), dof(), "velocity");
    return arm(q).coriolis_quadratic(q, v);
  }
  VectorXd gravity(const VectorXd& q) const { return arm(q).gravity(q); }
  MatrixXd friction() const { return planar_2r().friction(); }

  Matrix6Xd eval_jacobian(const VectorXd& q) const { return arm(q).jacobian(q); }

  VectorXd eval_dynamics(const VectorXd& q, const VectorXd& qd,
                         const VectorXd& qdd, const Wrench& h_e) const {
    const Planar2R& a = arm(q);
    detail::require_dim(qd.size(), dof(), "qd");
    detail::require_dim(qdd.size(), dof(), "qdd");
    return a.inertia(q) * qdd + a.coriolis_quadratic(q, qd) +
           a.friction() * qd + a.gravity(q) +
           a.jacobian(q).transpose() * h_e.stacked();
  }

 private:
  const Planar2R& arm(const VectorXd& q) const {
    const auto* a = std::get_if<Planar2R>(&impl_);
    if (!a) {
      throw UnsupportedError(
          "sampled-table model cannot be evaluated at an arbitrary "
          "configuration");
    }
    detail::require_dim(q.size(), Planar2R::kDof, "q");
    return *a;
  }

  std::variant<Planar2R, SampledModel> impl_;
};

inline SampledModel load_sampled_table(const std::string& path) {
  return SampledModel::from_table(csv::read(path));
}

}  // namespace ctotp
