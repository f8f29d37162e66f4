#include "spherebot/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/LU>
#include <fmt/format.h>

namespace spherebot {
namespace {

Eigen::Matrix3d skew(const Vec3& v) {
  Eigen::Matrix3d m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return m;
}

Eigen::Matrix3d shell_inertia(const SystemParams& p) {
  const double lateral = p.I + p.M * p.R_o * p.R_o;
  return Eigen::Vector3d(lateral, lateral, p.I).asDiagonal();
}

// k x (w x k): horizontal projection.
Eigen::Matrix3d horizontal_projector() {
  return Eigen::Vector3d(1.0, 1.0, 0.0).asDiagonal();
}

// i I + j n n^T - R_t^2 [n]^2 : pendulum inertia about the shell center,
// acting on domega.
Eigen::Matrix3d pendulum_inertia(const Vec3& n, const SystemParams& p) {
  const Eigen::Matrix3d N = skew(n);
  return p.i * Eigen::Matrix3d::Identity() + p.j * n * n.transpose() -
         p.R_t * p.R_t * N * N;
}

template <typename Lu>
double pivot_ratio(const Lu& lu) {
  const auto pivots = lu.matrixLU().diagonal().cwiseAbs();
  const double smallest = pivots.minCoeff();
  if (!(smallest > 0.0)) return std::numeric_limits<double>::infinity();
  return pivots.maxCoeff() / smallest;
}

}  // namespace

Vec3 prescribed_shell_rate(const Vec3& a, const SystemParams& params) {
  if (a.z() != 0.0) {
    throw std::invalid_argument(
        fmt::format("contact-point acceleration must be horizontal, a_z = {}", a.z()));
  }
  return a.cross(vertical()) / params.R_o;
}

LinearSystem assemble(const FullState& s, const Vec3& Omega_dot, const SystemParams& p) {
  const Vec3 k = vertical();
  const Eigen::Matrix3d K = skew(k);
  const Eigen::Matrix3d N = skew(s.n);
  const Eigen::Matrix3d W = skew(s.omega);
  const Eigen::Matrix3d Id = Eigen::Matrix3d::Identity();
  const double c = p.coupling();

  LinearSystem sys;
  auto& F = sys.F;
  // shell
  F.block<3, 3>(0, 0) = c * K * N;
  F.block<3, 3>(0, 3) = -c * K * W;
  F.block<3, 3>(0, 6) = Id;
  // pendulum
  F.block<3, 3>(3, 0) = pendulum_inertia(s.n, p);
  F.block<3, 3>(3, 3) = p.j * s.omega.dot(s.n) * Id + p.R_t * p.R_t * N * W;
  F.block<3, 3>(3, 6) = -Id;
  // kinematics
  F.block<3, 3>(6, 3) = Id;

  sys.A.segment<3>(0) = -shell_inertia(p) * Omega_dot -
                        p.R_o * p.R_o * horizontal_projector() * Omega_dot;
  sys.A.segment<3>(3) = p.R_t * s.n.cross(k) + c * s.n.cross(Omega_dot.cross(k));
  sys.A.segment<3>(6) = s.omega.cross(s.n);
  return sys;
}

InverseDynamics inverse_dynamics_for_shell_rate(const FullState& s, const Vec3& Omega_dot,
                                                const SystemParams& p) {
  const LinearSystem sys = assemble(s, Omega_dot, p);
  const Eigen::PartialPivLU<Matrix9> lu(sys.F);
  const double condition = pivot_ratio(lu);
  if (!(condition <= kMaxConditionEstimate)) {
    throw InfeasibleConfiguration(fmt::format(
        "inverse-dynamics matrix is singular or ill-conditioned (pivot ratio {:.3g}); "
        "requires i + m R_t^2 > m R_o R_t",
        condition));
  }
  const Vector9 y = lu.solve(sys.A);
  return {y.segment<3>(0), y.segment<3>(3), y.segment<3>(6), condition};
}

InverseDynamics inverse_dynamics(const FullState& s, const Vec3& a, const SystemParams& p) {
  return inverse_dynamics_for_shell_rate(s, prescribed_shell_rate(a, p), p);
}

double inverse_dynamics_determinant(const FullState& s, const SystemParams& p) {
  return assemble(s, Vec3::Zero(), p).F.determinant();
}

StateRates forward_dynamics(const FullState& s, const Vec3& Q, const SystemParams& p) {
  const Vec3 k = vertical();
  const double c = p.coupling();
  const Vec3 n_dot = s.omega.cross(s.n);
  const Vec3 gyro = s.omega.cross(n_dot);

  Eigen::Matrix<double, 6, 6> mass;
  mass.block<3, 3>(0, 0) = shell_inertia(p) + p.R_o * p.R_o * horizontal_projector();
  mass.block<3, 3>(0, 3) = c * skew(k) * skew(s.n);
  mass.block<3, 3>(3, 0) = c * skew(s.n) * skew(k);
  mass.block<3, 3>(3, 3) = pendulum_inertia(s.n, p);

  Eigen::Matrix<double, 6, 1> rhs;
  rhs.segment<3>(0) = c * k.cross(gyro) - Q;
  rhs.segment<3>(3) = -p.j * s.omega.dot(s.n) * n_dot - p.R_t * p.R_t * s.n.cross(gyro) +
                      p.R_t * s.n.cross(k) + Q;

  const Eigen::PartialPivLU<Eigen::Matrix<double, 6, 6>> lu(mass);
  if (!(pivot_ratio(lu) <= kMaxConditionEstimate)) {
    throw InfeasibleConfiguration("forward-dynamics mass matrix is singular");
  }
  const Eigen::Matrix<double, 6, 1> x = lu.solve(rhs);
  return {x.segment<3>(0), x.segment<3>(3), n_dot};
}

Eigen::Matrix<double, 6, 1> motion_residual(const FullState& s, const Vec3& Omega_dot,
                                            const Vec3& omega_dot, const Vec3& n_dot,
                                            const Vec3& Q, const SystemParams& p) {
  const Vec3 k = vertical();
  const Vec3& n = s.n;
  const double c = p.coupling();
  const double lateral = p.I + p.M * p.R_o * p.R_o;
  const Vec3 J_dOmega(lateral * Omega_dot.x(), lateral * Omega_dot.y(), p.I * Omega_dot.z());

  Eigen::Matrix<double, 6, 1> r;
  r.segment<3>(0) = J_dOmega + p.R_o * p.R_o * k.cross(Omega_dot.cross(k)) -
                    c * k.cross(omega_dot.cross(n)) - c * k.cross(s.omega.cross(n_dot)) + Q;
  r.segment<3>(3) = p.i * omega_dot + p.j * omega_dot.dot(n) * n +
                    p.R_t * p.R_t * n.cross(omega_dot.cross(n)) -
                    c * n.cross(Omega_dot.cross(k)) + p.j * s.omega.dot(n) * n_dot +
                    p.R_t * p.R_t * n.cross(s.omega.cross(n_dot)) - p.R_t * n.cross(k) - Q;
  return r;
}

}  // namespace spherebot
