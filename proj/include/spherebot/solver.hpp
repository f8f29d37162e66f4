#pragma once

// Controlled equations of motion of the ball-with-pendulum system.
//
// With Q the torque the motor applies to the pendulum (and -Q to the shell),
// the shell and pendulum momentum balances with the reactions eliminated read
//
//   J dOmega + R_o^2 k x (dOmega x k) - R_o R_t k x (domega x n)
//       = R_o R_t k x (omega x dn) - Q
//   i domega + j (domega.n) n + R_t^2 n x (domega x n) - R_o R_t n x (dOmega x k)
//       = -j (omega.n) dn - R_t^2 n x (omega x dn) + R_t n x k + Q
//   dn = omega x n
//
// with J = diag(I + M R_o^2, I + M R_o^2, I). Rolling ties the contact-point
// acceleration a to the shell through dOmega = (a x k) / R_o.

#include <Eigen/Core>

#include "spherebot/core.hpp"

namespace spherebot {

using Matrix9 = Eigen::Matrix<double, 9, 9>;
using Vector9 = Eigen::Matrix<double, 9, 1>;

/// Inverse-dynamics system F y = A in the unknowns y = (domega, dn, Q).
/// Rows 0-2: shell balance, rows 3-5: pendulum balance, rows 6-8: dn = omega x n.
struct LinearSystem {
  Matrix9 F = Matrix9::Zero();
  Vector9 A = Vector9::Zero();
};

/// Above this pivot ratio the inverse-dynamics matrix is treated as singular.
inline constexpr double kMaxConditionEstimate = 1e12;

/// dOmega = (a x k) / R_o. Throws std::invalid_argument if a has a vertical
/// component.
Vec3 prescribed_shell_rate(const Vec3& a, const SystemParams& params);

LinearSystem assemble(const FullState& state, const Vec3& Omega_dot,
                      const SystemParams& params);

struct InverseDynamics {
  Vec3 omega_dot;
  Vec3 n_dot;
  Vec3 Q;
  double condition = 1.0;  ///< max/min pivot magnitude of the factorization
};

/// Torque and pendulum rates that make the contact point accelerate with a.
/// Throws InfeasibleConfiguration when F is singular or its pivot ratio
/// exceeds kMaxConditionEstimate.
InverseDynamics inverse_dynamics(const FullState& state, const Vec3& a,
                                 const SystemParams& params);

/// Same as inverse_dynamics with the shell angular acceleration given
/// directly instead of the contact-point acceleration.
InverseDynamics inverse_dynamics_for_shell_rate(const FullState& state,
                                                const Vec3& Omega_dot,
                                                const SystemParams& params);

/// det F at the given configuration (F does not depend on Omega or dOmega).
double inverse_dynamics_determinant(const FullState& state, const SystemParams& params);

struct StateRates {
  Vec3 Omega_dot;
  Vec3 omega_dot;
  Vec3 n_dot;
};

/// State derivatives under a known torque. Solved as a 6x6 system in
/// (dOmega, domega) with dn = omega x n substituted, so rolling holds by
/// construction. Throws InfeasibleConfiguration if the system is singular.
StateRates forward_dynamics(const FullState& state, const Vec3& Q, const SystemParams& params);

/// Residuals of the shell and pendulum balances (first and last three
/// entries), evaluated directly in vector form.
Eigen::Matrix<double, 6, 1> motion_residual(const FullState& state, const Vec3& Omega_dot,
                                            const Vec3& omega_dot, const Vec3& n_dot,
                                            const Vec3& Q, const SystemParams& params);

}  // namespace spherebot
