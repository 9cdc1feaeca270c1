#ifndef ADINAV_KALMAN_HPP
#define ADINAV_KALMAN_HPP

// Open-loop, loosely coupled 15-state error-state Kalman filter.
//
// Error convention: every error is "mechanized minus true", so the corrected
// solution is the mechanized one minus the estimate. State layout:
//
//   [0,3)   position error  (north m, east m, height-up m)
//   [3,6)   velocity error  NED [m/s]
//   [6,9)   attitude error  psi, with C_mech = (I + [psi x]) C_true  [rad]
//   [9,12)  accelerometer bias, body axes [m/s^2]
//   [12,15) gyro bias, body axes [rad/s]
//
// IMU measurements are modelled as truth + bias + white noise.

#include "adinav/ins.hpp"
#include "adinav/pose.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace adinav::kf {

inline constexpr int kStates = 15;
inline constexpr int kPos = 0;
inline constexpr int kVel = 3;
inline constexpr int kAtt = 6;
inline constexpr int kAccelBias = 9;
inline constexpr int kGyroBias = 12;
inline constexpr int kMeas = 6;

using StateVector = Eigen::Matrix<double, kStates, 1>;
using Covariance = Eigen::Matrix<double, kStates, kStates>;
using SystemMatrix = Eigen::Matrix<double, kStates, kStates>;

struct ErrorState {
  StateVector x = StateVector::Zero();

  auto position() { return x.segment<3>(kPos); }
  auto velocity() { return x.segment<3>(kVel); }
  auto attitude() { return x.segment<3>(kAtt); }
  auto accel_bias() { return x.segment<3>(kAccelBias); }
  auto gyro_bias() { return x.segment<3>(kGyroBias); }
  Vec3 position() const { return x.segment<3>(kPos); }
  Vec3 velocity() const { return x.segment<3>(kVel); }
  Vec3 attitude() const { return x.segment<3>(kAtt); }
  Vec3 accel_bias() const { return x.segment<3>(kAccelBias); }
  Vec3 gyro_bias() const { return x.segment<3>(kGyroBias); }
};

/// Position + velocity fix from the aiding INS.
struct AidingMeasurement {
  geodesy::GeodeticPosition pos;
  Vec3 velocity = Vec3::Zero();  // NED [m/s]
  double timestamp = 0.0;
  /// Per-channel standard deviations; non-positive entries fall back to the
  /// filter configuration.
  Vec3 pos_sigma = Vec3::Constant(-1.0);  // north, east, up [m]
  Vec3 vel_sigma = Vec3::Constant(-1.0);  // [m/s]
};

struct FilterConfig {
  ins::MechanizationOptions mechanization;

  // Continuous white-noise densities.
  double accel_noise = 1e-2;       // [m/s^2/sqrt(Hz)]
  double gyro_noise = 1e-4;        // [rad/s/sqrt(Hz)]
  double accel_bias_walk = 1e-5;   // [m/s^3/sqrt(Hz)]
  double gyro_bias_walk = 1e-7;    // [rad/s^2/sqrt(Hz)]

  double aiding_pos_sigma = 0.05;  // [m]
  double aiding_vel_sigma = 0.05;  // [m/s]

  // Initial 1-sigma uncertainty.
  double init_pos_sigma = 0.05;
  double init_vel_sigma = 0.05;
  double init_att_sigma = 1e-3;
  double init_accel_bias_sigma = 0.1;
  double init_gyro_bias_sigma = 1e-3;

  /// Normalized innovation squared above which a fix is rejected; <= 0 disables the gate.
  double innovation_gate = 0.0;
  /// Aiding fixes farther than this from an IMU epoch are skipped [s].
  double time_tolerance = 5e-3;
};

/// Continuous-time error dynamics F evaluated at a mechanized state.
/// f_ib_n is the specific force resolved in NED. Throws LatitudeNearPole.
SystemMatrix system_matrix(const ins::NavState& nav, const Vec3& f_ib_n,
                           const ins::MechanizationOptions& opt = {});

/// Continuous process noise spectral density.
Covariance process_noise(const ins::NavState& nav, const FilterConfig& cfg);

Covariance initial_covariance(const FilterConfig& cfg);

/// Symmetrizes P and repairs round-off negative eigenvalues. Throws
/// CovarianceNotPSD when the most negative eigenvalue is below
/// -1e-9 * max|eigenvalue|.
template <int N>
void enforce_covariance(Eigen::Matrix<double, N, N>& p) {
  p = 0.5 * (p + p.transpose()).eval();
  Eigen::LDLT<Eigen::Matrix<double, N, N>> ldlt(p);
  if (ldlt.info() == Eigen::Success && (ldlt.vectorD().array() >= 0.0).all()) return;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, N, N>> eig(p);
  const auto& d = eig.eigenvalues();
  const double scale = std::max(d.cwiseAbs().maxCoeff(), 1e-300);
  if (d.minCoeff() < -1e-9 * scale) {
    throw Error(ErrorCode::CovarianceNotPSD,
                "covariance eigenvalue " + std::to_string(d.minCoeff()) + " is negative");
  }
  if (d.minCoeff() < 0.0) {
    const auto v = eig.eigenvectors();
    p = v * d.cwiseMax(0.0).asDiagonal() * v.transpose();
    p = 0.5 * (p + p.transpose()).eval();
  }
}

/// Phi = I + F tau;  x <- Phi x;  P <- Phi P Phi^T + Q tau.
template <int N>
void predict(Eigen::Matrix<double, N, 1>& x, Eigen::Matrix<double, N, N>& p,
             const Eigen::Matrix<double, N, N>& f, const Eigen::Matrix<double, N, N>& q, double tau) {
  if (!(tau > 0.0)) throw Error(ErrorCode::NonMonotonicTime, "predict needs tau > 0");
  const Eigen::Matrix<double, N, N> phi = Eigen::Matrix<double, N, N>::Identity() + f * tau;
  x = (phi * x).eval();
  p = (phi * p * phi.transpose() + q * tau).eval();
  enforce_covariance(p);
}

template <int M>
struct UpdateOutcome {
  bool accepted = false;
  Eigen::Matrix<double, M, 1> innovation = Eigen::Matrix<double, M, 1>::Zero();
  Eigen::Matrix<double, M, M> innovation_cov = Eigen::Matrix<double, M, M>::Zero();
  double nis = 0.0;  // normalized innovation squared
};

/// Measurement update for z = H x + noise(R) with Joseph-form covariance.
/// When gate > 0 and the NIS exceeds it, x and P are left untouched.
template <int N, int M>
UpdateOutcome<M> update(Eigen::Matrix<double, N, 1>& x, Eigen::Matrix<double, N, N>& p,
                        const Eigen::Matrix<double, M, 1>& z, const Eigen::Matrix<double, M, N>& h,
                        const Eigen::Matrix<double, M, M>& r, double gate = 0.0) {
  UpdateOutcome<M> out;
  out.innovation = z - h * x;
  out.innovation_cov = h * p * h.transpose() + r;
  const Eigen::LDLT<Eigen::Matrix<double, M, M>> s_inv(out.innovation_cov);
  out.nis = out.innovation.dot(s_inv.solve(out.innovation));
  if (gate > 0.0 && !(out.nis <= gate)) return out;
  const Eigen::Matrix<double, N, M> k = s_inv.solve(h * p).transpose();
  x += k * out.innovation;
  const Eigen::Matrix<double, N, N> i_kh = Eigen::Matrix<double, N, N>::Identity() - k * h;
  p = (i_kh * p * i_kh.transpose() + k * r * k.transpose()).eval();
  enforce_covariance(p);
  out.accepted = true;
  return out;
}

/// Measured error of `nav` against an aiding fix: [pos (N, E, up) m; vel m/s].
Eigen::Matrix<double, kMeas, 1> aiding_residual(const ins::NavState& nav, const AidingMeasurement& meas,
                                                const geodesy::EarthModel& earth = {});

/// Position/velocity update of the 15-state filter. Rejections by the gate
/// leave (state, p) unchanged and are reported through the outcome.
UpdateOutcome<kMeas> update_with_aiding(ErrorState& state, Covariance& p, const AidingMeasurement& meas,
                                        const ins::NavState& nav, const FilterConfig& cfg);

/// Mechanized solution minus the estimated errors. `nav` itself is not
/// modified by the filter (open loop).
ins::NavState correct_output(const ins::NavState& nav, const ErrorState& state,
                             const geodesy::EarthModel& earth = {});

struct InnovationRecord {
  double timestamp = 0.0;
  Eigen::Matrix<double, kMeas, 1> innovation;
  Eigen::Matrix<double, kMeas, 1> sigma;  // sqrt(diag S)
  double nis = 0.0;
  bool accepted = false;
};

struct IntegrationResult {
  std::vector<ins::NavState> mechanized;  // raw open-loop solution, [0] = initial
  std::vector<ins::NavState> corrected;   // same epochs as `mechanized`
  std::vector<InnovationRecord> innovations;
  ErrorState final_state;
  Covariance final_covariance = Covariance::Zero();
  std::size_t updates_accepted = 0;
  std::size_t updates_rejected = 0;
  std::size_t aiding_unmatched = 0;
};

/// Mechanizes the IMU stream from `initial` and runs the open-loop filter with
/// the aiding fixes. Throws EmptyStream, NonMonotonicTime.
IntegrationResult run_integration(const ins::NavState& initial, std::span<const ins::ImuSample> imu,
                                  std::span<const AidingMeasurement> aiding, const FilterConfig& cfg);

/// Body-in-local-tangent pose of a navigation state.
RigidTransform pose_in_frame(const ins::NavState& nav, const geodesy::LocalTangentFrame& frame);

/// Poses of a navigation solution (one per epoch) in the tangent frame.
PoseTrajectory to_pose_trajectory(std::span<const ins::NavState> states,
                                  const geodesy::LocalTangentFrame& frame);

/// Poses interpolated at the given sensor timestamps. Throws PoseGap.
PoseTrajectory poses_at(std::span<const ins::NavState> states, const geodesy::LocalTangentFrame& frame,
                        std::span<const double> timestamps, double tolerance = 1e-3);

}  // namespace adinav::kf

#endif  // ADINAV_KALMAN_HPP
