#ifndef ADINAV_INS_HPP
#define ADINAV_INS_HPP

// Strapdown mechanization in the local navigation (NED) frame.
//
// Specific-force convention: the accelerometer senses the reaction to gravity,
// so a level, stationary IMU reads f_ib^b = (0, 0, -g) in forward-right-down
// body axes (i.e. +g "up"). C_b^n f_ib^b + g^n = 0 in that case.

#include "adinav/geodesy.hpp"

#include <span>
#include <vector>

namespace adinav::ins {

using geodesy::GeodeticPosition;

struct ImuSample {
  Vec3 specific_force = Vec3::Zero();  // f_ib^b [m/s^2]
  Vec3 angular_rate = Vec3::Zero();    // omega_ib^b [rad/s]
  double timestamp = 0.0;              // [s]; sample covers (previous, timestamp]
};

struct NavState {
  GeodeticPosition pos;
  Vec3 velocity = Vec3::Zero();      // v_eb^n [m/s], NED
  Mat3 c_b_n = Mat3::Identity();     // body-to-nav DCM
  double timestamp = 0.0;
};

struct MechanizationOptions {
  geodesy::EarthModel earth;
  /// Switch earth rotation / transport rate terms off (test harnesses and
  /// flat-earth comparisons).
  bool earth_rate = true;
  bool transport_rate = true;
  /// Largest |omega| * tau accepted by the first-order attitude update [rad].
  double max_step_rotation = 0.1;
};

/// Earth rate used by the mechanization (zero when disabled).
Vec3 earth_rate(const GeodeticPosition& pos, const MechanizationOptions& opt);
/// Transport rate used by the mechanization (zero when disabled).
Vec3 transport_rate(const Vec3& v, const GeodeticPosition& pos, const MechanizationOptions& opt);

/// C(+) = C(-)(I + Omega_ib tau) - (Omega_ie + Omega_en) C(-) tau, then
/// re-orthonormalized. Throws StepTooLarge.
Mat3 attitude_update(const NavState& state, const ImuSample& imu, double tau,
                     const MechanizationOptions& opt = {});

/// v(+) = v(-) + [f^n + g^n - (Omega_en + 2 Omega_ie) v(-)] tau.
Vec3 velocity_update(const NavState& state, const Vec3& f_ib_n, double tau,
                     const MechanizationOptions& opt = {});

/// Trapezoidal latitude / longitude / height update. Throws LatitudeNearPole.
GeodeticPosition position_update(const NavState& state, const Vec3& v_new, double tau,
                                 const MechanizationOptions& opt = {});

/// One full step: attitude, then velocity (with C(-)), then position.
/// Throws NonMonotonicTime when imu.timestamp <= state.timestamp.
NavState mechanize(const NavState& state, const ImuSample& imu, const MechanizationOptions& opt = {});

/// Mechanizes a whole stream; result[0] is `initial`, result[k] follows imu[k-1].
std::vector<NavState> mechanize_stream(const NavState& initial, std::span<const ImuSample> imu,
                                       const MechanizationOptions& opt = {});

}  // namespace adinav::ins

#endif  // ADINAV_INS_HPP
