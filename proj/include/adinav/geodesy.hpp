#ifndef ADINAV_GEODESY_HPP
#define ADINAV_GEODESY_HPP

// WGS-84 earth model and rotation helpers.
//
// Frames: the local navigation frame is North-East-Down (NED). Body frame is
// forward-right-down. All angles are radians, lengths meters.

#include "adinav/common.hpp"

namespace adinav::geodesy {

namespace wgs84 {
inline constexpr double kEquatorialRadius = 6378137.0;       // R_0 [m]
inline constexpr double kPolarRadius = 6356752.31425;        // R_P [m]
inline constexpr double kEccentricitySq = 6.69437999014e-3;  // e^2
inline constexpr double kFlattening = 1.0 / 298.257223563;
inline constexpr double kEarthRate = 7.292115e-5;            // omega_ie [rad/s]
inline constexpr double kGravitationalConstant = 3.986004418e14;  // mu [m^3/s^2]
// Somigliana normal gravity: g_0(L) = kEquatorialGravity (1 + kSomigliana sin^2 L)
//                                      / sqrt(1 - e^2 sin^2 L)
inline constexpr double kEquatorialGravity = 9.7803253359;   // [m/s^2]
inline constexpr double kSomigliana = 1.931853e-3;
}  // namespace wgs84

/// Which denominator to use for the normal (east-west) radius of curvature.
/// `standard` is R_0 / sqrt(1 - e^2 sin^2 L). `as_printed` drops the square
/// root, reproducing a published variant of the formula; it is kept only for
/// comparison runs.
enum class NormalRadiusForm { standard, as_printed };

struct EarthModel {
  NormalRadiusForm normal_radius_form = NormalRadiusForm::standard;
  /// tan(L) terms refuse |L| > pi/2 - pole_guard.
  double pole_guard = 1e-6;
};

struct GeodeticPosition {
  double latitude = 0.0;   // [rad]
  double longitude = 0.0;  // [rad], wrapped to (-pi, pi]
  double height = 0.0;     // [m] above ellipsoid

  bool operator==(const GeodeticPosition&) const = default;
};

double wrap_angle(double a);

Mat3 skew(const Vec3& v);

double meridian_radius(double latitude);
double normal_radius(double latitude, NormalRadiusForm form = NormalRadiusForm::standard);

void check_pole_guard(double latitude, const EarthModel& earth = {});

/// Earth rotation rate resolved in NED.
Vec3 earth_rate_nav(double latitude);

/// omega_en^n, the rotation of the NED frame w.r.t. the earth caused by motion
/// over the ellipsoid. Throws LatitudeNearPole.
Vec3 transport_rate(const Vec3& v_eb_n, const GeodeticPosition& pos, const EarthModel& earth = {});

/// Normal gravity in NED (down positive) with free-air height correction.
Vec3 gravity_ned(const GeodeticPosition& pos);

/// d g_down / d h at pos [1/s^2].
double gravity_down_height_gradient(const GeodeticPosition& pos);

struct Euler {
  double roll = 0.0;
  double pitch = 0.0;
  double yaw = 0.0;
};

/// Body-to-nav DCM for ZYX (yaw, pitch, roll) Euler angles: C = Rz(yaw) Ry(pitch) Rx(roll).
Mat3 euler_to_matrix(double roll, double pitch, double yaw);
inline Mat3 euler_to_matrix(const Euler& e) { return euler_to_matrix(e.roll, e.pitch, e.yaw); }

/// Inverse of euler_to_matrix. Throws GimbalLock when cos(pitch) < 1e-9.
Euler matrix_to_euler(const Mat3& c);

/// Nearest rotation matrix (symmetric orthogonalization, C (C^T C)^{-1/2}).
Mat3 orthonormalize(const Mat3& c);

/// max |C^T C - I| and |det C - 1|, whichever is larger.
double orthonormality_error(const Mat3& c);

Vec3 geodetic_to_ecef(const GeodeticPosition& pos);

/// ECEF to NED rotation at the given geodetic position (C_e^n).
Mat3 ecef_to_ned_rotation(double latitude, double longitude);

/// Local tangent NED frame anchored at a reference position.
class LocalTangentFrame {
 public:
  explicit LocalTangentFrame(const GeodeticPosition& origin);

  const GeodeticPosition& origin() const { return origin_; }
  /// Position of `pos` in the anchored NED frame [m].
  Vec3 to_local(const GeodeticPosition& pos) const;
  /// Rotation from the NED frame at `pos` to the anchored NED frame.
  Mat3 nav_to_local(const GeodeticPosition& pos) const;

 private:
  GeodeticPosition origin_;
  Vec3 origin_ecef_;
  Mat3 c_e_n0_;
};

}  // namespace adinav::geodesy

#endif  // ADINAV_GEODESY_HPP
