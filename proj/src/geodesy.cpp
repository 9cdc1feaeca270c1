#include "adinav/geodesy.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <numbers>

namespace adinav::geodesy {

namespace {
constexpr double kPi = std::numbers::pi;
}

double wrap_angle(double a) {
  a = std::remainder(a, 2.0 * kPi);  // [-pi, pi]
  if (a <= -kPi) a += 2.0 * kPi;
  return a;
}

Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return m;
}

double meridian_radius(double latitude) {
  const double s = std::sin(latitude);
  const double d = 1.0 - wgs84::kEccentricitySq * s * s;
  return wgs84::kEquatorialRadius * (1.0 - wgs84::kEccentricitySq) / std::pow(d, 1.5);
}

double normal_radius(double latitude, NormalRadiusForm form) {
  const double s = std::sin(latitude);
  const double d = 1.0 - wgs84::kEccentricitySq * s * s;
  return form == NormalRadiusForm::standard ? wgs84::kEquatorialRadius / std::sqrt(d)
                                            : wgs84::kEquatorialRadius / d;
}

void check_pole_guard(double latitude, const EarthModel& earth) {
  if (!(std::abs(latitude) <= kPi / 2.0 - earth.pole_guard)) {
    throw Error(ErrorCode::LatitudeNearPole,
                "latitude " + std::to_string(latitude) + " rad is inside the pole guard");
  }
}

Vec3 earth_rate_nav(double latitude) {
  return wgs84::kEarthRate * Vec3(std::cos(latitude), 0.0, -std::sin(latitude));
}

Vec3 transport_rate(const Vec3& v_eb_n, const GeodeticPosition& pos, const EarthModel& earth) {
  check_pole_guard(pos.latitude, earth);
  const double re_h = normal_radius(pos.latitude, earth.normal_radius_form) + pos.height;
  const double rn_h = meridian_radius(pos.latitude) + pos.height;
  return {v_eb_n.y() / re_h, -v_eb_n.x() / rn_h, -v_eb_n.y() * std::tan(pos.latitude) / re_h};
}

namespace {

double normal_gravity_surface(double latitude) {
  const double s2 = std::sin(latitude) * std::sin(latitude);
  return wgs84::kEquatorialGravity * (1.0 + wgs84::kSomigliana * s2) /
         std::sqrt(1.0 - wgs84::kEccentricitySq * s2);
}

// Free-air scaling term: 1 + f (1 - 2 sin^2 L) + omega^2 R_0^2 R_P / mu.
double height_factor(double latitude) {
  const double s2 = std::sin(latitude) * std::sin(latitude);
  const double w = wgs84::kEarthRate;
  return 1.0 + wgs84::kFlattening * (1.0 - 2.0 * s2) +
         w * w * wgs84::kEquatorialRadius * wgs84::kEquatorialRadius * wgs84::kPolarRadius /
             wgs84::kGravitationalConstant;
}

}  // namespace

Vec3 gravity_ned(const GeodeticPosition& pos) {
  const double r0 = wgs84::kEquatorialRadius;
  const double h = pos.height;
  const double g0 = normal_gravity_surface(pos.latitude);
  const double down = g0 * (1.0 - 2.0 / r0 * height_factor(pos.latitude) * h + 3.0 * h * h / (r0 * r0));
  const double north = -8.08e-9 * h * std::sin(2.0 * pos.latitude);
  return {north, 0.0, down};
}

double gravity_down_height_gradient(const GeodeticPosition& pos) {
  const double r0 = wgs84::kEquatorialRadius;
  const double g0 = normal_gravity_surface(pos.latitude);
  return g0 * (-2.0 / r0 * height_factor(pos.latitude) + 6.0 * pos.height / (r0 * r0));
}

Mat3 euler_to_matrix(double roll, double pitch, double yaw) {
  const double cr = std::cos(roll), sr = std::sin(roll);
  const double cp = std::cos(pitch), sp = std::sin(pitch);
  const double cy = std::cos(yaw), sy = std::sin(yaw);
  Mat3 c;
  c << cp * cy, -cr * sy + sr * sp * cy, sr * sy + cr * sp * cy,
       cp * sy, cr * cy + sr * sp * sy, -sr * cy + cr * sp * sy,
       -sp, sr * cp, cr * cp;
  return c;
}

Euler matrix_to_euler(const Mat3& c) {
  const double cos_pitch = std::hypot(c(0, 0), c(1, 0));
  if (cos_pitch < 1e-9) {
    throw Error(ErrorCode::GimbalLock, "pitch within 1e-9 of +-pi/2");
  }
  Euler e;
  e.roll = std::atan2(c(2, 1), c(2, 2));
  e.pitch = std::atan2(-c(2, 0), cos_pitch);
  e.yaw = std::atan2(c(1, 0), c(0, 0));
  return e;
}

Mat3 orthonormalize(const Mat3& c) {
  Eigen::JacobiSVD<Mat3> svd(c, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 r = svd.matrixU() * svd.matrixV().transpose();
  if (r.determinant() < 0.0) {
    Mat3 u = svd.matrixU();
    u.col(2) *= -1.0;
    r = u * svd.matrixV().transpose();
  }
  return r;
}

double orthonormality_error(const Mat3& c) {
  const double ortho = (c.transpose() * c - Mat3::Identity()).cwiseAbs().maxCoeff();
  return std::max(ortho, std::abs(c.determinant() - 1.0));
}

Vec3 geodetic_to_ecef(const GeodeticPosition& pos) {
  const double re = normal_radius(pos.latitude);
  const double cl = std::cos(pos.latitude), sl = std::sin(pos.latitude);
  return {(re + pos.height) * cl * std::cos(pos.longitude),
          (re + pos.height) * cl * std::sin(pos.longitude),
          ((1.0 - wgs84::kEccentricitySq) * re + pos.height) * sl};
}

Mat3 ecef_to_ned_rotation(double latitude, double longitude) {
  const double sl = std::sin(latitude), cl = std::cos(latitude);
  const double so = std::sin(longitude), co = std::cos(longitude);
  Mat3 c;
  c << -sl * co, -sl * so, cl,
       -so, co, 0.0,
       -cl * co, -cl * so, -sl;
  return c;
}

LocalTangentFrame::LocalTangentFrame(const GeodeticPosition& origin)
    : origin_(origin),
      origin_ecef_(geodetic_to_ecef(origin)),
      c_e_n0_(ecef_to_ned_rotation(origin.latitude, origin.longitude)) {}

Vec3 LocalTangentFrame::to_local(const GeodeticPosition& pos) const {
  return c_e_n0_ * (geodetic_to_ecef(pos) - origin_ecef_);
}

Mat3 LocalTangentFrame::nav_to_local(const GeodeticPosition& pos) const {
  return c_e_n0_ * ecef_to_ned_rotation(pos.latitude, pos.longitude).transpose();
}

}  // namespace adinav::geodesy
