#include "adinav/ins.hpp"

#include <cmath>
#include <string>

namespace adinav::ins {

using geodesy::skew;

Vec3 earth_rate(const GeodeticPosition& pos, const MechanizationOptions& opt) {
  return opt.earth_rate ? geodesy::earth_rate_nav(pos.latitude) : Vec3::Zero();
}

Vec3 transport_rate(const Vec3& v, const GeodeticPosition& pos, const MechanizationOptions& opt) {
  if (!opt.transport_rate) {
    geodesy::check_pole_guard(pos.latitude, opt.earth);
    return Vec3::Zero();
  }
  return geodesy::transport_rate(v, pos, opt.earth);
}

Mat3 attitude_update(const NavState& state, const ImuSample& imu, double tau,
                     const MechanizationOptions& opt) {
  if (!(tau > 0.0)) {
    throw Error(ErrorCode::NonMonotonicTime, "attitude update needs tau > 0");
  }
  const double step = imu.angular_rate.norm() * tau;
  if (!(step < opt.max_step_rotation)) {
    throw Error(ErrorCode::StepTooLarge,
                "rotation per step " + std::to_string(step) + " rad exceeds the first-order bound");
  }
  const Mat3& c = state.c_b_n;
  const Vec3 w_in = earth_rate(state.pos, opt) + transport_rate(state.velocity, state.pos, opt);
  const Mat3 updated = c * (Mat3::Identity() + skew(imu.angular_rate) * tau) - skew(w_in) * c * tau;
  if (updated == c) return c;
  return geodesy::orthonormalize(updated);
}

Vec3 velocity_update(const NavState& state, const Vec3& f_ib_n, double tau,
                     const MechanizationOptions& opt) {
  if (!(tau > 0.0)) {
    throw Error(ErrorCode::NonMonotonicTime, "velocity update needs tau > 0");
  }
  const Vec3& v = state.velocity;
  const Vec3 w = transport_rate(v, state.pos, opt) + 2.0 * earth_rate(state.pos, opt);
  return v + (f_ib_n + geodesy::gravity_ned(state.pos) - w.cross(v)) * tau;
}

GeodeticPosition position_update(const NavState& state, const Vec3& v_new, double tau,
                                 const MechanizationOptions& opt) {
  if (!(tau > 0.0)) {
    throw Error(ErrorCode::NonMonotonicTime, "position update needs tau > 0");
  }
  const auto form = opt.earth.normal_radius_form;
  const GeodeticPosition& old = state.pos;
  const Vec3& v_old = state.velocity;
  geodesy::check_pole_guard(old.latitude, opt.earth);

  GeodeticPosition out;
  out.height = old.height - 0.5 * tau * (v_old.z() + v_new.z());

  const double rn = geodesy::meridian_radius(old.latitude);
  out.latitude = old.latitude +
                 0.5 * tau * (v_old.x() / (rn + old.height) + v_new.x() / (rn + out.height));
  geodesy::check_pole_guard(out.latitude, opt.earth);

  const double re_old = geodesy::normal_radius(old.latitude, form);
  const double re_new = geodesy::normal_radius(out.latitude, form);
  out.longitude = geodesy::wrap_angle(
      old.longitude +
      0.5 * tau *
          (v_old.y() / ((re_old + old.height) * std::cos(old.latitude)) +
           v_new.y() / ((re_new + out.height) * std::cos(out.latitude))));
  return out;
}

NavState mechanize(const NavState& state, const ImuSample& imu, const MechanizationOptions& opt) {
  const double tau = imu.timestamp - state.timestamp;
  if (!(tau > 0.0)) {
    throw Error(ErrorCode::NonMonotonicTime,
                "IMU timestamp " + std::to_string(imu.timestamp) + " does not advance past " +
                    std::to_string(state.timestamp));
  }
  NavState next;
  next.c_b_n = attitude_update(state, imu, tau, opt);
  const Vec3 f_ib_n = state.c_b_n * imu.specific_force;
  next.velocity = velocity_update(state, f_ib_n, tau, opt);
  next.pos = position_update(state, next.velocity, tau, opt);
  next.timestamp = imu.timestamp;
  return next;
}

std::vector<NavState> mechanize_stream(const NavState& initial, std::span<const ImuSample> imu,
                                       const MechanizationOptions& opt) {
  std::vector<NavState> out;
  out.reserve(imu.size() + 1);
  out.push_back(initial);
  for (const auto& sample : imu) out.push_back(mechanize(out.back(), sample, opt));
  return out;
}

}  // namespace adinav::ins
