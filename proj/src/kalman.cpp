#include "adinav/kalman.hpp"

#include <cmath>

namespace adinav::kf {

using geodesy::skew;

namespace {

struct RateJacobians {
  Mat3 earth_wrt_pos = Mat3::Zero();      // d omega_ie / d (N, E, up)
  Mat3 transport_wrt_pos = Mat3::Zero();  // d omega_en / d (N, E, up)
  Mat3 transport_wrt_vel = Mat3::Zero();  // d omega_en / d v
};

RateJacobians rate_jacobians(const ins::NavState& nav, const ins::MechanizationOptions& opt) {
  RateJacobians j;
  const double lat = nav.pos.latitude;
  const double rn = geodesy::meridian_radius(lat) + nav.pos.height;
  const double re = geodesy::normal_radius(lat, opt.earth.normal_radius_form) + nav.pos.height;
  const double sl = std::sin(lat), cl = std::cos(lat), tl = std::tan(lat);
  const Vec3& v = nav.velocity;

  if (opt.earth_rate) {
    // omega_ie = w (cos L, 0, -sin L); dL = dN / R_N.
    j.earth_wrt_pos.col(0) = geodesy::wgs84::kEarthRate * Vec3(-sl, 0.0, -cl) / rn;
  }
  if (opt.transport_rate) {
    j.transport_wrt_vel(0, 1) = 1.0 / re;
    j.transport_wrt_vel(1, 0) = -1.0 / rn;
    j.transport_wrt_vel(2, 1) = -tl / re;

    j.transport_wrt_pos(2, 0) = -v.y() / (re * cl * cl) / rn;
    j.transport_wrt_pos(0, 2) = -v.y() / (re * re);
    j.transport_wrt_pos(1, 2) = v.x() / (rn * rn);
    j.transport_wrt_pos(2, 2) = v.y() * tl / (re * re);
  }
  return j;
}

}  // namespace

SystemMatrix system_matrix(const ins::NavState& nav, const Vec3& f_ib_n, const ins::MechanizationOptions& opt) {
  geodesy::check_pole_guard(nav.pos.latitude, opt.earth);
  SystemMatrix f = SystemMatrix::Zero();

  const double lat = nav.pos.latitude;
  const double rn = geodesy::meridian_radius(lat) + nav.pos.height;
  const double re = geodesy::normal_radius(lat, opt.earth.normal_radius_form) + nav.pos.height;
  const double tl = std::tan(lat);
  const Vec3& v = nav.velocity;
  const Mat3& c = nav.c_b_n;

  const Vec3 w_ie = ins::earth_rate(nav.pos, opt);
  const Vec3 w_en = ins::transport_rate(v, nav.pos, opt);
  const RateJacobians j = rate_jacobians(nav, opt);

  // Position (north m, east m, up m) <- position, velocity.
  f(kPos + 0, kPos + 0) = -v.z() / rn;
  f(kPos + 0, kPos + 2) = -v.x() / rn;
  f(kPos + 0, kVel + 0) = 1.0;
  f(kPos + 1, kPos + 0) = v.y() * tl / rn;
  f(kPos + 1, kPos + 1) = -v.z() / re - tl * v.x() / rn;
  f(kPos + 1, kPos + 2) = -v.y() / re;
  f(kPos + 1, kVel + 1) = 1.0;
  f(kPos + 2, kVel + 2) = -1.0;

  // Velocity <- position (Coriolis/transport perturbation, gravity gradient),
  // velocity (Coriolis), attitude (specific force), accelerometer bias.
  const Mat3 v_cross = skew(v);
  f.block<3, 3>(kVel, kPos) = v_cross * (j.transport_wrt_pos + 2.0 * j.earth_wrt_pos);
  f(kVel + 2, kPos + 2) += geodesy::gravity_down_height_gradient(nav.pos);
  f.block<3, 3>(kVel, kVel) = -skew(w_en + 2.0 * w_ie) + v_cross * j.transport_wrt_vel;
  f.block<3, 3>(kVel, kAtt) = -skew(f_ib_n);
  f.block<3, 3>(kVel, kAccelBias) = c;

  // Attitude <- position, velocity, attitude, gyro bias.
  f.block<3, 3>(kAtt, kPos) = -(j.transport_wrt_pos + j.earth_wrt_pos);
  f.block<3, 3>(kAtt, kVel) = -j.transport_wrt_vel;
  f.block<3, 3>(kAtt, kAtt) = -skew(w_ie + w_en);
  f.block<3, 3>(kAtt, kGyroBias) = c;

  // Bias rows stay zero (random constants driven by process noise).
  return f;
}

Covariance process_noise(const ins::NavState& /*nav*/, const FilterConfig& cfg) {
  // Isotropic sensor noise, so C Q_b C^T = Q_b.
  Covariance q = Covariance::Zero();
  q.block<3, 3>(kVel, kVel).diagonal().setConstant(cfg.accel_noise * cfg.accel_noise);
  q.block<3, 3>(kAtt, kAtt).diagonal().setConstant(cfg.gyro_noise * cfg.gyro_noise);
  q.block<3, 3>(kAccelBias, kAccelBias).diagonal().setConstant(cfg.accel_bias_walk * cfg.accel_bias_walk);
  q.block<3, 3>(kGyroBias, kGyroBias).diagonal().setConstant(cfg.gyro_bias_walk * cfg.gyro_bias_walk);
  return q;
}

Covariance initial_covariance(const FilterConfig& cfg) {
  Covariance p = Covariance::Zero();
  auto set = [&p](int idx, double sigma) { p.block<3, 3>(idx, idx).diagonal().setConstant(sigma * sigma); };
  set(kPos, cfg.init_pos_sigma);
  set(kVel, cfg.init_vel_sigma);
  set(kAtt, cfg.init_att_sigma);
  set(kAccelBias, cfg.init_accel_bias_sigma);
  set(kGyroBias, cfg.init_gyro_bias_sigma);
  return p;
}

Eigen::Matrix<double, kMeas, 1> aiding_residual(const ins::NavState& nav, const AidingMeasurement& meas,
                                                const geodesy::EarthModel& earth) {
  const double lat = nav.pos.latitude;
  const double rn = geodesy::meridian_radius(lat) + nav.pos.height;
  const double re = geodesy::normal_radius(lat, earth.normal_radius_form) + nav.pos.height;
  Eigen::Matrix<double, kMeas, 1> z;
  z(0) = (nav.pos.latitude - meas.pos.latitude) * rn;
  z(1) = geodesy::wrap_angle(nav.pos.longitude - meas.pos.longitude) * re * std::cos(lat);
  z(2) = nav.pos.height - meas.pos.height;
  z.segment<3>(3) = nav.velocity - meas.velocity;
  return z;
}

UpdateOutcome<kMeas> update_with_aiding(ErrorState& state, Covariance& p, const AidingMeasurement& meas,
                                        const ins::NavState& nav, const FilterConfig& cfg) {
  Eigen::Matrix<double, kMeas, kStates> h = Eigen::Matrix<double, kMeas, kStates>::Zero();
  h.block<3, 3>(0, kPos).setIdentity();
  h.block<3, 3>(3, kVel).setIdentity();

  Eigen::Matrix<double, kMeas, kMeas> r = Eigen::Matrix<double, kMeas, kMeas>::Zero();
  for (int i = 0; i < 3; ++i) {
    const double sp = meas.pos_sigma(i) > 0.0 ? meas.pos_sigma(i) : cfg.aiding_pos_sigma;
    const double sv = meas.vel_sigma(i) > 0.0 ? meas.vel_sigma(i) : cfg.aiding_vel_sigma;
    r(i, i) = sp * sp;
    r(3 + i, 3 + i) = sv * sv;
  }
  const auto z = aiding_residual(nav, meas, cfg.mechanization.earth);
  return update<kStates, kMeas>(state.x, p, z, h, r, cfg.innovation_gate);
}

ins::NavState correct_output(const ins::NavState& nav, const ErrorState& state, const geodesy::EarthModel& earth) {
  const double lat = nav.pos.latitude;
  const double rn = geodesy::meridian_radius(lat) + nav.pos.height;
  const double re = geodesy::normal_radius(lat, earth.normal_radius_form) + nav.pos.height;
  const Vec3 dp = state.position();

  ins::NavState out = nav;
  out.pos.latitude = lat - dp.x() / rn;
  out.pos.longitude = geodesy::wrap_angle(nav.pos.longitude - dp.y() / (re * std::cos(lat)));
  out.pos.height = nav.pos.height - dp.z();
  out.velocity = nav.velocity - state.velocity();
  const Vec3 psi = state.attitude();
  if (!psi.isZero(0.0)) {
    out.c_b_n = geodesy::orthonormalize((Mat3::Identity() - skew(psi)) * nav.c_b_n);
  }
  return out;
}

IntegrationResult run_integration(const ins::NavState& initial, std::span<const ins::ImuSample> imu,
                                  std::span<const AidingMeasurement> aiding, const FilterConfig& cfg) {
  if (imu.empty()) throw Error(ErrorCode::EmptyStream, "IMU stream is empty");
  for (std::size_t i = 1; i < aiding.size(); ++i) {
    if (!(aiding[i].timestamp > aiding[i - 1].timestamp)) {
      throw Error(ErrorCode::NonMonotonicTime, "aiding timestamps must increase strictly");
    }
  }

  const auto& mech = cfg.mechanization;
  IntegrationResult out;
  out.mechanized.reserve(imu.size() + 1);
  out.corrected.reserve(imu.size() + 1);
  out.mechanized.push_back(initial);
  out.corrected.push_back(initial);

  ErrorState state;
  Covariance p = initial_covariance(cfg);
  std::size_t next_fix = 0;

  for (const auto& sample : imu) {
    const ins::NavState& prev = out.mechanized.back();
    ins::NavState nav = ins::mechanize(prev, sample, mech);
    const double tau = nav.timestamp - prev.timestamp;

    const Vec3 f_ib_n = prev.c_b_n * sample.specific_force;
    predict<kStates>(state.x, p, system_matrix(prev, f_ib_n, mech), process_noise(prev, cfg), tau);

    while (next_fix < aiding.size() && aiding[next_fix].timestamp < nav.timestamp - cfg.time_tolerance) {
      ++out.aiding_unmatched;
      ++next_fix;
    }
    if (next_fix < aiding.size() && std::abs(aiding[next_fix].timestamp - nav.timestamp) <= cfg.time_tolerance) {
      const auto outcome = update_with_aiding(state, p, aiding[next_fix], nav, cfg);
      InnovationRecord rec;
      rec.timestamp = nav.timestamp;
      rec.innovation = outcome.innovation;
      rec.sigma = outcome.innovation_cov.diagonal().cwiseSqrt();
      rec.nis = outcome.nis;
      rec.accepted = outcome.accepted;
      out.innovations.push_back(rec);
      ++(outcome.accepted ? out.updates_accepted : out.updates_rejected);
      ++next_fix;
    }

    out.corrected.push_back(correct_output(nav, state, mech.earth));
    out.mechanized.push_back(std::move(nav));
  }
  out.aiding_unmatched += aiding.size() - next_fix;
  out.final_state = state;
  out.final_covariance = p;
  return out;
}

RigidTransform pose_in_frame(const ins::NavState& nav, const geodesy::LocalTangentFrame& frame) {
  return {frame.nav_to_local(nav.pos) * nav.c_b_n, frame.to_local(nav.pos)};
}

PoseTrajectory to_pose_trajectory(std::span<const ins::NavState> states, const geodesy::LocalTangentFrame& frame) {
  std::vector<TimedPose> poses;
  poses.reserve(states.size());
  for (const auto& s : states) poses.push_back({s.timestamp, pose_in_frame(s, frame)});
  return PoseTrajectory(std::move(poses));
}

PoseTrajectory poses_at(std::span<const ins::NavState> states, const geodesy::LocalTangentFrame& frame,
                        std::span<const double> timestamps, double tolerance) {
  const PoseTrajectory full = to_pose_trajectory(states, frame);
  std::vector<TimedPose> out;
  out.reserve(timestamps.size());
  for (double t : timestamps) out.push_back({t, full.at(t, tolerance)});
  return PoseTrajectory(std::move(out));
}

}  // namespace adinav::kf
