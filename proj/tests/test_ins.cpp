#include "adinav/ins.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

using namespace adinav;
using namespace adinav::ins;

namespace {

MechanizationOptions no_rates() {
  MechanizationOptions o;
  o.earth_rate = false;
  o.transport_rate = false;
  return o;
}

NavState level_at(double lat, double lon, double h) {
  NavState s;
  s.pos = {lat, lon, h};
  return s;
}

}  // namespace

TEST(Attitude, CompensatedRatesKeepAttitude) {
  NavState s = level_at(0.85, 0.1, 50.0);
  s.velocity = Vec3(3.0, -2.0, 0.1);
  s.c_b_n = geodesy::euler_to_matrix(0.05, -0.1, 2.0);
  const Vec3 w_in = geodesy::earth_rate_nav(0.85) + geodesy::transport_rate(s.velocity, s.pos);
  ImuSample imu;
  imu.angular_rate = s.c_b_n.transpose() * w_in;
  const Mat3 c = attitude_update(s, imu, 0.01);
  EXPECT_LT((c - s.c_b_n).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Attitude, ZeroRatesExact) {
  NavState s = level_at(0.3, 0.0, 0.0);
  s.c_b_n = geodesy::euler_to_matrix(0.4, 0.2, -1.0);
  EXPECT_EQ(attitude_update(s, {}, 0.01, no_rates()), s.c_b_n);
}

TEST(Attitude, FirstOrderYaw) {
  NavState s = level_at(0.3, 0.0, 0.0);
  ImuSample imu;
  imu.angular_rate = Vec3(0, 0, 0.01);
  const Mat3 c = attitude_update(s, imu, 0.01, no_rates());
  const Mat3 expected = Mat3::Identity() + 1e-4 * geodesy::skew(Vec3::UnitZ());
  // Orthonormalization changes the diagonal at second order only.
  EXPECT_LT((c - expected).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_NEAR(c(1, 0), 1e-4, 1e-12);
  EXPECT_LT(geodesy::orthonormality_error(c), 1e-14);
}

TEST(Attitude, StepTooLarge) {
  NavState s = level_at(0.3, 0.0, 0.0);
  ImuSample imu;
  imu.angular_rate = Vec3(0, 0, 20.0);
  try {
    attitude_update(s, imu, 0.01);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::StepTooLarge);
  }
}

TEST(Velocity, StationaryStaysZero) {
  const NavState s = level_at(0.85, 0.0, 0.0);
  const Vec3 f = -geodesy::gravity_ned(s.pos);
  EXPECT_EQ(velocity_update(s, f, 0.01), Vec3::Zero());
}

TEST(Velocity, FreeFall) {
  const NavState s = level_at(0.85, 0.0, 0.0);
  const Vec3 v = velocity_update(s, Vec3::Zero(), 0.1);
  EXPECT_EQ(v, geodesy::gravity_ned(s.pos) * 0.1);
  EXPECT_NEAR(v.z(), 0.981, 1e-3);
}

TEST(Velocity, CoriolisOracle) {
  NavState s = level_at(0.85, 0.0, 0.0);
  s.velocity = Vec3(10, 0, 0);
  const double tau = 0.01;
  const Vec3 v = velocity_update(s, -geodesy::gravity_ned(s.pos), tau);
  const Vec3 a = (v - s.velocity) / tau;
  EXPECT_NEAR(a.x(), 0.0, 1e-12);
  EXPECT_NEAR(a.y(), 0.0010956846223059211044, 1e-12);
  EXPECT_NEAR(a.z(), -0.000015694849564311295767, 1e-12);
}

TEST(Position, NoMotion) {
  const NavState s = level_at(0.5, -2.0, 10.0);
  const GeodeticPosition p = position_update(s, Vec3::Zero(), 0.1);
  EXPECT_EQ(p, s.pos);
}

TEST(Position, DownVelocityRaisesHeight) {
  NavState s = level_at(0.5, -2.0, 10.0);
  s.velocity = Vec3(0, 0, -1);
  const GeodeticPosition p = position_update(s, s.velocity, 1.0);
  EXPECT_DOUBLE_EQ(p.height, 11.0);
  EXPECT_EQ(p.latitude, s.pos.latitude);
  EXPECT_EQ(p.longitude, s.pos.longitude);
}

TEST(Position, TrapezoidOracle) {
  NavState s = level_at(0.85, 0.0, 0.0);
  s.velocity = Vec3(10, 0, 0);
  const GeodeticPosition p = position_update(s, s.velocity, 0.1);
  // One ulp of the latitude itself.
  EXPECT_NEAR(p.latitude - 0.85, 1.5694849564311295767e-7, 2.3e-16);
}

TEST(Mechanize, NonMonotonicTime) {
  NavState s = level_at(0.5, 0.0, 0.0);
  s.timestamp = 1.0;
  ImuSample imu;
  imu.timestamp = 1.0;
  try {
    mechanize(s, imu);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonMonotonicTime);
  }
}

TEST(Mechanize, CompensatedStationaryStream) {
  NavState s = level_at(0.85, 0.15, 120.0);
  s.c_b_n = geodesy::euler_to_matrix(0.02, -0.01, 0.7);
  std::vector<ImuSample> imu(100);
  for (std::size_t k = 0; k < imu.size(); ++k) {
    imu[k].specific_force = -s.c_b_n.transpose() * geodesy::gravity_ned(s.pos);
    imu[k].angular_rate = s.c_b_n.transpose() * geodesy::earth_rate_nav(s.pos.latitude);
    imu[k].timestamp = 0.01 * static_cast<double>(k + 1);
  }
  const auto out = mechanize_stream(s, imu);
  ASSERT_EQ(out.size(), 101u);
  const geodesy::LocalTangentFrame lt(s.pos);
  EXPECT_LT(lt.to_local(out.back().pos).norm(), 1e-3);
}

TEST(Mechanize, ZeroDynamicsBitwiseStable) {
  NavState s = level_at(0.4, 0.3, 5.0);
  s.c_b_n = geodesy::euler_to_matrix(0.1, 0.2, 0.3);
  // With rates off, a specific force that cancels gravity exactly leaves
  // every field untouched.
  ImuSample imu;
  imu.specific_force = -s.c_b_n.transpose() * geodesy::gravity_ned(s.pos);
  NavState cur = s;
  for (int k = 1; k <= 50; ++k) {
    imu.timestamp = 0.01 * k;
    cur = mechanize(cur, imu, no_rates());
  }
  EXPECT_EQ(cur.c_b_n, s.c_b_n);
  EXPECT_EQ(cur.pos, s.pos);
  EXPECT_LT(cur.velocity.norm(), 1e-13);
}

TEST(Mechanize, ConstantAccelerationTrack) {
  const double a = 0.5, tau = 0.01;
  NavState s = level_at(0.6, 0.0, 0.0);
  ImuSample imu;
  std::vector<ImuSample> stream;
  for (int k = 1; k <= 2000; ++k) {
    imu.timestamp = tau * k;
    imu.specific_force = Vec3(a, 0, 0) - geodesy::gravity_ned(s.pos);
    stream.push_back(imu);
  }
  const auto out = mechanize_stream(s, stream, no_rates());
  const double t = 20.0;
  const NavState& end = out.back();
  EXPECT_NEAR(end.velocity.x(), a * t, 1e-3 * a * t);
  const double north = (end.pos.latitude - s.pos.latitude) * geodesy::meridian_radius(s.pos.latitude);
  EXPECT_NEAR(north, 0.5 * a * t * t, 1e-3 * 0.5 * a * t * t);
}
