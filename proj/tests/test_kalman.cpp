#include "adinav/kalman.hpp"
#include "adinav/scenario.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

using namespace adinav;
using namespace adinav::kf;

namespace {

ins::NavState moving_state() {
  ins::NavState s;
  s.pos = {0.85, 0.15, 120.0};
  s.velocity = Vec3(12.0, -5.0, 0.3);
  s.c_b_n = geodesy::euler_to_matrix(0.03, -0.02, 0.6);
  return s;
}

// Error of `m` relative to `t` in filter units.
StateVector error_between(const ins::NavState& m, const ins::NavState& t) {
  StateVector e = StateVector::Zero();
  const double rn = geodesy::meridian_radius(t.pos.latitude) + t.pos.height;
  const double re = geodesy::normal_radius(t.pos.latitude) + t.pos.height;
  e(kPos + 0) = (m.pos.latitude - t.pos.latitude) * rn;
  e(kPos + 1) = (m.pos.longitude - t.pos.longitude) * re * std::cos(t.pos.latitude);
  e(kPos + 2) = m.pos.height - t.pos.height;
  e.segment<3>(kVel) = m.velocity - t.velocity;
  const Mat3 d = m.c_b_n * t.c_b_n.transpose();
  const Mat3 a = 0.5 * (d - d.transpose());
  e.segment<3>(kAtt) = Vec3(a(2, 1), a(0, 2), a(1, 0));
  return e;
}

// Truth perturbed by error vector e (position, velocity, attitude only).
ins::NavState perturbed(const ins::NavState& t, const StateVector& e) {
  ins::NavState m = t;
  const double rn = geodesy::meridian_radius(t.pos.latitude) + t.pos.height;
  const double re = geodesy::normal_radius(t.pos.latitude) + t.pos.height;
  m.pos.latitude += e(kPos + 0) / rn;
  m.pos.longitude += e(kPos + 1) / (re * std::cos(t.pos.latitude));
  m.pos.height += e(kPos + 2);
  m.velocity += e.segment<3>(kVel);
  const Vec3 psi = e.segment<3>(kAtt);
  if (psi.norm() > 0) m.c_b_n = Eigen::AngleAxisd(psi.norm(), psi.normalized()).toRotationMatrix() * t.c_b_n;
  return m;
}

}  // namespace

TEST(SystemMatrix, SpecificForceBlock) {
  ins::NavState s;
  s.pos = {0.0, 0.0, 0.0};
  const Vec3 f_n(0, 0, -9.78);
  const SystemMatrix f = system_matrix(s, f_n);
  EXPECT_EQ(Mat3(f.block<3, 3>(kVel, kAtt)), Mat3(-geodesy::skew(f_n)));
}

TEST(SystemMatrix, StructuralZeros) {
  ins::NavState s;
  s.pos = {0.5, 0.0, 0.0};
  ins::MechanizationOptions opt;
  opt.earth_rate = false;
  opt.transport_rate = false;
  const SystemMatrix f = system_matrix(s, Vec3::Zero(), opt);
  // Attitude rows couple only to the gyro bias.
  EXPECT_TRUE((f.block<3, 12>(kAtt, 0).isZero(0.0)));
  EXPECT_EQ(Mat3(f.block<3, 3>(kAtt, kGyroBias)), s.c_b_n);
  EXPECT_TRUE((f.block<6, 15>(kAccelBias, 0).isZero(0.0)));
  EXPECT_TRUE((system_matrix(moving_state(), Vec3(1, 2, -9)).block<6, 15>(kAccelBias, 0).isZero(0.0)));
}

// F against finite differences of one discrete mechanization step applied to a
// true and a perturbed state.
TEST(SystemMatrix, MatchesDiscreteMechanization) {
  const ins::NavState truth = moving_state();
  ins::ImuSample imu;
  imu.specific_force = Vec3(0.4, -0.3, -9.6);
  imu.angular_rate = Vec3(0.01, -0.02, 0.05);
  const double tau = 1e-3;
  imu.timestamp = tau;
  const ins::NavState t1 = ins::mechanize(truth, imu);
  const SystemMatrix f = system_matrix(truth, truth.c_b_n * imu.specific_force);

  const double scale[kStates] = {1e-2, 1e-2, 1e-2, 1e-3, 1e-3, 1e-3, 1e-6, 1e-6, 1e-6,
                                 1e-3, 1e-3, 1e-3, 1e-6, 1e-6, 1e-6};
  for (int j = 0; j < kStates; ++j) {
    StateVector e = StateVector::Zero();
    e(j) = scale[j];
    ins::NavState m0 = perturbed(truth, e);
    ins::ImuSample mi = imu;
    if (j >= kAccelBias && j < kGyroBias) mi.specific_force += e.segment<3>(kAccelBias);
    if (j >= kGyroBias) mi.angular_rate += e.segment<3>(kGyroBias);
    const ins::NavState m1 = ins::mechanize(m0, mi);
    const StateVector rate = (error_between(m1, t1) - error_between(m0, truth)) / tau;
    // Column j without the bias rows, divided by the perturbation size.
    const Eigen::Matrix<double, 9, 1> numeric = rate.head<9>() / scale[j];
    const Eigen::Matrix<double, 9, 1> analytic = f.col(j).head<9>();
    const double tol = 1e-3 * std::max(1.0, analytic.cwiseAbs().maxCoeff()) + 1e-7;
    EXPECT_LT((numeric - analytic).cwiseAbs().maxCoeff(), tol) << "column " << j << "\nnumeric "
                                                               << numeric.transpose() << "\nanalytic "
                                                               << analytic.transpose();
  }
}

TEST(Predict, ZeroDynamicsUnchanged) {
  StateVector x = StateVector::LinSpaced(0.0, 1.4);
  Covariance p = initial_covariance({});
  const StateVector x0 = x;
  const Covariance p0 = p;
  predict<kStates>(x, p, SystemMatrix::Zero(), Covariance::Zero(), 0.01);
  EXPECT_EQ(x, x0);
  EXPECT_EQ(p, p0);
}

TEST(Predict, ZeroStateStaysZero) {
  StateVector x = StateVector::Zero();
  Covariance p = initial_covariance({});
  predict<kStates>(x, p, system_matrix(moving_state(), Vec3(0, 0, -9.8)), process_noise(moving_state(), {}), 0.01);
  EXPECT_TRUE(x.isZero(0.0));
}

TEST(Predict, ScalarRecursion) {
  Eigen::Matrix<double, 1, 1> x(1.0), p(1.0), f(-1.0), q(0.0);
  for (int k = 0; k < 10; ++k) predict<1>(x, p, f, q, 0.1);
  EXPECT_NEAR(p(0), std::pow(0.9, 20), 1e-15);
  EXPECT_NEAR(x(0), std::pow(0.9, 10), 1e-15);
}

TEST(Update, ScalarToy) {
  Eigen::Matrix<double, 1, 1> x(0.0), p(1.0), z(1.0), h(1.0), r(1.0);
  const auto out = update<1, 1>(x, p, z, h, r);
  EXPECT_TRUE(out.accepted);
  EXPECT_DOUBLE_EQ(x(0), 0.5);
  EXPECT_DOUBLE_EQ(p(0), 0.5);
  EXPECT_DOUBLE_EQ(out.nis, 0.5);
}

TEST(Update, GateRejects) {
  Eigen::Matrix<double, 1, 1> x(0.0), p(1.0), z(10.0), h(1.0), r(1.0);
  const auto out = update<1, 1>(x, p, z, h, r, 9.0);
  EXPECT_FALSE(out.accepted);
  EXPECT_EQ(x(0), 0.0);
  EXPECT_EQ(p(0), 1.0);
}

TEST(Update, ZeroInnovationShrinksCovariance) {
  ErrorState st;
  Covariance p = initial_covariance({});
  const ins::NavState nav = moving_state();
  AidingMeasurement meas;
  meas.pos = nav.pos;
  meas.velocity = nav.velocity;
  const double trace0 = p.trace();
  update_with_aiding(st, p, meas, nav, {});
  EXPECT_TRUE(st.x.isZero(0.0));
  EXPECT_LT(p.trace(), trace0);
}

TEST(Update, HugeNoiseIsInert) {
  ErrorState st;
  Covariance p = initial_covariance({});
  const Covariance p0 = p;
  const ins::NavState nav = moving_state();
  AidingMeasurement meas;
  meas.pos = nav.pos;
  meas.pos.height += 1.0;
  meas.velocity = nav.velocity + Vec3(0.5, 0, 0);
  meas.pos_sigma = Vec3::Constant(1e12);
  meas.vel_sigma = Vec3::Constant(1e12);
  update_with_aiding(st, p, meas, nav, {});
  EXPECT_LT(st.x.norm(), 1e-9);
  EXPECT_LT((p - p0).norm() / p0.norm(), 1e-9);
}

TEST(Residual, Sign) {
  const ins::NavState nav = moving_state();
  AidingMeasurement meas;
  meas.pos = nav.pos;
  meas.pos.height -= 2.0;
  meas.velocity = nav.velocity - Vec3(0, 0.5, 0);
  const auto z = aiding_residual(nav, meas);
  EXPECT_DOUBLE_EQ(z(2), 2.0);
  EXPECT_DOUBLE_EQ(z(4), 0.5);
}

TEST(Correct, ZeroStateIsIdentity) {
  const ins::NavState nav = moving_state();
  const ins::NavState out = correct_output(nav, ErrorState{});
  EXPECT_EQ(out.pos, nav.pos);
  EXPECT_EQ(out.velocity, nav.velocity);
  EXPECT_EQ(out.c_b_n, nav.c_b_n);
}

TEST(Correct, HeightAndYaw) {
  const ins::NavState nav = moving_state();
  ErrorState st;
  st.position() = Vec3(0, 0, 0.5);
  EXPECT_DOUBLE_EQ(correct_output(nav, st).pos.height, nav.pos.height - 0.5);

  ErrorState yaw;
  yaw.attitude() = Vec3(0, 0, 1e-3);
  const double before = geodesy::matrix_to_euler(nav.c_b_n).yaw;
  const double after = geodesy::matrix_to_euler(correct_output(nav, yaw).c_b_n).yaw;
  EXPECT_NEAR(after - before, -1e-3, 1e-6);
}

TEST(Covariance, RejectsIndefinite) {
  Eigen::Matrix<double, 2, 2> p;
  p << 1.0, 0.0, 0.0, -0.5;
  try {
    enforce_covariance<2>(p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::CovarianceNotPSD);
  }
}

TEST(Integration, NoAidingEqualsMechanization) {
  sim::ScenarioSpec spec;
  spec.trajectory = sim::TrajectoryKind::circular;
  spec.duration = 5.0;
  spec.aiding_rate = 0.0;
  spec.accel_noise = 1e-3;
  spec.seed = 3;
  const auto data = sim::generate(spec);
  const auto res = run_integration(data.truth.states.front(), data.imu, {}, {});
  ASSERT_EQ(res.corrected.size(), res.mechanized.size());
  for (std::size_t k = 0; k < res.mechanized.size(); ++k) {
    EXPECT_EQ(res.corrected[k].pos, res.mechanized[k].pos);
    EXPECT_EQ(res.corrected[k].velocity, res.mechanized[k].velocity);
  }
  EXPECT_EQ(res.updates_accepted, 0u);
}

TEST(Integration, StationaryWithAiding) {
  sim::ScenarioSpec spec;
  spec.duration = 60.0;
  spec.aiding_rate = 1.0;
  const auto data = sim::generate(spec);
  const auto res = run_integration(data.truth.states.front(), data.imu, data.aiding, {});
  EXPECT_EQ(res.updates_accepted, data.aiding.size());
  const geodesy::LocalTangentFrame lt(data.truth.states.back().pos);
  EXPECT_LT(lt.to_local(res.corrected.back().pos).norm(), 0.01);
}

TEST(Integration, EstimatesAccelBias) {
  sim::ScenarioSpec spec;
  spec.trajectory = sim::TrajectoryKind::circular;
  spec.duration = 120.0;
  spec.aiding_rate = 1.0;
  spec.accel_bias = Vec3(0.05, -0.05, 0.05);
  spec.aiding_pos_sigma = 0.05;
  spec.aiding_vel_sigma = 0.02;
  spec.seed = 5;
  const auto data = sim::generate(spec);
  FilterConfig cfg;
  cfg.aiding_vel_sigma = 0.02;
  const auto res = run_integration(data.truth.states.front(), data.imu, data.aiding, cfg);
  for (int i = 0; i < 3; ++i) {
    const double sigma = std::sqrt(res.final_covariance(kAccelBias + i, kAccelBias + i));
    EXPECT_LT(std::abs(res.final_state.accel_bias()(i) - spec.accel_bias(i)), 3.0 * sigma) << "axis " << i;
  }
}

TEST(Integration, AidingMustIncrease) {
  std::vector<ins::ImuSample> imu(1);
  imu[0].timestamp = 0.01;
  std::vector<AidingMeasurement> aiding(2);
  try {
    run_integration(ins::NavState{}, imu, aiding, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonMonotonicTime);
  }
  try {
    run_integration(ins::NavState{}, {}, {}, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyStream);
  }
}
