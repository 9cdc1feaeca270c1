#include "adinav/adi.hpp"
#include "adinav/scenario.hpp"

#include <benchmark/benchmark.h>
#include <omp.h>

using namespace adinav;

namespace {

// Straight drive past two walls and a crossing car, KITTI-like scan density.
const sim::ScenarioData& drive() {
  static const sim::ScenarioData data = [] {
    sim::ScenarioSpec s;
    s.trajectory = sim::TrajectoryKind::constant_velocity;
    s.speed = 10.0;
    s.duration = 0.5;
    s.lidar_rate = 10.0;
    s.aiding_rate = 0.0;
    s.lidar.azimuth_steps = 2000;
    s.calibration = sim::default_calibration(384, 1280);
    s.scene.boxes.push_back({Vec3(0, 25, 1.0), Vec3(60, 0.5, 3.0), 0.0, Vec3::Zero()});
    s.scene.boxes.push_back({Vec3(0, -25, 1.0), Vec3(60, 0.5, 3.0), 0.0, Vec3::Zero()});
    s.scene.boxes.push_back({Vec3(20, -4, -0.3), Vec3(2.2, 1, 1.25), 0.0, Vec3(0, 5, 0)});
    return sim::generate(s);
  }();
  return data;
}

const SparseDepthImage& depth() {
  static const SparseDepthImage img = rasterize(drive().clouds[2], drive().calibration);
  return img;
}

void BM_AdiSerial(benchmark::State& state) {
  const auto& img = depth();
  for (auto _ : state) benchmark::DoNotOptimize(adi::compute_adi_serial(img, {}));
  state.counters["pixels"] = static_cast<double>(img.filled());
}
BENCHMARK(BM_AdiSerial)->Unit(benchmark::kMillisecond);

void BM_AdiOpenMP(benchmark::State& state) {
  const auto& img = depth();
  omp_set_num_threads(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(adi::compute_adi(img, {}));
  omp_set_num_threads(omp_get_num_procs());
}
BENCHMARK(BM_AdiOpenMP)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_ThreeChannel(benchmark::State& state) {
  const auto& d = drive();
  const auto poses = d.truth_poses();
  const std::span<const PointCloud> h(d.clouds.data(), 3);
  omp_set_num_threads(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(adi::build_three_channel(h, poses, d.calibration, {}));
  omp_set_num_threads(omp_get_num_procs());
}
BENCHMARK(BM_ThreeChannel)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
