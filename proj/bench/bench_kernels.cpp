// Serial reference against OpenMP kernels. Arg 0 is serial, 1 parallel.

#include <benchmark/benchmark.h>

#include <numbers>

#include "certipose/estimator.hpp"

using namespace certipose;

namespace {

const CameraParams kCam{125, 100, 100};
constexpr double kDeg = std::numbers::pi / 180.0;

Execution execOf(const benchmark::State& state) {
  return state.range(0) ? Execution::Parallel : Execution::Serial;
}

PoseSpace space() {
  Vec lo(6), hi(6);
  lo << -0.5, -0.5, 4.0, 0.0, -5 * kDeg, -5 * kDeg;
  hi << 0.5, 0.5, 6.0, 30 * kDeg, 5 * kDeg, 5 * kDeg;
  return {Interval(lo, hi)};
}

PartitionConfig partitionConfig() {
  PartitionConfig cfg;
  cfg.epsilonRate = 0.22;
  return cfg;
}

const CandidateStore& store() {
  static const CandidateStore s =
      precompute_store(builtin_target("stripes"), kCam, space(), partitionConfig());
  return s;
}

BinaryImage observation() {
  Vec p(6);
  p << 0.1, -0.2, 5.1, 0.3, 0.02, -0.01;
  return builtin_target("stripes").render(kCam, Pose::fromVector(p));
}

void BM_ForwardEnclose(benchmark::State& state) {
  const Target t = builtin_target("letter");
  Vec c(6), r(6);
  c << 0.0, 0.0, 5.0, 0.25, 0.0, 0.0;
  r << 0.25, 0.25, 0.5, 8 * kDeg, 2.5 * kDeg, 2.5 * kDeg;
  const UncertainPose U(Interval(c - r, c + r));
  for (auto _ : state) benchmark::DoNotOptimize(forward_enclose(t, U, kCam, HullConfig{}, execOf(state)));
}
BENCHMARK(BM_ForwardEnclose)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_FilterCandidates(benchmark::State& state) {
  const auto& s = store();
  const BinaryImage obs = observation();
  for (auto _ : state) benchmark::DoNotOptimize(filter_candidates(obs, s.candidates, 0, execOf(state)));
}
BENCHMARK(BM_FilterCandidates)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

void BM_Estimate(benchmark::State& state) {
  const auto& s = store();
  const BinaryImage obs = observation();
  EstimateConfig cfg;
  cfg.exec = execOf(state);
  for (auto _ : state) benchmark::DoNotOptimize(estimate(obs, s, cfg));
}
BENCHMARK(BM_Estimate)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_PartitionSpace(benchmark::State& state) {
  const Target t = builtin_target("sign");
  PartitionConfig cfg = partitionConfig();
  cfg.epsilonRate = 0.3;
  for (auto _ : state) benchmark::DoNotOptimize(partition_space(t, kCam, space(), cfg, execOf(state)));
}
BENCHMARK(BM_PartitionSpace)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
