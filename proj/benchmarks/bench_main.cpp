#include <benchmark/benchmark.h>

#include <random>

#include "reisim/config.hpp"
#include "reisim/engine.hpp"
#include "reisim/gen2.hpp"
#include "reisim/lane.hpp"
#include "reisim/recipe.hpp"
#include "reisim/sensing.hpp"

using namespace reisim;

namespace {

void BM_Crc16Epc(benchmark::State& state) {
  std::mt19937_64 gen(1);
  std::vector<bool> bits(128);
  for (std::size_t i = 0; i < bits.size(); ++i) bits[i] = gen() & 1u;
  for (auto _ : state) benchmark::DoNotOptimize(crc16(bits));
}
BENCHMARK(BM_Crc16Epc);

void BM_SingleTagRound(benchmark::State& state) {
  const Gen2Params p;
  std::uint16_t rn = 0;
  for (auto _ : state) benchmark::DoNotOptimize(single_tag_round_duration(p, rn++));
}
BENCHMARK(BM_SingleTagRound);

void BM_ScenarioDrive(benchmark::State& state) {
  const auto id = static_cast<ScenarioId>(state.range(0));
  SimConfig cfg = scenario_grid_config(id, 15.0, 45.0);
  std::uint64_t reads = 0;
  for (auto _ : state) {
    ++cfg.seed;
    reads += run(cfg).summary.total_reads;
  }
  state.counters["reads/run"] =
      benchmark::Counter(static_cast<double>(reads), benchmark::Counter::kAvgIterations);
}
BENCHMARK(BM_ScenarioDrive)
    ->Arg(static_cast<int>(ScenarioId::S1))
    ->Arg(static_cast<int>(ScenarioId::S5))
    ->Arg(static_cast<int>(ScenarioId::S6))
    ->Unit(benchmark::kMillisecond);

void BM_LaneEstimate(benchmark::State& state) {
  const auto curve = ReadRateCurve::plateau_linear(0.9, 0.2, 3.0);
  std::mt19937_64 gen(3);
  for (auto _ : state) {
    const auto zl = gen() % 200, zr = gen() % 200;
    benchmark::DoNotOptimize(estimate_position(zl, zr, 200, curve, 0.0));
  }
}
BENCHMARK(BM_LaneEstimate);

void BM_SensorRead(benchmark::State& state) {
  const SensorFixture f = calibrated_sensor_fixture();
  const Gen2Params p;
  const SensorTimingModel m;
  std::uint64_t seed = 0;
  const double d = static_cast<double>(state.range(0)) / 100.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        simulate_sensor_read(d, p, m, ActivationVariant::tag_ic_plus_sensor, f, ++seed));
  }
}
BENCHMARK(BM_SensorRead)->Arg(40)->Arg(65);

}  // namespace
BENCHMARK_MAIN();
