// Serial reference vs OpenMP fold loop on synthetic effort-like data.

#include <benchmark/benchmark.h>

#include <cmath>

#include "effort/evaluation.hpp"

namespace {

effort::Dataset synthetic(std::size_t rows, std::size_t cols) {
  effort::RngStream rng(7);
  effort::Dataset d;
  d.id = "synthetic";
  d.target.name = "Effort";
  for (std::size_t j = 0; j < cols; ++j) {
    effort::FeatureColumn c{"x" + std::to_string(j), {}, false, {}};
    for (std::size_t i = 0; i < rows; ++i) {
      c.values.push_back(rng.next_uniform(0, 100));
    }
    d.features.push_back(std::move(c));
  }
  for (std::size_t i = 0; i < rows; ++i) {
    double y = 50;
    for (std::size_t j = 0; j < cols; ++j) {
      y += (static_cast<double>(j) + 1) * d.features[j].values[i];
    }
    d.target.values.push_back(y * (0.8 + 0.4 * rng.next_unit()));
  }
  return d;
}

effort::LearnerPlan plan_for(int which) {
  switch (which) {
  case 0: return effort::default_grid(effort::LearnerKind::CART);
  case 1: return effort::default_grid(effort::LearnerKind::GP);
  default: return effort::default_grid(effort::LearnerKind::PLS);
  }
}

void BM_LoocvSerial(benchmark::State& state) {
  const auto d = synthetic(static_cast<std::size_t>(state.range(0)), 6);
  const auto plan = plan_for(static_cast<int>(state.range(1)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(effort::loocv_run_serial(d, plan, effort::RngStream(1), 5));
  }
}

void BM_LoocvParallel(benchmark::State& state) {
  const auto d = synthetic(static_cast<std::size_t>(state.range(0)), 6);
  const auto plan = plan_for(static_cast<int>(state.range(1)));
  const effort::LoocvOptions options{5, static_cast<int>(state.range(2))};
  for (auto _ : state) {
    benchmark::DoNotOptimize(effort::loocv_run(d, plan, effort::RngStream(1), options));
  }
}

} // namespace

BENCHMARK(BM_LoocvSerial)->Args({40, 0})->Args({40, 1})->Args({40, 2})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LoocvParallel)
    ->Args({40, 0, 4})
    ->Args({40, 1, 4})
    ->Args({40, 2, 4})
    ->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
