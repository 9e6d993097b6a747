#include <random>

#include <benchmark/benchmark.h>

#include "ghosttrack/assignment.hpp"

namespace {

ghosttrack::CostMatrix random_costs(int rows, int cols, double gated_fraction, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ghosttrack::CostMatrix c(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int k = 0; k < cols; ++k) c(r, k) = u(rng) < gated_fraction ? ghosttrack::CostMatrix::kGated : u(rng);
  return c;
}

void BM_SolveAssignment(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto c = random_costs(n, n + n / 4, 0.5, 42);
  for (auto _ : state) benchmark::DoNotOptimize(ghosttrack::solve_assignment(c));
  state.SetComplexityN(n);
}
BENCHMARK(BM_SolveAssignment)->RangeMultiplier(2)->Range(4, 128)->Complexity();

// Quantized costs produce many tied optima and exercise the tie-break pass.
void BM_SolveAssignmentTies(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  auto c = random_costs(n, n, 0.0, 7);
  for (int r = 0; r < n; ++r)
    for (int k = 0; k < n; ++k) c(r, k) = static_cast<int>(c(r, k) * 3.0);
  for (auto _ : state) benchmark::DoNotOptimize(ghosttrack::solve_assignment(c));
}
BENCHMARK(BM_SolveAssignmentTies)->RangeMultiplier(2)->Range(4, 64);

}  // namespace
