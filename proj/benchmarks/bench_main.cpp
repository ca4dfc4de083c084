#include <cmath>
#include <random>

#include <benchmark/benchmark.h>

#include "pfv/model.hpp"
#include "pfv/operators.hpp"
#include "pfv/parallel.hpp"
#include "pfv/solver.hpp"
#include "pfv/virial.hpp"

namespace {

pfv::SystemSpec coupled(int points, int n_max) {
  pfv::SystemSpec s;
  s.grid = {{-10.0}, {10.0}, {points}};
  s.potential = pfv::potential::Harmonic{1.0};
  s.modes = {pfv::ModeSpec{1.0, {0.1}, 0.0, n_max}};
  return s;
}

pfv::ComplexVector random_vector(std::size_t n) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  pfv::ComplexVector v(static_cast<Eigen::Index>(n));
  for (auto& c : v) c = pfv::Complex(g(rng), g(rng));
  return v.normalized();
}

void BM_HamiltonianApply(benchmark::State& state) {
  pfv::set_thread_count(static_cast<int>(state.range(1)));
  const pfv::OperatorBuilder b(coupled(static_cast<int>(state.range(0)), 40));
  const pfv::SparseOperator h = b.term(pfv::TermId::Total);
  const pfv::ComplexVector x = random_vector(h.dimension());
  pfv::ComplexVector y(x.size());
  for (auto _ : state) {
    h.apply(std::span<const pfv::Complex>(x.data(), x.size()), std::span<pfv::Complex>(y.data(), y.size()));
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(h.dimension()));
  pfv::set_thread_count(1);
}
BENCHMARK(BM_HamiltonianApply)->Args({201, 1})->Args({601, 1})->Args({601, 4})->Unit(benchmark::kMicrosecond);

void BM_DenseGroundState(benchmark::State& state) {
  const pfv::SystemSpec s = coupled(static_cast<int>(state.range(0)), 40);
  pfv::EigenSolveConfig c;
  c.dense_cap = 30000;
  for (auto _ : state) benchmark::DoNotOptimize(pfv::dense_eigensolve(s, c).front().energy);
}
BENCHMARK(BM_DenseGroundState)->Arg(201)->Arg(401)->Unit(benchmark::kMillisecond);

void BM_LanczosGroundState(benchmark::State& state) {
  const pfv::SystemSpec s = coupled(static_cast<int>(state.range(0)), 40);
  pfv::EigenSolveConfig c;
  c.dense_cap = 0;
  for (auto _ : state) benchmark::DoNotOptimize(pfv::lanczos_ground_state(s, c).energy);
}
BENCHMARK(BM_LanczosGroundState)->Arg(101)->Arg(201)->Unit(benchmark::kMillisecond);

void BM_VirialReport(benchmark::State& state) {
  const pfv::SystemSpec s = coupled(201, 40);
  pfv::EigenSolveConfig c;
  c.dense_cap = 30000;
  const pfv::ComplexVector psi = pfv::ground_state(s, c).coefficients;
  for (auto _ : state) benchmark::DoNotOptimize(pfv::virial_report(s, psi).all_pass());
}
BENCHMARK(BM_VirialReport)->Unit(benchmark::kMillisecond);

void BM_FreeSpaceModeSet(benchmark::State& state) {
  pfv::FreeSpaceModeSetSpec f;
  f.box_length = 2.0 * M_PI * static_cast<double>(state.range(0)) / f.speed_of_light;
  f.cutoff = f.speed_of_light;
  for (auto _ : state) benchmark::DoNotOptimize(pfv::mass_renorm(f).mu_discrete);
}
BENCHMARK(BM_FreeSpaceModeSet)->Arg(20)->Arg(50)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
