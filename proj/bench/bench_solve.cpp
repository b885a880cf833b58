// Serial kernel vs OpenMP kernel vs coordinate reference on the incomplete
// two-factor model (n = 1, d = 2, quadratic penalty, seller driver).

#include <benchmark/benchmark.h>

#include "riskprice/bsde.hpp"

using namespace riskprice;

namespace {

struct Setup {
  MarketModel model;
  std::shared_ptr<const BrownianLattice> lattice;
  std::vector<double> terminal;
  std::shared_ptr<const std::vector<PreparedDriver>> drivers;

  explicit Setup(int steps) {
    Eigen::VectorXd mu(1);
    mu << 0.05;
    Eigen::MatrixXd sigma(1, 2);
    sigma << 0.2, 0.1;
    Eigen::VectorXd s0(1);
    s0 << 100.0;
    model = MarketModel::constant(mu, sigma, 0.5, s0, 1.0, steps);
    lattice = std::make_shared<const BrownianLattice>(steps, 2, 1.0);
    terminal = terminal_values(model, *lattice, Claim::call(100.0));
    drivers = std::make_shared<const std::vector<PreparedDriver>>(
        prepare_drivers(model, Driver::seller(Penalty::quadratic(1.0))));
  }
};

void BM_Serial(benchmark::State& state) {
  const Setup s(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_prepared(s.lattice, s.terminal, s.drivers, Execution::Serial).y0());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(s.lattice->total_nodes()));
}

void BM_Parallel(benchmark::State& state) {
  const Setup s(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_prepared(s.lattice, s.terminal, s.drivers, Execution::Parallel).y0());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(s.lattice->total_nodes()));
}

void BM_Reference(benchmark::State& state) {
  const Setup s(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_reference(s.lattice, s.terminal, s.drivers).y0());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(s.lattice->total_nodes()));
}

}  // namespace

BENCHMARK(BM_Serial)->Arg(50)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Parallel)->Arg(50)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Reference)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
