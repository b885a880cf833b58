#include <limits>
#include <memory>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>
#include <omp.h>

#include "riskprice/bsde.hpp"
#include "riskprice/parallel.hpp"
#include "support.hpp"

using namespace riskprice;
using riskprice::testing::two_factor;

namespace {

class WorkerGuard {
 public:
  explicit WorkerGuard(int n) { set_worker_count(n); }
  ~WorkerGuard() { set_worker_count(0); }
};

struct Case {
  std::shared_ptr<const BrownianLattice> lattice;
  std::vector<double> terminal;
  std::shared_ptr<const std::vector<PreparedDriver>> drivers;
};

Case make_case(const MarketModel& model, const Claim& claim, const Driver& driver) {
  Case c;
  c.lattice = std::make_shared<const BrownianLattice>(model.steps, model.d, model.horizon);
  c.terminal = terminal_values(model, *c.lattice, claim);
  c.drivers = std::make_shared<const std::vector<PreparedDriver>>(prepare_drivers(model, driver));
  return c;
}

}  // namespace

TEST(Parallel, WorkerOverride) {
  {
    WorkerGuard guard(3);
    EXPECT_EQ(worker_count(), 3);
  }
  EXPECT_GE(worker_count(), 1);
}

TEST(Parallel, ErrorSlotRethrowsFirstFailure) {
  ErrorSlot slot;
#pragma omp parallel for num_threads(4)
  for (int i = 0; i < 64; ++i) {
    slot.guard([i] {
      if (i % 7 == 3) throw std::runtime_error("boom");
    });
  }
  EXPECT_THROW(slot.rethrow(), std::runtime_error);
  ErrorSlot quiet;
  EXPECT_NO_THROW(quiet.rethrow());
}

// Large enough slices (up to 71^2 nodes) to take the threaded path.
TEST(Parallel, KernelMatchesReferenceBitwise) {
  const auto model = two_factor(70);
  for (const auto& driver : {Driver::seller(Penalty::quadratic(1.0)), Driver::buyer(Penalty::quadratic(0.5)),
                             Driver::upper_m(), Driver::lower_cw(), Driver::black_scholes()}) {
    const auto c = make_case(model, Claim::call(100.0), driver);
    const auto ref = solve_reference(c.lattice, c.terminal, c.drivers);
    const auto serial = solve_prepared(c.lattice, c.terminal, c.drivers, Execution::Serial);
    EXPECT_EQ(serial.y, ref.y) << to_string(driver.kind);
    EXPECT_EQ(serial.z, ref.z) << to_string(driver.kind);
  }
}

TEST(Parallel, ThreadCountDoesNotChangeResults) {
  const auto model = two_factor(80);
  const auto c = make_case(model, Claim::put(100.0), Driver::seller(Penalty::quadratic(1.0)));
  const auto serial = solve_prepared(c.lattice, c.terminal, c.drivers, Execution::Serial);
  for (int workers : {1, 2, 4}) {
    WorkerGuard guard(workers);
    const auto par = solve_prepared(c.lattice, c.terminal, c.drivers, Execution::Parallel);
    EXPECT_EQ(par.y, serial.y) << workers;
    EXPECT_EQ(par.z, serial.z) << workers;
  }
}

TEST(Parallel, ErrorsInsideTheKernelSurface) {
  // 71^2 terminal nodes, above the threaded cutoff of terminal_values.
  const auto model = two_factor(70);
  const BrownianLattice lattice(70, 2, 1.0);
  WorkerGuard guard(4);
  const auto claim = Claim::terminal([](std::span<const double> s) {
    return s[0] > 150.0 ? std::numeric_limits<double>::infinity() : 0.0;
  });
  EXPECT_THROW(terminal_values(model, lattice, claim), Error);
}
