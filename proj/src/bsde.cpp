#include "riskprice/bsde.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "riskprice/parallel.hpp"

namespace riskprice {

namespace {

constexpr long long kParallelThreshold = 2048;

void check_inputs(const BrownianLattice& lattice, const std::vector<double>& terminal,
                  const std::vector<PreparedDriver>& drivers) {
  if (terminal.size() != lattice.slice_size(lattice.steps())) {
    throw Error("terminal data does not match the lattice's last slice");
  }
  if (static_cast<int>(drivers.size()) != lattice.steps()) throw Error("need one driver per step");
  for (const auto& driver : drivers) {
    if (driver.slice().d != lattice.dim()) throw Error("driver dimension does not match the lattice");
  }
  for (double v : terminal) {
    if (!std::isfinite(v)) throw Error("terminal data is not finite");
  }
}

// Backward induction from slice `last` (already filled) down to slice 0.
void backward(const BrownianLattice& lattice, const std::vector<PreparedDriver>& drivers, int last,
              std::vector<std::vector<double>>& y, std::vector<std::vector<double>>& z, Execution exec) {
  const int d = lattice.dim();
  const int branches = lattice.branch_count();
  const double inv_branches = 1.0 / branches;
  const double dt = lattice.dt();
  const double sqrt_dt = lattice.sqrt_dt();

  for (int m = last - 1; m >= 0; --m) {
    const auto& next = y[m + 1];
    auto& cur = y[m];
    auto& zm = z[m];
    const auto& driver = drivers[m];
    const long long count = static_cast<long long>(lattice.slice_size(m));
    cur.assign(static_cast<std::size_t>(count), 0.0);
    zm.assign(static_cast<std::size_t>(count) * d, 0.0);

    // Child offsets relative to the node's "all down" child.
    std::array<std::size_t, 1 << BrownianLattice::kMaxDim> offsets{};
    for (int b = 0; b < branches; ++b) offsets[b] = lattice.child(m, 0, b);

    const bool parallel = exec == Execution::Parallel && count > kParallelThreshold;
    ErrorSlot error;
#pragma omp parallel for schedule(static) num_threads(worker_count()) if (parallel)
    for (long long k = 0; k < count; ++k) {
      error.guard([&] {
        const std::size_t base = lattice.child(m, static_cast<std::size_t>(k), 0);
        double sum = 0.0;
        std::array<double, BrownianLattice::kMaxDim> acc{};
        for (int b = 0; b < branches; ++b) {
          const double v = next[base + offsets[b]];
          sum += v;
          for (int i = 0; i < d; ++i) {
            if ((b >> i) & 1) {
              acc[i] += v;
            } else {
              acc[i] -= v;
            }
          }
        }
        double* zk = zm.data() + static_cast<std::size_t>(k) * d;
        for (int i = 0; i < d; ++i) zk[i] = acc[i] * inv_branches / sqrt_dt;
        cur[k] = sum * inv_branches + driver.eval(std::span<const double>(zk, d)) * dt;
      });
    }
    error.rethrow();
  }
}

}  // namespace

std::vector<PreparedDriver> prepare_drivers(const MarketModel& model, const Driver& driver) {
  std::vector<PreparedDriver> drivers;
  drivers.reserve(model.steps);
  for (int m = 0; m < model.steps; ++m) drivers.emplace_back(driver, emm_slice(model, m), model.time(m));
  return drivers;
}

void check_monotone_scheme(const BrownianLattice& lattice, const std::vector<PreparedDriver>& drivers) {
  double u_max = 0.0;
  for (const auto& driver : drivers) u_max = std::max(u_max, driver.lipschitz_bound());
  const double level = u_max * std::sqrt(lattice.dim() * lattice.dt());
  if (!(level < 1.0)) {
    std::ostringstream os;
    os << "scheme not monotone: u_max*sqrt(d*dt) = " << level << " >= 1, refine dt";
    throw Error(os.str());
  }
}

BsdeSolution solve_prepared(std::shared_ptr<const BrownianLattice> lattice, std::vector<double> terminal,
                            std::shared_ptr<const std::vector<PreparedDriver>> drivers, Execution exec) {
  check_inputs(*lattice, terminal, *drivers);
  check_monotone_scheme(*lattice, *drivers);

  BsdeSolution sol;
  sol.kind = drivers->front().kind();
  sol.steps = lattice->steps();
  sol.dim = lattice->dim();
  sol.dt = lattice->dt();
  sol.y.resize(sol.steps + 1);
  sol.z.resize(sol.steps);
  sol.y[sol.steps] = std::move(terminal);
  backward(*lattice, *drivers, sol.steps, sol.y, sol.z, exec);
  sol.lattice = std::move(lattice);
  sol.drivers = std::move(drivers);
  return sol;
}

BsdeSolution solve_terminal(const MarketModel& model, const BrownianLattice& lattice,
                            std::vector<double> terminal, const Driver& driver, Execution exec) {
  check_compatible(model, lattice);
  auto report = validate_model(model);
  if (!report.ok()) throw Error("invalid model: " + report.summary());
  auto drivers = std::make_shared<const std::vector<PreparedDriver>>(prepare_drivers(model, driver));
  BsdeSolution sol = solve_prepared(std::make_shared<const BrownianLattice>(lattice), std::move(terminal),
                                    std::move(drivers), exec);
  sol.kind = driver.kind;
  return sol;
}

BsdeSolution solve(const MarketModel& model, const BrownianLattice& lattice, const Claim& claim,
                   const Driver& driver, Execution exec) {
  return solve_terminal(model, lattice, terminal_values(model, lattice, claim), driver, exec);
}

double restart_consistency(const BsdeSolution& solution, int split_step) {
  if (split_step <= 0 || split_step >= solution.steps) throw Error("split step must lie strictly inside (0, N)");
  std::vector<std::vector<double>> y(split_step + 1);
  std::vector<std::vector<double>> z(split_step);
  y[split_step] = solution.y[split_step];
  backward(*solution.lattice, *solution.drivers, split_step, y, z, Execution::Serial);

  double worst = 0.0;
  for (int m = 0; m <= split_step; ++m) {
    for (std::size_t k = 0; k < y[m].size(); ++k) worst = std::max(worst, std::abs(y[m][k] - solution.y[m][k]));
  }
  return worst;
}

std::size_t PriceQuadruple::chain_violations() const {
  auto exceeds = [](double lower, double upper) {
    const double scale = 1.0 + std::max(std::abs(lower), std::abs(upper));
    return lower > upper + kChainTolerance * scale;
  };
  std::size_t violations = 0;
  for (std::size_t m = 0; m < low.y.size(); ++m) {
    for (std::size_t k = 0; k < low.y[m].size(); ++k) {
      if (exceeds(low.y[m][k], buyer.y[m][k]) || exceeds(buyer.y[m][k], seller.y[m][k]) ||
          exceeds(seller.y[m][k], up.y[m][k])) {
        ++violations;
      }
    }
  }
  return violations;
}

PriceQuadruple price_quadruple(const MarketModel& model, const BrownianLattice& lattice, const Claim& claim,
                               const Penalty& penalty, HedgingVariant variant, Execution exec) {
  const auto terminal = terminal_values(model, lattice, claim);
  const bool cw = variant == HedgingVariant::CW;
  PriceQuadruple q;
  q.low = solve_terminal(model, lattice, terminal, cw ? Driver::lower_cw() : Driver::lower_m(), exec);
  q.buyer = solve_terminal(model, lattice, terminal, Driver::buyer(penalty), exec);
  q.seller = solve_terminal(model, lattice, terminal, Driver::seller(penalty), exec);
  q.up = solve_terminal(model, lattice, terminal, cw ? Driver::upper_cw() : Driver::upper_m(), exec);
  return q;
}

}  // namespace riskprice
