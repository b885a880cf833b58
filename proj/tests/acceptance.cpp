// Acceptance run: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "riskprice/bsde.hpp"
#include "riskprice/invariants.hpp"
#include "riskprice/oracle.hpp"

using namespace riskprice;

namespace {

int g_failed = 0;

void report(int id, const std::string& title, bool passed, const std::string& detail) {
  fmt::print("{} criterion {}: {} | {}\n", passed ? "PASS" : "FAIL", id, title, detail);
  std::fflush(stdout);
  if (!passed) ++g_failed;
}

double seconds(const std::function<void()>& body) {
  const auto start = std::chrono::steady_clock::now();
  body();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

MarketModel complete_model(int steps) {
  Eigen::VectorXd mu(1);
  mu << 0.05;
  Eigen::MatrixXd sigma(1, 1);
  sigma << 0.2;
  Eigen::VectorXd s0(1);
  s0 << 100.0;
  return MarketModel::constant(mu, sigma, 0.5, s0, 1.0, steps);
}

MarketModel incomplete_model(int steps) {
  Eigen::VectorXd mu(1);
  mu << 0.05;
  Eigen::MatrixXd sigma(1, 2);
  sigma << 0.2, 0.1;
  Eigen::VectorXd s0(1);
  s0 << 100.0;
  return MarketModel::constant(mu, sigma, 0.5, s0, 1.0, steps);
}

BrownianLattice lattice_of(const MarketModel& m) { return BrownianLattice(m.steps, m.d, m.horizon); }

double uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

void complete_market_collapse() {
  const auto model = complete_model(200);
  PriceQuadruple q;
  const double t = seconds([&] { q = price_quadruple(model, lattice_of(model), Claim::call(100.0), Penalty::quadratic(1.0)); });
  const double ys[] = {q.low.y0(), q.buyer.y0(), q.seller.y0(), q.up.y0()};
  double spread = 0.0;
  for (double a : ys) {
    for (double b : ys) spread = std::max(spread, std::abs(a - b) / std::abs(b));
  }
  const double bs = oracle::black_scholes_call(100.0, 100.0, 0.2, 1.0);
  const double rel = std::abs(q.seller.y0() - bs) / bs;
  report(1, "complete-market collapse", spread <= 1e-9 && rel <= 1e-2 && t < 1.0,
         fmt::format("prices {:.10f} {:.10f} {:.10f} {:.10f}, max relative spread {:.3g}, BS {:.6f}, "
                     "relative error {:.3g}, {:.3f} s",
                     ys[0], ys[1], ys[2], ys[3], spread, bs, rel, t));
}

void chain() {
  const auto model = incomplete_model(100);
  const auto lattice = lattice_of(model);
  std::size_t violations = 0;
  const double t = seconds([&] {
    violations = price_quadruple(model, lattice, Claim::call(100.0), Penalty::quadratic(1.0)).chain_violations();
  });
  report(2, "price chain at every node", violations == 0 && t < 30.0,
         fmt::format("{} violations over {} nodes, {:.2f} s", violations, lattice.total_nodes(), t));
}

void driver_dominance() {
  std::mt19937_64 rng(2024);
  invariants::DominanceReport total;
  int slices = 0;
  while (total.samples < 10000) {
    const int n = 1 + static_cast<int>(rng() % 2);
    const int d = n + static_cast<int>(rng() % 3);
    Eigen::VectorXd mu(n);
    Eigen::MatrixXd sigma(n, d);
    Eigen::VectorXd s0 = Eigen::VectorXd::Constant(n, 100.0);
    for (int i = 0; i < n; ++i) {
      mu[i] = 0.2 * (uniform(rng) - 0.5);
      for (int j = 0; j < d; ++j) sigma(i, j) = 0.5 * (uniform(rng) - 0.5) + (i == j ? 0.3 : 0.0);
    }
    // Bound between |theta_bar| and 3 |theta_bar| + 0.1.
    MarketModel probe = MarketModel::constant(mu, sigma, 1e6, s0, 1.0, 1);
    const double tb = Eigen::Map<const Eigen::VectorXd>(emm_slice(probe, 0).theta_bar.data(), d).norm();
    const double u = tb + (2.0 * tb + 0.1) * uniform(rng);
    const EmmSlice slice = emm_slice(MarketModel::constant(mu, sigma, u, s0, 1.0, 1), 0);

    Penalty penalty;
    switch (rng() % 3) {
      case 0:
        penalty = Penalty::zero();
        break;
      case 1:
        penalty = Penalty::quadratic(std::pow(10.0, -3.0 + 6.0 * uniform(rng)));
        break;
      default:
        penalty = slice.kernel_dim <= 1 ? Penalty::custom([](double, std::span<const double> th) {
          double v = 0.0;
          for (double x : th) v += x * x * x * x + 0.3 * x * x;
          return v;
        }) : Penalty::quadratic(0.5);
    }
    const auto r = invariants::driver_dominance(slice, penalty, 0.0, 100, static_cast<unsigned>(rng()), 5.0);
    total.samples += r.samples;
    total.chain_violations += r.chain_violations;
    total.constrained_violations += r.constrained_violations;
    total.conjugacy_violations += r.conjugacy_violations;
    ++slices;
  }
  const bool ok = total.chain_violations == 0 && total.constrained_violations == 0 && total.conjugacy_violations == 0;
  report(3, "driver dominance", ok,
         fmt::format("{} samples over {} random slices/penalties: chain {}, UpperM<=UpperCW {}, conjugacy {}",
                     total.samples, slices, total.chain_violations, total.constrained_violations,
                     total.conjugacy_violations));
}

void duality() {
  const auto model = incomplete_model(100);
  const auto lattice = lattice_of(model);
  const auto penalty = Penalty::quadratic(1.0);
  double worst = 0.0;
  for (const auto& claim : {Claim::call(100.0), Claim::put(100.0), Claim::digital(100.0)}) {
    auto xi = terminal_values(model, lattice, claim);
    const auto buyer = solve_terminal(model, lattice, xi, Driver::buyer(penalty));
    for (auto& x : xi) x = -x;
    const auto seller = solve_terminal(model, lattice, xi, Driver::seller(penalty));
    worst = std::max(worst, invariants::max_abs_sum(buyer, seller));
  }
  report(4, "buyer/seller duality", worst <= 1e-12,
         fmt::format("max |buyer(xi) + seller(-xi)| = {:.3g} over call, put, digital", worst));
}

void penalty_limits() {
  const auto model = incomplete_model(100);
  const auto lattice = lattice_of(model);
  const auto claim = Claim::call(100.0);
  const auto terminal = terminal_values(model, lattice, claim);
  const std::vector<double> gammas = {1e-4, 1e-2, 1.0, 10.0, 1e3};
  std::vector<double> seller;
  std::vector<double> buyer;
  for (double g : gammas) {
    seller.push_back(solve_terminal(model, lattice, terminal, Driver::seller(Penalty::quadratic(g))).y0());
    buyer.push_back(solve_terminal(model, lattice, terminal, Driver::buyer(Penalty::quadratic(g))).y0());
  }
  const double upper = solve_terminal(model, lattice, terminal, Driver::upper_m()).y0();
  bool monotone = true;
  for (std::size_t i = 1; i < gammas.size(); ++i) {
    monotone = monotone && seller[i] >= seller[i - 1] && buyer[i] <= buyer[i - 1];
  }
  const double gap = seller.front() - buyer.front();
  const double to_upper = std::abs(upper - seller.back());
  const double s0 = 100.0;
  report(5, "penalty-limit sweep", monotone && gap < 1e-3 * s0 && to_upper <= 1e-2 * s0,
         fmt::format("seller {:.6f}..{:.6f}, buyer {:.6f}..{:.6f}, monotone {}, gap at 1e-4 {:.3g}, "
                     "|seller - UpperM| at 1e3 {:.3g}",
                     seller.front(), seller.back(), buyer.front(), buyer.back(), monotone, gap, to_upper));
}

void game_reduction() {
  const auto model = incomplete_model(2);
  const auto lattice = lattice_of(model);
  const auto claim = Claim::call(100.0);
  const auto penalty = Penalty::quadratic(1.0);
  const double y0 = solve(model, lattice, claim, Driver::seller(penalty)).y0();
  double coarse = 0.0;
  double fine = 0.0;
  const double t = seconds([&] {
    coarse = std::abs(oracle::game_seller_price(model, {21, 2.0, 41}, lattice, claim, penalty) - y0);
    fine = std::abs(oracle::game_seller_price(model, {41, 2.0, 81}, lattice, claim, penalty) - y0);
  });
  const double ratio = fine > 0.0 ? coarse / fine : INFINITY;
  const double limit = 5e-2 * 100.0 * 0.01;
  report(6, "game reduction", ratio >= 1.5 && fine < limit && t < 60.0,
         fmt::format("bsde seller {:.8f}, gap {:.3g} -> {:.3g} (ratio {:.3g}), limit {:.3g}, {:.2f} s", y0, coarse,
                     fine, ratio, limit, t));
}

void oracle_equivalence() {
  const auto claim = Claim::call(100.0);
  const auto penalty = Penalty::quadratic(1.0);
  std::vector<double> gaps;
  for (int steps : {3, 6}) {
    const auto model = incomplete_model(steps);
    const auto lattice = lattice_of(model);
    const double dp = oracle::tilted_dp(model, lattice, claim, penalty, oracle::Mode::Seller);
    const double y0 = solve(model, lattice, claim, Driver::seller(penalty)).y0();
    gaps.push_back(std::abs(dp - y0));
  }
  const double ratio = gaps[0] / gaps[1];
  report(7, "tilted oracle vs bsde seller", ratio >= 1.5,
         fmt::format("gap N=3 {:.4g}, N=6 {:.4g}, ratio {:.3g} (need >= 1.5), tolerance 3x fine gap {:.4g}", gaps[0],
                     gaps[1], ratio, 3.0 * gaps[1]));
}

void axioms() {
  const auto model = incomplete_model(60);
  const auto lattice = lattice_of(model);
  const auto penalty = Penalty::quadratic(1.0);
  const std::vector<Driver> drivers = {Driver::lower_m(), Driver::buyer(penalty), Driver::seller(penalty),
                                       Driver::upper_m()};
  const auto terminal = terminal_values(model, lattice, Claim::call(100.0));
  const std::size_t size = terminal.size();

  bool normalized = true;
  double translation = 0.0;
  double restart = 0.0;
  std::size_t locality = 0;
  const std::vector<double> zero(size, 0.0);
  auto shifted = terminal;
  for (auto& x : shifted) x += 1.0;
  for (const auto& driver : drivers) {
    const auto z = solve_terminal(model, lattice, zero, driver);
    for (const auto& slice : z.y) {
      for (double y : slice) normalized = normalized && y == 0.0;
    }
    const auto base = solve_terminal(model, lattice, terminal, driver);
    translation = std::max(translation,
                           invariants::translation_error(base, solve_terminal(model, lattice, shifted, driver), 1.0));
    for (int split : {1, 30, 59}) restart = std::max(restart, restart_consistency(base, split));
    locality += invariants::locality_violations(model, lattice, terminal, driver, 30, lattice.slice_size(30) / 3, 7.0);
  }

  std::mt19937_64 rng(99);
  std::size_t mono = 0;
  std::size_t convex = 0;
  const double lambdas[] = {0.25, 0.5, 0.75};
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> a(size);
    std::vector<double> b(size);
    std::vector<double> c(size);
    std::vector<double> mix(size);
    const double lambda = lambdas[trial % 3];
    for (std::size_t k = 0; k < size; ++k) {
      a[k] = 100.0 * uniform(rng);
      b[k] = a[k] + 10.0 * uniform(rng);
      c[k] = 100.0 * uniform(rng);
      mix[k] = lambda * a[k] + (1.0 - lambda) * c[k];
    }
    const Driver& driver = drivers[static_cast<std::size_t>(trial) % drivers.size()];
    mono += invariants::count_order_violations(solve_terminal(model, lattice, a, driver),
                                               solve_terminal(model, lattice, b, driver), 1e-12);
    const Driver seller = Driver::seller(penalty);
    convex += invariants::count_convexity_violations(solve_terminal(model, lattice, mix, seller),
                                                     solve_terminal(model, lattice, a, seller),
                                                     solve_terminal(model, lattice, c, seller), lambda, 1e-12);
  }
  const bool ok = normalized && translation <= 1e-12 && restart <= 1e-12 && locality == 0 && mono == 0 && convex == 0;
  report(8, "risk-measure axioms", ok,
         fmt::format("normalization {}, translation {:.3g}, monotonicity {} / 100 pairs, convexity {} / 100 triples, "
                     "restart {:.3g}, locality {}",
                     normalized ? "exact" : "broken", translation, mono, convex, restart, locality));
}

void convergence_order() {
  const double bs = oracle::black_scholes_call(100.0, 100.0, 0.2, 1.0);
  std::vector<double> errors;
  for (int steps : {25, 50, 100, 200}) {
    const auto model = complete_model(steps);
    errors.push_back(std::abs(solve(model, lattice_of(model), Claim::call(100.0), Driver::black_scholes()).y0() - bs));
  }
  bool ok = true;
  std::string ratios;
  for (std::size_t i = 1; i < errors.size(); ++i) {
    const double r = errors[i - 1] / errors[i];
    ok = ok && r >= 1.5 && r <= 3.0;
    ratios += fmt::format("{}{:.3g}", i > 1 ? ", " : "", r);
  }
  report(9, "convergence order", ok,
         fmt::format("errors {:.4g} {:.4g} {:.4g} {:.4g}, ratios [{}] (need each in [1.5, 3.0])", errors[0], errors[1],
                     errors[2], errors[3], ratios));
}

}  // namespace

int main() {
  const std::vector<std::function<void()>> criteria = {complete_market_collapse, chain,          driver_dominance,
                                                       duality,                  penalty_limits, game_reduction,
                                                       oracle_equivalence,       axioms,         convergence_order};
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    try {
      criteria[i]();
    } catch (const std::exception& e) {
      report(static_cast<int>(i + 1), "raised", false, e.what());
    }
  }
  fmt::print("{} of {} criteria passed\n", criteria.size() - g_failed, criteria.size());
  return g_failed;
}
