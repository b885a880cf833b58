#include "riskprice/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>

#include <fmt/format.h>

#include "riskprice/invariants.hpp"
#include "riskprice/oracle.hpp"

namespace riskprice {

namespace {

// Work estimate above which the tilted oracle is skipped in `price`.
constexpr double kOracleBudget = 5e8;
constexpr int kVerifyTrials = 100;
constexpr double kVerifyTolerance = 1e-12;
constexpr double kOrderTolerance = 1e-10;

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// Uniform in [0, 1) built from the raw 64-bit stream, so the sequence is the
// same on every standard library.
double uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::vector<double> random_claim(std::mt19937_64& rng, std::size_t size, double scale) {
  std::vector<double> out(size);
  for (auto& x : out) x = scale * uniform(rng);
  return out;
}

double tilted_work(const MarketModel& model, const BrownianLattice& lattice, int grid_points) {
  const int kdim = model.d - model.n;
  return static_cast<double>(lattice.total_nodes()) * std::pow(static_cast<double>(grid_points), kdim) *
         lattice.branch_count();
}

std::string fmt_num(double x) { return fmt::format("{:.6g}", x); }

}  // namespace

Driver leg_driver(const std::string& leg, const Penalty& penalty, HedgingVariant variant) {
  const bool cw = variant == HedgingVariant::CW;
  if (leg == "low") return cw ? Driver::lower_cw() : Driver::lower_m();
  if (leg == "buyer") return Driver::buyer(penalty);
  if (leg == "seller") return Driver::seller(penalty);
  if (leg == "up") return cw ? Driver::upper_cw() : Driver::upper_m();
  throw Error("unknown price leg '" + leg + "'");
}

std::optional<double> closed_form_price(const MarketModel& model, const Claim& claim, std::string* reason) {
  auto skip = [&](const char* why) -> std::optional<double> {
    if (reason) *reason = why;
    return std::nullopt;
  };
  if (model.n != model.d) return skip("incomplete market");
  if (claim.kind == Claim::Kind::CustomTerminal) return skip("custom claim");
  if (claim.cap) return skip("capped claim");
  const double vol = model.sigma.front().row(claim.asset).norm();
  const double s0 = model.s0[claim.asset];
  switch (claim.kind) {
    case Claim::Kind::Call:
      return oracle::black_scholes_call(s0, claim.strike, vol, model.horizon);
    case Claim::Kind::Put:
      return oracle::black_scholes_put(s0, claim.strike, vol, model.horizon);
    case Claim::Kind::Digital:
      return oracle::black_scholes_digital(s0, claim.strike, vol, model.horizon);
    default:
      return skip("custom claim");
  }
}

PriceRun run_pricing(const ExperimentConfig& config) {
  PriceRun run;
  run.config = config;
  run.model = config.model.build();
  const ValidationReport report = validate_model(run.model);
  if (!report.ok()) throw Error("invalid model: " + report.summary());

  const MarketModel& model = run.model;
  run.lattice = std::make_shared<const BrownianLattice>(model.steps, model.d, model.horizon);
  const Claim claim = config.claim.build();
  const Penalty penalty = config.penalty.build();
  const auto terminal = terminal_values(model, *run.lattice, claim);

  for (std::size_t i = 0; i < kLegNames.size(); ++i) {
    if (!config.run.wants(kLegNames[i])) continue;
    const auto start = std::chrono::steady_clock::now();
    run.legs[i] = solve_terminal(model, *run.lattice, terminal, leg_driver(kLegNames[i], penalty, config.run.hedging));
    run.timings.emplace_back(kLegNames[i], seconds_since(start));
  }

  if (config.run.chain_check) {
    PriceQuadruple q{*run.legs[0], *run.legs[1], *run.legs[2], *run.legs[3]};
    run.chain_violations = q.chain_violations();
  }

  if (config.run.oracle_checks) {
    const auto start = std::chrono::steady_clock::now();
    std::string reason;
    const auto bs = closed_form_price(model, claim, &reason);
    if (model.n == model.d) {
      OracleCheck check{"black_scholes", bs, std::nullopt, bs ? "" : reason};
      run.oracles.push_back(check);
    } else {
      const int points = config.run.oracle_grid_points;
      const bool affordable = tilted_work(model, *run.lattice, points) <= kOracleBudget;
      for (const auto& [leg, mode] : {std::pair{std::size_t{2}, oracle::Mode::Seller},
                                      std::pair{std::size_t{1}, oracle::Mode::Buyer}}) {
        OracleCheck check;
        check.name = std::string("tilted_dp_") + kLegNames[leg];
        if (!run.legs[leg]) {
          check.skipped = "leg not computed";
        } else if (!affordable) {
          check.skipped = "lattice too large for the scenario grid";
        } else {
          check.reference = oracle::tilted_dp(model, *run.lattice, claim, penalty, mode, points);
        }
        run.oracles.push_back(check);
      }
    }
    for (auto& check : run.oracles) {
      if (!check.reference) continue;
      const std::size_t leg = check.name == "tilted_dp_buyer" ? 1 : 2;
      if (run.legs[leg]) check.price = run.legs[leg]->y0();
    }
    run.timings.emplace_back("oracles", seconds_since(start));
  }
  return run;
}

ExperimentConfig with_parameter(const ExperimentConfig& config, const std::string& parameter, double value) {
  ExperimentConfig out = config;
  if (parameter == "gamma") {
    if (config.penalty.kind != "quadratic") throw ConfigError("gamma sweep needs a quadratic penalty", 0);
    if (!(value > 0.0)) throw ConfigError("gamma values must be positive", 0);
    out.penalty.gamma = value;
  } else if (parameter == "u") {
    if (!(value > 0.0)) throw ConfigError("u values must be positive", 0);
    out.model.u = {value};
  } else if (parameter == "N") {
    if (value != std::floor(value) || value < 1) throw ConfigError("N values must be positive integers", 0);
    if (config.model.mu.size() != 1 || config.model.u.size() != 1) {
      throw ConfigError("N sweep needs constant mu and u", 0);
    }
    out.model.steps = static_cast<int>(value);
  } else {
    throw ConfigError("unknown sweep parameter '" + parameter + "' (expected gamma, u or N)", 0);
  }
  return out;
}

std::vector<SweepRow> run_sweep(const ExperimentConfig& config, const std::string& parameter,
                                const std::vector<double>& values) {
  std::vector<SweepRow> rows;
  for (double value : values) {
    ExperimentConfig point = with_parameter(config, parameter, value);
    point.run.drivers.assign(kLegNames.begin(), kLegNames.end());
    point.run.chain_check = false;
    point.run.oracle_checks = false;
    const PriceRun run = run_pricing(point);
    SweepRow row;
    row.value = value;
    for (std::size_t i = 0; i < kLegNames.size(); ++i) row.prices[i] = run.legs[i]->y0();
    row.closed_form = closed_form_price(run.model, point.claim.build());
    rows.push_back(row);
  }
  return rows;
}

std::vector<CheckResult> verify_suite(const ExperimentConfig& config) {
  std::vector<CheckResult> out;
  const MarketModel model = config.model.build();
  const ValidationReport report = validate_model(model);
  if (!report.ok()) throw Error("invalid model: " + report.summary());

  const BrownianLattice lattice(model.steps, model.d, model.horizon);
  const Claim claim = config.claim.build();
  const Penalty penalty = config.penalty.build();
  const auto terminal = terminal_values(model, lattice, claim);
  const double scale = std::max(1.0, std::abs(model.s0[claim.asset]));

  auto add = [&](std::string name, bool passed, std::string detail) {
    out.push_back({std::move(name), passed, std::move(detail)});
  };
  auto solve_leg = [&](const std::vector<double>& xi, const Driver& driver) {
    return solve_terminal(model, lattice, xi, driver, Execution::Parallel);
  };

  for (const auto variant : {HedgingVariant::M, HedgingVariant::CW}) {
    const auto q = price_quadruple(model, lattice, claim, penalty, variant);
    const std::size_t v = q.chain_violations();
    add(variant == HedgingVariant::M ? "chain_M" : "chain_CW", v == 0,
        fmt::format("{} violations over {} nodes", v, lattice.total_nodes()));
  }

  {
    const std::vector<double> zero(terminal.size(), 0.0);
    bool exact = true;
    for (const auto& leg : kLegNames) {
      const auto sol = solve_leg(zero, leg_driver(leg, penalty, config.run.hedging));
      for (const auto& slice : sol.y) {
        for (double y : slice) exact = exact && y == 0.0;
      }
    }
    add("normalization", exact, exact ? "all legs exactly 0 for a zero claim" : "nonzero value for a zero claim");
  }

  {
    const double shift = 0.5 * scale;
    std::vector<double> shifted = terminal;
    for (auto& x : shifted) x += shift;
    double worst = 0.0;
    for (const auto& leg : kLegNames) {
      const Driver driver = leg_driver(leg, penalty, config.run.hedging);
      worst = std::max(worst, invariants::translation_error(solve_leg(terminal, driver), solve_leg(shifted, driver), shift));
    }
    const double tol = kVerifyTolerance * (1.0 + shift + *std::max_element(terminal.begin(), terminal.end()));
    add("translation", worst <= tol, fmt::format("max error {} (tolerance {})", fmt_num(worst), fmt_num(tol)));
  }

  {
    std::vector<double> negated = terminal;
    for (auto& x : negated) x = -x;
    const double gap = invariants::max_abs_sum(solve_leg(terminal, Driver::buyer(penalty)),
                                               solve_leg(negated, Driver::seller(penalty)));
    add("duality", gap <= kVerifyTolerance, fmt::format("max |buyer(xi) + seller(-xi)| = {}", fmt_num(gap)));
  }

  {
    const auto sol = solve_leg(terminal, Driver::seller(penalty));
    const double gap = restart_consistency(sol, model.steps / 2);
    add("time_consistency", gap <= kVerifyTolerance,
        fmt::format("restart at step {}: max difference {}", model.steps / 2, fmt_num(gap)));
  }

  {
    const int step = model.steps / 2;
    const std::size_t violations = invariants::locality_violations(
        model, lattice, terminal, Driver::seller(penalty), step, lattice.slice_size(step) / 2, scale);
    add("locality", violations == 0, fmt::format("{} nodes outside the bumped subtree moved", violations));
  }

  {
    const auto slice = emm_slice(model, 0);
    const auto d = invariants::driver_dominance(slice, penalty, 0.0, 10000, 7);
    const bool ok = d.chain_violations == 0 && d.constrained_violations == 0 && d.conjugacy_violations == 0;
    add("driver_dominance", ok,
        fmt::format("{} samples: chain {}, UpperM<=UpperCW {}, conjugacy {}", d.samples, d.chain_violations,
                    d.constrained_violations, d.conjugacy_violations));
  }

  {
    std::mt19937_64 rng(20240917);
    std::size_t mono = 0;
    std::size_t convex = 0;
    const std::array<double, 3> lambdas = {0.25, 0.5, 0.75};
    for (int trial = 0; trial < kVerifyTrials; ++trial) {
      const auto a = random_claim(rng, terminal.size(), scale);
      auto b = a;
      for (auto& x : b) x += 0.1 * scale * uniform(rng);
      const auto c = random_claim(rng, terminal.size(), scale);
      const double lambda = lambdas[static_cast<std::size_t>(trial) % lambdas.size()];
      std::vector<double> mix(a.size());
      for (std::size_t k = 0; k < a.size(); ++k) mix[k] = lambda * a[k] + (1.0 - lambda) * c[k];

      for (const auto& driver : {Driver::seller(penalty), Driver::buyer(penalty)}) {
        mono += invariants::count_order_violations(solve_leg(a, driver), solve_leg(b, driver), kOrderTolerance);
      }
      const Driver seller = Driver::seller(penalty);
      convex += invariants::count_convexity_violations(solve_leg(mix, seller), solve_leg(a, seller),
                                                       solve_leg(c, seller), lambda, kOrderTolerance);
    }
    add("monotonicity", mono == 0, fmt::format("{} violating nodes over {} random pairs", mono, kVerifyTrials));
    add("convexity", convex == 0, fmt::format("{} violating nodes over {} random triples", convex, kVerifyTrials));
  }

  std::string reason;
  if (const auto bs = closed_form_price(model, claim, &reason)) {
    const auto q = price_quadruple(model, lattice, claim, penalty, HedgingVariant::M);
    const double rel = std::abs(q.seller.y0() - *bs) / std::abs(*bs);
    add("black_scholes", rel <= 1e-2, fmt::format("seller {} vs closed form {}: relative error {}",
                                                  fmt_num(q.seller.y0()), fmt_num(*bs), fmt_num(rel)));
  } else if (tilted_work(model, lattice, config.run.oracle_grid_points) <= kOracleBudget) {
    const int points = config.run.oracle_grid_points;
    const double constant = oracle::constant_scenario_bound(model, lattice, claim, penalty, oracle::Mode::Seller, points);
    const double dynamic = oracle::tilted_dp(model, lattice, claim, penalty, oracle::Mode::Seller, points);
    add("constant_scenario_bound", constant <= dynamic + kOrderTolerance * (1.0 + std::abs(dynamic)),
        fmt::format("constant {} <= dynamic {}", fmt_num(constant), fmt_num(dynamic)));
  }
  return out;
}

}  // namespace riskprice
