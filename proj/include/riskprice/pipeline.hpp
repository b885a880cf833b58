#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "riskprice/config.hpp"

namespace riskprice {

inline const std::array<std::string, 4> kLegNames = {"low", "buyer", "seller", "up"};

/// Driver behind a named price: low/up follow the hedging variant, buyer and
/// seller use the penalty.
Driver leg_driver(const std::string& leg, const Penalty& penalty, HedgingVariant variant);

/// Black-Scholes value of the claim when the market is complete with
/// constant volatility and the claim is an uncapped call, put or digital.
/// Otherwise nullopt and `reason` says why.
std::optional<double> closed_form_price(const MarketModel& model, const Claim& claim, std::string* reason = nullptr);

struct OracleCheck {
  std::string name;
  std::optional<double> reference;
  std::optional<double> price;
  std::string skipped;  // non-empty when not run
};

struct PriceRun {
  ExperimentConfig config;
  MarketModel model;
  std::shared_ptr<const BrownianLattice> lattice;
  std::array<std::optional<BsdeSolution>, 4> legs;  // in kLegNames order
  std::optional<std::size_t> chain_violations;
  std::vector<OracleCheck> oracles;
  std::vector<std::pair<std::string, double>> timings;  // seconds
};

/// Validates the model and solves the requested legs. Throws Error on an
/// invalid model or a lattice too coarse for the scenario bound.
PriceRun run_pricing(const ExperimentConfig& config);

struct SweepRow {
  double value = 0.0;
  std::array<double, 4> prices{};
  std::optional<double> closed_form;
};

/// `parameter` is gamma, u or N. Throws ConfigError when it does not apply.
std::vector<SweepRow> run_sweep(const ExperimentConfig& config, const std::string& parameter,
                                const std::vector<double>& values);

/// Applies one sweep value to a copy of the config.
ExperimentConfig with_parameter(const ExperimentConfig& config, const std::string& parameter, double value);

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// The invariant suite run by `verify`.
std::vector<CheckResult> verify_suite(const ExperimentConfig& config);

}  // namespace riskprice
