#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "riskprice/bsde.hpp"

namespace riskprice {

/// Malformed or invalid configuration. `line` is 1-based, 0 when unknown.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& message, std::size_t line)
      : std::runtime_error(message), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Model block as written: mu and u are either one constant value or one
/// value per step.
struct ModelSpec {
  int n = 1;
  int d = 1;
  std::vector<std::vector<double>> mu;  // size 1 (constant) or N
  std::vector<std::vector<double>> sigma;
  std::vector<double> u;                // size 1 (constant) or N
  std::vector<double> s0;
  double horizon = 1.0;
  int steps = 1;

  MarketModel build() const;
};

struct ClaimSpec {
  std::string kind = "call";  // call | put | digital
  double strike = 100.0;
  std::optional<double> cap;
  int asset = 0;

  Claim build() const;
};

struct PenaltySpec {
  std::string kind = "zero";  // zero | quadratic
  double gamma = 1.0;

  Penalty build() const;
};

struct RunSpec {
  std::vector<std::string> drivers;  // subset of low, buyer, seller, up
  bool chain_check = true;
  HedgingVariant hedging = HedgingVariant::M;
  bool oracle_checks = true;
  int oracle_grid_points = 101;
  std::string csv_path;
  std::string summary_path;
  std::string sweep_path;
  std::size_t csv_row_limit = 500000;
  bool record_timings = false;

  bool wants(const std::string& leg) const;
};

struct ExperimentConfig {
  ModelSpec model;
  ClaimSpec claim;
  PenaltySpec penalty;
  RunSpec run;
};

/// Parses and validates a configuration document. Every field is required
/// (claim.cap may be null); unknown keys are rejected. Numbers may be JSON
/// numbers or decimal strings. Errors carry the line of the offending key.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Inverse of parse_config: parse_config(to_json(c).dump()) reproduces c.
nlohmann::ordered_json to_json(const ExperimentConfig& config);

}  // namespace riskprice
