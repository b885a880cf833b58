// riskprice: four dynamic prices of a European claim on a Brownian lattice.
//
//   riskprice price  --config run.json [--out-dir results/]
//   riskprice sweep  --config run.json --param gamma --values 1e-4,1e-2,1,100
//   riskprice verify --config run.json
//
// Exit codes: 0 ok, 2 chain violation or failed check, 3 invalid config or
// model, 1 anything else.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "riskprice/config.hpp"
#include "riskprice/parallel.hpp"
#include "riskprice/pipeline.hpp"
#include "riskprice/report.hpp"

namespace fs = std::filesystem;
using namespace riskprice;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailed = 2;
constexpr int kExitInvalid = 3;

fs::path resolve(const std::string& out_dir, const std::string& path) {
  if (out_dir.empty() || fs::path(path).is_absolute()) return path;
  return fs::path(out_dir) / path;
}

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void warn_unbounded(const ExperimentConfig& config) {
  if (!config.claim.build().bounded()) {
    std::cerr << "warning: uncapped " << config.claim.kind
              << " is unbounded; set claim.cap for a bounded claim\n";
  }
}

int run_price(const std::string& config_path, const std::string& out_dir) {
  const ExperimentConfig config = load_config(config_path);
  warn_unbounded(config);
  const PriceRun run = run_pricing(config);

  if (!config.run.csv_path.empty()) {
    auto csv = open_output(resolve(out_dir, config.run.csv_path));
    write_price_csv(run, csv);
  }
  const std::string summary = summary_json(run).dump(2) + "\n";
  if (config.run.summary_path.empty()) {
    std::cout << summary;
  } else {
    auto out = open_output(resolve(out_dir, config.run.summary_path));
    out << summary;
    for (std::size_t i = 0; i < kLegNames.size(); ++i) {
      if (run.legs[i]) std::cout << fmt::format("p_{:<7}{}\n", kLegNames[i], format_double(run.legs[i]->y0()));
    }
  }
  if (run.chain_violations && *run.chain_violations > 0) {
    std::cerr << "chain violated at " << *run.chain_violations << " nodes\n";
    return kExitFailed;
  }
  return kExitOk;
}

std::vector<double> parse_values(const std::string& list) {
  std::vector<double> values;
  std::stringstream in(list);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::logic_error&) {
      throw ConfigError("--values: '" + item + "' is not a number", 0);
    }
  }
  if (values.empty()) throw ConfigError("--values: empty list", 0);
  return values;
}

int run_sweep_cmd(const std::string& config_path, const std::string& parameter, const std::string& values,
                  const std::string& out_dir) {
  const ExperimentConfig config = load_config(config_path);
  warn_unbounded(config);
  const auto rows = run_sweep(config, parameter, parse_values(values));
  if (config.run.sweep_path.empty()) {
    write_sweep_csv(parameter, rows, std::cout);
  } else {
    auto out = open_output(resolve(out_dir, config.run.sweep_path));
    write_sweep_csv(parameter, rows, out);
  }
  return kExitOk;
}

int run_verify(const std::string& config_path) {
  const ExperimentConfig config = load_config(config_path);
  bool all = true;
  for (const auto& check : verify_suite(config)) {
    std::cout << (check.passed ? "PASS " : "FAIL ") << check.name << ": " << check.detail << '\n';
    all = all && check.passed;
  }
  return all ? kExitOk : kExitFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dynamic lower, buyer, seller and upper prices on a Brownian lattice"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, std::string("Worker cap (overrides ") + kThreadsEnv + ")")
      ->check(CLI::NonNegativeNumber);

  std::string config_path;
  std::string out_dir;
  std::string parameter;
  std::string values;

  auto* price = app.add_subcommand("price", "Solve the configured prices and write CSV + summary JSON");
  price->add_option("--config", config_path, "Experiment config (JSON)")->required();
  price->add_option("--out-dir", out_dir, "Directory for relative output paths");

  auto* sweep = app.add_subcommand("sweep", "Re-solve over a list of parameter values");
  sweep->add_option("--config", config_path, "Experiment config (JSON)")->required();
  sweep->add_option("--param", parameter, "gamma, u or N")->required();
  sweep->add_option("--values", values, "Comma-separated values")->required();
  sweep->add_option("--out-dir", out_dir, "Directory for relative output paths");

  auto* verify = app.add_subcommand("verify", "Run the invariant suite; exit 0 iff every check passes");
  verify->add_option("--config", config_path, "Experiment config (JSON)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInvalid;
  }
  if (threads > 0) set_worker_count(threads);

  try {
    if (*price) return run_price(config_path, out_dir);
    if (*sweep) return run_sweep_cmd(config_path, parameter, values, out_dir);
    return run_verify(config_path);
  } catch (const ConfigError& e) {
    std::cerr << config_path << ": " << e.what() << '\n';
    return kExitInvalid;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << '\n';
    return 1;
  }
}
