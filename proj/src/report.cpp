#include "riskprice/report.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace riskprice {

namespace {

using nlohmann::ordered_json;

ordered_json optional_number(const std::optional<double>& x) {
  return x ? ordered_json(*x) : ordered_json(nullptr);
}

std::string coordinates_field(const BrownianLattice& lattice, int m, std::size_t k) {
  std::string out;
  for (int c : lattice.coordinates(m, k)) {
    if (!out.empty()) out += ';';
    out += std::to_string(c);
  }
  return out;
}

}  // namespace

std::string format_double(double x) { return fmt::format("{}", x); }

CsvLayout csv_layout(const PriceRun& run) {
  return run.lattice->total_nodes() <= run.config.run.csv_row_limit ? CsvLayout::FullLattice : CsvLayout::SliceSummary;
}

void write_price_csv(const PriceRun& run, std::ostream& out) {
  const BrownianLattice& lattice = *run.lattice;
  const auto& legs = run.legs;
  auto price_columns = [&](auto&& value_of) {
    std::string row;
    for (std::size_t i = 0; i < legs.size(); ++i) {
      row += ',';
      if (legs[i]) row += format_double(value_of(*legs[i]));
    }
    return row;
  };

  if (csv_layout(run) == CsvLayout::FullLattice) {
    out << "step,time,node_coordinates,p_low,p_buyer,p_seller,p_up\n";
    for (int m = 0; m <= lattice.steps(); ++m) {
      const std::string time = format_double(m * lattice.dt());
      for (std::size_t k = 0; k < lattice.slice_size(m); ++k) {
        out << m << ',' << time << ',' << coordinates_field(lattice, m, k)
            << price_columns([&](const BsdeSolution& s) { return s.y[m][k]; }) << '\n';
      }
    }
    return;
  }

  out << "step,time,nodes,statistic,p_low,p_buyer,p_seller,p_up\n";
  for (int m = 0; m <= lattice.steps(); ++m) {
    const std::string head = fmt::format("{},{},{}", m, format_double(m * lattice.dt()), lattice.slice_size(m));
    out << head << ",min" << price_columns([&](const BsdeSolution& s) {
      return *std::min_element(s.y[m].begin(), s.y[m].end());
    }) << '\n';
    out << head << ",max" << price_columns([&](const BsdeSolution& s) {
      return *std::max_element(s.y[m].begin(), s.y[m].end());
    }) << '\n';
    out << head << ",mean" << price_columns([&](const BsdeSolution& s) {
      double sum = 0.0;
      for (double y : s.y[m]) sum += y;
      return sum / static_cast<double>(s.y[m].size());
    }) << '\n';
  }
}

ordered_json summary_json(const PriceRun& run) {
  ordered_json out;
  ordered_json prices = ordered_json::object();
  for (std::size_t i = 0; i < kLegNames.size(); ++i) {
    prices[kLegNames[i]] = run.legs[i] ? ordered_json(run.legs[i]->y0()) : ordered_json(nullptr);
  }
  out["prices_t0"] = prices;
  out["chain_violations"] =
      run.chain_violations ? ordered_json(*run.chain_violations) : ordered_json(nullptr);
  out["hedging_variant"] = run.config.run.hedging == HedgingVariant::M ? "M" : "CW";

  const BrownianLattice& lattice = *run.lattice;
  out["lattice"]["steps"] = lattice.steps();
  out["lattice"]["dim"] = lattice.dim();
  out["lattice"]["dt"] = lattice.dt();
  out["lattice"]["nodes"] = lattice.total_nodes();
  out["lattice"]["csv_layout"] = csv_layout(run) == CsvLayout::FullLattice ? "full" : "slice_summary";

  ordered_json oracles = ordered_json::array();
  for (const auto& check : run.oracles) {
    ordered_json o;
    o["name"] = check.name;
    if (!check.skipped.empty()) {
      o["skipped"] = check.skipped;
    } else {
      o["reference"] = optional_number(check.reference);
      if (check.name == "black_scholes") {
        ordered_json deltas = ordered_json::object();
        for (std::size_t i = 0; i < kLegNames.size(); ++i) {
          if (run.legs[i]) deltas[kLegNames[i]] = run.legs[i]->y0() - *check.reference;
        }
        o["delta"] = deltas;
      } else {
        o["price"] = optional_number(check.price);
        o["delta"] = check.price ? ordered_json(*check.price - *check.reference) : ordered_json(nullptr);
      }
    }
    oracles.push_back(o);
  }
  out["oracles"] = oracles;

  if (run.config.run.record_timings) {
    ordered_json timings = ordered_json::object();
    for (const auto& [name, seconds] : run.timings) timings[name] = seconds;
    out["timings_seconds"] = timings;
  }
  return out;
}

void write_sweep_csv(const std::string& parameter, const std::vector<SweepRow>& rows, std::ostream& out) {
  out << "param,value,p_low,p_buyer,p_seller,p_up,seller_minus_buyer,up_minus_low,closed_form,abs_error,"
         "change_seller,change_buyer,change_seller_minus_buyer,change_up,error_ratio\n";
  const SweepRow* prev = nullptr;
  for (const auto& row : rows) {
    const auto& p = row.prices;
    out << parameter << ',' << format_double(row.value);
    for (double x : p) out << ',' << format_double(x);
    out << ',' << format_double(p[2] - p[1]) << ',' << format_double(p[3] - p[0]);
    std::optional<double> error;
    if (row.closed_form) {
      error = std::abs(p[2] - *row.closed_form);
      out << ',' << format_double(*row.closed_form) << ',' << format_double(*error);
    } else {
      out << ",,";
    }
    if (prev) {
      const auto& q = prev->prices;
      out << ',' << format_double(p[2] - q[2]) << ',' << format_double(p[1] - q[1]) << ','
          << format_double((p[2] - p[1]) - (q[2] - q[1])) << ',' << format_double(p[3] - q[3]);
      if (error && prev->closed_form && *error > 0.0) {
        out << ',' << format_double(std::abs(q[2] - *prev->closed_form) / *error);
      } else {
        out << ',';
      }
    } else {
      out << ",,,,,";
    }
    out << '\n';
    prev = &row;
  }
}

}  // namespace riskprice
