#pragma once

#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "riskprice/pipeline.hpp"

namespace riskprice {

enum class CsvLayout { FullLattice, SliceSummary };

/// Full lattice when total_nodes <= row_limit, else min/max/mean per slice.
CsvLayout csv_layout(const PriceRun& run);

/// Price processes as CSV (header row, LF line ends). Legs that were not
/// computed are left empty.
///   full:    step,time,node_coordinates,p_low,p_buyer,p_seller,p_up
///   summary: step,time,nodes,statistic,p_low,p_buyer,p_seller,p_up
void write_price_csv(const PriceRun& run, std::ostream& out);

/// t = 0 prices, chain violations, oracle deltas and (when recorded) timings.
nlohmann::ordered_json summary_json(const PriceRun& run);

/// One row per sweep value with differences against the previous row.
void write_sweep_csv(const std::string& parameter, const std::vector<SweepRow>& rows, std::ostream& out);

/// Shortest decimal form that reads back to the same double.
std::string format_double(double x);

}  // namespace riskprice
