#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "riskprice/bsde.hpp"

// Nodewise checks of the risk-measure axioms and price relations. Shared by
// the `verify` command and the test suites.
namespace riskprice::invariants {

/// Largest |a - b| over all nodes of two solutions on the same lattice.
double max_abs_difference(const BsdeSolution& a, const BsdeSolution& b);

/// Largest |a + b| over all nodes (duality: buyer(xi) = -seller(-xi)).
double max_abs_sum(const BsdeSolution& a, const BsdeSolution& b);

/// Nodes where lower > upper + tol (1 + |lower| + |upper|).
std::size_t count_order_violations(const BsdeSolution& lower, const BsdeSolution& upper, double tol);

/// Largest | Y_shifted - Y - shift | over all nodes.
double translation_error(const BsdeSolution& base, const BsdeSolution& shifted, double shift);

/// Nodes where Y(lambda a + (1 - lambda) b) > lambda Y(a) + (1 - lambda) Y(b) + tol (1 + |rhs|).
std::size_t count_convexity_violations(const BsdeSolution& mix, const BsdeSolution& a, const BsdeSolution& b,
                                       double lambda, double tol);

struct DominanceReport {
  std::uint64_t samples = 0;
  std::uint64_t chain_violations = 0;     // LowerCW <= Buyer <= Seller <= UpperCW
  std::uint64_t constrained_violations = 0;  // UpperM <= UpperCW
  std::uint64_t conjugacy_violations = 0;    // Buyer(z) == -Seller(-z) bitwise
};

/// Random z ~ scale * N(0, I) against the given slice and penalty.
DominanceReport driver_dominance(const EmmSlice& slice, const Penalty& penalty, double t, int samples,
                                 unsigned seed, double scale = 10.0);

/// Locality: perturbs the terminal data on the subtree of (step, index) and
/// counts nodes outside that subtree whose value changed. Returns the count.
std::size_t locality_violations(const MarketModel& model, const BrownianLattice& lattice,
                                const std::vector<double>& terminal, const Driver& driver, int step,
                                std::size_t index, double bump);

/// True when terminal node `terminal_index` can be reached from (step, index).
bool in_subtree(const BrownianLattice& lattice, int step, std::size_t index, std::size_t terminal_index);

}  // namespace riskprice::invariants
