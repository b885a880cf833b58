#pragma once

#include <memory>
#include <vector>

#include "riskprice/lattice.hpp"
#include "riskprice/market.hpp"
#include "riskprice/penalty.hpp"

namespace riskprice {

enum class Execution { Serial, Parallel };

/// Lattice solution (Y, Z) of  -dY = g(t, Z) dt - Z dW,  Y_T = terminal.
///
/// y[m][k] is the value at node k of slice m; z[m] stores the d components of
/// Z for each node of slice m < N contiguously (z[m][k * d + i]).
struct BsdeSolution {
  DriverKind kind = DriverKind::BlackScholes;
  int steps = 0;
  int dim = 0;
  double dt = 0.0;
  std::vector<std::vector<double>> y;
  std::vector<std::vector<double>> z;
  std::shared_ptr<const BrownianLattice> lattice;
  std::shared_ptr<const std::vector<PreparedDriver>> drivers;  // one per step

  double y0() const { return y.front().front(); }
};

/// Binds `driver` to each step of the model's scenario geometry.
std::vector<PreparedDriver> prepare_drivers(const MarketModel& model, const Driver& driver);

/// Throws Error("... refine dt") unless u_max sqrt(d dt) < 1, the condition
/// under which every driver update is a positive combination of the children.
void check_monotone_scheme(const BrownianLattice& lattice, const std::vector<PreparedDriver>& drivers);

/// Explicit backward Euler:
///   Z_m(k) = E[Y_{m+1} dW^T] / dt,   Y_m(k) = E[Y_{m+1}] + g(t_m, Z_m(k)) dt,
/// expectations being equal-weight sums over the 2^d children.
BsdeSolution solve(const MarketModel& model, const BrownianLattice& lattice, const Claim& claim,
                   const Driver& driver, Execution exec = Execution::Parallel);

BsdeSolution solve_terminal(const MarketModel& model, const BrownianLattice& lattice,
                            std::vector<double> terminal, const Driver& driver,
                            Execution exec = Execution::Parallel);

/// Same scheme with caller-supplied per-step drivers (e.g. a scenario set
/// that is not derived from a MarketModel).
BsdeSolution solve_prepared(std::shared_ptr<const BrownianLattice> lattice, std::vector<double> terminal,
                            std::shared_ptr<const std::vector<PreparedDriver>> drivers,
                            Execution exec = Execution::Parallel);

/// Plain coordinate-by-coordinate implementation of the same scheme, kept
/// as the reference the OpenMP kernel is tested against.
BsdeSolution solve_reference(std::shared_ptr<const BrownianLattice> lattice, std::vector<double> terminal,
                             std::shared_ptr<const std::vector<PreparedDriver>> drivers);

/// Re-solves [0, t_split] with slice `split_step` of `solution` as terminal
/// data and returns the largest nodewise |Y| difference on that range.
double restart_consistency(const BsdeSolution& solution, int split_step);

enum class HedgingVariant { M, CW };

inline constexpr double kChainTolerance = 1e-9;

/// The four dynamic prices on one lattice.
struct PriceQuadruple {
  BsdeSolution low;
  BsdeSolution buyer;
  BsdeSolution seller;
  BsdeSolution up;

  /// Nodes where low <= buyer <= seller <= up fails by more than
  /// kChainTolerance (1 + |Y|).
  std::size_t chain_violations() const;
};

/// low/up use LowerM/UpperM (or LowerCW/UpperCW), buyer/seller the penalty.
PriceQuadruple price_quadruple(const MarketModel& model, const BrownianLattice& lattice, const Claim& claim,
                               const Penalty& penalty, HedgingVariant variant = HedgingVariant::M,
                               Execution exec = Execution::Parallel);

}  // namespace riskprice
