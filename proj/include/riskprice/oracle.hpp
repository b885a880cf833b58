#pragma once

#include <cstdint>
#include <vector>

#include "riskprice/lattice.hpp"
#include "riskprice/market.hpp"
#include "riskprice/penalty.hpp"

// Verification routes that do not go through the BSDE solver.
namespace riskprice::oracle {

/// Zero-rate Black-Scholes prices.
double normal_cdf(double x);
double black_scholes_call(double s0, double strike, double vol, double horizon);
double black_scholes_put(double s0, double strike, double vol, double horizon);
double black_scholes_digital(double s0, double strike, double vol, double horizon);

enum class Mode { Seller, Buyer };

/// Points of the kernel-coordinate grid on one step: `points` per axis over
/// [-radius, radius], restricted to the ball. A zero-dimensional kernel
/// yields the single empty coordinate.
std::vector<std::vector<double>> scenario_grid(int kernel_dim, double radius, int points);

/// Product tilt of the binary branches: p_b(theta) = prod_i (1 + eps_i theta_i sqrt(dt)) / 2.
/// Throws Error("... refine dt") if any factor is not positive.
std::vector<double> tilted_probabilities(std::span<const double> theta, double sqrt_dt);

/// Dynamic programming over tilted branch probabilities:
///   V_m(k) = opt_s [ sum_b p_b(theta(s)) V_{m+1}(child_b) -/+ (f - f_min) dt ],
/// max for the seller, min for the buyer, the penalty shifted by its minimum
/// over the step's scenario grid. Returns V_0.
double tilted_dp(const MarketModel& model, const BrownianLattice& lattice, const Claim& claim,
                 const Penalty& penalty, Mode mode, int grid_points = 101);

/// Same value restricted to scenarios that are constant in time.
double constant_scenario_bound(const MarketModel& model, const BrownianLattice& lattice, const Claim& claim,
                               const Penalty& penalty, Mode mode, int grid_points = 101);

/// Strategy grids for the brute-force game: portfolios pi in [-bound, bound]^n
/// (`portfolio_points` per axis, the same value on all paths of a step) and
/// kernel coordinates on `scenario_points` per axis.
struct GameGrid {
  int portfolio_points = 21;
  double portfolio_bound = 2.0;
  int scenario_points = 41;
};

struct GameResult {
  double value = 0.0;          // min over pi of max over theta of J_0(pi, theta)
  std::uint64_t evaluations = 0;
  std::vector<double> best_portfolio;  // per step, row-major n values per step
};

inline constexpr int kGameMaxSteps = 3;
inline constexpr std::uint64_t kGameBudget = 10'000'000;

/// inf over open-loop portfolios of sup over scenario strategies of
///   J_0 = E_theta[ xi - X_T - int f dt ],   X_0 = p0,
/// on the non-recombining path tree of the lattice. The wealth
/// X_{m+1} = X_m + pi_m (mu dt + sigma dW) is integrated path by path. The
/// scenario player moves after the portfolio is fixed and may react to the
/// path (solved by backward maximization); branch weights are the linear
/// tilt 2^{-d} (1 + dW theta^T), the exact Girsanov density of the BSDE
/// scheme's one-step expectation.
GameResult game_value_bruteforce(const MarketModel& model, const GameGrid& grid, const BrownianLattice& lattice,
                                 const Claim& claim, const Penalty& penalty, double p0);

/// Seller's indifference price read off the game: Phi(xi) - Phi(0).
double game_seller_price(const MarketModel& model, const GameGrid& grid, const BrownianLattice& lattice,
                         const Claim& claim, const Penalty& penalty, double p0 = 1.0);

}  // namespace riskprice::oracle
