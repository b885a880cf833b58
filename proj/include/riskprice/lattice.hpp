#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "riskprice/market.hpp"

namespace riskprice {

/// Recombining binary lattice for a d-dimensional Brownian motion.
///
/// Each step moves every component by +-sqrt(dt) with equal weights, so a
/// node has 2^d children. Slice m holds the (m + 1)^d points
/// W = k sqrt(dt), k_i in {-m, -m + 2, ..., m}, stored with the flat index
/// sum_i j_i (m + 1)^i where j_i = (k_i + m) / 2.
///
/// Branch b moves component i up when bit i of b is set.
class BrownianLattice {
 public:
  static constexpr int kMaxDim = 6;

  BrownianLattice(int steps, int dim, double horizon);

  int steps() const { return steps_; }
  int dim() const { return dim_; }
  double horizon() const { return horizon_; }
  double dt() const { return dt_; }
  double sqrt_dt() const { return sqrt_dt_; }
  int branch_count() const { return 1 << dim_; }

  std::size_t slice_size(int m) const;
  std::size_t total_nodes() const;

  std::vector<int> coordinates(int m, std::size_t index) const;
  std::size_t index_of(int m, std::span<const int> k) const;
  /// Flat index in slice m + 1 of the child reached by `branch`.
  std::size_t child(int m, std::size_t index, int branch) const;

  static double branch_sign(int branch, int component) { return ((branch >> component) & 1) ? 1.0 : -1.0; }

 private:
  int steps_;
  int dim_;
  double horizon_;
  double dt_;
  double sqrt_dt_;
};

/// Lattice must match the model's step count, dimension and horizon.
void check_compatible(const MarketModel& model, const BrownianLattice& lattice);

/// European claim on the terminal asset vector. Call / Put / Digital act on
/// asset `asset`; Digital pays 1 when S >= strike (ties exercise).
struct Claim {
  enum class Kind { Call, Put, Digital, CustomTerminal };
  using Function = std::function<double(std::span<const double> s_terminal)>;

  Kind kind = Kind::Call;
  double strike = 0.0;
  std::optional<double> cap;
  int asset = 0;
  Function custom;

  static Claim call(double strike, std::optional<double> cap = std::nullopt) {
    return {Kind::Call, strike, cap, 0, {}};
  }
  static Claim put(double strike) { return {Kind::Put, strike, std::nullopt, 0, {}}; }
  static Claim digital(double strike) { return {Kind::Digital, strike, std::nullopt, 0, {}}; }
  static Claim terminal(Function fn, std::optional<double> cap = std::nullopt) {
    return {Kind::CustomTerminal, 0.0, cap, 0, std::move(fn)};
  }

  /// False only for an uncapped call or custom claim.
  bool bounded() const;
};

std::string to_string(Claim::Kind kind);

/// S_T at a terminal node: s0_i exp(sum_m (mu_i - |sigma_i|^2 / 2) dt + sigma_i W_T).
std::vector<double> terminal_assets(const MarketModel& model, const BrownianLattice& lattice,
                                    std::size_t terminal_index);

double payoff(const Claim& claim, std::span<const double> s_terminal);

/// Payoff at every node of the terminal slice.
std::vector<double> terminal_values(const MarketModel& model, const BrownianLattice& lattice,
                                    const Claim& claim);

}  // namespace riskprice
