#include "riskprice/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "riskprice/parallel.hpp"

namespace riskprice {

BrownianLattice::BrownianLattice(int steps, int dim, double horizon)
    : steps_(steps), dim_(dim), horizon_(horizon) {
  if (steps < 1) throw Error("lattice needs at least one step");
  if (dim < 1 || dim > kMaxDim) throw Error("lattice dimension must be in [1, 6]");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw Error("lattice horizon must be positive");
  dt_ = horizon / steps;
  sqrt_dt_ = std::sqrt(dt_);
}

std::size_t BrownianLattice::slice_size(int m) const {
  std::size_t size = 1;
  for (int i = 0; i < dim_; ++i) size *= static_cast<std::size_t>(m + 1);
  return size;
}

std::size_t BrownianLattice::total_nodes() const {
  std::size_t total = 0;
  for (int m = 0; m <= steps_; ++m) total += slice_size(m);
  return total;
}

std::vector<int> BrownianLattice::coordinates(int m, std::size_t index) const {
  std::vector<int> k(dim_);
  const auto base = static_cast<std::size_t>(m + 1);
  for (int i = 0; i < dim_; ++i) {
    k[i] = 2 * static_cast<int>(index % base) - m;
    index /= base;
  }
  return k;
}

std::size_t BrownianLattice::index_of(int m, std::span<const int> k) const {
  std::size_t index = 0;
  std::size_t stride = 1;
  for (int i = 0; i < dim_; ++i) {
    const int j = (k[i] + m) / 2;
    index += static_cast<std::size_t>(j) * stride;
    stride *= static_cast<std::size_t>(m + 1);
  }
  return index;
}

std::size_t BrownianLattice::child(int m, std::size_t index, int branch) const {
  const auto base = static_cast<std::size_t>(m + 1);
  std::size_t out = 0;
  std::size_t stride = 1;
  for (int i = 0; i < dim_; ++i) {
    const std::size_t j = index % base + static_cast<std::size_t>((branch >> i) & 1);
    index /= base;
    out += j * stride;
    stride *= base + 1;
  }
  return out;
}

void check_compatible(const MarketModel& model, const BrownianLattice& lattice) {
  if (lattice.steps() != model.steps || lattice.dim() != model.d ||
      std::abs(lattice.horizon() - model.horizon) > 1e-14 * model.horizon) {
    throw Error("lattice does not match the model (steps, dimension or horizon)");
  }
}

bool Claim::bounded() const {
  switch (kind) {
    case Kind::Put:
    case Kind::Digital:
      return true;
    case Kind::Call:
    case Kind::CustomTerminal:
      return cap.has_value();
  }
  return false;
}

std::string to_string(Claim::Kind kind) {
  switch (kind) {
    case Claim::Kind::Call: return "call";
    case Claim::Kind::Put: return "put";
    case Claim::Kind::Digital: return "digital";
    case Claim::Kind::CustomTerminal: return "custom";
  }
  return "?";
}

std::vector<double> terminal_assets(const MarketModel& model, const BrownianLattice& lattice,
                                    std::size_t terminal_index) {
  const int steps = lattice.steps();
  const auto k = lattice.coordinates(steps, terminal_index);
  const double dt = lattice.dt();
  const auto& sigma = model.sigma.at(0);

  std::vector<double> s(model.n);
  for (int i = 0; i < model.n; ++i) {
    const double var = sigma.row(i).squaredNorm();
    double drift = 0.0;
    for (int m = 0; m < steps; ++m) drift += (model.mu[m](i) - 0.5 * var) * dt;
    double diffusion = 0.0;
    for (int j = 0; j < model.d; ++j) diffusion += sigma(i, j) * k[j];
    s[i] = model.s0(i) * std::exp(drift + diffusion * lattice.sqrt_dt());
  }
  return s;
}

double payoff(const Claim& claim, std::span<const double> s_terminal) {
  double value = 0.0;
  auto spot = [&] {
    if (claim.asset < 0 || claim.asset >= static_cast<int>(s_terminal.size())) {
      throw Error("claim refers to a missing asset");
    }
    return s_terminal[claim.asset];
  };
  switch (claim.kind) {
    case Claim::Kind::Call:
      value = std::max(spot() - claim.strike, 0.0);
      break;
    case Claim::Kind::Put:
      value = std::max(claim.strike - spot(), 0.0);
      break;
    case Claim::Kind::Digital:
      value = spot() >= claim.strike ? 1.0 : 0.0;
      break;
    case Claim::Kind::CustomTerminal:
      if (!claim.custom) throw Error("custom claim without a payoff function");
      value = claim.custom(s_terminal);
      break;
  }
  if (claim.cap) value = std::min(value, *claim.cap);
  if (!std::isfinite(value)) {
    std::ostringstream os;
    os << "claim payoff is not finite (" << value << ")";
    throw Error(os.str());
  }
  return value;
}

std::vector<double> terminal_values(const MarketModel& model, const BrownianLattice& lattice,
                                    const Claim& claim) {
  check_compatible(model, lattice);
  const std::size_t size = lattice.slice_size(lattice.steps());
  std::vector<double> values(size);
  ErrorSlot error;
  const long long count = static_cast<long long>(size);
#pragma omp parallel for schedule(static) num_threads(worker_count()) if (count > 4096)
  for (long long idx = 0; idx < count; ++idx) {
    error.guard([&] {
      const auto s = terminal_assets(model, lattice, static_cast<std::size_t>(idx));
      values[idx] = payoff(claim, s);
    });
  }
  error.rethrow();
  return values;
}

}  // namespace riskprice
