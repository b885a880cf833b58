#include "riskprice/oracle.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "riskprice/parallel.hpp"

namespace riskprice::oracle {

namespace {

constexpr double kDpBudget = 1e8;

struct Scenario {
  std::vector<double> weights;  // per branch
  double penalty_dt = 0.0;
};

// Scenarios of one step with product-tilted weights and the penalty shifted
// by its minimum over the grid.
std::vector<Scenario> tilted_step(const MarketModel& model, const BrownianLattice& lattice, const Penalty& penalty,
                                  int step, const std::vector<std::vector<double>>& coords) {
  const EmmSlice slice = emm_slice(model, step);
  const double t = model.time(step);
  std::vector<Scenario> out;
  out.reserve(coords.size());
  double floor = std::numeric_limits<double>::infinity();
  for (const auto& s : coords) {
    const auto theta = theta_from_kernel_coord(slice, s);
    Scenario sc;
    sc.weights = tilted_probabilities(theta, lattice.sqrt_dt());
    sc.penalty_dt = penalty(t, theta);
    if (!std::isfinite(sc.penalty_dt) || sc.penalty_dt < 0.0) throw Error("penalty must be finite and nonnegative");
    floor = std::min(floor, sc.penalty_dt);
    out.push_back(std::move(sc));
  }
  for (auto& sc : out) sc.penalty_dt = (sc.penalty_dt - floor) * lattice.dt();
  return out;
}

double step_floor(const MarketModel& model, const Penalty& penalty, int step, int points) {
  const EmmSlice slice = emm_slice(model, step);
  double floor = std::numeric_limits<double>::infinity();
  for (const auto& s : scenario_grid(slice.kernel_dim, slice.radius, points)) {
    floor = std::min(floor, penalty(model.time(step), theta_from_kernel_coord(slice, s)));
  }
  return floor;
}

void require_valid(const MarketModel& model, const BrownianLattice& lattice) {
  check_compatible(model, lattice);
  const auto report = validate_model(model);
  if (!report.ok()) throw Error("invalid model: " + report.summary());
}

void check_budget(const BrownianLattice& lattice, std::size_t scenarios) {
  const double work = static_cast<double>(lattice.total_nodes()) * static_cast<double>(scenarios) *
                      lattice.branch_count();
  if (work > kDpBudget) {
    std::ostringstream os;
    os << "oracle lattice too large: " << work << " evaluations exceed the budget of " << kDpBudget;
    throw Error(os.str());
  }
}

}  // namespace

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double black_scholes_call(double s0, double strike, double vol, double horizon) {
  const double sd = vol * std::sqrt(horizon);
  const double d1 = (std::log(s0 / strike) + 0.5 * sd * sd) / sd;
  return s0 * normal_cdf(d1) - strike * normal_cdf(d1 - sd);
}

double black_scholes_put(double s0, double strike, double vol, double horizon) {
  return black_scholes_call(s0, strike, vol, horizon) - s0 + strike;
}

double black_scholes_digital(double s0, double strike, double vol, double horizon) {
  const double sd = vol * std::sqrt(horizon);
  return normal_cdf((std::log(s0 / strike) - 0.5 * sd * sd) / sd);
}

std::vector<std::vector<double>> scenario_grid(int kernel_dim, double radius, int points) {
  if (points < 1) throw Error("scenario grid needs at least one point");
  if (kernel_dim == 0) return {std::vector<double>{}};

  std::vector<double> axis(points, 0.0);
  if (points > 1) {
    for (int j = 0; j < points; ++j) axis[j] = -radius + 2.0 * radius * j / (points - 1);
    axis[points - 1] = radius;
  }
  std::vector<std::vector<double>> grid;
  std::vector<int> idx(kernel_dim, 0);
  while (true) {
    std::vector<double> s(kernel_dim);
    double sq = 0.0;
    for (int i = 0; i < kernel_dim; ++i) {
      s[i] = axis[idx[i]];
      sq += s[i] * s[i];
    }
    if (std::sqrt(sq) <= radius * (1.0 + 1e-12)) grid.push_back(std::move(s));
    int i = 0;
    while (i < kernel_dim && ++idx[i] == points) idx[i++] = 0;
    if (i == kernel_dim) break;
  }
  return grid;
}

std::vector<double> tilted_probabilities(std::span<const double> theta, double sqrt_dt) {
  const int d = static_cast<int>(theta.size());
  const int branches = 1 << d;
  for (double th : theta) {
    if (!(std::abs(th) * sqrt_dt < 1.0)) throw Error("tilt out of range: |theta_i| sqrt(dt) >= 1, refine dt");
  }
  std::vector<double> p(branches, 1.0);
  for (int b = 0; b < branches; ++b) {
    for (int i = 0; i < d; ++i) p[b] *= 0.5 * (1.0 + BrownianLattice::branch_sign(b, i) * theta[i] * sqrt_dt);
  }
  return p;
}

double tilted_dp(const MarketModel& model, const BrownianLattice& lattice, const Claim& claim,
                 const Penalty& penalty, Mode mode, int grid_points) {
  require_valid(model, lattice);
  const int steps = lattice.steps();
  const int branches = lattice.branch_count();

  std::vector<std::vector<Scenario>> scenarios(steps);
  std::size_t widest = 0;
  for (int m = 0; m < steps; ++m) {
    const EmmSlice slice = emm_slice(model, m);
    scenarios[m] = tilted_step(model, lattice, penalty, m, scenario_grid(slice.kernel_dim, slice.radius, grid_points));
    widest = std::max(widest, scenarios[m].size());
  }
  check_budget(lattice, widest);

  const bool seller = mode == Mode::Seller;
  std::vector<double> next = terminal_values(model, lattice, claim);
  for (int m = steps - 1; m >= 0; --m) {
    const long long count = static_cast<long long>(lattice.slice_size(m));
    std::vector<double> cur(static_cast<std::size_t>(count));
    const auto& scen = scenarios[m];
#pragma omp parallel for schedule(static) num_threads(worker_count()) if (count > 256)
    for (long long k = 0; k < count; ++k) {
      std::array<double, 1 << BrownianLattice::kMaxDim> child{};
      for (int b = 0; b < branches; ++b) child[b] = next[lattice.child(m, static_cast<std::size_t>(k), b)];
      double best = seller ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity();
      for (const auto& sc : scen) {
        double v = 0.0;
        for (int b = 0; b < branches; ++b) v += sc.weights[b] * child[b];
        best = seller ? std::max(best, v - sc.penalty_dt) : std::min(best, v + sc.penalty_dt);
      }
      cur[k] = best;
    }
    next = std::move(cur);
  }
  return next.front();
}

double constant_scenario_bound(const MarketModel& model, const BrownianLattice& lattice, const Claim& claim,
                               const Penalty& penalty, Mode mode, int grid_points) {
  require_valid(model, lattice);
  const int steps = lattice.steps();
  const int branches = lattice.branch_count();

  double radius = std::numeric_limits<double>::infinity();
  std::vector<double> floors(steps);
  for (int m = 0; m < steps; ++m) {
    radius = std::min(radius, emm_slice(model, m).radius);
    floors[m] = step_floor(model, penalty, m, grid_points);
  }
  const auto coords = scenario_grid(model.d - model.n, radius, grid_points);
  check_budget(lattice, coords.size());

  const auto terminal = terminal_values(model, lattice, claim);
  const bool seller = mode == Mode::Seller;
  std::vector<double> values(coords.size());
  ErrorSlot error;
  const long long count = static_cast<long long>(coords.size());
#pragma omp parallel for schedule(dynamic) num_threads(worker_count())
  for (long long c = 0; c < count; ++c) {
    error.guard([&] {
      std::vector<double> next = terminal;
      for (int m = steps - 1; m >= 0; --m) {
        const EmmSlice slice = emm_slice(model, m);
        const auto theta = theta_from_kernel_coord(slice, coords[c]);
        const auto p = tilted_probabilities(theta, lattice.sqrt_dt());
        const double shifted = (penalty(model.time(m), theta) - floors[m]) * lattice.dt();
        const double charge = seller ? -shifted : shifted;
        std::vector<double> cur(lattice.slice_size(m));
        for (std::size_t k = 0; k < cur.size(); ++k) {
          double v = 0.0;
          for (int b = 0; b < branches; ++b) v += p[b] * next[lattice.child(m, k, b)];
          cur[k] = v + charge;
        }
        next = std::move(cur);
      }
      values[c] = next.front();
    });
  }
  error.rethrow();
  return seller ? *std::max_element(values.begin(), values.end()) : *std::min_element(values.begin(), values.end());
}

GameResult game_value_bruteforce(const MarketModel& model, const GameGrid& grid, const BrownianLattice& lattice,
                                 const Claim& claim, const Penalty& penalty, double p0) {
  require_valid(model, lattice);
  const int steps = lattice.steps();
  if (steps > kGameMaxSteps) throw Error("game oracle supports at most 3 steps");
  if (grid.portfolio_points < 1 || grid.scenario_points < 1) throw Error("game grids must be non-empty");
  if (!(grid.portfolio_bound >= 0.0)) throw Error("portfolio bound must be nonnegative");

  const int n = model.n;
  const int d = model.d;
  const int branches = lattice.branch_count();
  const double dt = lattice.dt();
  const double sqrt_dt = lattice.sqrt_dt();

  // Portfolio axis and per-step choice count.
  std::vector<double> axis(grid.portfolio_points, 0.0);
  if (grid.portfolio_points > 1) {
    for (int j = 0; j < grid.portfolio_points; ++j) {
      axis[j] = -grid.portfolio_bound + 2.0 * grid.portfolio_bound * j / (grid.portfolio_points - 1);
    }
  }
  std::uint64_t per_step = 1;
  for (int i = 0; i < n; ++i) per_step *= static_cast<std::uint64_t>(grid.portfolio_points);
  std::uint64_t combos = 1;
  for (int m = 0; m < steps; ++m) combos *= per_step;

  // Scenarios per step: linear tilt and raw penalty.
  std::vector<std::vector<Scenario>> scenarios(steps);
  std::size_t widest = 0;
  for (int m = 0; m < steps; ++m) {
    const EmmSlice slice = emm_slice(model, m);
    for (const auto& s : scenario_grid(slice.kernel_dim, slice.radius, grid.scenario_points)) {
      const auto theta = theta_from_kernel_coord(slice, s);
      Scenario sc;
      sc.weights.resize(branches);
      for (int b = 0; b < branches; ++b) {
        double tilt = 0.0;
        for (int i = 0; i < d; ++i) tilt += BrownianLattice::branch_sign(b, i) * theta[i];
        const double w = 1.0 + tilt * sqrt_dt;
        if (!(w > 0.0)) throw Error("game tilt out of range: 1 + dW theta^T <= 0, refine dt");
        sc.weights[b] = w / branches;
      }
      sc.penalty_dt = penalty(model.time(m), theta) * dt;
      scenarios[m].push_back(std::move(sc));
    }
    widest = std::max(widest, scenarios[m].size());
  }

  // Path tree: depth m has branches^m nodes, children of node j are j*B + b.
  std::size_t internal = 0;
  std::size_t leaves = 1;
  for (int m = 0; m < steps; ++m) {
    internal += leaves;
    leaves *= static_cast<std::size_t>(branches);
  }
  const double work = static_cast<double>(combos) * static_cast<double>(internal) * static_cast<double>(widest);
  if (work > static_cast<double>(kGameBudget)) {
    std::ostringstream os;
    os << "game grids too large: " << work << " evaluations exceed the budget of " << kGameBudget;
    throw Error(os.str());
  }

  // Leaf payoff and wealth increments a_m = mu_m dt + sigma dW_m (n values per step).
  const auto terminal = terminal_values(model, lattice, claim);
  std::vector<double> payoff_at(leaves);
  std::vector<double> increments(leaves * steps * n);
  for (std::size_t leaf = 0; leaf < leaves; ++leaf) {
    std::vector<int> k(d, 0);
    std::size_t path = leaf;
    // Most significant digit is the first step.
    std::vector<int> branch_of(steps);
    for (int m = steps - 1; m >= 0; --m) {
      branch_of[m] = static_cast<int>(path % branches);
      path /= branches;
    }
    for (int m = 0; m < steps; ++m) {
      const auto& sigma = model.sigma[m];
      for (int i = 0; i < n; ++i) {
        double a = model.mu[m](i) * dt;
        for (int j = 0; j < d; ++j) a += sigma(i, j) * BrownianLattice::branch_sign(branch_of[m], j) * sqrt_dt;
        increments[(leaf * steps + m) * n + i] = a;
      }
      for (int j = 0; j < d; ++j) k[j] += static_cast<int>(BrownianLattice::branch_sign(branch_of[m], j));
    }
    payoff_at[leaf] = terminal[lattice.index_of(steps, k)];
  }

  std::vector<double> root_values(static_cast<std::size_t>(combos));
  const long long combo_count = static_cast<long long>(combos);
#pragma omp parallel for schedule(static) num_threads(worker_count()) if (combo_count > 16)
  for (long long c = 0; c < combo_count; ++c) {
    // Decode the open-loop portfolio: pi[m * n + i].
    std::vector<double> pi(static_cast<std::size_t>(steps) * n);
    std::uint64_t code = static_cast<std::uint64_t>(c);
    for (int m = 0; m < steps; ++m) {
      for (int i = 0; i < n; ++i) {
        pi[m * n + i] = axis[code % grid.portfolio_points];
        code /= grid.portfolio_points;
      }
    }
    std::vector<double> level(leaves);
    for (std::size_t leaf = 0; leaf < leaves; ++leaf) {
      double wealth = p0;
      for (int m = 0; m < steps; ++m) {
        for (int i = 0; i < n; ++i) wealth += pi[m * n + i] * increments[(leaf * steps + m) * n + i];
      }
      level[leaf] = payoff_at[leaf] - wealth;
    }
    std::size_t width = leaves;
    for (int m = steps - 1; m >= 0; --m) {
      width /= branches;
      std::vector<double> up(width);
      for (std::size_t node = 0; node < width; ++node) {
        double best = -std::numeric_limits<double>::infinity();
        for (const auto& sc : scenarios[m]) {
          double v = 0.0;
          for (int b = 0; b < branches; ++b) v += sc.weights[b] * level[node * branches + b];
          best = std::max(best, v - sc.penalty_dt);
        }
        up[node] = best;
      }
      level = std::move(up);
    }
    root_values[c] = level.front();
  }

  GameResult result;
  const auto best = std::min_element(root_values.begin(), root_values.end());
  result.value = *best;
  result.evaluations = static_cast<std::uint64_t>(work);
  std::uint64_t code = static_cast<std::uint64_t>(best - root_values.begin());
  result.best_portfolio.resize(static_cast<std::size_t>(steps) * n);
  for (int m = 0; m < steps; ++m) {
    for (int i = 0; i < n; ++i) {
      result.best_portfolio[m * n + i] = axis[code % grid.portfolio_points];
      code /= grid.portfolio_points;
    }
  }
  return result;
}

double game_seller_price(const MarketModel& model, const GameGrid& grid, const BrownianLattice& lattice,
                         const Claim& claim, const Penalty& penalty, double p0) {
  const Claim nothing = Claim::terminal([](std::span<const double>) { return 0.0; }, 0.0);
  return game_value_bruteforce(model, grid, lattice, claim, penalty, p0).value -
         game_value_bruteforce(model, grid, lattice, nothing, penalty, p0).value;
}

}  // namespace riskprice::oracle
