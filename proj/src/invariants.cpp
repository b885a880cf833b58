#include "riskprice/invariants.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <random>

namespace riskprice::invariants {

namespace {

template <class F>
void for_each_node(const BsdeSolution& a, const BsdeSolution& b, F&& f) {
  if (a.y.size() != b.y.size()) throw Error("solutions live on different lattices");
  for (std::size_t m = 0; m < a.y.size(); ++m) {
    if (a.y[m].size() != b.y[m].size()) throw Error("solutions live on different lattices");
    for (std::size_t k = 0; k < a.y[m].size(); ++k) f(a.y[m][k], b.y[m][k], m, k);
  }
}

}  // namespace

double max_abs_difference(const BsdeSolution& a, const BsdeSolution& b) {
  double worst = 0.0;
  for_each_node(a, b, [&](double x, double y, auto, auto) { worst = std::max(worst, std::abs(x - y)); });
  return worst;
}

double max_abs_sum(const BsdeSolution& a, const BsdeSolution& b) {
  double worst = 0.0;
  for_each_node(a, b, [&](double x, double y, auto, auto) { worst = std::max(worst, std::abs(x + y)); });
  return worst;
}

std::size_t count_order_violations(const BsdeSolution& lower, const BsdeSolution& upper, double tol) {
  std::size_t count = 0;
  for_each_node(lower, upper, [&](double lo, double hi, auto, auto) {
    if (lo > hi + tol * (1.0 + std::abs(lo) + std::abs(hi))) ++count;
  });
  return count;
}

double translation_error(const BsdeSolution& base, const BsdeSolution& shifted, double shift) {
  double worst = 0.0;
  for_each_node(base, shifted, [&](double x, double y, auto, auto) { worst = std::max(worst, std::abs(y - x - shift)); });
  return worst;
}

std::size_t count_convexity_violations(const BsdeSolution& mix, const BsdeSolution& a, const BsdeSolution& b,
                                       double lambda, double tol) {
  std::size_t count = 0;
  for (std::size_t m = 0; m < mix.y.size(); ++m) {
    for (std::size_t k = 0; k < mix.y[m].size(); ++k) {
      const double rhs = lambda * a.y[m][k] + (1.0 - lambda) * b.y[m][k];
      if (mix.y[m][k] > rhs + tol * (1.0 + std::abs(rhs))) ++count;
    }
  }
  return count;
}

DominanceReport driver_dominance(const EmmSlice& slice, const Penalty& penalty, double t, int samples,
                                 unsigned seed, double scale) {
  const PreparedDriver lower_cw(Driver::lower_cw(), slice, t);
  const PreparedDriver upper_cw(Driver::upper_cw(), slice, t);
  const PreparedDriver upper_m(Driver::upper_m(), slice, t);
  const PreparedDriver buyer(Driver::buyer(penalty), slice, t);
  const PreparedDriver seller(Driver::seller(penalty), slice, t);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, scale);
  DominanceReport report;
  std::vector<double> z(slice.d);
  std::vector<double> neg(slice.d);
  for (int s = 0; s < samples; ++s) {
    for (int i = 0; i < slice.d; ++i) {
      z[i] = gauss(rng);
      neg[i] = -z[i];
    }
    const double lo = lower_cw.eval(z);
    const double b = buyer.eval(z);
    const double se = seller.eval(z);
    const double up = upper_cw.eval(z);
    const double um = upper_m.eval(z);
    // Rounding slack on the closed forms only; the relations are exact in
    // real arithmetic.
    const double slack = 1e-12 * (1.0 + std::abs(up));
    if (lo > b + slack || b > se + slack || se > up + slack) ++report.chain_violations;
    if (um > up + slack) ++report.constrained_violations;
    if (b != -seller.eval(neg)) ++report.conjugacy_violations;
    ++report.samples;
  }
  return report;
}

bool in_subtree(const BrownianLattice& lattice, int step, std::size_t index, std::size_t terminal_index) {
  const int remaining = lattice.steps() - step;
  const auto k = lattice.coordinates(step, index);
  const auto kt = lattice.coordinates(lattice.steps(), terminal_index);
  for (int i = 0; i < lattice.dim(); ++i) {
    if (std::abs(kt[i] - k[i]) > remaining) return false;
  }
  return true;
}

std::size_t locality_violations(const MarketModel& model, const BrownianLattice& lattice,
                                const std::vector<double>& terminal, const Driver& driver, int step,
                                std::size_t index, double bump) {
  const int steps = lattice.steps();
  const int dim = lattice.dim();
  std::vector<double> perturbed = terminal;
  for (std::size_t t = 0; t < terminal.size(); ++t) {
    if (in_subtree(lattice, step, index, t)) perturbed[t] += bump;
  }
  const BsdeSolution base = solve_terminal(model, lattice, terminal, driver, Execution::Serial);
  const BsdeSolution moved = solve_terminal(model, lattice, perturbed, driver, Execution::Serial);

  // The bumped terminal nodes form the box |k - k0| <= N - step. Node (m, k)
  // reaches the box [k - (N - m), k + (N - m)], so it can see the bump iff
  // the two boxes meet (parities agree on the terminal slice).
  const auto k0 = lattice.coordinates(step, index);
  std::size_t violations = 0;
  for (int m = 0; m <= steps; ++m) {
    for (std::size_t k = 0; k < lattice.slice_size(m); ++k) {
      const auto km = lattice.coordinates(m, k);
      bool reaches_bump = true;
      for (int i = 0; i < dim; ++i) {
        reaches_bump = reaches_bump && std::abs(km[i] - k0[i]) <= (steps - m) + (steps - step);
      }
      if (!reaches_bump && base.y[m][k] != moved.y[m][k]) ++violations;
    }
  }
  return violations;
}

}  // namespace riskprice::invariants
