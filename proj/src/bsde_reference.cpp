#include "riskprice/bsde.hpp"

namespace riskprice {

BsdeSolution solve_reference(std::shared_ptr<const BrownianLattice> lattice, std::vector<double> terminal,
                             std::shared_ptr<const std::vector<PreparedDriver>> drivers) {
  const BrownianLattice& lat = *lattice;
  if (terminal.size() != lat.slice_size(lat.steps())) throw Error("terminal data does not match the lattice");
  check_monotone_scheme(lat, *drivers);

  const int d = lat.dim();
  const int steps = lat.steps();
  const int branches = lat.branch_count();
  const double weight = 1.0 / branches;

  BsdeSolution sol;
  sol.kind = drivers->front().kind();
  sol.steps = steps;
  sol.dim = d;
  sol.dt = lat.dt();
  sol.y.resize(steps + 1);
  sol.z.resize(steps);
  sol.y[steps] = std::move(terminal);

  for (int m = steps - 1; m >= 0; --m) {
    const std::size_t size = lat.slice_size(m);
    sol.y[m].resize(size);
    sol.z[m].resize(size * d);
    for (std::size_t k = 0; k < size; ++k) {
      const std::vector<int> coords = lat.coordinates(m, k);
      double mean = 0.0;
      std::vector<double> z(d, 0.0);
      for (int b = 0; b < branches; ++b) {
        std::vector<int> child = coords;
        for (int i = 0; i < d; ++i) child[i] += static_cast<int>(BrownianLattice::branch_sign(b, i));
        const double v = sol.y[m + 1][lat.index_of(m + 1, child)];
        mean += v;
        for (int i = 0; i < d; ++i) z[i] += BrownianLattice::branch_sign(b, i) * v;
      }
      for (int i = 0; i < d; ++i) z[i] = z[i] * weight / lat.sqrt_dt();
      sol.y[m][k] = mean * weight + (*drivers)[m].eval(z) * lat.dt();
      std::copy(z.begin(), z.end(), sol.z[m].begin() + static_cast<std::ptrdiff_t>(k * d));
    }
  }
  sol.lattice = std::move(lattice);
  sol.drivers = std::move(drivers);
  return sol;
}

}  // namespace riskprice
