#pragma once

#include <Eigen/Dense>

#include "riskprice/bsde.hpp"

namespace riskprice::testing {

inline MarketModel one_factor(double mu, double sigma, double u, int steps, double s0 = 100.0, double horizon = 1.0) {
  Eigen::VectorXd m(1);
  m << mu;
  Eigen::MatrixXd s(1, 1);
  s << sigma;
  Eigen::VectorXd x(1);
  x << s0;
  return MarketModel::constant(m, s, u, x, horizon, steps);
}

// n = 1, d = 2, sigma = [0.2, 0.1], mu = 0.05: |theta_bar| = sqrt(0.05).
inline MarketModel two_factor(int steps, double u = 0.5, double mu = 0.05) {
  Eigen::VectorXd m(1);
  m << mu;
  Eigen::MatrixXd s(1, 2);
  s << 0.2, 0.1;
  Eigen::VectorXd x(1);
  x << 100.0;
  return MarketModel::constant(m, s, u, x, 1.0, steps);
}

// theta_bar = 0, K = (1, -1)^T / sqrt(2), radius r.
inline EmmSlice diagonal_slice(double r) {
  EmmSlice slice;
  slice.d = 2;
  slice.kernel_dim = 1;
  slice.theta_bar = {0.0, 0.0};
  slice.kernel = {1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0)};
  slice.radius = r;
  slice.bound = r;
  return slice;
}

// theta_bar = 0 with a one-dimensional kernel along the first axis, so zK = z_0.
inline EmmSlice axis_slice(double r) {
  EmmSlice slice;
  slice.d = 2;
  slice.kernel_dim = 1;
  slice.theta_bar = {0.0, 0.0};
  slice.kernel = {1.0, 0.0};
  slice.radius = r;
  slice.bound = r;
  return slice;
}

inline BrownianLattice lattice_for(const MarketModel& model) {
  return BrownianLattice(model.steps, model.d, model.horizon);
}

}  // namespace riskprice::testing
