#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace riskprice {

/// Raised for any contract violation inside the library (bad model, bad
/// driver input, solver preconditions). The CLI maps it to exit code 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Brownian market with zero interest rate: one riskless bond with price 1
/// and n risky assets driven by d independent Brownian motions,
///
///   dS_i / S_i = mu_i dt + sigma_i dW,   i = 1..n.
///
/// Coefficients are deterministic and constant on each of the `steps`
/// intervals of length horizon / steps. `u[m]` bounds the market price of
/// risk on step m.
struct MarketModel {
  int n = 1;
  int d = 1;
  std::vector<Eigen::VectorXd> mu;     // per step, length n
  std::vector<Eigen::MatrixXd> sigma;  // per step, n x d
  std::vector<double> u;               // per step, > 0
  Eigen::VectorXd s0;                  // length n, > 0
  double horizon = 1.0;
  int steps = 1;

  double dt() const { return horizon / steps; }
  double time(int step) const { return step * dt(); }
  double max_bound() const;

  /// Model with the same coefficients on every step.
  static MarketModel constant(const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma,
                              double u, const Eigen::VectorXd& s0, double horizon,
                              int steps);
};

struct ValidationReport {
  std::vector<std::string> issues;

  bool ok() const { return issues.empty(); }
  std::string summary() const;
};

/// Collects every invariant violation instead of stopping at the first.
ValidationReport validate_model(const MarketModel& model);

/// Geometry of the admissible scenario set on one step:
///
///   M_t = { theta : sigma theta^T + mu = 0, |theta| <= u }
///       = { theta_bar + (K s)^T : |s| <= radius }.
///
/// theta_bar is the min-norm solution of the martingale constraint, K an
/// orthonormal basis of ker(sigma) stored column-major (d rows, d - n
/// columns) and radius = sqrt(u^2 - |theta_bar|^2).
struct EmmSlice {
  int d = 0;
  int kernel_dim = 0;
  std::vector<double> theta_bar;
  std::vector<double> kernel;
  double radius = 0.0;
  double bound = 0.0;  // u on this step

  double kernel_at(int row, int col) const { return kernel[static_cast<std::size_t>(col) * d + row]; }
};

/// Throws Error on rank deficiency or when the bound leaves M empty
/// ("empty EMM set").
EmmSlice emm_slice(const MarketModel& model, int step);

/// theta^T = theta_bar^T + K s. Throws Error("outside scenario ball") when
/// |s| exceeds the slice radius (with a 1e-12 relative allowance).
std::vector<double> theta_from_kernel_coord(const EmmSlice& slice, const std::vector<double>& s);

}  // namespace riskprice
