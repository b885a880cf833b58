#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "riskprice/market.hpp"

namespace riskprice {

/// Penalty density f(t, theta) >= 0 of a dynamic convex risk measure. The
/// penalty of a scenario Q^theta over [t, T] is the integral of f along the
/// scenario.
class Penalty {
 public:
  enum class Kind { Zero, Quadratic, Custom };
  using Function = std::function<double(double t, std::span<const double> theta)>;

  Penalty() = default;

  static Penalty zero() { return Penalty{}; }
  /// f(t, theta) = |theta|^2 / (2 gamma).
  static Penalty quadratic(double gamma);
  /// `fn` must be convex in theta, nonnegative and safe to call concurrently.
  static Penalty custom(Function fn, std::string label = "custom");

  Kind kind() const { return kind_; }
  double gamma() const { return gamma_; }
  const std::string& label() const { return label_; }

  double operator()(double t, std::span<const double> theta) const;

 private:
  Kind kind_ = Kind::Zero;
  double gamma_ = 0.0;
  Function fn_;
  std::string label_ = "zero";
};

/// Samples f on the ball |theta| <= bound: nonnegativity, f(t, 0) = 0 and
/// midpoint convexity (with 1e-10 slack). Deterministic for a given seed.
ValidationReport validate_penalty(const Penalty& penalty, int d, double bound, double t,
                                  int samples = 1000, unsigned seed = 7);

enum class DriverKind { BlackScholes, UpperCW, LowerCW, UpperM, LowerM, Seller, Buyer };

const char* to_string(DriverKind kind);

struct Driver {
  DriverKind kind = DriverKind::BlackScholes;
  Penalty penalty;  // used by Seller / Buyer only

  static Driver black_scholes() { return {DriverKind::BlackScholes, {}}; }
  static Driver upper_cw() { return {DriverKind::UpperCW, {}}; }
  static Driver lower_cw() { return {DriverKind::LowerCW, {}}; }
  static Driver upper_m() { return {DriverKind::UpperM, {}}; }
  static Driver lower_m() { return {DriverKind::LowerM, {}}; }
  static Driver seller(Penalty p) { return {DriverKind::Seller, std::move(p)}; }
  static Driver buyer(Penalty p) { return {DriverKind::Buyer, std::move(p)}; }
};

/// A driver bound to one time step. Construction does the per-step work
/// (the penalty floor min_{theta in M_t} f(t, theta)); eval is then a pure
/// function of z and may be called concurrently.
///
/// Seller(f): z -> max_{theta in M_t} (z theta^T - f(t, theta)) + min_{M_t} f
/// Buyer(f):  z -> -Seller(f)(-z)
///
/// The floor term keeps the driver normalized (g(0) = 0), so a zero claim
/// has zero price for every penalty. UpperM / LowerM are Seller / Buyer with
/// the zero penalty.
class PreparedDriver {
 public:
  PreparedDriver(const Driver& driver, EmmSlice slice, double t);

  double eval(std::span<const double> z) const;

  DriverKind kind() const { return kind_; }
  double lipschitz_bound() const { return slice_.bound; }
  double penalty_floor() const { return floor_; }
  const EmmSlice& slice() const { return slice_; }

 private:
  double seller(std::span<const double> z, double sign) const;
  double seller_custom(double z_theta_bar, double z_kernel) const;
  double custom_on_segment(double s) const;

  DriverKind kind_;
  Penalty penalty_;
  EmmSlice slice_;
  double t_;
  double floor_ = 0.0;
};

/// One-shot convenience wrapper around PreparedDriver.
double eval_driver(const Driver& driver, const EmmSlice& slice, double t, std::span<const double> z);

}  // namespace riskprice
