#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "riskprice/penalty.hpp"
#include "support.hpp"

using namespace riskprice;
using riskprice::testing::axis_slice;
using riskprice::testing::diagonal_slice;
using riskprice::testing::two_factor;

namespace {

const std::vector<DriverKind> kAllKinds = {DriverKind::BlackScholes, DriverKind::UpperCW, DriverKind::LowerCW,
                                           DriverKind::UpperM,       DriverKind::LowerM,  DriverKind::Seller,
                                           DriverKind::Buyer};

double eval(const Driver& driver, const EmmSlice& slice, std::vector<double> z) {
  return eval_driver(driver, slice, 0.0, z);
}

// Smooth, convex, f(0) = 0 and asymmetric in theta.
Penalty quartic() {
  return Penalty::custom([](double, std::span<const double> th) {
    const double c = th[0] - th[1];
    return 0.25 * th[0] * th[0] * th[0] * th[0] + 0.2 * th[1] * th[1] + 0.05 * c * c;
  }, "quartic");
}

}  // namespace

TEST(Penalty, QuadraticValue) {
  const auto f = Penalty::quadratic(2.0);
  const std::vector<double> theta = {0.3, -0.4};
  EXPECT_DOUBLE_EQ(f(0.0, theta), 0.25 / 4.0);
  EXPECT_EQ(Penalty::zero()(0.0, theta), 0.0);
}

TEST(Penalty, ValidationAcceptsQuadraticAndCustom) {
  EXPECT_TRUE(validate_penalty(Penalty::quadratic(1.0), 2, 0.5, 0.0).ok());
  EXPECT_TRUE(validate_penalty(quartic(), 2, 0.5, 0.0).ok());
}

TEST(Penalty, ValidationFlagsBrokenPenalties) {
  const auto shifted = Penalty::custom([](double, std::span<const double> th) { return 1.0 + th[0] * th[0]; });
  EXPECT_NE(validate_penalty(shifted, 1, 0.5, 0.0).summary().find("f(t, 0)"), std::string::npos);

  const auto concave = Penalty::custom([](double, std::span<const double> th) { return -th[0] * th[0]; });
  const auto report = validate_penalty(concave, 1, 0.5, 0.0);
  EXPECT_FALSE(report.ok());
  EXPECT_NE(report.summary().find("negative"), std::string::npos) << report.summary();
  EXPECT_NE(report.summary().find("convex"), std::string::npos) << report.summary();
}

TEST(Driver, ZeroPenaltySellerTakesTheSegmentEnd) {
  EXPECT_NEAR(eval(Driver::seller(Penalty::zero()), diagonal_slice(0.3), {1.0, 0.0}), 0.3 / std::sqrt(2.0), 1e-15);
}

TEST(Driver, QuadraticSellerInteriorOptimum) {
  EXPECT_NEAR(eval(Driver::seller(Penalty::quadratic(1.0)), axis_slice(0.5), {0.2, 0.0}), 0.02, 1e-15);
}

TEST(Driver, QuadraticSellerClampedOptimum) {
  EXPECT_NEAR(eval(Driver::seller(Penalty::quadratic(1.0)), axis_slice(0.5), {1.0, 0.0}), 0.375, 1e-15);
}

TEST(Driver, EveryKindVanishesAtZero) {
  const auto slice = emm_slice(two_factor(4), 0);
  for (const auto kind : kAllKinds) {
    EXPECT_EQ(eval(Driver{kind, Penalty::zero()}, slice, {0.0, 0.0}), 0.0) << to_string(kind);
    EXPECT_EQ(eval(Driver{kind, Penalty::quadratic(0.7)}, slice, {0.0, 0.0}), 0.0) << to_string(kind);
  }
}

TEST(Driver, CustomMatchesDenseGridSearch) {
  const auto model = two_factor(4, 0.6);
  const auto slice = emm_slice(model, 0);
  const auto f = quartic();
  const PreparedDriver seller(Driver::seller(f), slice, 0.0);

  auto theta_at = [&](double s) { return theta_from_kernel_coord(slice, {s}); };
  const int points = 401;
  std::mt19937_64 rng(3);
  std::normal_distribution<double> gauss(0.0, 2.0);
  for (int trial = 0; trial < 50; ++trial) {
    const std::vector<double> z = {gauss(rng), gauss(rng)};
    double best = -1e300;
    double floor = 1e300;
    for (int i = 0; i < points; ++i) {
      const double s = slice.radius * (-1.0 + 2.0 * i / (points - 1));
      const auto theta = theta_at(s);
      const double fv = f(0.0, theta);
      best = std::max(best, z[0] * theta[0] + z[1] * theta[1] - fv);
      floor = std::min(floor, fv);
    }
    EXPECT_NEAR(seller.eval(z), best + floor, 1e-6);
  }
}

TEST(Driver, CustomRejectedForWideKernel) {
  Eigen::VectorXd mu(1);
  mu << 0.0;
  Eigen::MatrixXd sigma(1, 3);
  sigma << 0.2, 0.1, 0.1;
  Eigen::VectorXd s0(1);
  s0 << 100.0;
  const auto slice = emm_slice(MarketModel::constant(mu, sigma, 0.5, s0, 1.0, 2), 0);
  const auto f = Penalty::custom([](double, std::span<const double> th) { return th[0] * th[0]; });
  EXPECT_THROW(PreparedDriver(Driver::seller(f), slice, 0.0), Error);
  EXPECT_NO_THROW(PreparedDriver(Driver::seller(Penalty::quadratic(1.0)), slice, 0.0));
}

TEST(Driver, NegativeCustomPenaltyIsReported) {
  const auto slice = emm_slice(two_factor(4), 0);
  const auto bad = Penalty::custom([](double, std::span<const double> th) { return th[0] - 1.0; });
  EXPECT_THROW(PreparedDriver(Driver::seller(bad), slice, 0.0), Error);
}

TEST(Driver, RejectsBadInput) {
  const auto slice = emm_slice(two_factor(4), 0);
  const PreparedDriver g(Driver::seller(Penalty::quadratic(1.0)), slice, 0.0);
  EXPECT_THROW(g.eval(std::vector<double>{1.0}), Error);
  EXPECT_THROW(g.eval(std::vector<double>{std::nan(""), 0.0}), Error);
}

TEST(Driver, ZeroPenaltyCollapse) {
  const auto slice = emm_slice(two_factor(4), 0);
  const PreparedDriver seller(Driver::seller(Penalty::zero()), slice, 0.0);
  const PreparedDriver upper(Driver::upper_m(), slice, 0.0);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> gauss(0.0, 3.0);
  for (int i = 0; i < 1000; ++i) {
    const std::vector<double> z = {gauss(rng), gauss(rng)};
    const double zk = z[0] * slice.kernel_at(0, 0) + z[1] * slice.kernel_at(1, 0);
    const double expected = z[0] * slice.theta_bar[0] + z[1] * slice.theta_bar[1] + slice.radius * std::abs(zk);
    EXPECT_NEAR(seller.eval(z), expected, 1e-12 * (1.0 + std::abs(expected)));
    EXPECT_EQ(upper.eval(z), seller.eval(z));
  }
}

TEST(Driver, ConjugacyIsBitwise) {
  const auto slice = emm_slice(two_factor(4), 0);
  for (const auto& f : {Penalty::zero(), Penalty::quadratic(0.3), quartic()}) {
    const PreparedDriver seller(Driver::seller(f), slice, 0.0);
    const PreparedDriver buyer(Driver::buyer(f), slice, 0.0);
    std::mt19937_64 rng(9);
    std::normal_distribution<double> gauss(0.0, 3.0);
    for (int i = 0; i < 500; ++i) {
      const std::vector<double> z = {gauss(rng), gauss(rng)};
      const std::vector<double> neg = {-z[0], -z[1]};
      EXPECT_EQ(buyer.eval(z), -seller.eval(neg)) << f.label();
    }
  }
}

TEST(Driver, MonotoneInPenalty) {
  const auto slice = emm_slice(two_factor(4), 0);
  std::mt19937_64 rng(13);
  std::normal_distribution<double> gauss(0.0, 3.0);
  const std::vector<double> gammas = {1e-3, 0.1, 1.0, 10.0, 1e3};
  for (int i = 0; i < 500; ++i) {
    const std::vector<double> z = {gauss(rng), gauss(rng)};
    double prev = -1e300;
    for (double g : gammas) {
      // Larger gamma means a smaller penalty, hence a larger seller driver.
      const double v = eval(Driver::seller(Penalty::quadratic(g)), slice, z);
      EXPECT_GE(v, prev - 1e-12);
      prev = v;
    }
    EXPECT_LE(prev, eval(Driver::seller(Penalty::zero()), slice, z) + 1e-12);
  }
}

TEST(Driver, LipschitzInZ) {
  const auto slice = emm_slice(two_factor(4, 0.7), 0);
  std::mt19937_64 rng(17);
  std::normal_distribution<double> gauss(0.0, 2.0);
  for (const auto kind : kAllKinds) {
    for (const auto& f : {Penalty::zero(), Penalty::quadratic(0.5), quartic()}) {
      const PreparedDriver g(Driver{kind, f}, slice, 0.0);
      for (int i = 0; i < 200; ++i) {
        const std::vector<double> a = {gauss(rng), gauss(rng)};
        const std::vector<double> b = {gauss(rng), gauss(rng)};
        const double dz = std::hypot(a[0] - b[0], a[1] - b[1]);
        EXPECT_LE(std::abs(g.eval(a) - g.eval(b)), g.lipschitz_bound() * dz * (1.0 + 1e-9) + 1e-12)
            << to_string(kind) << " " << f.label();
      }
    }
  }
}
