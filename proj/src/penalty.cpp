#include "riskprice/penalty.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace riskprice {

namespace {

constexpr double kInvPhi = 0.6180339887498949;  // (sqrt(5) - 1) / 2

double norm(std::span<const double> v) {
  double sq = 0.0;
  for (double x : v) sq += x * x;
  return std::sqrt(sq);
}

void require_finite(std::span<const double> z) {
  for (double x : z) {
    if (!std::isfinite(x)) throw Error("driver evaluated at non-finite z");
  }
}

// Golden-section search for the maximum of a concave function on [lo, hi].
// The endpoints are compared at the end so boundary maxima are exact.
template <class F>
std::pair<double, double> golden_max(F&& h, double lo, double hi, double tol) {
  const double lo0 = lo;
  const double hi0 = hi;
  double x1 = hi - kInvPhi * (hi - lo);
  double x2 = lo + kInvPhi * (hi - lo);
  double h1 = h(x1);
  double h2 = h(x2);
  for (int iter = 0; hi - lo > tol; ++iter) {
    if (iter > 200) {
      std::ostringstream os;
      os << "custom penalty optimizer did not converge, bracket [" << lo << ", " << hi << "]";
      throw Error(os.str());
    }
    if (h1 < h2) {
      lo = x1;
      x1 = x2;
      h1 = h2;
      x2 = lo + kInvPhi * (hi - lo);
      h2 = h(x2);
    } else {
      hi = x2;
      x2 = x1;
      h2 = h1;
      x1 = hi - kInvPhi * (hi - lo);
      h1 = h(x1);
    }
  }
  double best_x = 0.5 * (lo + hi);
  double best = h(best_x);
  for (double x : {lo0, hi0}) {
    const double v = h(x);
    if (v > best) {
      best = v;
      best_x = x;
    }
  }
  return {best_x, best};
}

}  // namespace

Penalty Penalty::quadratic(double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw Error("quadratic penalty needs gamma > 0");
  Penalty p;
  p.kind_ = Kind::Quadratic;
  p.gamma_ = gamma;
  std::ostringstream os;
  os << "quadratic(gamma=" << gamma << ")";
  p.label_ = os.str();
  return p;
}

Penalty Penalty::custom(Function fn, std::string label) {
  if (!fn) throw Error("custom penalty needs a callable");
  Penalty p;
  p.kind_ = Kind::Custom;
  p.fn_ = std::move(fn);
  p.label_ = std::move(label);
  return p;
}

double Penalty::operator()(double t, std::span<const double> theta) const {
  switch (kind_) {
    case Kind::Zero:
      return 0.0;
    case Kind::Quadratic: {
      double sq = 0.0;
      for (double x : theta) sq += x * x;
      return sq / (2.0 * gamma_);
    }
    case Kind::Custom:
      return fn_(t, theta);
  }
  return 0.0;
}

ValidationReport validate_penalty(const Penalty& penalty, int d, double bound, double t, int samples,
                                  unsigned seed) {
  ValidationReport report;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> unit;

  auto sample_ball = [&] {
    std::vector<double> v(d);
    double sq = 0.0;
    for (double& x : v) {
      x = gauss(rng);
      sq += x * x;
    }
    const double scale = bound * std::pow(unit(rng), 1.0 / d) / std::sqrt(sq);
    for (double& x : v) x *= scale;
    return v;
  };

  const std::vector<double> origin(d, 0.0);
  if (penalty(t, origin) != 0.0) report.issues.push_back("penalty not normalized: f(t, 0) != 0");

  int negative = 0;
  int nonconvex = 0;
  int nonfinite = 0;
  for (int i = 0; i < samples; ++i) {
    const auto a = sample_ball();
    const auto b = sample_ball();
    std::vector<double> mid(d);
    for (int k = 0; k < d; ++k) mid[k] = 0.5 * (a[k] + b[k]);
    const double fa = penalty(t, a);
    const double fb = penalty(t, b);
    const double fm = penalty(t, mid);
    if (!std::isfinite(fa) || !std::isfinite(fb) || !std::isfinite(fm)) {
      ++nonfinite;
      continue;
    }
    if (fa < 0.0 || fb < 0.0 || fm < 0.0) ++negative;
    if (fm > 0.5 * (fa + fb) + 1e-10) ++nonconvex;
  }
  if (nonfinite > 0) report.issues.push_back("penalty non-finite at " + std::to_string(nonfinite) + " samples");
  if (negative > 0) report.issues.push_back("penalty negative at " + std::to_string(negative) + " samples");
  if (nonconvex > 0) report.issues.push_back("penalty fails midpoint convexity at " + std::to_string(nonconvex) + " samples");
  return report;
}

const char* to_string(DriverKind kind) {
  switch (kind) {
    case DriverKind::BlackScholes: return "BlackScholes";
    case DriverKind::UpperCW: return "UpperCW";
    case DriverKind::LowerCW: return "LowerCW";
    case DriverKind::UpperM: return "UpperM";
    case DriverKind::LowerM: return "LowerM";
    case DriverKind::Seller: return "Seller";
    case DriverKind::Buyer: return "Buyer";
  }
  return "?";
}

PreparedDriver::PreparedDriver(const Driver& driver, EmmSlice slice, double t)
    : kind_(driver.kind), slice_(std::move(slice)), t_(t) {
  if (kind_ == DriverKind::Seller || kind_ == DriverKind::Buyer) penalty_ = driver.penalty;
  if (kind_ == DriverKind::UpperM) kind_ = DriverKind::Seller;
  if (kind_ == DriverKind::LowerM) kind_ = DriverKind::Buyer;

  if (kind_ != DriverKind::Seller && kind_ != DriverKind::Buyer) return;
  switch (penalty_.kind()) {
    case Penalty::Kind::Zero:
    case Penalty::Kind::Quadratic:
      // The quadratic floor |theta_bar|^2 / (2 gamma) is folded into the
      // closed form in seller().
      break;
    case Penalty::Kind::Custom: {
      if (slice_.kernel_dim > 1) {
        throw Error("custom penalty is only supported for kernel dimension <= 1 (d - n = " +
                    std::to_string(slice_.kernel_dim) + ")");
      }
      if (slice_.kernel_dim == 0) {
        floor_ = custom_on_segment(0.0);
      } else {
        const double r = slice_.radius;
        auto neg_f = [this](double s) { return -custom_on_segment(s); };
        floor_ = -golden_max(neg_f, -r, r, 1e-10 * (1.0 + r)).second;
      }
      break;
    }
  }
}

double PreparedDriver::custom_on_segment(double s) const {
  std::vector<double> theta = slice_.theta_bar;
  if (slice_.kernel_dim == 1) {
    for (int i = 0; i < slice_.d; ++i) theta[i] += slice_.kernel_at(i, 0) * s;
  }
  const double value = penalty_(t_, theta);
  if (!std::isfinite(value) || value < 0.0) {
    std::ostringstream os;
    os << "custom penalty returned " << value << " at kernel coordinate s=" << s << " (bracket ["
       << -slice_.radius << ", " << slice_.radius << "])";
    throw Error(os.str());
  }
  return value;
}

double PreparedDriver::seller_custom(double z_theta_bar, double z_kernel) const {
  if (slice_.kernel_dim == 0) return z_theta_bar;
  const double r = slice_.radius;
  auto objective = [&](double s) { return z_kernel * s - custom_on_segment(s); };
  return z_theta_bar + golden_max(objective, -r, r, 1e-10 * (1.0 + r)).second + floor_;
}

double PreparedDriver::seller(std::span<const double> z, double sign) const {
  const int d = slice_.d;
  double z_theta_bar = 0.0;
  for (int i = 0; i < d; ++i) z_theta_bar += (sign * z[i]) * slice_.theta_bar[i];

  if (penalty_.kind() == Penalty::Kind::Custom) {
    double z_kernel = 0.0;
    if (slice_.kernel_dim == 1) {
      for (int i = 0; i < d; ++i) z_kernel += (sign * z[i]) * slice_.kernel_at(i, 0);
    }
    return seller_custom(z_theta_bar, z_kernel);
  }

  double zk_sq = 0.0;
  for (int j = 0; j < slice_.kernel_dim; ++j) {
    double zk = 0.0;
    for (int i = 0; i < d; ++i) zk += (sign * z[i]) * slice_.kernel_at(i, j);
    zk_sq += zk * zk;
  }
  const double zk_norm = std::sqrt(zk_sq);
  const double r = slice_.radius;

  if (penalty_.kind() == Penalty::Kind::Zero) return z_theta_bar + r * zk_norm;

  // Quadratic: theta_bar is orthogonal to ker(sigma), so on M_t the penalty
  // minus its floor is |s|^2 / (2 gamma); the maximizer is gamma * zK
  // projected onto the ball of radius r.
  const double gamma = penalty_.gamma();
  if (gamma * zk_norm <= r) return z_theta_bar + 0.5 * gamma * zk_sq;
  return z_theta_bar + r * zk_norm - r * r / (2.0 * gamma);
}

double PreparedDriver::eval(std::span<const double> z) const {
  if (static_cast<int>(z.size()) != slice_.d) throw Error("driver input z has wrong dimension");
  require_finite(z);
  switch (kind_) {
    case DriverKind::BlackScholes: {
      double v = 0.0;
      for (int i = 0; i < slice_.d; ++i) v += z[i] * slice_.theta_bar[i];
      return v;
    }
    case DriverKind::UpperCW:
      return slice_.bound * norm(z);
    case DriverKind::LowerCW:
      return -slice_.bound * norm(z);
    case DriverKind::Seller:
    case DriverKind::UpperM:
      return seller(z, 1.0);
    case DriverKind::Buyer:
    case DriverKind::LowerM:
      return -seller(z, -1.0);
  }
  return 0.0;
}

double eval_driver(const Driver& driver, const EmmSlice& slice, double t, std::span<const double> z) {
  return PreparedDriver(driver, slice, t).eval(z);
}

}  // namespace riskprice
