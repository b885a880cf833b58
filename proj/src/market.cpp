#include "riskprice/market.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace riskprice {

namespace {

constexpr double kRankTolerance = 1e-10;

double smallest_singular_value(const Eigen::MatrixXd& sigma) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(sigma);
  const auto& values = svd.singularValues();
  return values.size() == 0 ? 0.0 : values.minCoeff();
}

bool all_finite(const Eigen::MatrixXd& m) { return m.allFinite(); }

// Min-norm solution of sigma theta^T = -mu via the normal equations.
Eigen::VectorXd min_norm_theta(const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma) {
  const Eigen::MatrixXd gram = sigma * sigma.transpose();
  const Eigen::VectorXd lambda = gram.ldlt().solve(mu);
  return -sigma.transpose() * lambda;
}

// Orthonormal basis of ker(sigma): Gram-Schmidt of the unit vectors against
// the (orthonormalized) rows of sigma, two passes per vector.
Eigen::MatrixXd kernel_basis(const Eigen::MatrixXd& sigma) {
  const int n = static_cast<int>(sigma.rows());
  const int d = static_cast<int>(sigma.cols());
  std::vector<Eigen::VectorXd> basis;
  basis.reserve(d);

  auto orthogonalize = [&basis](Eigen::VectorXd v) {
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& q : basis) v -= q.dot(v) * q;
    }
    return v;
  };

  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd v = orthogonalize(sigma.row(i).transpose());
    basis.push_back(v / v.norm());
  }

  Eigen::MatrixXd kernel(d, d - n);
  int found = 0;
  for (int j = 0; j < d && found < d - n; ++j) {
    Eigen::VectorXd v = orthogonalize(Eigen::VectorXd::Unit(d, j));
    const double norm = v.norm();
    if (norm < 1e-8) continue;
    v /= norm;
    basis.push_back(v);
    kernel.col(found++) = v;
  }
  return kernel;
}

std::string format_double(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

}  // namespace

double MarketModel::max_bound() const {
  return u.empty() ? 0.0 : *std::max_element(u.begin(), u.end());
}

MarketModel MarketModel::constant(const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma, double u,
                                  const Eigen::VectorXd& s0, double horizon, int steps) {
  MarketModel model;
  model.n = static_cast<int>(sigma.rows());
  model.d = static_cast<int>(sigma.cols());
  const auto count = static_cast<std::size_t>(std::max(steps, 0));
  model.mu.assign(count, mu);
  model.sigma.assign(count, sigma);
  model.u.assign(count, u);
  model.s0 = s0;
  model.horizon = horizon;
  model.steps = steps;
  return model;
}

std::string ValidationReport::summary() const {
  std::string out;
  for (const auto& issue : issues) {
    if (!out.empty()) out += "; ";
    out += issue;
  }
  return out;
}

ValidationReport validate_model(const MarketModel& model) {
  ValidationReport report;
  auto fail = [&report](std::string msg) { report.issues.push_back(std::move(msg)); };

  if (model.n < 1) fail("n must be >= 1");
  if (model.d < model.n) fail("d must be >= n");
  if (!(model.horizon > 0.0) || !std::isfinite(model.horizon)) fail("horizon must be positive");
  if (model.steps < 1) fail("steps must be >= 1");
  if (model.s0.size() != model.n) {
    fail("s0 must have length n");
  } else if (!(model.s0.array() > 0.0).all() || !model.s0.allFinite()) {
    fail("s0 must be strictly positive");
  }
  if (!report.ok()) return report;

  const auto steps = static_cast<std::size_t>(model.steps);
  if (model.mu.size() != steps) fail("mu must have one entry per step");
  if (model.sigma.size() != steps) fail("sigma must have one entry per step");
  if (model.u.size() != steps) fail("u must have one entry per step");
  if (!report.ok()) return report;

  // Per-step problems are grouped so a constant model reports each once.
  std::vector<std::pair<std::string, std::vector<int>>> per_step;
  auto fail_at = [&per_step](std::string msg, int m) {
    for (auto& [text, steps_hit] : per_step) {
      if (text == msg) {
        steps_hit.push_back(m);
        return;
      }
    }
    per_step.push_back({std::move(msg), {m}});
  };
  for (int m = 0; m < model.steps; ++m) {
    const auto& mu = model.mu[m];
    const auto& sigma = model.sigma[m];
    if (mu.size() != model.n) {
      fail_at("mu has wrong length", m);
      continue;
    }
    if (sigma.rows() != model.n || sigma.cols() != model.d) {
      fail_at("sigma has wrong shape", m);
      continue;
    }
    if (!mu.allFinite() || !all_finite(sigma) || !std::isfinite(model.u[m])) {
      fail_at("non-finite coefficient", m);
      continue;
    }
    if (!(model.u[m] > 0.0)) fail_at("u must be positive", m);
    if (smallest_singular_value(sigma) <= kRankTolerance) {
      fail_at("sigma not full rank", m);
      continue;
    }
    if (m > 0 && sigma != model.sigma[0]) {
      fail_at("sigma varies across steps (the recombining lattice needs constant sigma)", m);
    }
    const double theta_norm = min_norm_theta(mu, sigma).norm();
    if (model.u[m] < theta_norm) {
      fail_at("u=" + format_double(model.u[m]) + " below |theta_bar|=" + format_double(theta_norm) +
                  " (empty EMM set)",
              m);
    }
  }
  for (const auto& [text, steps_hit] : per_step) {
    const bool contiguous = steps_hit.back() - steps_hit.front() + 1 == static_cast<int>(steps_hit.size());
    std::string where;
    if (steps_hit.size() == 1) {
      where = " at step " + std::to_string(steps_hit.front());
    } else if (contiguous) {
      where = " at steps " + std::to_string(steps_hit.front()) + "-" + std::to_string(steps_hit.back());
    } else {
      where = " at steps";
      for (std::size_t i = 0; i < steps_hit.size(); ++i) where += (i ? ", " : " ") + std::to_string(steps_hit[i]);
    }
    fail(text + where);
  }
  return report;
}

EmmSlice emm_slice(const MarketModel& model, int step) {
  if (step < 0 || step >= model.steps) throw Error("step index out of range");
  const auto& mu = model.mu.at(step);
  const auto& sigma = model.sigma.at(step);
  if (smallest_singular_value(sigma) <= kRankTolerance) throw Error("sigma not full rank");

  const Eigen::VectorXd theta = min_norm_theta(mu, sigma);
  const double u = model.u.at(step);
  const double theta_sq = theta.squaredNorm();
  if (u < std::sqrt(theta_sq)) {
    throw Error("empty EMM set: u=" + format_double(u) + " below |theta_bar|=" +
                format_double(std::sqrt(theta_sq)));
  }

  EmmSlice slice;
  slice.d = model.d;
  slice.kernel_dim = model.d - model.n;
  slice.theta_bar.assign(theta.data(), theta.data() + theta.size());
  const Eigen::MatrixXd kernel = kernel_basis(sigma);
  slice.kernel.assign(kernel.data(), kernel.data() + kernel.size());
  slice.radius = std::sqrt(std::max(0.0, u * u - theta_sq));
  slice.bound = u;
  return slice;
}

std::vector<double> theta_from_kernel_coord(const EmmSlice& slice, const std::vector<double>& s) {
  if (static_cast<int>(s.size()) != slice.kernel_dim) throw Error("kernel coordinate has wrong length");
  double norm_sq = 0.0;
  for (double x : s) norm_sq += x * x;
  if (std::sqrt(norm_sq) > slice.radius * (1.0 + 1e-12) + 1e-15) throw Error("outside scenario ball");

  std::vector<double> theta = slice.theta_bar;
  for (int j = 0; j < slice.kernel_dim; ++j) {
    for (int i = 0; i < slice.d; ++i) theta[i] += slice.kernel_at(i, j) * s[j];
  }
  return theta;
}

}  // namespace riskprice
