// L1-regularized logistic regression (proximal gradient) and probit MLE
// (Fisher scoring). Both standardize features internally and keep the
// standardization in the model.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

#include "biaslab/common.hpp"
#include "biaslab/scorecard.hpp"

namespace biaslab {

namespace {

struct Standardized {
  Eigen::MatrixXd x;  // n x k, centered and scaled
  std::vector<double> mean, scale;
};

Standardized standardize(const Dataset& d) {
  const std::size_t n = d.rows(), k = d.cols();
  Standardized s;
  s.mean.resize(k);
  s.scale.resize(k);
  s.x.resize(n, k);
  for (std::size_t j = 0; j < k; ++j) {
    double m = 0;
    for (std::size_t i = 0; i < n; ++i) m += d.feature(i, j);
    m /= static_cast<double>(n);
    double v = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double c = d.feature(i, j) - m;
      v += c * c;
    }
    double sd = std::sqrt(v / static_cast<double>(n));
    if (sd < 1e-12) sd = 1.0;  // constant column
    s.mean[j] = m;
    s.scale[j] = sd;
    for (std::size_t i = 0; i < n; ++i) s.x(i, j) = (d.feature(i, j) - m) / sd;
  }
  return s;
}

// Per-row weights normalized to mean 1, so scaling all weights by a positive
// constant leaves every fit unchanged.
Eigen::VectorXd normalized_weights(const Dataset& d, const FitOptions& opts) {
  const std::size_t n = d.rows();
  Eigen::VectorXd w = Eigen::VectorXd::Ones(n);
  if (!opts.sample_weights.empty()) {
    double sum = 0;
    for (double v : opts.sample_weights) sum += v;
    for (std::size_t i = 0; i < n; ++i)
      w(i) = opts.sample_weights[i] * static_cast<double>(n) / sum;
  }
  return w;
}

Eigen::VectorXd binary_targets(const Dataset& d, const char* who) {
  if (!d.has_labels() || !d.fully_labeled())
    throw ConfigError(std::string(who) + ": every row must be labeled");
  const std::size_t n = d.rows();
  Eigen::VectorXd y(n);
  bool has0 = false, has1 = false;
  for (std::size_t i = 0; i < n; ++i) {
    y(i) = d.labels[i];
    (d.labels[i] == 1 ? has1 : has0) = true;
  }
  if (!has0 || !has1) throw ConfigError(std::string(who) + ": single-class data");
  return y;
}

double log1pexp(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

}  // namespace

Scorecard fit_l1_logistic(const Dataset& d, const FitOptions& opts) {
  opts.validate(d.rows());
  const Eigen::VectorXd y = binary_targets(d, "fit_l1_logistic");
  const auto std_x = standardize(d);
  const Eigen::VectorXd w = normalized_weights(d, opts);
  const std::size_t n = d.rows(), k = d.cols();
  const double inv_n = 1.0 / static_cast<double>(n);
  const double lambda = opts.l1_lambda;

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(k);
  double b0 = 0;

  auto margins = [&](const Eigen::VectorXd& bt, double b) -> Eigen::VectorXd {
    return (std_x.x * bt).array() + b;
  };
  auto smooth_loss = [&](const Eigen::VectorXd& z) {
    double s = 0;
    for (std::size_t i = 0; i < n; ++i) s += w(i) * (log1pexp(z(i)) - y(i) * z(i));
    return s * inv_n;
  };
  auto l1 = [&](const Eigen::VectorXd& bt) { return lambda * bt.cwiseAbs().sum(); };
  auto soft = [](double v, double t) {
    if (v > t) return v - t;
    if (v < -t) return v + t;
    return 0.0;
  };

  Eigen::VectorXd z = margins(beta, b0);
  double f_smooth = smooth_loss(z);
  double objective = f_smooth + l1(beta);
  double step = 1.0;

  for (std::size_t iter = 0; iter < opts.max_iter; ++iter) {
    Eigen::VectorXd p(n);
    for (std::size_t i = 0; i < n; ++i)
      p(i) = z(i) >= 0 ? 1.0 / (1.0 + std::exp(-z(i))) : std::exp(z(i)) / (1.0 + std::exp(z(i)));
    const Eigen::VectorXd r = (w.array() * (p - y).array()).matrix() * inv_n;
    const Eigen::VectorXd g = std_x.x.transpose() * r;
    const double gb = r.sum();

    // Backtracking on the smooth part's quadratic model.
    Eigen::VectorXd beta_next(k);
    double b0_next = 0, f_next = 0;
    for (;;) {
      for (std::size_t j = 0; j < k; ++j) beta_next(j) = soft(beta(j) - step * g(j), step * lambda);
      b0_next = b0 - step * gb;
      const Eigen::VectorXd z_next = margins(beta_next, b0_next);
      f_next = smooth_loss(z_next);
      const Eigen::VectorXd db = beta_next - beta;
      const double dbb = b0_next - b0;
      const double bound = f_smooth + g.dot(db) + gb * dbb +
                           (db.squaredNorm() + dbb * dbb) / (2.0 * step);
      if (f_next <= bound + 1e-15 || step < 1e-12) {
        z = z_next;
        break;
      }
      step *= 0.5;
    }
    beta = beta_next;
    b0 = b0_next;
    f_smooth = f_next;
    const double objective_next = f_smooth + l1(beta);
    const bool converged = std::abs(objective - objective_next) < opts.tol;
    objective = objective_next;
    if (converged) break;
    step = std::min(step * 1.25, 1e6);
  }

  Scorecard m;
  m.kind = LearnerKind::l1_logistic;
  m.feature_arity = k;
  m.linear.intercept = b0;
  m.linear.weights.assign(beta.data(), beta.data() + k);
  m.linear.mean = std_x.mean;
  m.linear.scale = std_x.scale;
  m.meta = {n, !opts.sample_weights.empty(), opts.seed};
  return m;
}

Scorecard fit_probit(const Dataset& d, const FitOptions& opts) {
  opts.validate(d.rows());
  const Eigen::VectorXd y = binary_targets(d, "fit_probit");
  const auto std_x = standardize(d);
  const Eigen::VectorXd w = normalized_weights(d, opts);
  const std::size_t n = d.rows(), k = d.cols();

  Eigen::MatrixXd x(n, k + 1);
  x.col(0).setOnes();
  if (k > 0) x.rightCols(k) = std_x.x;

  auto run = [&](double ridge, bool& diverged) -> std::pair<Eigen::VectorXd, Eigen::MatrixXd> {
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(k + 1);
    Eigen::MatrixXd info = Eigen::MatrixXd::Identity(k + 1, k + 1);
    double loglik = -1e300;
    diverged = false;
    for (std::size_t iter = 0; iter < opts.max_iter; ++iter) {
      const Eigen::VectorXd idx = x * beta;
      Eigen::VectorXd ww(n), zz(n);
      double ll = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const double cdf = std::clamp(normal_cdf(idx(i)), 1e-10, 1.0 - 1e-10);
        const double pdf = std::max(normal_pdf(idx(i)), 1e-300);
        ll += w(i) * (y(i) * std::log(cdf) + (1.0 - y(i)) * std::log(1.0 - cdf));
        ww(i) = w(i) * pdf * pdf / (cdf * (1.0 - cdf));
        zz(i) = idx(i) + (y(i) - cdf) / pdf;
      }
      info = x.transpose() * ww.asDiagonal() * x;
      info.diagonal().array() += ridge + 1e-12;
      const Eigen::VectorXd beta_next = info.ldlt().solve(x.transpose() * (ww.asDiagonal() * zz));
      if (!beta_next.allFinite() || beta_next.cwiseAbs().maxCoeff() > 30.0) {
        diverged = true;
        return {beta, info};
      }
      const double delta = std::abs(ll - loglik);
      beta = beta_next;
      loglik = ll;
      if (iter > 0 && delta < opts.tol) break;
    }
    return {beta, info};
  };

  bool diverged = false;
  auto [beta, info] = run(0.0, diverged);
  if (diverged) {
    warn("fit_probit: separation detected (coefficients diverge); applying L2 jitter 1e-6");
    auto [beta2, info2] = run(1e-6, diverged);
    beta = beta2;
    info = info2;
    if (diverged) throw ConfigError("fit_probit: separation persists under L2 jitter 1e-6");
  }

  Eigen::MatrixXd cov = info.inverse();

  Scorecard m;
  m.kind = LearnerKind::probit;
  m.feature_arity = k;
  m.linear.intercept = beta(0);
  m.linear.weights.assign(beta.data() + 1, beta.data() + k + 1);
  m.linear.mean = std_x.mean;
  m.linear.scale = std_x.scale;
  m.linear.std_errors.resize(k + 1);
  for (std::size_t j = 0; j <= k; ++j) m.linear.std_errors[j] = std::sqrt(std::max(cov(j, j), 0.0));
  m.meta = {n, !opts.sample_weights.empty(), opts.seed};
  return m;
}

}  // namespace biaslab
