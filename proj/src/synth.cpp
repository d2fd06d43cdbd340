#include "biaslab/synth.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "biaslab/common.hpp"

namespace biaslab {

namespace {

Eigen::MatrixXd to_matrix(const std::vector<double>& cov, std::size_t k) {
  Eigen::MatrixXd m(k, k);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) m(i, j) = cov[i * k + j];
  return m;
}

// Cholesky factor with jitter escalation up to 1e-8.
Eigen::MatrixXd cholesky_or_throw(const Eigen::MatrixXd& cov) {
  if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-9)
    throw ConfigError("mixture: covariance is not symmetric");
  for (double jitter : {0.0, 1e-12, 1e-10, 1e-8}) {
    Eigen::MatrixXd c = cov;
    if (jitter > 0) c.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(c);
    if (llt.info() == Eigen::Success) return llt.matrixL();
  }
  throw ConfigError("mixture: covariance is not positive semi-definite");
}

void validate_components(const std::vector<MixtureComponent>& comps, std::size_t k,
                         const char* cls) {
  if (comps.empty()) throw ConfigError(std::string("mixture: no components for class ") + cls);
  double wsum = 0;
  for (const auto& c : comps) {
    if (c.weight < 0) throw ConfigError("mixture: negative component weight");
    wsum += c.weight;
    if (c.mean.size() != k) throw ConfigError("mixture: mean dimension mismatch");
    if (c.cov.size() != k * k) throw ConfigError("mixture: covariance dimension mismatch");
    cholesky_or_throw(to_matrix(c.cov, k));
  }
  if (std::abs(wsum - 1.0) > 1e-9)
    throw ConfigError(std::string("mixture: component weights for class ") + cls +
                      " sum to " + format_double(wsum));
}

}  // namespace

void MixtureSpec::validate() const {
  if (dim == 0) throw ConfigError("mixture: dim must be positive");
  if (!(bad_rate > 0.0 && bad_rate < 1.0))
    throw ConfigError("mixture: bad_rate must lie in (0,1)");
  validate_components(good, dim, "good");
  validate_components(bad, dim, "bad");
}

void MnarSpec::validate(std::size_t k) const {
  for (std::size_t dimn : hidden_dims)
    if (dimn >= k) throw ConfigError("mnar: hidden dimension out of range");
  if (overwrite_rate < 0.0 || overwrite_rate > 1.0)
    throw ConfigError("mnar: overwrite_rate must lie in [0,1]");
}

Dataset sample_applicants(const MixtureSpec& spec, std::size_t n, RngSeed seed) {
  if (n == 0) throw ConfigError("sample_applicants: n must be positive");
  spec.validate();
  const std::size_t k = spec.dim;

  auto prep = [&](const std::vector<MixtureComponent>& comps) {
    std::vector<std::pair<double, Eigen::MatrixXd>> out;  // (cum weight, chol)
    double cum = 0;
    for (const auto& c : comps) {
      cum += c.weight;
      out.emplace_back(cum, cholesky_or_throw(to_matrix(c.cov, k)));
    }
    out.back().first = 1.0;
    return out;
  };
  const auto good = prep(spec.good);
  const auto bad = prep(spec.bad);

  Rng rng(seed);
  Dataset d;
  d.n_cols = k;
  d.features.resize(n * k);
  d.labels.resize(n);
  d.ids.resize(n);
  Eigen::VectorXd z(k);
  for (std::size_t i = 0; i < n; ++i) {
    const bool is_bad = rng.bernoulli(spec.bad_rate);
    d.labels[i] = is_bad ? 1 : 0;
    const auto& comps = is_bad ? spec.bad : spec.good;
    const auto& chols = is_bad ? bad : good;
    const double u = rng.uniform01();
    std::size_t c = 0;
    while (c + 1 < chols.size() && u >= chols[c].first) ++c;
    for (std::size_t j = 0; j < k; ++j) z(j) = rng.normal();
    Eigen::VectorXd x = chols[c].second * z;
    for (std::size_t j = 0; j < k; ++j)
      d.features[i * k + j] = comps[c].mean[j] + x(j);
    d.ids[i] = static_cast<std::int64_t>(i);
  }
  return d;
}

std::vector<double> random_covariances(std::size_t k, double range_max, RngSeed seed) {
  if (range_max <= 0) throw ConfigError("random_covariances: range_max must be positive");
  Rng rng(seed);
  Eigen::MatrixXd a(k, k);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) a(i, j) = rng.uniform(-range_max, range_max);
  Eigen::MatrixXd s = 0.5 * (a + a.transpose());

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s);
  Eigen::VectorXd vals = eig.eigenvalues().cwiseMax(1e-6);
  Eigen::MatrixXd psd = eig.eigenvectors() * vals.asDiagonal() * eig.eigenvectors().transpose();

  Eigen::VectorXd inv_sd = psd.diagonal().cwiseSqrt().cwiseInverse();
  Eigen::MatrixXd corr = inv_sd.asDiagonal() * psd * inv_sd.asDiagonal();
  corr = 0.5 * (corr + corr.transpose());
  corr.diagonal().setOnes();

  std::vector<double> out(k * k);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) out[i * k + j] = corr(i, j);
  return out;
}

std::vector<std::int8_t> apply_mnar(const std::vector<std::int8_t>& decisions,
                                    const Dataset& batch, const MnarSpec& mnar, RngSeed seed) {
  if (decisions.size() != batch.rows())
    throw ConfigError("apply_mnar: decisions not aligned with batch rows");
  mnar.validate(batch.cols());
  if (mnar.overwrite_rate == 0.0 || mnar.hidden_dims.empty()) return decisions;

  std::vector<std::size_t> accepted_rows, rejected_rows;
  for (std::size_t i = 0; i < decisions.size(); ++i)
    (decisions[i] == 1 ? accepted_rows : rejected_rows).push_back(i);
  if (accepted_rows.empty()) return decisions;

  std::size_t n_swap = static_cast<std::size_t>(
      std::ceil(mnar.overwrite_rate * static_cast<double>(accepted_rows.size()) - 1e-12));
  if (n_swap > rejected_rows.size()) {
    warn("apply_mnar: overwrite count " + std::to_string(n_swap) + " exceeds " +
         std::to_string(rejected_rows.size()) + " rejected rows; clipping");
    n_swap = rejected_rows.size();
  }
  if (n_swap == 0) return decisions;

  Rng rng(seed);
  auto out = decisions;
  const auto exits = rng.sample_without_replacement(accepted_rows.size(), n_swap);
  for (std::size_t e : exits) out[accepted_rows[e]] = 0;

  const std::size_t hidden = mnar.hidden_dims.front();
  std::stable_sort(rejected_rows.begin(), rejected_rows.end(), [&](std::size_t a, std::size_t b) {
    return batch.feature(a, hidden) < batch.feature(b, hidden);
  });
  for (std::size_t i = 0; i < n_swap; ++i) out[rejected_rows[i]] = 1;
  return out;
}

Dataset mask_features(const Dataset& d, const std::vector<std::size_t>& hidden_dims) {
  if (hidden_dims.empty()) return d;
  std::vector<std::size_t> keep;
  for (std::size_t j = 0; j < d.cols(); ++j)
    if (std::find(hidden_dims.begin(), hidden_dims.end(), j) == hidden_dims.end())
      keep.push_back(j);
  if (keep.empty()) throw ConfigError("mask_features: all feature columns hidden");
  return d.keep_columns(keep);
}

MixtureSpec with_cov_range(const MixtureSpec& spec, double cov_range, RngSeed seed) {
  MixtureSpec out = spec;
  // One shared draw: per-component covariances would separate the classes
  // by component geometry alone.
  const auto cov = random_covariances(out.dim, cov_range, seed.child(1));
  for (auto* cls : {&out.good, &out.bad})
    for (auto& comp : *cls) comp.cov = cov;
  out.validate();
  return out;
}

MixtureSpec default_mnar_mixture(std::size_t k, double bad_rate, double cov_range, RngSeed seed) {
  if (k < 2) throw ConfigError("default_mnar_mixture: need k >= 2");
  MixtureSpec spec = default_mixture(k, bad_rate, cov_range, seed);
  const std::size_t h = k - 1;
  // Decorrelate the hidden dimension and give it a class shift of its own.
  for (auto* cls : {&spec.good, &spec.bad})
    for (auto& comp : *cls) {
      for (std::size_t j = 0; j < k; ++j) {
        comp.cov[h * k + j] = 0.0;
        comp.cov[j * k + h] = 0.0;
      }
      comp.cov[h * k + h] = 1.0;
    }
  // A mild class shift: strong hidden effects would dominate the visible
  // signal entirely once decisions are overwritten.
  spec.good[0].mean[h] = 0.0;
  spec.good[1].mean[h] = 0.1;
  spec.bad[0].mean[h] = 0.35;
  spec.bad[1].mean[h] = 0.45;
  spec.validate();
  return spec;
}

MixtureSpec default_mixture(std::size_t k, double bad_rate, double cov_range, RngSeed seed) {
  MixtureSpec spec;
  spec.dim = k;
  spec.bad_rate = bad_rate;

  // Heavily overlapping classes: scorecards stay imperfect and the accepted
  // region misses a sizable share of the population, as in the simulation
  // study this mirrors.
  auto mean_vec = [&](double base, double tilt) {
    std::vector<double> m(k);
    for (std::size_t j = 0; j < k; ++j) m[j] = base + tilt * static_cast<double>(j) / 2.0;
    return m;
  };
  const auto cov = random_covariances(k, cov_range, seed.child(1));
  MixtureComponent g1{0.6, mean_vec(0.0, 0.1), cov};
  MixtureComponent g2{0.4, mean_vec(0.5, 0.2), cov};
  MixtureComponent b1{0.5, mean_vec(0.6, 0.2), cov};
  MixtureComponent b2{0.5, mean_vec(1.3, 0.3), cov};
  spec.good = {g1, g2};
  spec.bad = {b1, b2};
  spec.validate();
  return spec;
}

}  // namespace biaslab
