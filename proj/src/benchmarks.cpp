#include "biaslab/benchmarks.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "biaslab/common.hpp"

namespace biaslab {

namespace {

// Equal-frequency band edges (n_bands - 1 interior quantiles) of scores.
std::vector<double> band_edges(std::vector<double> scores, std::size_t n_bands) {
  std::sort(scores.begin(), scores.end());
  std::vector<double> edges;
  const std::size_t n = scores.size();
  for (std::size_t b = 1; b < n_bands; ++b) {
    const double q = static_cast<double>(b) / static_cast<double>(n_bands);
    const double pos = q * static_cast<double>(n - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    const double frac = pos - static_cast<double>(lo);
    const double v = lo + 1 < n ? scores[lo] * (1.0 - frac) + scores[lo + 1] * frac : scores[lo];
    edges.push_back(v);
  }
  return edges;
}

std::size_t band_of(double score, const std::vector<double>& edges) {
  return static_cast<std::size_t>(std::upper_bound(edges.begin(), edges.end(), score) -
                                  edges.begin());
}

Dataset strip_accept_flags(Dataset d) {
  d.accepted.clear();
  d.unbiased_holdout = false;
  return d;
}

Scorecard fit_weak_on(const Dataset& accepts, const FitOptions& opts) {
  FitOptions wo = opts;
  wo.sample_weights.clear();
  return fit_l1_logistic(accepts, wo);
}

}  // namespace

std::string CorrectionMethod::name() const {
  switch (kind) {
    case CorrectionKind::ignore: return "ignore";
    case CorrectionKind::label_all_bad: return "label_all_bad";
    case CorrectionKind::hca: return "hca";
    case CorrectionKind::parceling: return "parceling";
    case CorrectionKind::reweight_banded: return "reweight_banded";
    case CorrectionKind::heckman_two_step: return "heckman_two_step";
    case CorrectionKind::basl: return "basl";
  }
  return "?";
}

CorrectionKind correction_from_string(const std::string& name) {
  if (name == "ignore") return CorrectionKind::ignore;
  if (name == "label_all_bad") return CorrectionKind::label_all_bad;
  if (name == "hca") return CorrectionKind::hca;
  if (name == "parceling") return CorrectionKind::parceling;
  if (name == "reweight_banded") return CorrectionKind::reweight_banded;
  if (name == "heckman_two_step") return CorrectionKind::heckman_two_step;
  if (name == "basl") return CorrectionKind::basl;
  throw ConfigError("correction: unknown method '" + name + "'");
}

void CorrectionMethod::validate() const {
  switch (kind) {
    case CorrectionKind::hca:
      if (!(hca_cutoff > 0.0 && hca_cutoff < 1.0))
        throw ConfigError("hca: cutoff must lie in (0,1)");
      break;
    case CorrectionKind::parceling:
      if (parceling_bands < 2) throw ConfigError("parceling: n_bands must be >= 2");
      if (parceling_risk_multiplier < 1.0)
        throw ConfigError("parceling: risk_multiplier must be >= 1");
      break;
    case CorrectionKind::reweight_banded:
      if (weight_bands < 2) throw ConfigError("reweight_banded: n_bands must be >= 2");
      break;
    case CorrectionKind::basl:
      basl.validate();
      break;
    default:
      break;
  }
}

Dataset hca(const Dataset& accepts, const Dataset& rejects, double cutoff,
            const FitOptions& weak_opts) {
  if (!(cutoff > 0.0 && cutoff < 1.0)) throw ConfigError("hca: cutoff must lie in (0,1)");
  const Scorecard weak = fit_weak_on(accepts, weak_opts);
  const auto scores = predict_proba(weak, rejects);
  std::vector<std::int8_t> labels(rejects.rows());
  for (std::size_t i = 0; i < rejects.rows(); ++i) labels[i] = scores[i] >= cutoff ? 1 : 0;
  Dataset labeled = strip_accept_flags(rejects.without_labels().with_labels(std::move(labels)));
  return Dataset::concat(strip_accept_flags(accepts), labeled);
}

Dataset parceling(const Dataset& accepts, const Dataset& rejects, std::size_t n_bands,
                  double risk_multiplier, RngSeed seed, const FitOptions& weak_opts) {
  if (n_bands < 2) throw ConfigError("parceling: n_bands must be >= 2");
  if (risk_multiplier < 1.0) throw ConfigError("parceling: risk_multiplier must be >= 1");
  const Scorecard weak = fit_weak_on(accepts, weak_opts);
  const auto acc_scores = predict_proba(weak, accepts);
  const auto edges = band_edges(acc_scores, n_bands);

  std::vector<double> band_bad(n_bands, 0.0), band_count(n_bands, 0.0);
  for (std::size_t i = 0; i < accepts.rows(); ++i) {
    const std::size_t b = band_of(acc_scores[i], edges);
    band_count[b] += 1.0;
    band_bad[b] += accepts.labels[i];
  }
  std::vector<double> band_rate(n_bands, 0.0);
  for (std::size_t b = 0; b < n_bands; ++b) {
    if (band_count[b] > 0) {
      band_rate[b] = band_bad[b] / band_count[b];
      continue;
    }
    // Empty band: merge with the nearest populated neighbor.
    warn("parceling: empty accepts band " + std::to_string(b) + "; merging with neighbor");
    for (std::size_t off = 1; off < n_bands; ++off) {
      if (b >= off && band_count[b - off] > 0) {
        band_rate[b] = band_bad[b - off] / band_count[b - off];
        break;
      }
      if (b + off < n_bands && band_count[b + off] > 0) {
        band_rate[b] = band_bad[b + off] / band_count[b + off];
        break;
      }
    }
  }

  Rng rng(seed);
  const auto rej_scores = predict_proba(weak, rejects);
  std::vector<std::int8_t> labels(rejects.rows());
  for (std::size_t i = 0; i < rejects.rows(); ++i) {
    const double p = std::min(1.0, risk_multiplier * band_rate[band_of(rej_scores[i], edges)]);
    labels[i] = rng.bernoulli(p) ? 1 : 0;
  }
  Dataset labeled = strip_accept_flags(rejects.without_labels().with_labels(std::move(labels)));
  return Dataset::concat(strip_accept_flags(accepts), labeled);
}

std::vector<double> banded_weights(const Dataset& accepts, const Dataset& rejects,
                                   std::size_t n_bands, const FitOptions& weak_opts) {
  if (n_bands < 2) throw ConfigError("banded_weights: n_bands must be >= 2");
  if (accepts.rows() == 0) throw ConfigError("banded_weights: accepts empty");
  if (rejects.rows() == 0) return std::vector<double>(accepts.rows(), 1.0);

  const Scorecard weak = fit_weak_on(accepts, weak_opts);
  const auto acc_scores = predict_proba(weak, accepts);
  const auto rej_scores = predict_proba(weak, rejects);

  std::vector<double> pooled = acc_scores;
  pooled.insert(pooled.end(), rej_scores.begin(), rej_scores.end());
  const auto edges = band_edges(pooled, n_bands);

  std::vector<double> n_all(n_bands, 0.0), n_acc(n_bands, 0.0);
  for (double s : acc_scores) {
    const std::size_t b = band_of(s, edges);
    n_all[b] += 1.0;
    n_acc[b] += 1.0;
  }
  for (double s : rej_scores) n_all[band_of(s, edges)] += 1.0;

  // Bands without accepts cannot carry a weight: fold their pooled mass into
  // the next populated band so no reject mass is lost.
  double carry = 0;
  bool merged = false;
  for (std::size_t b = 0; b < n_bands; ++b) {
    if (n_acc[b] == 0) {
      carry += n_all[b];
      n_all[b] = 0;
      merged = true;
    } else {
      n_all[b] += carry;
      carry = 0;
    }
  }
  if (carry > 0)
    for (std::size_t b = n_bands; b-- > 0;)
      if (n_acc[b] > 0) {
        n_all[b] += carry;
        break;
      }
  if (merged) warn("banded_weights: bands with zero accepts merged into neighbors");

  std::vector<double> ratio(n_bands, 1.0);
  for (std::size_t b = 0; b < n_bands; ++b)
    if (n_acc[b] > 0) ratio[b] = n_all[b] / n_acc[b];

  std::vector<double> w(accepts.rows());
  double sum = 0;
  for (std::size_t i = 0; i < accepts.rows(); ++i) {
    w[i] = ratio[band_of(acc_scores[i], edges)];
    sum += w[i];
  }
  const double norm = static_cast<double>(accepts.rows()) / sum;
  for (double& v : w) v *= norm;
  return w;
}

Scorecard heckman_two_step(const Dataset& accepts, const Dataset& rejects,
                           const FitOptions& opts) {
  if (accepts.rows() == 0 || rejects.rows() == 0)
    throw ConfigError("heckman_two_step: accepts and rejects must both be nonempty");

  // Step 1: probit of the acceptance indicator over the pooled sample.
  Dataset pooled = Dataset::concat(strip_accept_flags(accepts.without_labels()),
                                   strip_accept_flags(rejects.without_labels()));
  std::vector<std::int8_t> selected(pooled.rows(), 0);
  std::fill(selected.begin(), selected.begin() + accepts.rows(), std::int8_t{1});
  pooled = pooled.with_labels(std::move(selected));
  FitOptions probit_opts = opts;
  probit_opts.sample_weights.clear();
  const Scorecard selection = fit_probit(pooled, probit_opts);

  // Step 2: strong learner on accepts with the inverse Mills ratio appended.
  const std::size_t k = accepts.cols();
  Dataset augmented = strip_accept_flags(accepts);
  augmented.n_cols = k + 1;
  augmented.features.clear();
  augmented.features.reserve(accepts.rows() * (k + 1));
  for (std::size_t i = 0; i < accepts.rows(); ++i) {
    const auto row = accepts.row(i);
    augmented.features.insert(augmented.features.end(), row.begin(), row.end());
    augmented.features.push_back(inverse_mills(selection.linear.index(row)));
  }
  if (!augmented.feature_names.empty()) augmented.feature_names.push_back("mills");

  Scorecard m = fit_gbt(augmented, opts);
  m.feature_arity = k;
  m.selection_adjust = selection.linear;
  return m;
}

MetricValue weighted_validation(const Scorecard& f, const Dataset& validation_accepts,
                                std::span<const double> weights, const MetricSpec& metric) {
  if (weights.size() != validation_accepts.rows())
    throw ConfigError("weighted_validation: weights misaligned");
  if (!validation_accepts.fully_labeled())
    throw ConfigError("weighted_validation: validation accepts must be labeled");
  const auto scores = predict_proba(f, validation_accepts);
  return evaluate_weighted_metric(metric, scores, validation_accepts.labels, weights);
}

Dataset corrected_training_set(const CorrectionMethod& method, const Split& split,
                               const FitOptions& opts) {
  method.validate();
  const Dataset& accepts = split.train_accepts();
  const Dataset& rejects = split.rejects();
  switch (method.kind) {
    case CorrectionKind::ignore:
      return strip_accept_flags(accepts);
    case CorrectionKind::label_all_bad: {
      Dataset bad = strip_accept_flags(
          rejects.without_labels().with_labels(std::vector<std::int8_t>(rejects.rows(), 1)));
      return Dataset::concat(strip_accept_flags(accepts), bad);
    }
    case CorrectionKind::hca:
      return hca(accepts, rejects, method.hca_cutoff, opts);
    case CorrectionKind::parceling:
      return parceling(accepts, rejects, method.parceling_bands,
                       method.parceling_risk_multiplier, opts.seed.child(0x9a), opts);
    default:
      throw ConfigError("corrected_training_set: not an augmentation method: " + method.name());
  }
}

Scorecard train_corrected(const CorrectionMethod& method, const Split& split,
                          const FitOptions& opts) {
  method.validate();
  const Dataset& accepts = split.train_accepts();
  const Dataset& rejects = split.rejects();
  switch (method.kind) {
    case CorrectionKind::ignore:
    case CorrectionKind::label_all_bad:
    case CorrectionKind::hca:
    case CorrectionKind::parceling: {
      FitOptions o = opts;
      o.sample_weights.clear();
      return fit_gbt(corrected_training_set(method, split, opts), o);
    }
    case CorrectionKind::reweight_banded: {
      FitOptions o = opts;
      o.sample_weights = banded_weights(accepts, rejects, method.weight_bands, opts);
      return fit_gbt(strip_accept_flags(accepts), o);
    }
    case CorrectionKind::heckman_two_step:
      return heckman_two_step(accepts, rejects, opts);
    case CorrectionKind::basl: {
      BaslConfig cfg = method.basl;
      cfg.seed = opts.seed.child(0xBA51);
      auto [val_accepts, val_rejects] = split_validation(split.validation());
      Prior prior =
          method.prior_scorecard
              ? build_prior(val_rejects, *method.prior_scorecard)
              : build_prior(val_rejects, fit_weak_on(accepts, opts));
      return basl_fit(accepts, rejects.without_labels(), split.validation(), prior, cfg).model;
    }
  }
  throw ConfigError("train_corrected: unknown method");
}

}  // namespace biaslab
