#include "biaslab/bayes.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "biaslab/common.hpp"
#include "biaslab/parallel.hpp"

namespace biaslab {

void Prior::validate() const {
  if (probs.size() != ids.size()) throw ConfigError("prior: probs and ids misaligned");
  for (double p : probs)
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("prior: entry outside [0,1]");
}

std::string prior_source_name(Prior::Source s) {
  switch (s) {
    case Prior::Source::previous_scorecard: return "previous_scorecard";
    case Prior::Source::original_scores: return "original_scores";
    case Prior::Source::constant: return "constant";
    case Prior::Source::oracle: return "oracle";
    case Prior::Source::corrupted: return "corrupted";
  }
  return "?";
}

void BayesConfig::validate() const {
  if (min_iterations < 2) throw ConfigError("bayes: min_iterations must be >= 2");
  if (j_max < min_iterations) throw ConfigError("bayes: j_max must be >= min_iterations");
  if (!(epsilon > 0)) throw ConfigError("bayes: epsilon must be positive");
}

MetricValue bayesian_metric(const Scorecard& f, const Dataset& accepts, const Dataset& rejects,
                            const Prior& prior, const MetricSpec& metric, const BayesConfig& cfg,
                            BayesDiagnostics* diag) {
  cfg.validate();
  metric.validate();
  prior.validate();
  if (!accepts.fully_labeled() || accepts.rows() == 0)
    throw ConfigError("bayesian_metric: accepts must be labeled and nonempty");

  const auto accept_scores = predict_proba(f, accepts);

  if (rejects.rows() == 0) {
    if (diag) *diag = {};
    return evaluate_metric(metric, accept_scores, accepts.labels);
  }

  if (prior.probs.size() != rejects.rows())
    throw ConfigError("bayesian_metric: prior not aligned to rejects");
  for (std::size_t i = 0; i < rejects.rows(); ++i)
    if (prior.ids[i] != rejects.ids[i])
      throw ConfigError("bayesian_metric: prior id mismatch at row " + std::to_string(i));

  const auto reject_scores = predict_proba(f, rejects);
  const std::size_t n_a = accepts.rows(), n_r = rejects.rows();

  std::vector<double> scores(n_a + n_r);
  std::copy(accept_scores.begin(), accept_scores.end(), scores.begin());
  std::copy(reject_scores.begin(), reject_scores.end(), scores.begin() + n_a);

  // One realization: draw reject labels from the prior, evaluate the metric
  // on accepts + pseudo-labeled rejects. NaN marks an undefined realization.
  const Rng root(cfg.seed);
  auto realize = [&](std::size_t j, std::vector<std::int8_t>& labels) -> double {
    Rng rng = root.child(j + 1);
    for (std::size_t i = 0; i < n_r; ++i)
      labels[n_a + i] = rng.bernoulli(prior.probs[i]) ? 1 : 0;
    try {
      return evaluate_metric(metric, scores, labels).value;
    } catch (const ConfigError&) {
      return std::numeric_limits<double>::quiet_NaN();
    }
  };

  BayesDiagnostics local;
  BayesDiagnostics& dg = diag ? *diag : local;
  dg = {};

  // Evaluate draws in fixed-size blocks: each block runs in parallel, the
  // convergence scan stays serial in draw order. Identical results for any
  // thread count.
  constexpr std::size_t kBlock = 64;
  std::vector<double> block_vals(kBlock);
  std::vector<std::vector<std::int8_t>> label_buffers;

  double sum = 0.0;
  double prev_mean = std::numeric_limits<double>::quiet_NaN();
  double mean = std::numeric_limits<double>::quiet_NaN();
  std::size_t completed = 0;
  bool stop = false;

  for (std::size_t block_start = 0; block_start < cfg.j_max && !stop; block_start += kBlock) {
    const std::size_t block_n = std::min(kBlock, cfg.j_max - block_start);
    const int n_threads = par::thread_count_for(block_n);
    if (label_buffers.size() < static_cast<std::size_t>(n_threads))
      label_buffers.resize(n_threads);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(n_threads)
#endif
    for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(block_n); ++b) {
#ifdef _OPENMP
      auto& labels = label_buffers[omp_get_thread_num()];
#else
      auto& labels = label_buffers[0];
#endif
      if (labels.size() != n_a + n_r) {
        labels.assign(n_a + n_r, 0);
        std::copy(accepts.labels.begin(), accepts.labels.end(), labels.begin());
      }
      block_vals[b] = realize(block_start + b, labels);
    }

    for (std::size_t b = 0; b < block_n; ++b) {
      ++dg.iterations;
      const double v = block_vals[b];
      if (std::isnan(v)) {
        ++dg.skipped;
        continue;
      }
      ++completed;
      sum += v;
      prev_mean = mean;
      mean = sum / static_cast<double>(completed);
      dg.draw_values.push_back(v);
      dg.running_mean.push_back(mean);
      if (completed >= cfg.min_iterations && !std::isnan(prev_mean) &&
          std::abs(mean - prev_mean) < cfg.epsilon) {
        stop = true;
        break;
      }
    }
  }

  if (dg.skipped * 2 > dg.iterations)
    throw std::runtime_error("bayesian_metric: metric undefined on " +
                             std::to_string(dg.skipped) + " of " +
                             std::to_string(dg.iterations) + " draws");
  if (completed == 0) throw std::runtime_error("bayesian_metric: no usable draws");

  return MetricValue{mean, n_a + n_r, metric_orientation(metric.name)};
}

namespace {

Prior prior_from(const Dataset& rejects, std::vector<double> probs, Prior::Source src, bool clip) {
  if (probs.size() != rejects.rows())
    throw ConfigError("build_prior: score vector not aligned to rejects");
  if (clip)
    for (double& p : probs) p = std::clamp(p, 1e-6, 1.0 - 1e-6);
  else
    for (double p : probs)
      if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("build_prior: score outside [0,1]");
  Prior out;
  out.probs = std::move(probs);
  out.ids = rejects.ids;
  out.source = src;
  out.validate();
  return out;
}

}  // namespace

Prior build_prior(const Dataset& rejects, const Scorecard& source) {
  return prior_from(rejects, predict_proba(source, rejects), Prior::Source::previous_scorecard,
                    true);
}

Prior build_prior_from_scores(const Dataset& rejects, std::span<const double> scores,
                              Prior::Source source) {
  return prior_from(rejects, {scores.begin(), scores.end()}, source, true);
}

Prior make_oracle_prior(const Dataset& rejects, std::span<const std::int8_t> true_labels) {
  std::vector<double> probs(true_labels.size());
  for (std::size_t i = 0; i < true_labels.size(); ++i) {
    if (true_labels[i] != 0 && true_labels[i] != 1)
      throw ConfigError("make_oracle_prior: missing ground-truth label");
    probs[i] = static_cast<double>(true_labels[i]);
  }
  return prior_from(rejects, std::move(probs), Prior::Source::oracle, false);
}

Prior corrupt_prior(const Prior& p, double flip_rate, double shift, RngSeed seed) {
  p.validate();
  if (flip_rate < 0.0 || flip_rate > 1.0) throw ConfigError("corrupt_prior: flip_rate outside [0,1]");
  Rng rng(seed);
  Prior out = p;
  for (double& q : out.probs) {
    if (rng.bernoulli(flip_rate)) q = 1.0 - q;
    q = std::clamp(q + shift, 0.0, 1.0);
  }
  out.source = Prior::Source::corrupted;
  return out;
}

void write_bayes_trace_csv(const BayesDiagnostics& diag, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ConfigError("write_bayes_trace_csv: cannot open '" + path + "'");
  out << "iteration,draw_value,running_mean\n";
  for (std::size_t i = 0; i < diag.draw_values.size(); ++i)
    out << (i + 1) << ',' << format_double(diag.draw_values[i]) << ','
        << format_double(diag.running_mean[i]) << '\n';
}

}  // namespace biaslab
