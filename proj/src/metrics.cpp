#include "biaslab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "biaslab/common.hpp"

namespace biaslab {

namespace {

void check_aligned(Scores scores, Labels labels) {
  if (scores.size() != labels.size())
    throw ConfigError("metric: scores and labels have different lengths");
  if (scores.empty()) throw ConfigError("metric: empty input");
}

void check_weights(Scores scores, Weights w) {
  if (w.size() != scores.size()) throw ConfigError("metric: weight vector misaligned");
  for (double v : w)
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("metric: weights must be positive");
}

void require_both_classes(Labels labels, const char* what) {
  bool has0 = false, has1 = false;
  for (std::int8_t y : labels) {
    if (y == 0) has0 = true;
    else if (y == 1) has1 = true;
    else throw ConfigError("metric: label outside {0,1}");
  }
  if (!has0 || !has1) throw ConfigError(std::string(what) + " undefined: single-class labels");
}

// Indices sorted ascending by score, stable in the original order.
std::vector<std::size_t> order_by_score(Scores scores) {
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  return idx;
}

// ROC points (FPR, TPR) from (0,0) to (1,1) with one point per distinct
// score, cumulated from the highest score down; masses may be weighted.
std::vector<std::pair<double, double>> roc_points(Scores scores, Labels labels, Weights w) {
  auto idx = order_by_score(scores);
  double w_bad = 0, w_good = 0;
  for (std::size_t i = 0; i < scores.size(); ++i)
    (labels[i] == 1 ? w_bad : w_good) += w.empty() ? 1.0 : w[i];
  std::vector<std::pair<double, double>> pts;
  pts.reserve(scores.size() + 1);
  pts.emplace_back(0.0, 0.0);
  double tp = 0, fp = 0;
  std::size_t i = idx.size();
  while (i > 0) {
    std::size_t j = i;
    const double s = scores[idx[i - 1]];
    while (j > 0 && scores[idx[j - 1]] == s) {
      const std::size_t r = idx[j - 1];
      const double wt = w.empty() ? 1.0 : w[r];
      (labels[r] == 1 ? tp : fp) += wt;
      --j;
    }
    pts.emplace_back(fp / w_good, tp / w_bad);
    i = j;
  }
  return pts;
}

double auc_impl(Scores scores, Labels labels, Weights w) {
  check_aligned(scores, labels);
  if (!w.empty()) check_weights(scores, w);
  require_both_classes(labels, "AUC");
  auto idx = order_by_score(scores);
  double w_bad = 0, w_good = 0;
  for (std::size_t i = 0; i < scores.size(); ++i)
    (labels[i] == 1 ? w_bad : w_good) += w.empty() ? 1.0 : w[i];
  double num = 0, cum_good = 0;
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    double grp_good = 0, grp_bad = 0;
    const double s = scores[idx[i]];
    while (j < idx.size() && scores[idx[j]] == s) {
      const std::size_t r = idx[j];
      const double wt = w.empty() ? 1.0 : w[r];
      (labels[r] == 1 ? grp_bad : grp_good) += wt;
      ++j;
    }
    num += grp_bad * (cum_good + 0.5 * grp_good);
    cum_good += grp_good;
    i = j;
  }
  return num / (w_bad * w_good);
}

double pauc_impl(Scores scores, Labels labels, Weights w, double lo, double hi) {
  check_aligned(scores, labels);
  if (!w.empty()) check_weights(scores, w);
  require_both_classes(labels, "PAUC");
  if (!(lo >= 0.0 && lo < hi && hi <= 1.0)) throw ConfigError("pauc: invalid FNR window");
  // FNR in [lo, hi] <=> TPR in [1-hi, 1-lo]; integrate (1 - FPR) dTPR there.
  const double a = 1.0 - hi, b = 1.0 - lo;
  const auto pts = roc_points(scores, labels, w);
  double area = 0;
  for (std::size_t p = 1; p < pts.size(); ++p) {
    const double x0 = pts[p - 1].first, t0 = pts[p - 1].second;
    const double x1 = pts[p].first, t1 = pts[p].second;
    if (t1 <= a || t0 >= b || t1 == t0) continue;
    const double tl = std::max(t0, a), th = std::min(t1, b);
    const double xl = x0 + (x1 - x0) * (tl - t0) / (t1 - t0);
    const double xh = x0 + (x1 - x0) * (th - t0) / (t1 - t0);
    area += (th - tl) * (1.0 - 0.5 * (xl + xh));
  }
  return area / (b - a);
}

double brier_impl(Scores scores, Labels labels, Weights w) {
  check_aligned(scores, labels);
  if (!w.empty()) check_weights(scores, w);
  double num = 0, den = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (scores[i] < 0.0 || scores[i] > 1.0)
      throw ConfigError("brier: score outside [0,1] at row " + std::to_string(i));
    if (labels[i] != 0 && labels[i] != 1) throw ConfigError("brier: label outside {0,1}");
    const double wt = w.empty() ? 1.0 : w[i];
    const double e = scores[i] - static_cast<double>(labels[i]);
    num += wt * e * e;
    den += wt;
  }
  return num / den;
}

double abr_impl(Scores scores, Labels labels, Weights w, double lo, double hi, double step) {
  check_aligned(scores, labels);
  if (!w.empty()) check_weights(scores, w);
  require_both_classes(labels, "ABR");
  // lo == hi degenerates to the single-rate ABR used by the policy scenario.
  if (!(lo > 0.0 && lo <= hi && hi <= 1.0)) throw ConfigError("abr: invalid acceptance window");
  if (!(step > 0.0)) throw ConfigError("abr: grid step must be positive");

  const auto idx = order_by_score(scores);
  const std::size_t n = idx.size();
  std::vector<double> cum_w(n + 1, 0.0), cum_bad(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double wt = w.empty() ? 1.0 : w[idx[i]];
    cum_w[i + 1] = cum_w[i] + wt;
    cum_bad[i + 1] = cum_bad[i] + wt * static_cast<double>(labels[idx[i]]);
  }
  const double total_w = cum_w[n];

  double sum = 0;
  std::size_t n_grid = 0;
  for (double alpha = lo; alpha <= hi + 1e-12; alpha += step) {
    std::size_t m;
    if (w.empty()) {
      m = static_cast<std::size_t>(std::floor(alpha * static_cast<double>(n) + 1e-12));
    } else {
      const double target = alpha * total_w * (1.0 + 1e-12);
      m = static_cast<std::size_t>(
          std::upper_bound(cum_w.begin() + 1, cum_w.end(), target) - (cum_w.begin() + 1));
    }
    if (m == 0)
      throw ConfigError("abr: window yields zero accepted rows at alpha=" + format_double(alpha));
    sum += cum_bad[m] / cum_w[m];
    ++n_grid;
  }
  return sum / static_cast<double>(n_grid);
}

}  // namespace

void MetricSpec::validate() const {
  switch (name) {
    case MetricName::pauc:
      if (!(window_lo >= 0.0 && window_lo < window_hi && window_hi <= 1.0))
        throw ConfigError("metric: pauc window must satisfy 0 <= lo < hi <= 1");
      break;
    case MetricName::abr:
      if (!(window_lo > 0.0 && window_lo <= window_hi && window_hi <= 1.0))
        throw ConfigError("metric: abr window must satisfy 0 < lo <= hi <= 1");
      if (!(abr_step > 0.0)) throw ConfigError("metric: abr grid step must be positive");
      break;
    default:
      break;
  }
}

std::string MetricSpec::label() const {
  switch (name) {
    case MetricName::auc: return "auc";
    case MetricName::brier: return "brier";
    case MetricName::pauc: return "pauc";
    case MetricName::abr: return "abr";
  }
  return "?";
}

MetricName metric_from_string(const std::string& name) {
  if (name == "auc") return MetricName::auc;
  if (name == "brier") return MetricName::brier;
  if (name == "pauc") return MetricName::pauc;
  if (name == "abr") return MetricName::abr;
  throw ConfigError("metric: unknown name '" + name + "'");
}

Orientation metric_orientation(MetricName name) {
  return (name == MetricName::auc || name == MetricName::pauc) ? Orientation::higher_better
                                                               : Orientation::lower_better;
}

MetricValue auc(Scores scores, Labels labels) {
  return {auc_impl(scores, labels, {}), scores.size(), Orientation::higher_better};
}

MetricValue pauc(Scores scores, Labels labels, double lo, double hi) {
  return {pauc_impl(scores, labels, {}, lo, hi), scores.size(), Orientation::higher_better};
}

MetricValue brier(Scores scores, Labels labels) {
  return {brier_impl(scores, labels, {}), scores.size(), Orientation::lower_better};
}

MetricValue abr(Scores scores, Labels labels, double lo, double hi, double step) {
  return {abr_impl(scores, labels, {}, lo, hi, step), scores.size(), Orientation::lower_better};
}

MetricValue evaluate_metric(const MetricSpec& spec, Scores scores, Labels labels) {
  spec.validate();
  switch (spec.name) {
    case MetricName::auc: return auc(scores, labels);
    case MetricName::brier: return brier(scores, labels);
    case MetricName::pauc: return pauc(scores, labels, spec.window_lo, spec.window_hi);
    case MetricName::abr:
      return abr(scores, labels, spec.window_lo, spec.window_hi, spec.abr_step);
  }
  throw ConfigError("metric: unknown metric");
}

MetricValue weighted_auc(Scores scores, Labels labels, Weights w) {
  return {auc_impl(scores, labels, w), scores.size(), Orientation::higher_better};
}

MetricValue weighted_pauc(Scores scores, Labels labels, Weights w, double lo, double hi) {
  return {pauc_impl(scores, labels, w, lo, hi), scores.size(), Orientation::higher_better};
}

MetricValue weighted_brier(Scores scores, Labels labels, Weights w) {
  check_weights(scores, w);
  return {brier_impl(scores, labels, w), scores.size(), Orientation::lower_better};
}

MetricValue weighted_abr(Scores scores, Labels labels, Weights w, double lo, double hi,
                         double step) {
  return {abr_impl(scores, labels, w, lo, hi, step), scores.size(), Orientation::lower_better};
}

MetricValue evaluate_weighted_metric(const MetricSpec& spec, Scores scores, Labels labels,
                                     Weights w) {
  spec.validate();
  switch (spec.name) {
    case MetricName::auc: return weighted_auc(scores, labels, w);
    case MetricName::brier: return weighted_brier(scores, labels, w);
    case MetricName::pauc: return weighted_pauc(scores, labels, w, spec.window_lo, spec.window_hi);
    case MetricName::abr:
      return weighted_abr(scores, labels, w, spec.window_lo, spec.window_hi, spec.abr_step);
  }
  throw ConfigError("metric: unknown metric");
}

double rmse_of_estimates(std::span<const double> estimates, std::span<const double> truth) {
  if (estimates.size() != truth.size()) throw ConfigError("rmse: length mismatch");
  if (estimates.empty()) throw ConfigError("rmse: empty input");
  double s = 0;
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    const double d = estimates[i] - truth[i];
    s += d * d;
  }
  return std::sqrt(s / static_cast<double>(estimates.size()));
}

}  // namespace biaslab
