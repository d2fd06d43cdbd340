#include "biaslab/basl.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "biaslab/common.hpp"
#include "biaslab/split.hpp"

namespace biaslab {

namespace {

// Substream tags under cfg.seed.
constexpr std::uint64_t kStreamFilter = 1;
constexpr std::uint64_t kStreamLabeling = 2;
constexpr std::uint64_t kStreamStrongFit = 3;
constexpr std::uint64_t kStreamBayes = 4;

bool is_improvement(double value, double best, Orientation o) {
  return o == Orientation::lower_better ? value < best : value > best;
}

}  // namespace

void BaslConfig::validate() const {
  if (beta_upper < 0 || beta_lower < 0 || beta_upper >= 1 || beta_lower >= 1 ||
      beta_upper + beta_lower >= 1.0)
    throw ConfigError("basl: require beta_upper + beta_lower < 1 with both in [0,1)");
  if (!(rho > 0.0 && rho <= 1.0)) throw ConfigError("basl: rho must lie in (0,1]");
  if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("basl: gamma must lie in (0,1)");
  if (theta < 1.0) throw ConfigError("basl: theta must be >= 1");
  if (gamma * (1.0 + theta) >= 1.0) throw ConfigError("basl: require gamma*(1+theta) < 1");
  if (patience < 1) throw ConfigError("basl: patience must be >= 1");
  stop_metric.validate();
  bayes.validate();
  if (iforest_trees < 1 || iforest_subsample < 2)
    throw ConfigError("basl: isolation forest needs n_trees >= 1 and subsample >= 2");
}

std::pair<Dataset, Dataset> filter_rejects(const Dataset& accepts, const Dataset& rejects,
                                           double beta_upper, double beta_lower,
                                           std::size_t n_trees, std::size_t subsample,
                                           RngSeed seed) {
  if (accepts.rows() < 2 || rejects.rows() == 0)
    throw ConfigError("filter_rejects: accepts and rejects must be nonempty");
  if (beta_upper < 0 || beta_lower < 0 || beta_upper + beta_lower >= 1.0)
    throw ConfigError("filter_rejects: invalid beta percentiles");

  const std::size_t m = rejects.rows();
  const auto n_top = static_cast<std::size_t>(std::floor(beta_upper * static_cast<double>(m) + 1e-12));
  const auto n_bot = static_cast<std::size_t>(std::floor(beta_lower * static_cast<double>(m) + 1e-12));
  if (n_top == 0 && n_bot == 0) return {rejects, Dataset{}};

  const auto forest =
      fit_isolation_forest(accepts, n_trees, std::min(subsample, accepts.rows()), seed);
  const auto scores = novelty_scores(forest, rejects);

  std::vector<std::size_t> by_score(m);
  std::iota(by_score.begin(), by_score.end(), std::size_t{0});
  std::stable_sort(by_score.begin(), by_score.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  std::vector<char> drop(m, 0);
  for (std::size_t i = 0; i < n_top; ++i) drop[by_score[m - 1 - i]] = 1;  // most novel
  std::size_t taken = 0;
  for (std::size_t i = 0; i < m && taken < n_bot; ++i) {                  // least novel
    const std::size_t r = by_score[i];
    if (!drop[r]) {
      drop[r] = 1;
      ++taken;
    }
  }

  std::vector<std::size_t> kept_rows, dropped_rows;
  for (std::size_t i = 0; i < m; ++i) (drop[i] ? dropped_rows : kept_rows).push_back(i);
  if (kept_rows.empty()) throw ConfigError("filter_rejects: every reject was filtered out");
  return {rejects.subset(kept_rows), rejects.subset(dropped_rows)};
}

LabelingOutcome labeling_step(BaslState& state, const Scorecard& weak, const BaslConfig& cfg) {
  LabelingOutcome out;
  const std::size_t m = state.remaining_rejects.rows();
  if (m == 0) return out;

  ++state.labeling_iteration;
  Rng rng = Rng(cfg.seed).child(kStreamLabeling).child(state.labeling_iteration);

  std::size_t n_sample = static_cast<std::size_t>(std::floor(cfg.rho * static_cast<double>(m) + 1e-12));
  n_sample = std::max<std::size_t>(1, std::min(n_sample, m));
  auto sampled = rng.sample_without_replacement(m, n_sample);
  std::sort(sampled.begin(), sampled.end());  // stable row order within the sample

  const Dataset batch = state.remaining_rejects.subset(sampled);
  const auto scores = predict_proba(weak, batch);

  std::vector<std::size_t> good_sel, bad_sel;  // indices into `sampled`
  if (!state.thresholds.fixed) {
    // Iteration one: percentile counts on the sampled subset fix the
    // absolute score cutoffs for all later iterations.
    const std::size_t s = n_sample;
    const auto n_good = static_cast<std::size_t>(std::floor(cfg.gamma * static_cast<double>(s) + 1e-12));
    const auto n_bad =
        static_cast<std::size_t>(std::floor(cfg.gamma * cfg.theta * static_cast<double>(s) + 1e-12));
    std::vector<std::size_t> order(s);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    for (std::size_t i = 0; i < n_good; ++i) good_sel.push_back(order[i]);
    for (std::size_t i = 0; i < n_bad; ++i) bad_sel.push_back(order[s - 1 - i]);
    state.thresholds.fixed = true;
    state.thresholds.good_max_score =
        n_good > 0 ? scores[order[n_good - 1]] : -std::numeric_limits<double>::infinity();
    state.thresholds.bad_min_score =
        n_bad > 0 ? scores[order[s - n_bad]] : std::numeric_limits<double>::infinity();
  } else {
    for (std::size_t i = 0; i < n_sample; ++i) {
      if (scores[i] >= state.thresholds.bad_min_score)
        bad_sel.push_back(i);
      else if (scores[i] <= state.thresholds.good_max_score)
        good_sel.push_back(i);
    }
  }

  out.n_good = good_sel.size();
  out.n_bad = bad_sel.size();
  if (out.total() == 0) return out;

  std::vector<std::size_t> selected_batch_rows;
  std::vector<std::int8_t> pseudo;
  for (std::size_t i : good_sel) {
    selected_batch_rows.push_back(i);
    pseudo.push_back(0);
  }
  for (std::size_t i : bad_sel) {
    selected_batch_rows.push_back(i);
    pseudo.push_back(1);
  }

  Dataset labeled = batch.subset(selected_batch_rows).with_labels(std::move(pseudo));
  labeled.accepted.clear();
  state.augmented_train = Dataset::concat(state.augmented_train, labeled);
  state.origin.insert(state.origin.end(), selected_batch_rows.size(), 1);

  std::vector<char> remove(m, 0);
  for (std::size_t i : selected_batch_rows) remove[sampled[i]] = 1;
  std::vector<std::size_t> keep_rows;
  for (std::size_t i = 0; i < m; ++i)
    if (!remove[i]) keep_rows.push_back(i);
  state.remaining_rejects = state.remaining_rejects.subset(keep_rows);
  return out;
}

BaslResult basl_fit(const Dataset& accepts, const Dataset& rejects, const Dataset& validation,
                    const Prior& prior, const BaslConfig& cfg) {
  cfg.validate();
  if (!accepts.fully_labeled() || accepts.rows() == 0)
    throw ConfigError("basl_fit: accepts must be labeled");
  auto [val_accepts, val_rejects] = split_validation(validation);
  if (val_accepts.rows() == 0 || !val_accepts.fully_labeled())
    throw ConfigError("basl_fit: validation lacks labeled accepts");
  if (val_rejects.rows() > 0 && prior.probs.size() != val_rejects.rows())
    throw ConfigError("basl_fit: prior misaligned with validation rejects");

  BaslResult result;
  BaslState& state = result.state;
  state.augmented_train = accepts;
  state.augmented_train.accepted.clear();
  state.augmented_train.unbiased_holdout = false;
  state.origin.assign(accepts.rows(), 0);

  if (cfg.j_max > 0 && rejects.rows() > 0 && (cfg.beta_upper > 0 || cfg.beta_lower > 0)) {
    auto [kept, dropped] = filter_rejects(accepts, rejects, cfg.beta_upper, cfg.beta_lower,
                                          cfg.iforest_trees, cfg.iforest_subsample,
                                          cfg.seed.child(kStreamFilter));
    state.remaining_rejects = std::move(kept);
  } else {
    state.remaining_rejects = rejects;
  }
  state.remaining_rejects.labels.clear();
  state.remaining_rejects.accepted.clear();

  const Orientation orient = metric_orientation(cfg.stop_metric.name);
  auto evaluate_strong = [&](const Scorecard& strong, std::size_t iter) {
    BayesConfig bc = cfg.bayes;
    bc.seed = cfg.seed.child(kStreamBayes).child(iter);
    return bayesian_metric(strong, val_accepts, val_rejects, prior, cfg.stop_metric, bc).value;
  };
  auto fit_strong = [&](std::size_t iter) {
    FitOptions so = cfg.strong_opts;
    so.seed = cfg.seed.child(kStreamStrongFit).child(iter);
    so.sample_weights.clear();
    return fit_gbt(state.augmented_train, so);
  };

  Scorecard strong = fit_strong(0);
  double value = evaluate_strong(strong, 0);
  state.history.push_back({0, 0, 0, value, true});
  result.model = strong;
  result.best_iteration = 0;
  double best_value = value;

  std::size_t strikes = 0;
  for (std::size_t iter = 1; iter <= cfg.j_max; ++iter) {
    if (state.remaining_rejects.rows() == 0) break;
    FitOptions wo = cfg.weak_opts;
    wo.sample_weights.clear();
    const Scorecard weak = fit_l1_logistic(state.augmented_train, wo);
    const LabelingOutcome labeled = labeling_step(state, weak, cfg);
    if (labeled.total() == 0) break;

    strong = fit_strong(iter);
    value = evaluate_strong(strong, iter);
    const bool improved = is_improvement(value, best_value, orient);
    state.history.push_back({iter, labeled.n_good, labeled.n_bad, value, improved});
    if (improved) {
      best_value = value;
      result.model = strong;
      result.best_iteration = iter;
      strikes = 0;
    } else if (++strikes >= cfg.patience) {
      break;
    }
  }
  return result;
}

void write_basl_history_csv(const std::vector<BaslIterationRecord>& history,
                            const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ConfigError("write_basl_history_csv: cannot open '" + path + "'");
  out << "iteration,n_good,n_bad,stop_metric,improved\n";
  for (const auto& h : history)
    out << h.iteration << ',' << h.n_good << ',' << h.n_bad << ',' << format_double(h.stop_value)
        << ',' << (h.improved ? 1 : 0) << '\n';
}

}  // namespace biaslab
