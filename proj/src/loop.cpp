#include "biaslab/loop.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "biaslab/common.hpp"

namespace biaslab {

namespace {

// Substream tags under cfg.seed.
constexpr std::uint64_t kStreamHoldout = 1;
constexpr std::uint64_t kStreamBatch = 2;
constexpr std::uint64_t kStreamDecide = 3;
constexpr std::uint64_t kStreamMnar = 4;
constexpr std::uint64_t kStreamFit = 5;
constexpr std::uint64_t kStreamSplit = 6;
constexpr std::uint64_t kStreamCorrection = 7;

std::vector<std::int8_t> random_acceptance(std::size_t n, double rate, Rng& rng) {
  std::vector<std::int8_t> out(n, 0);
  const auto m = static_cast<std::size_t>(std::floor(rate * static_cast<double>(n) + 1e-12));
  for (std::size_t r : rng.sample_without_replacement(n, std::min(m, n))) out[r] = 1;
  return out;
}

std::vector<std::int8_t> rate_acceptance(std::span<const double> scores, double rate) {
  const std::size_t n = scores.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  const auto m = static_cast<std::size_t>(std::floor(rate * static_cast<double>(n) + 1e-12));
  std::vector<std::int8_t> out(n, 0);
  for (std::size_t i = 0; i < std::min(m, n); ++i) out[idx[i]] = 1;
  return out;
}

// Stratified two-way split of a labeled dataset: (part with fraction f, rest).
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> stratified_two_way(
    const Dataset& d, double f, Rng rng) {
  std::vector<std::size_t> bad, good;
  for (std::size_t i = 0; i < d.rows(); ++i)
    (d.has_label(i) && d.labels[i] == 1 ? bad : good).push_back(i);
  rng.child(1).shuffle(bad);
  rng.child(2).shuffle(good);
  std::vector<std::size_t> first, rest;
  auto deal = [&](std::vector<std::size_t>& pool) {
    const auto c = static_cast<std::size_t>(std::floor(f * static_cast<double>(pool.size()) + 1e-12));
    for (std::size_t i = 0; i < pool.size(); ++i) (i < c ? first : rest).push_back(pool[i]);
  };
  deal(bad);
  deal(good);
  std::sort(first.begin(), first.end());
  std::sort(rest.begin(), rest.end());
  return {first, rest};
}

}  // namespace

void LoopConfig::validate() const {
  mixture.validate();
  mnar.validate(mixture.dim);
  if (iterations < 1) throw ConfigError("loop: iterations must be >= 1");
  if (batch_size < 1) throw ConfigError("loop: batch_size must be >= 1");
  if (warmup < 1) throw ConfigError("loop: warmup must be >= 1");
  if (retrain_every < 1) throw ConfigError("loop: retrain_every must be >= 1");
  if (holdout_size < 1) throw ConfigError("loop: holdout_size must be >= 1");
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0))
    throw ConfigError("loop: validation_fraction must lie in (0,1)");
  if (acceptance_mode == AcceptanceMode::rate || acceptance_mode == AcceptanceMode::random) {
    if (!(acceptance_value > 0.0 && acceptance_value < 1.0))
      throw ConfigError("loop: acceptance rate must lie in (0,1)");
  } else if (!(acceptance_value > 0.0 && acceptance_value < 1.0)) {
    throw ConfigError("loop: probability threshold must lie in (0,1)");
  }
  scorecard_opts.validate(0);
}

LoopResult run_loop(const LoopConfig& cfg, const CorrectionMethod* correction) {
  cfg.validate();
  const Rng root(cfg.seed);
  const std::size_t k = cfg.mixture.dim;
  const bool mnar_active = cfg.mnar.overwrite_rate > 0 && !cfg.mnar.hidden_dims.empty();

  Dataset holdout_full = sample_applicants(cfg.mixture, cfg.holdout_size, cfg.seed.child(kStreamHoldout));
  holdout_full.unbiased_holdout = true;
  Dataset holdout_visible = mask_features(holdout_full, cfg.mnar.hidden_dims);

  Dataset accepts_full;   // visible features, revealed labels
  Dataset rejects_full;   // visible features, ground-truth labels (sealed later)
  accepts_full.n_cols = holdout_visible.cols();
  rejects_full.n_cols = holdout_visible.cols();
  accepts_full.unbiased_holdout = true;  // transient truth carriers
  rejects_full.unbiased_holdout = true;

  Scorecard f_a = constant_scorecard(0.5, holdout_visible.cols());
  Scorecard f_o = f_a;
  Scorecard f_c;
  bool have_model = false, have_fc = false;

  const double nan = std::numeric_limits<double>::quiet_NaN();
  double abr_fa = nan, auc_fa = nan, abr_fo = nan, auc_fo = nan, abr_fc = nan, auc_fc = nan;
  const MetricSpec abr_spec = MetricSpec::abr();

  auto holdout_metrics = [&](const Scorecard& m, double& abr_out, double& auc_out) {
    const auto scores = predict_proba(m, holdout_visible);
    abr_out = evaluate_metric(abr_spec, scores, holdout_full.labels).value;
    try {
      auc_out = evaluate_metric(MetricSpec::auc(), scores, holdout_full.labels).value;
    } catch (const ConfigError&) {
      auc_out = nan;
    }
  };

  auto fit_or_constant = [&](const Dataset& train, RngSeed seed) -> Scorecard {
    bool has0 = false, has1 = false;
    for (std::int8_t y : train.labels) (y == 1 ? has1 : has0) = true;
    if (!has0 || !has1) {
      warn("loop: single-class training data; using constant scorecard");
      return constant_scorecard(train.bad_rate(), train.cols());
    }
    FitOptions o = cfg.scorecard_opts;
    o.seed = seed;
    o.sample_weights.clear();
    Dataset t = train;
    t.accepted.clear();
    t.unbiased_holdout = false;
    return fit_gbt(t, o);
  };

  auto assemble_split = [&]() -> Split {
    Rng srng = root.child(kStreamSplit);
    auto [val_acc_rows, train_acc_rows] =
        stratified_two_way(accepts_full, cfg.validation_fraction, srng.child(1));
    Dataset train_accepts = accepts_full.subset(train_acc_rows);
    train_accepts.unbiased_holdout = false;
    Dataset val_accepts = accepts_full.subset(val_acc_rows);

    std::vector<std::size_t> rej_idx(rejects_full.rows());
    std::iota(rej_idx.begin(), rej_idx.end(), std::size_t{0});
    Rng rr = srng.child(2);
    rr.shuffle(rej_idx);
    const auto n_val_rej = static_cast<std::size_t>(
        std::floor(cfg.validation_fraction * static_cast<double>(rej_idx.size()) + 1e-12));
    std::vector<std::size_t> val_rej_rows(rej_idx.begin(), rej_idx.begin() + n_val_rej);
    std::vector<std::size_t> pool_rej_rows(rej_idx.begin() + n_val_rej, rej_idx.end());
    std::sort(val_rej_rows.begin(), val_rej_rows.end());
    std::sort(pool_rej_rows.begin(), pool_rej_rows.end());

    Dataset validation_full = Dataset::concat(val_accepts, rejects_full.subset(val_rej_rows));
    return Split::from_parts(std::move(train_accepts), rejects_full.subset(pool_rej_rows),
                             std::move(validation_full), holdout_visible.with_labels(holdout_full.labels));
  };

  LoopResult result;
  std::size_t consecutive_empty = 0;

  for (std::size_t j = 1; j <= cfg.iterations; ++j) {
    Dataset batch_full = sample_applicants(cfg.mixture, cfg.batch_size, cfg.seed.child(kStreamBatch).child(j));
    const std::int64_t id_offset =
        static_cast<std::int64_t>(cfg.holdout_size + (j - 1) * cfg.batch_size);
    for (auto& id : batch_full.ids) id += id_offset;
    Dataset batch_visible = mask_features(batch_full, cfg.mnar.hidden_dims);

    std::vector<std::int8_t> decisions;
    Rng drng = root.child(kStreamDecide).child(j);
    if (cfg.acceptance_mode == AcceptanceMode::random || j <= cfg.warmup || !have_model) {
      const double rate =
          cfg.acceptance_mode == AcceptanceMode::threshold ? 0.5 : cfg.acceptance_value;
      decisions = random_acceptance(batch_visible.rows(), rate, drng);
    } else {
      const auto scores = predict_proba(f_a, batch_visible);
      decisions = cfg.acceptance_mode == AcceptanceMode::rate
                      ? rate_acceptance(scores, cfg.acceptance_value)
                      : [&] {
                          std::vector<std::int8_t> d(scores.size());
                          for (std::size_t i = 0; i < scores.size(); ++i)
                            d[i] = scores[i] <= cfg.acceptance_value ? 1 : 0;
                          return d;
                        }();
    }
    if (mnar_active)
      decisions = apply_mnar(decisions, batch_full, cfg.mnar, cfg.seed.child(kStreamMnar).child(j));

    std::vector<std::size_t> acc_rows, rej_rows;
    for (std::size_t i = 0; i < decisions.size(); ++i)
      (decisions[i] == 1 ? acc_rows : rej_rows).push_back(i);

    if (acc_rows.empty()) {
      if (++consecutive_empty >= 10)
        throw std::runtime_error("loop: 10 consecutive batches with zero accepts at iteration " +
                                 std::to_string(j));
    } else {
      consecutive_empty = 0;
    }

    Dataset acc_batch = batch_visible.subset(acc_rows);
    acc_batch.accepted.assign(acc_batch.rows(), 1);
    Dataset rej_batch = batch_visible.subset(rej_rows);
    rej_batch.accepted.assign(rej_batch.rows(), 0);
    accepts_full = Dataset::concat(accepts_full, acc_batch);
    rejects_full = Dataset::concat(rejects_full, rej_batch);

    double batch_bad_rate = nan;
    if (!acc_rows.empty()) batch_bad_rate = acc_batch.bad_rate();

    const bool refit = j >= cfg.warmup && (j == cfg.warmup || (j - cfg.warmup) % cfg.retrain_every == 0);
    if (refit && accepts_full.rows() > 0) {
      f_a = fit_or_constant(accepts_full, cfg.seed.child(kStreamFit).child(2 * j));
      f_o = fit_or_constant(Dataset::concat(accepts_full, rejects_full),
                            cfg.seed.child(kStreamFit).child(2 * j + 1));
      have_model = true;
      holdout_metrics(f_a, abr_fa, auc_fa);
      holdout_metrics(f_o, abr_fo, auc_fo);
      if (correction) {
        CorrectionMethod method = *correction;
        if (method.kind == CorrectionKind::basl && !method.prior_scorecard)
          method.prior_scorecard = f_a;
        FitOptions o = cfg.scorecard_opts;
        o.seed = cfg.seed.child(kStreamCorrection).child(j);
        try {
          f_c = train_corrected(method, assemble_split(), o);
          have_fc = true;
          holdout_metrics(f_c, abr_fc, auc_fc);
        } catch (const std::exception& e) {
          warn("loop: correction failed at iteration " + std::to_string(j) + ": " + e.what());
        }
      }
    }

    result.trace.records.push_back({j, acc_rows.size(), batch_bad_rate, accepts_full.rows(),
                                    abr_fa, auc_fa, abr_fo, auc_fo, have_fc ? abr_fc : nan,
                                    have_fc ? auc_fc : nan});
  }

  if (accepts_full.rows() == 0) throw std::runtime_error("loop: no accepts accumulated");
  result.split = assemble_split();
  result.decision_model = have_model ? f_a : constant_scorecard(0.5, holdout_visible.cols());
  result.oracle_model = have_model ? f_o : result.decision_model;
  return result;
}

void write_trace_csv(const LoopTrace& trace, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ConfigError("write_trace_csv: cannot open '" + path + "'");
  out << "iteration,n_accepted,accept_bad_rate,cum_accepts,abr_fa,auc_fa,abr_fo,auc_fo,abr_fc,"
         "auc_fc\n";
  for (const auto& r : trace.records)
    out << r.iteration << ',' << r.n_accepted << ',' << format_double(r.accept_bad_rate) << ','
        << r.cum_accepts << ',' << format_double(r.abr_fa) << ',' << format_double(r.auc_fa)
        << ',' << format_double(r.abr_fo) << ',' << format_double(r.auc_fo) << ','
        << format_double(r.abr_fc) << ',' << format_double(r.auc_fc) << '\n';
}

SweepAxis sweep_axis_from_string(const std::string& name) {
  if (name == "acceptance_rate") return SweepAxis::acceptance_rate;
  if (name == "covariance_range") return SweepAxis::covariance_range;
  if (name == "bad_rate") return SweepAxis::bad_rate;
  if (name == "overwrite_rate") return SweepAxis::overwrite_rate;
  if (name == "validation_mix") return SweepAxis::validation_mix;
  if (name == "prior_corruption") return SweepAxis::prior_corruption;
  throw ConfigError("sweep: unknown axis '" + name + "'");
}

std::string sweep_axis_name(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::acceptance_rate: return "acceptance_rate";
    case SweepAxis::covariance_range: return "covariance_range";
    case SweepAxis::bad_rate: return "bad_rate";
    case SweepAxis::overwrite_rate: return "overwrite_rate";
    case SweepAxis::validation_mix: return "validation_mix";
    case SweepAxis::prior_corruption: return "prior_corruption";
  }
  return "?";
}

void write_sweep_csv(const std::vector<SweepCell>& cells, SweepAxis axis,
                     const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ConfigError("write_sweep_csv: cannot open '" + path + "'");
  out << "axis,value,trial,method,metric,result,failed\n";
  const std::string axis_name = sweep_axis_name(axis);
  for (const auto& c : cells)
    out << axis_name << ',' << format_double(c.axis_value) << ',' << c.trial << ',' << c.method
        << ',' << c.metric << ',' << format_double(c.value) << ',' << (c.failed ? 1 : 0) << '\n';
}

}  // namespace biaslab
