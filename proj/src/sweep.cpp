// Sensitivity sweeps over the acceptance-loop simulation: training axes
// rerun the loop per grid value, evaluation axes rerun the Experiment-I
// strategies on modified validation data or priors.

#include <algorithm>
#include <cmath>

#include "biaslab/common.hpp"
#include "biaslab/experiments.hpp"
#include "biaslab/loop.hpp"
#include "biaslab/mmd.hpp"
#include "biaslab/parallel.hpp"

namespace biaslab {

namespace {

LoopConfig apply_axis(const LoopConfig& base, SweepAxis axis, double value) {
  LoopConfig cfg = base;
  switch (axis) {
    case SweepAxis::acceptance_rate:
      cfg.acceptance_mode = AcceptanceMode::rate;
      cfg.acceptance_value = value;
      break;
    case SweepAxis::covariance_range:
      cfg.mixture = with_cov_range(base.mixture, value, base.seed.child(0xC0).child(
                                                            static_cast<std::uint64_t>(
                                                                std::llround(value * 1e6))));
      break;
    case SweepAxis::bad_rate:
      cfg.mixture.bad_rate = value;
      break;
    case SweepAxis::overwrite_rate:
      if (cfg.mnar.hidden_dims.empty())
        cfg.mnar.hidden_dims = {cfg.mixture.dim - 1};  // last feature hidden
      cfg.mnar.overwrite_rate = value;
      break;
    case SweepAxis::validation_mix:
    case SweepAxis::prior_corruption:
      break;  // evaluation axes leave the loop untouched
  }
  return cfg;
}

// Validation with the reject share scaled by `mix` (1 = population share).
Split remix_validation(const Split& split, double mix, RngSeed seed) {
  auto [val_accepts, val_rejects] = split_validation(split.validation());
  const auto keep = static_cast<std::size_t>(
      std::floor(mix * static_cast<double>(val_rejects.rows()) + 1e-12));
  Rng rng(seed);
  auto keep_rows = rng.sample_without_replacement(val_rejects.rows(), keep);
  std::sort(keep_rows.begin(), keep_rows.end());

  // Rebuild a split whose validation carries only the kept rejects; sealed
  // truth is dropped for the remixed view (strategies do not read it).
  Dataset validation = Dataset::concat(val_accepts, val_rejects.subset(keep_rows));
  return Split::from_parts(split.train_accepts(), split.rejects(), std::move(validation),
                           split.holdout());
}

}  // namespace

std::vector<SweepCell> sensitivity_sweep(SweepAxis axis, const std::vector<double>& grid,
                                         const LoopConfig& base, std::size_t trials,
                                         const SweepOptions& opts) {
  if (grid.empty()) throw ConfigError("sweep: empty grid");
  if (trials < 1) throw ConfigError("sweep: trials must be >= 1");

  std::vector<MetricSpec> metrics = opts.metrics;
  if (metrics.empty()) metrics = {MetricSpec::abr()};
  const MetricSpec lead = metrics.front();

  struct Task {
    std::size_t grid_idx;
    std::size_t trial;
  };
  std::vector<Task> tasks;
  for (std::size_t g = 0; g < grid.size(); ++g)
    for (std::size_t t = 0; t < trials; ++t) tasks.push_back({g, t});

  std::vector<std::vector<SweepCell>> per_task(tasks.size());
  const std::ptrdiff_t n_tasks = static_cast<std::ptrdiff_t>(tasks.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(par::thread_count_for(tasks.size()))
#endif
  for (std::ptrdiff_t ti = 0; ti < n_tasks; ++ti) {
    const auto [g, t] = tasks[ti];
    const double value = grid[g];
    std::vector<SweepCell>& cells = per_task[ti];
    auto emit = [&](const std::string& method, const std::string& metric, double v) {
      cells.push_back({value, t, method, metric, v, false});
    };
    try {
      LoopConfig cfg = apply_axis(base, axis, value);
      cfg.seed = base.seed.child(0x57).child(g * 7919 + t);
      const LoopResult lr = run_loop(cfg);
      const Dataset& holdout = lr.split.holdout();

      const auto fa_scores = predict_proba(lr.decision_model, holdout);
      const auto fo_scores = predict_proba(lr.oracle_model, holdout);
      emit("biased", lead.label(), evaluate_metric(lead, fa_scores, holdout.labels).value);
      emit("oracle", lead.label(), evaluate_metric(lead, fo_scores, holdout.labels).value);

      // Experiment-I protocol: the evaluated scorecard is trained on the
      // train accepts only, so the validation accepts stay out of sample.
      Scorecard f_eval;
      {
        FitOptions fe = cfg.scorecard_opts;
        fe.seed = cfg.seed.child(0xF);
        fe.sample_weights.clear();
        Dataset train = lr.split.train_accepts();
        train.accepted.clear();
        f_eval = fit_gbt(train, fe);
      }

      if (opts.with_basl && axis != SweepAxis::validation_mix &&
          axis != SweepAxis::prior_corruption) {
        CorrectionMethod m = opts.basl_method;
        m.kind = CorrectionKind::basl;
        if (!m.prior_scorecard) m.prior_scorecard = lr.decision_model;
        FitOptions fo = cfg.scorecard_opts;
        fo.seed = cfg.seed.child(0xB);
        const Scorecard corrected = train_corrected(m, lr.split, fo);
        emit("basl", lead.label(),
             evaluate_metric(lead, predict_proba(corrected, holdout), holdout.labels).value);
      }

      // Evaluation-strategy estimates of the biased model's holdout metric.
      Split eval_split = lr.split;
      PriorSettings prior_cfg;
      if (axis == SweepAxis::validation_mix)
        eval_split = remix_validation(lr.split, value, cfg.seed.child(0xD));
      if (axis == SweepAxis::prior_corruption) {
        prior_cfg.flip_rate = value;
        prior_cfg.shift = opts.prior_shift;
      }
      const auto rows = evaluate_strategies(
          eval_split, f_eval, lr.decision_model,
          {"accepts_only", "reweighted", "bayesian"}, {lead}, prior_cfg, opts.bayes, 10,
          cfg.scorecard_opts, t, cfg.seed.child(0xE));
      for (const auto& r : rows) {
        if (r.failed) continue;
        emit(r.group, lead.label() + "_estimate", r.value);
      }
      if (!rows.empty()) emit("truth", lead.label(), rows.front().truth);

      if (axis == SweepAxis::validation_mix) {
        auto [va, vr] = split_validation(eval_split.validation());
        emit("validation", "mmd_vs_holdout", mmd(Dataset::concat(va, vr), holdout));
      }
    } catch (const std::exception& e) {
      warn("sweep cell (value=" + format_double(value) + ", trial=" + std::to_string(t) +
           ") failed: " + e.what());
      cells.push_back({value, t, "cell", "error", 0.0, true});
    }
  }

  std::vector<SweepCell> out;
  for (auto& v : per_task) out.insert(out.end(), v.begin(), v.end());
  return out;
}

}  // namespace biaslab
