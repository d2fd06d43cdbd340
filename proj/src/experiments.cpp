#include "biaslab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "biaslab/common.hpp"
#include "biaslab/oracle.hpp"
#include "biaslab/parallel.hpp"
#include "biaslab/svg.hpp"

namespace biaslab {

namespace {

constexpr std::uint64_t kStreamTrial = 0xE1;
constexpr std::uint64_t kStreamFit = 0xF1;
constexpr std::uint64_t kStreamEval = 0xE2;
constexpr std::uint64_t kStreamImpact = 0x1A;

RngSeed run_root(const RunConfig& cfg) { return RngSeed{cfg.seed, 0}; }

LoopConfig trial_loop_config(const RunConfig& cfg, std::size_t trial) {
  LoopConfig lc = cfg.loop;
  lc.seed = run_root(cfg).child(kStreamTrial).child(trial);
  return lc;
}

Scorecard fit_eval_model(const Split& split, const RunConfig& cfg, std::size_t trial) {
  FitOptions o = cfg.loop.scorecard_opts;
  o.seed = run_root(cfg).child(kStreamFit).child(trial);
  o.sample_weights.clear();
  Dataset train = split.train_accepts();
  train.accepted.clear();
  return fit_gbt(train, o);
}

// True labels of the validation rejects, aligned with split_validation's
// reject ordering (report-layer path).
std::vector<std::int8_t> validation_reject_truth(const Split& split) {
  const auto key = oracle_capability();
  const auto& truth = split.sealed_validation_labels(key);
  const Dataset& validation = split.validation();
  std::vector<std::int8_t> out;
  for (std::size_t i = 0; i < validation.rows(); ++i)
    if (validation.accepted[i] == 0) out.push_back(truth[i]);
  return out;
}

std::map<std::string, Orientation> orientation_map(const std::vector<MetricSpec>& metrics) {
  std::map<std::string, Orientation> out;
  for (const auto& m : metrics) out[m.label()] = metric_orientation(m.name);
  return out;
}

// Runs fn(trial) for every trial in parallel, flattening results in trial
// order so the report is independent of the thread count.
template <class Fn>
std::vector<ReportRow> map_trials(std::size_t trials, Fn&& fn) {
  std::vector<std::vector<ReportRow>> per_trial(trials);
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(trials);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(par::thread_count_for(trials))
#endif
  for (std::ptrdiff_t t = 0; t < n; ++t) per_trial[t] = fn(static_cast<std::size_t>(t));
  std::vector<ReportRow> rows;
  for (auto& v : per_trial) rows.insert(rows.end(), v.begin(), v.end());
  return rows;
}

void chart_aggregate_by_group(const RunReport& report, const std::string& metric,
                              const std::string& title, const std::string& path);

}  // namespace

std::vector<ReportRow> evaluate_strategies(const Split& split, const Scorecard& f,
                                           const Scorecard& decision_model,
                                           const std::vector<std::string>& strategies,
                                           const std::vector<MetricSpec>& metrics,
                                           const PriorSettings& prior_cfg,
                                           const BayesConfig& bayes, std::size_t weight_bands,
                                           const FitOptions& weak_opts, std::size_t trial,
                                           RngSeed seed) {
  auto [val_accepts, val_rejects] = split_validation(split.validation());
  const Dataset& holdout = split.holdout();
  const auto holdout_scores = predict_proba(f, holdout);
  const auto val_scores = predict_proba(f, val_accepts);

  std::vector<double> weights;
  if (std::find(strategies.begin(), strategies.end(), "reweighted") != strategies.end())
    weights = banded_weights(val_accepts, val_rejects, weight_bands, weak_opts);

  Prior prior;
  if (std::find(strategies.begin(), strategies.end(), "bayesian") != strategies.end() &&
      val_rejects.rows() > 0) {
    if (prior_cfg.source == "previous_scorecard") {
      prior = build_prior(val_rejects, decision_model);
    } else if (prior_cfg.source == "constant") {
      prior = build_prior_from_scores(
          val_rejects, std::vector<double>(val_rejects.rows(), prior_cfg.constant),
          Prior::Source::constant);
    } else if (prior_cfg.source == "oracle") {
      prior = make_oracle_prior(val_rejects, validation_reject_truth(split));
    } else {
      throw ConfigError("evaluate_strategies: unknown prior source '" + prior_cfg.source + "'");
    }
    if (prior_cfg.flip_rate > 0 || prior_cfg.shift != 0)
      prior = corrupt_prior(prior, prior_cfg.flip_rate, prior_cfg.shift, seed.child(7));
  }

  std::vector<ReportRow> rows;
  for (const auto& metric : metrics) {
    const double truth = evaluate_metric(metric, holdout_scores, holdout.labels).value;
    for (const auto& strategy : strategies) {
      ReportRow r;
      r.trial = trial;
      r.group = strategy;
      r.metric = metric.label();
      r.truth = truth;
      try {
        if (strategy == "accepts_only") {
          r.value = evaluate_metric(metric, val_scores, val_accepts.labels).value;
        } else if (strategy == "reweighted") {
          r.value = evaluate_weighted_metric(metric, val_scores, val_accepts.labels, weights).value;
        } else if (strategy == "bayesian") {
          BayesConfig bc = bayes;
          bc.seed = seed.child(fnv1a(metric.label()));
          r.value = bayesian_metric(f, val_accepts, val_rejects, prior, metric, bc).value;
        } else {
          throw ConfigError("evaluate_strategies: unknown strategy '" + strategy + "'");
        }
      } catch (const std::exception& e) {
        warn("strategy " + strategy + " failed on trial " + std::to_string(trial) + ": " +
             e.what());
        r.failed = true;
      }
      rows.push_back(std::move(r));
    }
  }
  return rows;
}

RunReport experiment_evaluation(const RunConfig& cfg) {
  auto rows = map_trials(cfg.trials, [&](std::size_t t) {
    const LoopResult lr = run_loop(trial_loop_config(cfg, t));
    const Scorecard f = fit_eval_model(lr.split, cfg, t);
    return evaluate_strategies(lr.split, f, lr.decision_model, cfg.eval_strategies, cfg.metrics,
                               cfg.prior, cfg.bayes, cfg.eval_weight_bands,
                               cfg.loop.scorecard_opts, t,
                               run_root(cfg).child(kStreamEval).child(t));
  });
  return make_report("experiment1", cfg.hash(), cfg.seed, std::move(rows), RankBy::abs_error,
                     orientation_map(cfg.metrics));
}

RunReport experiment_training(const RunConfig& cfg) {
  auto rows = map_trials(cfg.trials, [&](std::size_t t) {
    const LoopResult lr = run_loop(trial_loop_config(cfg, t));
    const Dataset& holdout = lr.split.holdout();

    std::vector<std::pair<std::string, Scorecard>> models;
    FitOptions o = cfg.loop.scorecard_opts;
    o.seed = run_root(cfg).child(kStreamFit).child(t);
    std::vector<ReportRow> rows;
    for (const auto& method : cfg.methods) {
      CorrectionMethod m = method;
      if (m.kind == CorrectionKind::basl && !m.prior_scorecard)
        m.prior_scorecard = lr.decision_model;
      try {
        models.emplace_back(m.name(), train_corrected(m, lr.split, o));
      } catch (const std::exception& e) {
        warn("method " + m.name() + " failed on trial " + std::to_string(t) + ": " + e.what());
        for (const auto& metric : cfg.metrics)
          rows.push_back({t, m.name(), metric.label(), 0.0,
                          std::numeric_limits<double>::quiet_NaN(), true});
      }
    }
    if (cfg.include_oracle) {
      FitOptions oo = o;
      oo.seed = o.seed.child(0x0CCC);
      Dataset oracle_train = oracle_training_set(lr.split);
      oracle_train.accepted.clear();
      oracle_train.unbiased_holdout = false;
      models.emplace_back("oracle", fit_gbt(oracle_train, oo));
    }

    for (const auto& [name, model] : models) {
      const auto scores = predict_proba(model, holdout);
      for (const auto& metric : cfg.metrics)
        rows.push_back({t, name, metric.label(),
                        evaluate_metric(metric, scores, holdout.labels).value,
                        std::numeric_limits<double>::quiet_NaN(), false});
    }
    return rows;
  });
  return make_report("experiment2", cfg.hash(), cfg.seed, std::move(rows), RankBy::value,
                     orientation_map(cfg.metrics));
}

namespace {

void chart_aggregate_by_group(const RunReport& report, const std::string& metric,
                              const std::string& title, const std::string& path) {
  // One bar-like series per group: x = group index, y = mean.
  ChartSeries s;
  s.name = metric;
  double x = 0;
  std::string x_label;
  for (const auto& a : report.aggregates) {
    if (a.metric != metric) continue;
    s.x.push_back(x++);
    s.y.push_back(a.mean);
    x_label += (x_label.empty() ? "" : ", ") + std::to_string(static_cast<int>(x) - 1) + "=" +
               a.group;
  }
  if (s.x.empty()) return;
  write_line_chart(path, title, x_label, metric, {s});
}

}  // namespace

void run_simulate(const RunConfig& cfg) {
  std::filesystem::create_directories(cfg.output_dir);
  LoopConfig lc = cfg.loop;
  lc.seed = run_root(cfg).child(kStreamTrial).child(0);
  const CorrectionMethod* correction = nullptr;
  CorrectionMethod method;
  if (!cfg.methods.empty()) {
    method = cfg.methods.front();
    correction = &method;
  }
  const LoopResult lr = run_loop(lc, correction);
  const std::string tag = hash_hex(cfg.hash());
  write_trace_csv(lr.trace, cfg.output_dir + "/trace_" + tag + ".csv");
  if (cfg.emit_charts) {
    ChartSeries fa{"f_a (biased)", {}, {}}, fo{"f_o (oracle)", {}, {}}, fc{"f_c (corrected)", {}, {}};
    for (const auto& r : lr.trace.records) {
      const double it = static_cast<double>(r.iteration);
      fa.x.push_back(it);
      fa.y.push_back(r.abr_fa);
      fo.x.push_back(it);
      fo.y.push_back(r.abr_fo);
      fc.x.push_back(it);
      fc.y.push_back(r.abr_fc);
    }
    std::vector<ChartSeries> series{fa, fo};
    if (correction) series.push_back(fc);
    write_line_chart(cfg.output_dir + "/trace_" + tag + ".svg", "Holdout ABR over iterations",
                     "iteration", "abr", series);
  }
}

void run_experiment1(const RunConfig& cfg) {
  const RunReport report = experiment_evaluation(cfg);
  emit_report_csvs(report, cfg.output_dir);
  if (cfg.emit_charts)
    chart_aggregate_by_group(report, cfg.metrics.front().label(), "Evaluation strategies",
                             cfg.output_dir + "/chart_" + hash_hex(report.config_hash) + ".svg");
}

void run_experiment2(const RunConfig& cfg) {
  const RunReport report = experiment_training(cfg);
  emit_report_csvs(report, cfg.output_dir);
  if (cfg.emit_charts)
    chart_aggregate_by_group(report, cfg.metrics.front().label(), "Training methods",
                             cfg.output_dir + "/chart_" + hash_hex(report.config_hash) + ".svg");
}

void run_sensitivity(const RunConfig& cfg) {
  std::filesystem::create_directories(cfg.output_dir);
  SweepOptions opts;
  opts.with_basl = cfg.sweep_with_basl;
  for (const auto& m : cfg.methods)
    if (m.kind == CorrectionKind::basl) opts.basl_method = m;
  opts.metrics = cfg.metrics;
  opts.bayes = cfg.bayes;
  LoopConfig base = cfg.loop;
  base.seed = run_root(cfg);
  const auto axis = sweep_axis_from_string(cfg.sweep_axis);
  const auto cells = sensitivity_sweep(axis, cfg.sweep_grid, base, cfg.trials, opts);
  const std::string tag = hash_hex(cfg.hash());
  write_sweep_csv(cells, axis, cfg.output_dir + "/sweep_" + tag + ".csv");

  if (cfg.emit_charts) {
    // Mean per (method, axis value) for the leading metric family.
    std::map<std::string, std::map<double, std::pair<double, std::size_t>>> series_data;
    for (const auto& c : cells) {
      if (c.failed) continue;
      if (c.metric != "abr" && c.metric != "abr_estimate") continue;
      auto& [sum, count] = series_data[c.method][c.axis_value];
      sum += c.value;
      ++count;
    }
    std::vector<ChartSeries> series;
    for (const auto& [method, points] : series_data) {
      ChartSeries s;
      s.name = method;
      for (const auto& [v, sc] : points) {
        s.x.push_back(v);
        s.y.push_back(sc.first / static_cast<double>(sc.second));
      }
      series.push_back(std::move(s));
    }
    if (!series.empty())
      write_line_chart(cfg.output_dir + "/sweep_" + tag + ".svg",
                       "Sensitivity: " + cfg.sweep_axis, cfg.sweep_axis, "abr", series);
  }
}

void run_impact(const RunConfig& cfg) {
  std::filesystem::create_directories(cfg.output_dir);
  const std::string tag = hash_hex(cfg.hash());

  // Part A: profit of corrected scorecards from their per-trial holdout ABR.
  RunConfig train_cfg = cfg;
  train_cfg.metrics = {MetricSpec::abr()};
  const RunReport train_report = experiment_training(train_cfg);
  std::map<std::string, std::vector<double>> abr_by_method;
  for (const auto& r : train_report.rows)
    if (!r.failed && r.metric == "abr") abr_by_method[r.group].push_back(r.value);
  std::string baseline = "ignore";
  if (!abr_by_method.count(baseline)) baseline = abr_by_method.begin()->first;
  const auto profit_rows =
      business_impact(abr_by_method, baseline, cfg.econ, run_root(cfg).child(kStreamImpact));
  write_profit_csv(profit_rows, cfg.output_dir + "/profit_" + tag + ".csv");

  // Part B: acceptance-rate policy from per-rate ABR estimates.
  struct RateCell {
    std::map<std::string, std::map<double, std::vector<double>>> estimates;
    std::map<double, std::vector<double>> truth;
  } cell;
  for (std::size_t t = 0; t < cfg.trials; ++t) {
    const LoopResult lr = run_loop(trial_loop_config(cfg, t));
    const Scorecard f = fit_eval_model(lr.split, cfg, t);
    std::vector<MetricSpec> point_metrics;
    for (double rate : cfg.econ.acceptance_grid)
      point_metrics.push_back(MetricSpec::abr(rate, rate, 1.0));
    const auto rows = evaluate_strategies(
        lr.split, f, lr.decision_model, cfg.eval_strategies, point_metrics, cfg.prior, cfg.bayes,
        cfg.eval_weight_bands, cfg.loop.scorecard_opts, t,
        run_root(cfg).child(kStreamEval).child(t));
    for (std::size_t ri = 0; ri < rows.size(); ++ri) {
      const std::size_t rate_idx = ri / cfg.eval_strategies.size();
      const double rate = cfg.econ.acceptance_grid[rate_idx];
      if (!rows[ri].failed) cell.estimates[rows[ri].group][rate].push_back(rows[ri].value);
      if (ri % cfg.eval_strategies.size() == 0) cell.truth[rate].push_back(rows[ri].truth);
    }
  }
  const auto policy_rows = policy_selection(cell.estimates, cfg.econ, cell.truth,
                                            run_root(cfg).child(kStreamImpact).child(2));
  write_policy_csv(policy_rows, cfg.output_dir + "/policy_" + tag + ".csv");

  // Pairwise realized-profit differences between strategies.
  {
    std::ofstream out(cfg.output_dir + "/policy_incremental_" + tag + ".csv", std::ios::trunc);
    out << "strategy,benchmark,lgd,realized_difference\n";
    for (const auto& a : policy_rows)
      for (const auto& b : policy_rows)
        if (a.lgd == b.lgd && a.strategy != b.strategy)
          out << a.strategy << ',' << b.strategy << ',' << format_double(a.lgd) << ','
              << format_double(a.realized_profit - b.realized_profit) << '\n';
  }

  if (cfg.emit_charts) {
    std::map<std::string, ChartSeries> margin_series;
    for (const auto& r : profit_rows) {
      if (r.method == baseline) continue;
      auto& s = margin_series[r.method];
      s.name = r.method;
      s.x.push_back(r.lgd);
      s.y.push_back(r.expected_margin);
    }
    std::vector<ChartSeries> series;
    for (auto& [name, s] : margin_series) series.push_back(std::move(s));
    if (!series.empty())
      write_line_chart(cfg.output_dir + "/impact_" + tag + ".svg",
                       "Incremental margin vs " + baseline, "lgd", "margin", series);
  }
}

namespace {

// Observational split for real-data modes: accepts (labeled) stratified into
// train/validation, rejects appended to the validation mix, no holdout.
Split observational_split(const Dataset& d, double validation_fraction, RngSeed seed) {
  if (!d.has_accepted()) throw ConfigError("basl-train: data lacks an accepted column");
  std::vector<std::size_t> acc_rows, rej_rows;
  for (std::size_t i = 0; i < d.rows(); ++i)
    (d.accepted[i] == 1 ? acc_rows : rej_rows).push_back(i);
  Dataset accepts = d.subset(acc_rows);
  if (!accepts.fully_labeled()) throw ConfigError("basl-train: accepts must be fully labeled");
  Dataset rejects = d.subset(rej_rows).without_labels();

  Rng rng(seed);
  std::vector<std::size_t> bad, good;
  for (std::size_t i = 0; i < accepts.rows(); ++i)
    (accepts.labels[i] == 1 ? bad : good).push_back(i);
  rng.child(1).shuffle(bad);
  rng.child(2).shuffle(good);
  std::vector<std::size_t> val_rows, train_rows;
  for (auto* pool : {&bad, &good}) {
    const auto c = static_cast<std::size_t>(
        std::floor(validation_fraction * static_cast<double>(pool->size()) + 1e-12));
    for (std::size_t i = 0; i < pool->size(); ++i)
      (i < c ? val_rows : train_rows).push_back((*pool)[i]);
  }
  std::sort(val_rows.begin(), val_rows.end());
  std::sort(train_rows.begin(), train_rows.end());

  std::vector<std::size_t> rej_idx(rejects.rows());
  for (std::size_t i = 0; i < rej_idx.size(); ++i) rej_idx[i] = i;
  Rng rr = rng.child(3);
  rr.shuffle(rej_idx);
  const auto n_val_rej = static_cast<std::size_t>(
      std::floor(validation_fraction * static_cast<double>(rej_idx.size()) + 1e-12));
  std::vector<std::size_t> val_rej(rej_idx.begin(), rej_idx.begin() + n_val_rej);
  std::vector<std::size_t> pool_rej(rej_idx.begin() + n_val_rej, rej_idx.end());
  std::sort(val_rej.begin(), val_rej.end());
  std::sort(pool_rej.begin(), pool_rej.end());

  Dataset validation = Dataset::concat(accepts.subset(val_rows), rejects.subset(val_rej));
  return Split::from_parts(accepts.subset(train_rows), rejects.subset(pool_rej),
                           std::move(validation), Dataset{});
}

}  // namespace

void run_basl_train(const RunConfig& cfg) {
  std::filesystem::create_directories(cfg.output_dir);
  const std::string tag = hash_hex(cfg.hash());

  BaslConfig basl;
  for (const auto& m : cfg.methods)
    if (m.kind == CorrectionKind::basl) basl = m.basl;
  basl.seed = run_root(cfg).child(0xBA);
  basl.strong_opts.gbt = cfg.loop.scorecard_opts.gbt;

  Split split;
  Scorecard prior_model;
  bool have_prior_model = false;
  if (!cfg.data_csv.empty()) {
    const Dataset d = load_csv(cfg.data_csv, cfg.schema);
    split = observational_split(d, cfg.loop.validation_fraction, run_root(cfg).child(0x0B));
    if (!cfg.scorecard_path.empty()) {
      prior_model = load_scorecard(cfg.scorecard_path);
      have_prior_model = true;
    }
  } else {
    const LoopResult lr = run_loop(trial_loop_config(cfg, 0));
    split = lr.split;
    prior_model = lr.decision_model;
    have_prior_model = true;
  }

  auto [val_accepts, val_rejects] = split_validation(split.validation());
  FitOptions weak = basl.weak_opts;
  const Prior prior =
      have_prior_model
          ? build_prior(val_rejects, prior_model)
          : build_prior(val_rejects, fit_l1_logistic(split.train_accepts(), weak));
  const BaslResult result =
      basl_fit(split.train_accepts(), split.rejects(), split.validation(), prior, basl);

  save_scorecard(result.model, cfg.output_dir + "/scorecard_" + tag + ".json");
  write_basl_history_csv(result.state.history, cfg.output_dir + "/basl_history_" + tag + ".csv");
}

void run_evaluate(const RunConfig& cfg) {
  std::filesystem::create_directories(cfg.output_dir);
  const std::string tag = hash_hex(cfg.hash());
  const Scorecard model = load_scorecard(cfg.scorecard_path);
  const Dataset d = load_csv(cfg.data_csv, cfg.schema);

  Dataset accepts, rejects;
  if (d.has_accepted()) {
    std::vector<std::size_t> acc_rows, rej_rows;
    for (std::size_t i = 0; i < d.rows(); ++i)
      (d.accepted[i] == 1 ? acc_rows : rej_rows).push_back(i);
    accepts = d.subset(acc_rows);
    rejects = d.subset(rej_rows).without_labels();
  } else {
    accepts = d;
  }
  if (!accepts.fully_labeled())
    throw ConfigError("evaluate: accepted rows must carry labels");

  const Prior prior =
      rejects.rows() > 0 ? build_prior(rejects, model) : Prior{{}, {}, Prior::Source::original_scores};

  std::ofstream out(cfg.output_dir + "/metrics_" + tag + ".csv", std::ios::trunc);
  if (!out) throw ConfigError("evaluate: cannot open metrics CSV");
  out << "metric,accepts_only,bayesian,bayes_iterations\n";
  const auto acc_scores = predict_proba(model, accepts);
  bool first = true;
  for (const auto& metric : cfg.metrics) {
    const double plain = evaluate_metric(metric, acc_scores, accepts.labels).value;
    BayesConfig bc = cfg.bayes;
    bc.seed = run_root(cfg).child(fnv1a(metric.label()));
    BayesDiagnostics diag;
    const double bayes = bayesian_metric(model, accepts, rejects, prior, metric, bc, &diag).value;
    out << metric.label() << ',' << format_double(plain) << ',' << format_double(bayes) << ','
        << diag.iterations << '\n';
    if (first) {
      write_bayes_trace_csv(diag, cfg.output_dir + "/bayes_trace_" + tag + ".csv");
      first = false;
    }
  }
}

void run_mode(const RunConfig& cfg) {
  cfg.validate();
  if (cfg.mode == "simulate") return run_simulate(cfg);
  if (cfg.mode == "experiment1") return run_experiment1(cfg);
  if (cfg.mode == "experiment2") return run_experiment2(cfg);
  if (cfg.mode == "sensitivity") return run_sensitivity(cfg);
  if (cfg.mode == "impact") return run_impact(cfg);
  if (cfg.mode == "basl-train") return run_basl_train(cfg);
  if (cfg.mode == "evaluate") return run_evaluate(cfg);
  throw ConfigError("run_mode: unknown mode '" + cfg.mode + "'");
}

}  // namespace biaslab
