#include "biaslab/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "biaslab/common.hpp"

namespace biaslab {

using nlohmann::json;

namespace {

MetricSpec metric_from_json(const json& j) {
  MetricSpec spec;
  if (j.is_string()) {
    spec.name = metric_from_string(j.get<std::string>());
  } else {
    spec.name = metric_from_string(j.at("name").get<std::string>());
    if (j.contains("window")) {
      spec.window_lo = j.at("window").at(0).get<double>();
      spec.window_hi = j.at("window").at(1).get<double>();
    }
    spec.abr_step = j.value("step", spec.abr_step);
  }
  if (spec.name == MetricName::pauc && !j.is_object()) {
    spec.window_lo = 0.0;
    spec.window_hi = 0.2;
  }
  if (spec.name == MetricName::abr && !j.is_object()) spec = MetricSpec::abr();
  spec.validate();
  return spec;
}

MixtureSpec mixture_from_json(const json& j) {
  const auto dim = j.value<std::size_t>("dim", 3);
  const double bad_rate = j.value("bad_rate", 0.3);
  const double cov_range = j.value("cov_range", 0.4);
  const RngSeed cov_seed{j.value<std::uint64_t>("cov_seed", 20240101), 0};
  const std::string preset = j.value("preset", "mar");
  if (!j.contains("good") && !j.contains("bad")) {
    if (preset == "mnar") return default_mnar_mixture(dim, bad_rate, cov_range, cov_seed);
    if (preset != "mar") throw ConfigError("mixture: unknown preset '" + preset + "'");
    return default_mixture(dim, bad_rate, cov_range, cov_seed);
  }

  MixtureSpec spec;
  spec.dim = dim;
  spec.bad_rate = bad_rate;
  std::uint64_t comp_tag = 1;
  auto parse_class = [&](const char* key, std::vector<MixtureComponent>& out) {
    if (!j.contains(key)) throw ConfigError(std::string("mixture: missing class '") + key + "'");
    for (const auto& cj : j.at(key)) {
      MixtureComponent c;
      c.weight = cj.value("weight", 1.0);
      c.mean = cj.at("mean").get<std::vector<double>>();
      if (cj.contains("cov")) {
        for (const auto& rowj : cj.at("cov"))
          for (const auto& v : rowj) c.cov.push_back(v.get<double>());
      } else {
        c.cov = random_covariances(dim, cov_range, cov_seed.child(comp_tag));
      }
      ++comp_tag;
      out.push_back(std::move(c));
    }
  };
  parse_class("good", spec.good);
  parse_class("bad", spec.bad);
  spec.validate();
  return spec;
}

GbtOptions gbt_from_json(const json& j, GbtOptions base) {
  base.n_trees = j.value("n_trees", base.n_trees);
  base.max_depth = j.value("max_depth", base.max_depth);
  base.learning_rate = j.value("learning_rate", base.learning_rate);
  base.min_child_weight = j.value("min_child_weight", base.min_child_weight);
  base.subsample = j.value("subsample", base.subsample);
  return base;
}

FitOptions fit_from_json(const json& j, FitOptions base) {
  base.l1_lambda = j.value("l1_lambda", base.l1_lambda);
  if (j.contains("gbt")) base.gbt = gbt_from_json(j.at("gbt"), base.gbt);
  base.max_iter = j.value("max_iter", base.max_iter);
  base.tol = j.value("tol", base.tol);
  return base;
}

BayesConfig bayes_from_json(const json& j, BayesConfig base) {
  base.j_max = j.value("j_max", base.j_max);
  base.epsilon = j.value("epsilon", base.epsilon);
  base.min_iterations = j.value("min_iterations", base.min_iterations);
  return base;
}

BaslConfig basl_from_json(const json& j, BaslConfig base) {
  base.beta_upper = j.value("beta_upper", base.beta_upper);
  base.beta_lower = j.value("beta_lower", base.beta_lower);
  base.rho = j.value("rho", base.rho);
  base.gamma = j.value("gamma", base.gamma);
  base.theta = j.value("theta", base.theta);
  base.j_max = j.value<std::size_t>("j_max", base.j_max);
  base.patience = j.value<std::size_t>("patience", base.patience);
  if (j.contains("stop_metric")) base.stop_metric = metric_from_json(j.at("stop_metric"));
  if (j.contains("bayes")) base.bayes = bayes_from_json(j.at("bayes"), base.bayes);
  if (j.contains("weak")) base.weak_opts = fit_from_json(j.at("weak"), base.weak_opts);
  if (j.contains("strong")) base.strong_opts = fit_from_json(j.at("strong"), base.strong_opts);
  base.iforest_trees = j.value<std::size_t>("iforest_trees", base.iforest_trees);
  base.iforest_subsample = j.value<std::size_t>("iforest_subsample", base.iforest_subsample);
  return base;
}

CorrectionMethod method_from_json(const json& j, const BaslConfig& basl_defaults) {
  CorrectionMethod m;
  m.basl = basl_defaults;
  if (j.is_string()) {
    m.kind = correction_from_string(j.get<std::string>());
  } else {
    m.kind = correction_from_string(j.at("name").get<std::string>());
    m.hca_cutoff = j.value("cutoff", m.hca_cutoff);
    m.parceling_bands = j.value<std::size_t>("n_bands", m.parceling_bands);
    m.parceling_risk_multiplier = j.value("risk_multiplier", m.parceling_risk_multiplier);
    if (m.kind == CorrectionKind::reweight_banded)
      m.weight_bands = j.value<std::size_t>("n_bands", m.weight_bands);
    if (j.contains("basl")) m.basl = basl_from_json(j.at("basl"), m.basl);
  }
  m.validate();
  return m;
}

LoopConfig loop_from_json(const json& j, LoopConfig base) {
  if (j.contains("mixture")) base.mixture = mixture_from_json(j.at("mixture"));
  if (j.contains("mnar")) {
    base.mnar.hidden_dims = j.at("mnar").value("hidden_dims", std::vector<std::size_t>{});
    base.mnar.overwrite_rate = j.at("mnar").value("overwrite_rate", 0.0);
  }
  base.batch_size = j.value<std::size_t>("batch_size", base.batch_size);
  base.iterations = j.value<std::size_t>("iterations", base.iterations);
  if (j.contains("acceptance")) {
    const auto& aj = j.at("acceptance");
    const std::string mode = aj.value("mode", "rate");
    if (mode == "rate")
      base.acceptance_mode = AcceptanceMode::rate;
    else if (mode == "threshold")
      base.acceptance_mode = AcceptanceMode::threshold;
    else if (mode == "random")
      base.acceptance_mode = AcceptanceMode::random;
    else
      throw ConfigError("loop.acceptance.mode: unknown value '" + mode + "'");
    base.acceptance_value = aj.value("value", base.acceptance_value);
  }
  base.retrain_every = j.value<std::size_t>("retrain_every", base.retrain_every);
  base.holdout_size = j.value<std::size_t>("holdout_size", base.holdout_size);
  base.warmup = j.value<std::size_t>("warmup", base.warmup);
  base.validation_fraction = j.value("validation_fraction", base.validation_fraction);
  if (j.contains("scorecard")) base.scorecard_opts = fit_from_json(j.at("scorecard"), base.scorecard_opts);
  return base;
}

}  // namespace

void LoanEconomics::validate() const {
  if (!(principal_mean > 0)) throw ConfigError("economics: principal_mean must be positive");
  if (principal_sd < 0 || interest_sd < 0) throw ConfigError("economics: negative sd");
  if (lgd_grid.empty()) throw ConfigError("economics: lgd_grid empty");
  for (double v : lgd_grid)
    if (v < 0.0 || v > 1.0) throw ConfigError("economics: lgd outside [0,1]");
  if (acceptance_grid.empty()) throw ConfigError("economics: acceptance_grid empty");
  for (double v : acceptance_grid)
    if (!(v > 0.0 && v <= 1.0)) throw ConfigError("economics: acceptance rate outside (0,1]");
  if (n_draws < 1) throw ConfigError("economics: n_draws must be >= 1");
}

RunConfig default_run_config(const std::string& mode) {
  RunConfig cfg;
  cfg.mode = mode;
  cfg.seed = 1;
  cfg.trials = 10;

  cfg.loop.mixture = default_mixture();
  cfg.loop.batch_size = 800;
  cfg.loop.iterations = 30;
  cfg.loop.warmup = 5;
  cfg.loop.retrain_every = 5;
  cfg.loop.holdout_size = 4000;
  cfg.loop.acceptance_mode = AcceptanceMode::rate;
  cfg.loop.acceptance_value = 0.25;
  cfg.loop.validation_fraction = 0.25;
  cfg.loop.scorecard_opts.gbt = {80, 3, 0.1, 1.0, 0.8};

  cfg.metrics = {MetricSpec::abr(), MetricSpec::auc(), MetricSpec::brier(), MetricSpec::pauc()};
  cfg.eval_strategies = {"accepts_only", "reweighted", "bayesian"};

  CorrectionMethod ignore;
  CorrectionMethod basl;
  basl.kind = CorrectionKind::basl;
  basl.basl.strong_opts.gbt = cfg.loop.scorecard_opts.gbt;
  basl.basl.bayes.j_max = 400;
  cfg.methods = {ignore, basl};

  cfg.bayes.j_max = 400;
  cfg.econ.lgd_grid = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 1.0};
  cfg.econ.acceptance_grid = {0.1, 0.2, 0.3, 0.4, 0.5};

  cfg.sweep_grid = {0.1, 0.25, 0.5, 0.9};

  if (mode == "impact") cfg.eval_strategies = {"reweighted", "bayesian"};

  json j;
  j["mode"] = mode;
  cfg.canonical_json = j.dump();
  return cfg;
}

RunConfig RunConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: JSON parse error: ") + e.what());
  }
  if (!j.contains("mode") || !j.at("mode").is_string())
    throw ConfigError("config: field 'mode' (string) is required");

  RunConfig cfg = default_run_config(j.at("mode").get<std::string>());
  try {
    cfg.seed = j.value<std::uint64_t>("seed", cfg.seed);
    cfg.trials = j.value<std::size_t>("trials", cfg.trials);
    cfg.output_dir = j.value("output_dir", cfg.output_dir);
    cfg.emit_charts = j.value("emit_charts", cfg.emit_charts);
    if (j.contains("loop")) cfg.loop = loop_from_json(j.at("loop"), cfg.loop);
    if (j.contains("metrics")) {
      cfg.metrics.clear();
      for (const auto& mj : j.at("metrics")) cfg.metrics.push_back(metric_from_json(mj));
    }
    if (j.contains("eval_strategies"))
      cfg.eval_strategies = j.at("eval_strategies").get<std::vector<std::string>>();
    if (j.contains("methods")) {
      BaslConfig basl_defaults;
      basl_defaults.strong_opts.gbt = cfg.loop.scorecard_opts.gbt;
      basl_defaults.bayes = cfg.bayes;
      cfg.methods.clear();
      for (const auto& mj : j.at("methods")) cfg.methods.push_back(method_from_json(mj, basl_defaults));
    }
    if (j.contains("prior")) {
      const auto& pj = j.at("prior");
      cfg.prior.source = pj.value("source", cfg.prior.source);
      cfg.prior.constant = pj.value("constant", cfg.prior.constant);
      cfg.prior.flip_rate = pj.value("flip_rate", cfg.prior.flip_rate);
      cfg.prior.shift = pj.value("shift", cfg.prior.shift);
    }
    if (j.contains("bayes")) cfg.bayes = bayes_from_json(j.at("bayes"), cfg.bayes);
    if (j.contains("economics")) {
      const auto& ej = j.at("economics");
      cfg.econ.principal_mean = ej.value("principal_mean", cfg.econ.principal_mean);
      cfg.econ.principal_sd = ej.value("principal_sd", cfg.econ.principal_sd);
      cfg.econ.interest_mean = ej.value("interest_mean", cfg.econ.interest_mean);
      cfg.econ.interest_sd = ej.value("interest_sd", cfg.econ.interest_sd);
      cfg.econ.lgd_grid = ej.value("lgd_grid", cfg.econ.lgd_grid);
      cfg.econ.acceptance_grid = ej.value("acceptance_grid", cfg.econ.acceptance_grid);
      cfg.econ.n_draws = ej.value<std::size_t>("n_draws", cfg.econ.n_draws);
    }
    if (j.contains("sweep")) {
      const auto& sj = j.at("sweep");
      cfg.sweep_axis = sj.value("axis", cfg.sweep_axis);
      cfg.sweep_grid = sj.value("grid", cfg.sweep_grid);
      cfg.sweep_with_basl = sj.value("with_basl", cfg.sweep_with_basl);
    }
    if (j.contains("data")) {
      const auto& dj = j.at("data");
      cfg.data_csv = dj.value("csv", cfg.data_csv);
      cfg.schema.label_column = dj.value("label_column", cfg.schema.label_column);
      cfg.schema.accepted_column = dj.value("accepted_column", cfg.schema.accepted_column);
      cfg.schema.id_column = dj.value("id_column", cfg.schema.id_column);
      if (dj.contains("partition_fractions")) {
        const auto f = dj.at("partition_fractions").get<std::vector<double>>();
        if (f.size() != 3) throw ConfigError("config: data.partition_fractions needs 3 entries");
        cfg.partition_fractions = {f[0], f[1], f[2]};
      }
    }
    cfg.scorecard_path = j.value("scorecard", cfg.scorecard_path);
    cfg.include_oracle = j.value("include_oracle", cfg.include_oracle);
    cfg.eval_weight_bands = j.value<std::size_t>("eval_weight_bands", cfg.eval_weight_bands);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  cfg.canonical_json = j.dump();
  cfg.validate();
  return cfg;
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

void RunConfig::validate() const {
  static const std::set<std::string> modes = {"simulate",    "experiment1", "experiment2",
                                              "sensitivity", "impact",      "basl-train",
                                              "evaluate"};
  if (!modes.count(mode)) throw ConfigError("config: unknown mode '" + mode + "'");
  if (trials < 1) throw ConfigError("config: trials must be >= 1");
  if (output_dir.empty()) throw ConfigError("config: output_dir must not be empty");
  loop.validate();
  if (metrics.empty()) throw ConfigError("config: metrics must not be empty");
  for (const auto& m : metrics) m.validate();
  bayes.validate();
  if (mode == "experiment1" || mode == "impact") {
    if (eval_strategies.empty()) throw ConfigError("config: eval_strategies must not be empty");
    for (const auto& s : eval_strategies)
      if (s != "accepts_only" && s != "reweighted" && s != "bayesian")
        throw ConfigError("config: unknown evaluation strategy '" + s + "'");
    static const std::set<std::string> prior_sources = {"previous_scorecard", "constant",
                                                        "oracle"};
    if (!prior_sources.count(prior.source))
      throw ConfigError("config: unknown prior source '" + prior.source + "'");
    if (prior.constant < 0 || prior.constant > 1)
      throw ConfigError("config: prior.constant outside [0,1]");
    if (prior.flip_rate < 0 || prior.flip_rate > 1)
      throw ConfigError("config: prior.flip_rate outside [0,1]");
  }
  if (mode == "experiment2" || mode == "impact") {
    if (methods.empty()) throw ConfigError("config: methods must not be empty");
    for (const auto& m : methods) m.validate();
  }
  if (mode == "sensitivity") {
    sweep_axis_from_string(sweep_axis);
    if (sweep_grid.empty()) throw ConfigError("config: sweep.grid must not be empty");
  }
  if (mode == "impact") econ.validate();
  if (mode == "evaluate" && data_csv.empty())
    throw ConfigError("config: evaluate mode requires data.csv");
  if (mode == "evaluate" && scorecard_path.empty())
    throw ConfigError("config: evaluate mode requires a scorecard path");
  const double fsum = partition_fractions[0] + partition_fractions[1] + partition_fractions[2];
  if (std::abs(fsum - 1.0) > 1e-9)
    throw ConfigError("config: data.partition_fractions must sum to 1");
}

std::uint64_t RunConfig::hash() const {
  return fnv1a(canonical_json + "#seed=" + std::to_string(seed));
}

}  // namespace biaslab
