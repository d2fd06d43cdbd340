#include "biaslab/scorecard.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "biaslab/common.hpp"

namespace biaslab {

using nlohmann::json;

std::string learner_kind_name(LearnerKind k) {
  switch (k) {
    case LearnerKind::l1_logistic: return "l1_logistic";
    case LearnerKind::gbt: return "gbt";
    case LearnerKind::probit: return "probit";
    case LearnerKind::constant: return "constant";
  }
  return "?";
}

std::pair<double, std::vector<double>> LinearModel::destandardized() const {
  std::vector<double> w(weights.size());
  double b = intercept;
  for (std::size_t j = 0; j < weights.size(); ++j) {
    w[j] = weights[j] / scale[j];
    b -= weights[j] * mean[j] / scale[j];
  }
  return {b, w};
}

void FitOptions::validate(std::size_t n_rows) const {
  if (l1_lambda < 0) throw ConfigError("fit: l1_lambda must be >= 0");
  if (gbt.max_depth < 1) throw ConfigError("fit: gbt max_depth must be >= 1");
  if (!(gbt.learning_rate > 0.0 && gbt.learning_rate <= 1.0))
    throw ConfigError("fit: gbt learning_rate must lie in (0,1]");
  if (gbt.min_child_weight < 0) throw ConfigError("fit: gbt min_child_weight must be >= 0");
  if (!(gbt.subsample > 0.0 && gbt.subsample <= 1.0))
    throw ConfigError("fit: gbt subsample must lie in (0,1]");
  if (max_iter < 1) throw ConfigError("fit: max_iter must be >= 1");
  if (!(tol > 0)) throw ConfigError("fit: tol must be positive");
  if (!sample_weights.empty()) {
    if (sample_weights.size() != n_rows)
      throw ConfigError("fit: sample_weights length differs from row count");
    for (double w : sample_weights)
      if (!(w > 0) || !std::isfinite(w)) throw ConfigError("fit: weights must be finite and > 0");
  }
}

double normal_pdf(double x) { return 0.3989422804014326779399461 * std::exp(-0.5 * x * x); }

double normal_cdf(double x) { return 0.5 * std::erfc(-x * 0.7071067811865475244008444); }

double inverse_mills(double x) {
  // Phi underflows near -37; the clamp keeps the ratio finite and monotone.
  if (x < -35.0) x = -35.0;
  if (x > 35.0) x = 35.0;
  return normal_pdf(x) / normal_cdf(x);
}

Scorecard constant_scorecard(double rate, std::size_t feature_arity) {
  if (rate < 0.0 || rate > 1.0) throw ConfigError("constant_scorecard: rate outside [0,1]");
  Scorecard m;
  m.kind = LearnerKind::constant;
  m.feature_arity = feature_arity;
  m.constant.rate = rate;
  return m;
}

namespace {

double sigmoid(double z) { return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z)); }

double predict_row(const Scorecard& m, std::span<const double> x, std::vector<double>& buf) {
  switch (m.kind) {
    case LearnerKind::constant:
      return m.constant.rate;
    case LearnerKind::l1_logistic:
      return sigmoid(m.linear.index(x));
    case LearnerKind::probit:
      return normal_cdf(m.linear.index(x));
    case LearnerKind::gbt: {
      std::span<const double> row = x;
      if (m.selection_adjust) {
        buf.assign(x.begin(), x.end());
        buf.push_back(inverse_mills(m.selection_adjust->index(x)));
        row = buf;
      }
      double z = m.gbt.base_margin;
      for (const auto& t : m.gbt.trees) z += t.eval(row);
      return sigmoid(z);
    }
  }
  throw ConfigError("predict: unknown learner kind");
}

}  // namespace

std::vector<double> predict_proba(const Scorecard& m, const Dataset& d) {
  if (d.cols() != m.feature_arity)
    throw ConfigError("predict: feature arity mismatch (model " +
                      std::to_string(m.feature_arity) + ", data " + std::to_string(d.cols()) +
                      ")");
  std::vector<double> out(d.rows());
  std::vector<double> buf;
  for (std::size_t i = 0; i < d.rows(); ++i) out[i] = predict_row(m, d.row(i), buf);
  return out;
}

std::vector<double> surrogate_coefficients(const Scorecard& m, const Dataset& d) {
  const std::size_t n = d.rows(), k = d.cols();
  if (n <= k + 1) throw ConfigError("surrogate: need more rows than coefficients");
  const auto preds = predict_proba(m, d);

  Eigen::MatrixXd x(n, k + 1);
  Eigen::VectorXd y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x(i, 0) = 1.0;
    for (std::size_t j = 0; j < k; ++j) x(i, j + 1) = d.feature(i, j);
    y(i) = preds[i];
  }
  Eigen::MatrixXd xtx = x.transpose() * x;
  Eigen::VectorXd xty = x.transpose() * y;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(xtx);
  if (!lu.isInvertible()) {
    warn("surrogate: singular design matrix; applying ridge jitter 1e-8");
    xtx.diagonal().array() += 1e-8;
  }
  Eigen::VectorXd beta = xtx.ldlt().solve(xty);
  return std::vector<double>(beta.data(), beta.data() + k + 1);
}

namespace {

json linear_to_json(const LinearModel& lm) {
  return json{{"intercept", lm.intercept},
              {"weights", lm.weights},
              {"mean", lm.mean},
              {"scale", lm.scale},
              {"std_errors", lm.std_errors}};
}

LinearModel linear_from_json(const json& j) {
  LinearModel lm;
  lm.intercept = j.at("intercept").get<double>();
  lm.weights = j.at("weights").get<std::vector<double>>();
  lm.mean = j.at("mean").get<std::vector<double>>();
  lm.scale = j.at("scale").get<std::vector<double>>();
  lm.std_errors = j.at("std_errors").get<std::vector<double>>();
  return lm;
}

}  // namespace

void save_scorecard(const Scorecard& m, const std::string& path) {
  json j;
  j["format"] = "biaslab-scorecard";
  j["version"] = 1;
  j["kind"] = learner_kind_name(m.kind);
  j["feature_arity"] = m.feature_arity;
  j["meta"] = {{"n_rows", m.meta.n_rows},
               {"weighted", m.meta.weighted},
               {"seed", m.meta.seed.seed},
               {"stream", m.meta.seed.stream}};
  switch (m.kind) {
    case LearnerKind::l1_logistic:
    case LearnerKind::probit:
      j["linear"] = linear_to_json(m.linear);
      break;
    case LearnerKind::constant:
      j["rate"] = m.constant.rate;
      break;
    case LearnerKind::gbt: {
      j["base_margin"] = m.gbt.base_margin;
      j["staged_loss"] = m.gbt.staged_loss;
      json trees = json::array();
      for (const auto& t : m.gbt.trees) {
        json nodes = json::array();
        for (const auto& nd : t.nodes)
          nodes.push_back({nd.feature, nd.threshold, nd.left, nd.right, nd.leaf_value});
        trees.push_back(std::move(nodes));
      }
      j["trees"] = std::move(trees);
      break;
    }
  }
  if (m.selection_adjust) j["selection_adjust"] = linear_to_json(*m.selection_adjust);

  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw ConfigError("save_scorecard: cannot open '" + tmp + "'");
    out << j.dump(2) << '\n';
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw std::runtime_error("save_scorecard: rename to '" + path + "' failed");
}

Scorecard load_scorecard(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("load_scorecard: cannot open '" + path + "'");
  json j;
  in >> j;
  if (j.value("format", "") != "biaslab-scorecard")
    throw ConfigError("load_scorecard: not a scorecard file");
  if (j.value("version", 0) != 1) throw ConfigError("load_scorecard: unsupported version");

  Scorecard m;
  const std::string kind = j.at("kind").get<std::string>();
  m.feature_arity = j.at("feature_arity").get<std::size_t>();
  m.meta.n_rows = j.at("meta").at("n_rows").get<std::size_t>();
  m.meta.weighted = j.at("meta").at("weighted").get<bool>();
  m.meta.seed = {j.at("meta").at("seed").get<std::uint64_t>(),
                 j.at("meta").at("stream").get<std::uint64_t>()};
  if (kind == "l1_logistic" || kind == "probit") {
    m.kind = kind == "probit" ? LearnerKind::probit : LearnerKind::l1_logistic;
    m.linear = linear_from_json(j.at("linear"));
  } else if (kind == "constant") {
    m.kind = LearnerKind::constant;
    m.constant.rate = j.at("rate").get<double>();
  } else if (kind == "gbt") {
    m.kind = LearnerKind::gbt;
    m.gbt.base_margin = j.at("base_margin").get<double>();
    m.gbt.staged_loss = j.at("staged_loss").get<std::vector<double>>();
    for (const auto& tj : j.at("trees")) {
      GbtTree t;
      for (const auto& nj : tj) {
        GbtNode nd;
        nd.feature = nj.at(0).get<int>();
        nd.threshold = nj.at(1).get<double>();
        nd.left = nj.at(2).get<int>();
        nd.right = nj.at(3).get<int>();
        nd.leaf_value = nj.at(4).get<double>();
        t.nodes.push_back(nd);
      }
      m.gbt.trees.push_back(std::move(t));
    }
  } else {
    throw ConfigError("load_scorecard: unknown kind '" + kind + "'");
  }
  if (j.contains("selection_adjust")) m.selection_adjust = linear_from_json(j.at("selection_adjust"));
  return m;
}

}  // namespace biaslab
