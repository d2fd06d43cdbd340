#pragma once

#include <optional>
#include <string>
#include <vector>

#include "biaslab/dataset.hpp"

namespace biaslab {

enum class LearnerKind { l1_logistic, gbt, probit, constant };

std::string learner_kind_name(LearnerKind k);

// Linear index model on internally standardized features, shared by the
// L1 logistic and probit learners.
struct LinearModel {
  double intercept = 0.0;
  std::vector<double> weights;     // standardized scale
  std::vector<double> mean;        // per-column standardization
  std::vector<double> scale;
  std::vector<double> std_errors;  // probit only; standardized scale

  double index(std::span<const double> x) const {
    double z = intercept;
    for (std::size_t j = 0; j < weights.size(); ++j)
      z += weights[j] * (x[j] - mean[j]) / scale[j];
    return z;
  }

  // (intercept, weights) on the raw feature scale.
  std::pair<double, std::vector<double>> destandardized() const;
};

struct GbtNode {
  int feature = -1;  // < 0 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double leaf_value = 0.0;  // already scaled by the learning rate
};

struct GbtTree {
  std::vector<GbtNode> nodes;

  double eval(std::span<const double> x) const {
    int i = 0;
    while (nodes[i].feature >= 0)
      i = x[static_cast<std::size_t>(nodes[i].feature)] <= nodes[i].threshold ? nodes[i].left
                                                                              : nodes[i].right;
    return nodes[i].leaf_value;
  }
};

struct GbtModel {
  std::vector<GbtTree> trees;
  double base_margin = 0.0;
  std::vector<double> staged_loss;  // weighted train log-loss: initial, then after each tree
};

struct ConstantModel {
  double rate = 0.5;
};

struct TrainingMeta {
  std::size_t n_rows = 0;
  bool weighted = false;
  RngSeed seed{};
};

// A trained probability-of-default predictor with one predict contract.
// Immutable once fitted. `selection_adjust` carries a probit selection
// model whose inverse Mills ratio is appended as an extra feature before
// the trees are evaluated (two-step Heckman correction).
struct Scorecard {
  LearnerKind kind = LearnerKind::constant;
  std::size_t feature_arity = 0;
  LinearModel linear;
  GbtModel gbt;
  ConstantModel constant;
  std::optional<LinearModel> selection_adjust;
  TrainingMeta meta;
};

struct GbtOptions {
  std::size_t n_trees = 200;
  std::size_t max_depth = 3;
  double learning_rate = 0.1;
  double min_child_weight = 1.0;  // Hessian mass per child
  double subsample = 0.8;
};

struct FitOptions {
  double l1_lambda = 0.01;
  GbtOptions gbt;
  std::vector<double> sample_weights;  // optional, positive per-row
  RngSeed seed{};
  std::size_t max_iter = 1000;
  double tol = 1e-10;

  void validate(std::size_t n_rows) const;
};

// Weighted negative log-likelihood + lambda * ||w||_1 (intercept
// unpenalized), minimized by proximal gradient with backtracking.
Scorecard fit_l1_logistic(const Dataset& d, const FitOptions& opts);

// Second-order gradient boosting on logistic loss, exact greedy splits,
// per-row weights, staged training loss recorded. n_trees = 0 degenerates to
// the weighted base rate.
Scorecard fit_gbt(const Dataset& d, const FitOptions& opts);

// Probit MLE by Fisher scoring; on separation retries with ridge 1e-6 and a
// warning. Standard errors stored on the standardized scale.
Scorecard fit_probit(const Dataset& d, const FitOptions& opts);

Scorecard constant_scorecard(double rate, std::size_t feature_arity);

// Row-aligned probabilities in [0,1]; deterministic given the model.
std::vector<double> predict_proba(const Scorecard& m, const Dataset& d);

// OLS of the model's predictions on d's features plus intercept: the linear
// surrogate used as a bias diagnostic. Returns k+1 coefficients, intercept
// first. Singular designs get ridge jitter 1e-8 with a warning.
std::vector<double> surrogate_coefficients(const Scorecard& m, const Dataset& d);

// Versioned structured text (JSON) serialization, for reusing a scorecard as
// the previous-scorecard prior during evaluation.
void save_scorecard(const Scorecard& m, const std::string& path);
Scorecard load_scorecard(const std::string& path);

double normal_pdf(double x);
double normal_cdf(double x);
// phi(x) / Phi(x), the inverse Mills ratio.
double inverse_mills(double x);

}  // namespace biaslab
