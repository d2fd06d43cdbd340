#pragma once

#include "biaslab/dataset.hpp"

namespace biaslab {

struct IsoNode {
  int feature = -1;  // < 0 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  std::uint32_t size = 0;  // rows that reached this node during fitting
};

struct IsoTree {
  std::vector<IsoNode> nodes;
};

// Isolation forest: higher score = more anomalous relative to the training
// data. Scores lie in (0,1).
struct NoveltyModel {
  std::vector<IsoTree> trees;
  std::size_t n_trees = 0;
  std::size_t subsample_size = 0;
  std::size_t feature_arity = 0;
};

// Per tree: subsample rows, split on a uniform random dimension and value
// until singleton or the depth cap ceil(log2(subsample)).
NoveltyModel fit_isolation_forest(const Dataset& d, std::size_t n_trees, std::size_t subsample,
                                  RngSeed seed);

// s(x) = 2^(-E[path] / c(subsample)) with the harmonic-number normalizer.
std::vector<double> novelty_scores(const NoveltyModel& m, const Dataset& d);

// Average unsuccessful-search path length normalizer c(m).
double iforest_c(std::size_t m);

}  // namespace biaslab
