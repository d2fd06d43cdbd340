#include "biaslab/iforest.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "biaslab/common.hpp"
#include "biaslab/parallel.hpp"

namespace biaslab {

namespace {

constexpr double kEulerGamma = 0.57721566490153286;

struct BuildFrame {
  std::vector<std::uint32_t> rows;
  int depth;
  int node;
};

}  // namespace

double iforest_c(std::size_t m) {
  if (m <= 1) return 0.0;
  if (m == 2) return 1.0;
  const double d = static_cast<double>(m);
  return 2.0 * (std::log(d - 1.0) + kEulerGamma) - 2.0 * (d - 1.0) / d;
}

NoveltyModel fit_isolation_forest(const Dataset& d, std::size_t n_trees, std::size_t subsample,
                                  RngSeed seed) {
  const std::size_t n = d.rows(), k = d.cols();
  if (n_trees < 1) throw ConfigError("isolation_forest: n_trees must be >= 1");
  if (subsample < 2 || subsample > n)
    throw ConfigError("isolation_forest: need n >= subsample >= 2");
  bool any_varying = false;
  for (std::size_t f = 0; f < k && !any_varying; ++f) {
    const double v0 = d.feature(0, f);
    for (std::size_t i = 1; i < n; ++i)
      if (d.feature(i, f) != v0) {
        any_varying = true;
        break;
      }
  }
  if (!any_varying)
    throw ConfigError("isolation_forest: constant feature matrix, splits impossible");

  const int depth_cap = static_cast<int>(
      std::ceil(std::log2(static_cast<double>(subsample))));

  NoveltyModel model;
  model.n_trees = n_trees;
  model.subsample_size = subsample;
  model.feature_arity = k;
  model.trees.resize(n_trees);

  const Rng root(seed);
  const std::ptrdiff_t nt = static_cast<std::ptrdiff_t>(n_trees);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(par::thread_count_for(n_trees))
#endif
  for (std::ptrdiff_t t = 0; t < nt; ++t) {
    Rng rng = root.child(static_cast<std::uint64_t>(t));
    IsoTree tree;
    std::vector<BuildFrame> stack;
    {
      auto rows32 = rng.sample_without_replacement(n, subsample);
      std::vector<std::uint32_t> rows(rows32.begin(), rows32.end());
      tree.nodes.emplace_back();
      stack.push_back({std::move(rows), 0, 0});
    }
    while (!stack.empty()) {
      BuildFrame fr = std::move(stack.back());
      stack.pop_back();
      IsoNode& node = tree.nodes[fr.node];
      node.size = static_cast<std::uint32_t>(fr.rows.size());
      if (fr.rows.size() <= 1 || fr.depth >= depth_cap) continue;

      // Dimensions that still vary within this node.
      std::vector<std::size_t> valid;
      for (std::size_t f = 0; f < k; ++f) {
        double lo = d.feature(fr.rows[0], f), hi = lo;
        for (std::uint32_t r : fr.rows) {
          lo = std::min(lo, d.feature(r, f));
          hi = std::max(hi, d.feature(r, f));
        }
        if (hi > lo) valid.push_back(f);
      }
      if (valid.empty()) continue;

      const std::size_t f = valid[rng.uniform_index(valid.size())];
      double lo = d.feature(fr.rows[0], f), hi = lo;
      for (std::uint32_t r : fr.rows) {
        lo = std::min(lo, d.feature(r, f));
        hi = std::max(hi, d.feature(r, f));
      }
      const double split = rng.uniform(lo, hi);

      std::vector<std::uint32_t> left_rows, right_rows;
      for (std::uint32_t r : fr.rows)
        (d.feature(r, f) < split ? left_rows : right_rows).push_back(r);
      if (left_rows.empty() || right_rows.empty()) continue;

      node.feature = static_cast<int>(f);
      node.threshold = split;
      node.left = static_cast<int>(tree.nodes.size());
      node.right = node.left + 1;
      tree.nodes.emplace_back();
      tree.nodes.emplace_back();
      const int node_left = tree.nodes[fr.node].left;  // reference invalidated by growth
      stack.push_back({std::move(right_rows), fr.depth + 1, node_left + 1});
      stack.push_back({std::move(left_rows), fr.depth + 1, node_left});
    }
    model.trees[t] = std::move(tree);
  }
  return model;
}

std::vector<double> novelty_scores(const NoveltyModel& m, const Dataset& d) {
  if (d.cols() != m.feature_arity) throw ConfigError("novelty_scores: feature arity mismatch");
  const double norm = iforest_c(m.subsample_size);
  std::vector<double> out(d.rows());
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(d.rows());
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(par::thread_count_for(d.rows()))
#endif
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto x = d.row(static_cast<std::size_t>(i));
    double total_path = 0;
    for (const auto& tree : m.trees) {
      int node = 0;
      int depth = 0;
      while (tree.nodes[node].feature >= 0) {
        node = x[static_cast<std::size_t>(tree.nodes[node].feature)] < tree.nodes[node].threshold
                   ? tree.nodes[node].left
                   : tree.nodes[node].right;
        ++depth;
      }
      total_path += depth + iforest_c(tree.nodes[node].size);
    }
    const double avg_path = total_path / static_cast<double>(m.trees.size());
    out[i] = std::pow(2.0, -avg_path / norm);
  }
  return out;
}

}  // namespace biaslab
