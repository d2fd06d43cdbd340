// Gradient-boosted trees on logistic loss with second-order (Newton) leaf
// weights and exact greedy splits. Split search runs level-wise over
// presorted feature orders; the per-feature scan parallelizes with OpenMP
// and reduces in fixed feature order, so results do not depend on the
// thread count.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "biaslab/common.hpp"
#include "biaslab/parallel.hpp"
#include "biaslab/scorecard.hpp"

namespace biaslab {

namespace {

constexpr double kHessEps = 1e-6;
constexpr double kMinGain = 1e-12;

double log1pexp(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double sigmoid(double z) {
  return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

struct NodeStats {
  double g = 0, h = 0;
  std::uint32_t count = 0;
  int depth = 0;
};

struct SplitChoice {
  double gain = 0;
  int feature = -1;
  double threshold = 0;
};

}  // namespace

Scorecard fit_gbt(const Dataset& d, const FitOptions& opts) {
  opts.validate(d.rows());
  if (!d.has_labels() || !d.fully_labeled())
    throw ConfigError("fit_gbt: every row must be labeled");
  const std::size_t n = d.rows(), k = d.cols();
  bool has0 = false, has1 = false;
  for (std::size_t i = 0; i < n; ++i) (d.labels[i] == 1 ? has1 : has0) = true;
  if (!has0 || !has1) throw ConfigError("fit_gbt: single-class data");

  std::vector<double> w(n, 1.0);
  if (!opts.sample_weights.empty()) {
    double sum = 0;
    for (double v : opts.sample_weights) sum += v;
    for (std::size_t i = 0; i < n; ++i)
      w[i] = opts.sample_weights[i] * static_cast<double>(n) / sum;
  }
  const double inv_n = 1.0 / static_cast<double>(n);

  double base_rate = 0;
  for (std::size_t i = 0; i < n; ++i) base_rate += w[i] * d.labels[i];
  base_rate = std::clamp(base_rate * inv_n, 1e-12, 1.0 - 1e-12);
  const double base_margin = std::log(base_rate / (1.0 - base_rate));

  // Presorted row order per feature, ties by row index.
  std::vector<std::vector<std::uint32_t>> order(k);
  for (std::size_t f = 0; f < k; ++f) {
    order[f].resize(n);
    std::iota(order[f].begin(), order[f].end(), 0u);
    std::stable_sort(order[f].begin(), order[f].end(), [&](std::uint32_t a, std::uint32_t b) {
      return d.feature(a, f) < d.feature(b, f);
    });
  }

  std::vector<double> margin(n, base_margin), grad(n), hess(n);
  auto train_loss = [&] {
    double s = 0;
    for (std::size_t i = 0; i < n; ++i)
      s += w[i] * (log1pexp(margin[i]) - d.labels[i] * margin[i]);
    return s * inv_n;
  };

  GbtModel model;
  model.base_margin = base_margin;
  model.staged_loss.push_back(train_loss());

  Rng tree_rng(opts.seed);
  std::vector<std::int32_t> node_of(n);
  const std::size_t n_sub = opts.gbt.subsample < 1.0
                                ? static_cast<std::size_t>(std::floor(opts.gbt.subsample *
                                                                      static_cast<double>(n)))
                                : n;
  if (n_sub == 0) throw ConfigError("fit_gbt: subsample yields zero rows");

  for (std::size_t t = 0; t < opts.gbt.n_trees; ++t) {
    std::fill(node_of.begin(), node_of.end(), -1);
    if (n_sub < n) {
      Rng rng = tree_rng.child(t);
      for (std::size_t r : rng.sample_without_replacement(n, n_sub)) node_of[r] = 0;
    } else {
      std::fill(node_of.begin(), node_of.end(), 0);
    }

    NodeStats root;
    for (std::size_t i = 0; i < n; ++i) {
      const double p = sigmoid(margin[i]);
      grad[i] = w[i] * (p - d.labels[i]);
      hess[i] = w[i] * p * (1.0 - p);
      if (node_of[i] == 0) {
        root.g += grad[i];
        root.h += hess[i];
        ++root.count;
      }
    }

    GbtTree tree;
    tree.nodes.emplace_back();  // root placeholder
    std::vector<NodeStats> stats{root};

    for (std::size_t level = 0; level < opts.gbt.max_depth; ++level) {
      // Nodes eligible for a split at this level.
      std::vector<std::int32_t> cand;
      for (std::size_t nd = 0; nd < stats.size(); ++nd)
        if (tree.nodes[nd].feature == -1 && stats[nd].depth == static_cast<int>(level) &&
            stats[nd].count >= 2 && stats[nd].h >= 2.0 * opts.gbt.min_child_weight)
          cand.push_back(static_cast<std::int32_t>(nd));
      if (cand.empty()) break;

      std::vector<std::int32_t> slot_of(stats.size(), -1);
      for (std::size_t s = 0; s < cand.size(); ++s) slot_of[cand[s]] = static_cast<std::int32_t>(s);
      const std::size_t n_slots = cand.size();

      // best[f * n_slots + s]
      std::vector<SplitChoice> best(k * n_slots);
      const std::ptrdiff_t kk = static_cast<std::ptrdiff_t>(k);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(par::thread_count_for(k))
#endif
      for (std::ptrdiff_t f = 0; f < kk; ++f) {
        std::vector<double> cum_g(n_slots, 0.0), cum_h(n_slots, 0.0), last_val(n_slots, 0.0);
        std::vector<std::uint32_t> cum_n(n_slots, 0);
        for (std::uint32_t r : order[f]) {
          const std::int32_t nd = node_of[r];
          if (nd < 0 || slot_of[nd] < 0) continue;
          const std::size_t s = static_cast<std::size_t>(slot_of[nd]);
          const double v = d.feature(r, f);
          if (cum_n[s] > 0 && v > last_val[s]) {
            const double gl = cum_g[s], hl = cum_h[s];
            const double gr = stats[nd].g - gl, hr = stats[nd].h - hl;
            if (hl >= opts.gbt.min_child_weight && hr >= opts.gbt.min_child_weight) {
              const double gain = gl * gl / (hl + kHessEps) + gr * gr / (hr + kHessEps) -
                                  stats[nd].g * stats[nd].g / (stats[nd].h + kHessEps);
              auto& b = best[static_cast<std::size_t>(f) * n_slots + s];
              if (gain > b.gain) {
                b.gain = gain;
                b.feature = static_cast<int>(f);
                b.threshold = 0.5 * (last_val[s] + v);
              }
            }
          }
          cum_g[s] += grad[r];
          cum_h[s] += hess[r];
          ++cum_n[s];
          last_val[s] = v;
        }
      }

      // Reduce over features in index order: strict > keeps ties on the
      // lowest feature / lowest threshold.
      std::vector<SplitChoice> chosen(n_slots);
      for (std::size_t f = 0; f < k; ++f)
        for (std::size_t s = 0; s < n_slots; ++s)
          if (best[f * n_slots + s].gain > chosen[s].gain) chosen[s] = best[f * n_slots + s];

      bool any_split = false;
      for (std::size_t s = 0; s < n_slots; ++s) {
        const std::int32_t nd = cand[s];
        if (chosen[s].gain <= kMinGain || chosen[s].feature < 0) continue;
        any_split = true;
        const int left = static_cast<int>(tree.nodes.size());
        tree.nodes[nd].feature = chosen[s].feature;
        tree.nodes[nd].threshold = chosen[s].threshold;
        tree.nodes[nd].left = left;
        tree.nodes[nd].right = left + 1;
        tree.nodes.emplace_back();
        tree.nodes.emplace_back();
        NodeStats child;
        child.depth = stats[nd].depth + 1;
        stats.push_back(child);
        stats.push_back(child);
      }
      if (!any_split) break;

      for (std::size_t i = 0; i < n; ++i) {
        const std::int32_t nd = node_of[i];
        if (nd < 0 || slot_of[nd] < 0) continue;
        const auto& p = tree.nodes[nd];
        if (p.feature < 0) continue;
        const std::int32_t child = d.feature(i, static_cast<std::size_t>(p.feature)) <= p.threshold
                                       ? p.left
                                       : p.right;
        node_of[i] = child;
        stats[child].g += grad[i];
        stats[child].h += hess[i];
        ++stats[child].count;
      }
    }

    for (std::size_t nd = 0; nd < tree.nodes.size(); ++nd)
      if (tree.nodes[nd].feature < 0)
        tree.nodes[nd].leaf_value =
            -stats[nd].g / (stats[nd].h + kHessEps) * opts.gbt.learning_rate;

    for (std::size_t i = 0; i < n; ++i) margin[i] += tree.eval(d.row(i));
    model.trees.push_back(std::move(tree));
    model.staged_loss.push_back(train_loss());
  }

  Scorecard m;
  m.kind = LearnerKind::gbt;
  m.feature_arity = k;
  m.gbt = std::move(model);
  m.meta = {n, !opts.sample_weights.empty(), opts.seed};
  return m;
}

}  // namespace biaslab
