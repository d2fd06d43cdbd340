#include "biaslab/mmd.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "biaslab/common.hpp"
#include "biaslab/parallel.hpp"

namespace biaslab {

namespace {

double sq_dist(std::span<const double> x, std::span<const double> y) {
  double s = 0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double d = x[j] - y[j];
    s += d * d;
  }
  return s;
}

void check_inputs(const Dataset& a, const Dataset& b) {
  if (a.rows() == 0 || b.rows() == 0) throw ConfigError("mmd: empty sample");
  if (a.cols() != b.cols()) throw ConfigError("mmd: feature arity mismatch");
}

// Per-row partial sums, then a reduction in row order: the parallel and
// serial versions produce bit-identical values.
template <bool Parallel>
double mmd_impl(const Dataset& a, const Dataset& b, std::optional<double> bandwidth) {
  check_inputs(a, b);
  const double sigma = bandwidth ? *bandwidth : median_heuristic_bandwidth(a, b);
  if (!(sigma > 0)) throw ConfigError("mmd: bandwidth must be positive");
  const double inv = 1.0 / (2.0 * sigma * sigma);
  const auto kern = [inv](double d2) { return std::exp(-d2 * inv); };

  const std::ptrdiff_t m = static_cast<std::ptrdiff_t>(a.rows());
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(b.rows());

  if (m == n) {
    // Paired U-statistic: mean over i != j of
    // k(a_i,a_j) + k(b_i,b_j) - k(a_i,b_j) - k(a_j,b_i).
    std::vector<double> partial(m, 0.0);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(par::thread_count_for(m)) if (Parallel)
#endif
    for (std::ptrdiff_t i = 0; i < m; ++i) {
      double s = 0;
      for (std::ptrdiff_t j = 0; j < m; ++j) {
        if (j == i) continue;
        s += kern(sq_dist(a.row(i), a.row(j))) + kern(sq_dist(b.row(i), b.row(j))) -
             kern(sq_dist(a.row(i), b.row(j))) - kern(sq_dist(a.row(j), b.row(i)));
      }
      partial[i] = s;
    }
    double total = 0;
    for (double s : partial) total += s;
    return total / (static_cast<double>(m) * static_cast<double>(m - 1));
  }

  std::vector<double> part_aa(m, 0.0), part_ab(m, 0.0), part_bb(n, 0.0);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(par::thread_count_for(m)) if (Parallel)
#endif
  for (std::ptrdiff_t i = 0; i < m; ++i) {
    double saa = 0, sab = 0;
    for (std::ptrdiff_t j = 0; j < m; ++j)
      if (j != i) saa += kern(sq_dist(a.row(i), a.row(j)));
    for (std::ptrdiff_t j = 0; j < n; ++j) sab += kern(sq_dist(a.row(i), b.row(j)));
    part_aa[i] = saa;
    part_ab[i] = sab;
  }
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(par::thread_count_for(n)) if (Parallel)
#endif
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    double s = 0;
    for (std::ptrdiff_t j = 0; j < n; ++j)
      if (j != i) s += kern(sq_dist(b.row(i), b.row(j)));
    part_bb[i] = s;
  }
  double t_aa = 0, t_ab = 0, t_bb = 0;
  for (std::ptrdiff_t i = 0; i < m; ++i) {
    t_aa += part_aa[i];
    t_ab += part_ab[i];
  }
  for (std::ptrdiff_t i = 0; i < n; ++i) t_bb += part_bb[i];
  return t_aa / (static_cast<double>(m) * static_cast<double>(m - 1)) +
         t_bb / (static_cast<double>(n) * static_cast<double>(n - 1)) -
         2.0 * t_ab / (static_cast<double>(m) * static_cast<double>(n));
}

}  // namespace

double median_heuristic_bandwidth(const Dataset& a, const Dataset& b) {
  check_inputs(a, b);
  // Cap the rows entering the median to bound the O(N^2) distance list;
  // strided selection keeps it deterministic.
  constexpr std::size_t kCap = 2048;
  std::vector<std::span<const double>> rows;
  rows.reserve(a.rows() + b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) rows.push_back(a.row(i));
  for (std::size_t i = 0; i < b.rows(); ++i) rows.push_back(b.row(i));
  if (rows.size() > kCap) {
    const std::size_t stride = (rows.size() + kCap - 1) / kCap;
    std::vector<std::span<const double>> kept;
    for (std::size_t i = 0; i < rows.size(); i += stride) kept.push_back(rows[i]);
    rows = std::move(kept);
  }
  std::vector<double> dists;
  dists.reserve(rows.size() * (rows.size() - 1) / 2);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = i + 1; j < rows.size(); ++j)
      dists.push_back(std::sqrt(sq_dist(rows[i], rows[j])));
  if (dists.empty()) return 1.0;
  const std::size_t mid = (dists.size() - 1) / 2;
  std::nth_element(dists.begin(), dists.begin() + mid, dists.end());
  const double med = dists[mid];
  return med > 0 ? med : 1.0;
}

double mmd(const Dataset& a, const Dataset& b, std::optional<double> bandwidth) {
  return mmd_impl<true>(a, b, bandwidth);
}

double mmd_serial(const Dataset& a, const Dataset& b, std::optional<double> bandwidth) {
  return mmd_impl<false>(a, b, bandwidth);
}

}  // namespace biaslab
