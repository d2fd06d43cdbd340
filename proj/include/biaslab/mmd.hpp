#pragma once

#include <optional>

#include "biaslab/dataset.hpp"

namespace biaslab {

// Unbiased squared maximum mean discrepancy with a Gaussian kernel.
// Equal-size samples use the paired U-statistic (exactly zero when a == b);
// unequal sizes fall back to the general unbiased form. The bandwidth
// defaults to the median pairwise distance on the pooled sample.
//
// mmd() runs the OpenMP kernel; mmd_serial() is the reference kept for
// testing and benchmarks. Both accumulate per-row partials in fixed order,
// so their results are bit-identical for any thread count.
double mmd(const Dataset& a, const Dataset& b,
           std::optional<double> bandwidth = std::nullopt);
double mmd_serial(const Dataset& a, const Dataset& b,
                  std::optional<double> bandwidth = std::nullopt);

// Median pairwise Euclidean distance over the pooled rows (lower median);
// falls back to 1.0 when the median distance is zero.
double median_heuristic_bandwidth(const Dataset& a, const Dataset& b);

}  // namespace biaslab
