#pragma once

#include <vector>

#include "biaslab/dataset.hpp"

namespace biaslab {

// One Gaussian mixture component: weight, mean vector, covariance (row-major
// k x k, symmetric PSD).
struct MixtureComponent {
  double weight = 1.0;
  std::vector<double> mean;
  std::vector<double> cov;
};

// Class-conditional Gaussian mixtures for good (y=0) and bad (y=1)
// applicants plus the population bad rate.
struct MixtureSpec {
  std::size_t dim = 0;
  double bad_rate = 0.3;
  std::vector<MixtureComponent> good;
  std::vector<MixtureComponent> bad;

  // Weights sum to 1 per class (1e-9); every covariance passes a symmetric
  // PSD check (Cholesky succeeds with jitter <= 1e-8). Throws ConfigError.
  void validate() const;
};

// MNAR control: features generated but withheld from every scorecard, and
// the fraction of acceptance decisions replaced per batch. overwrite_rate=0
// reduces exactly to MAR.
struct MnarSpec {
  std::vector<std::size_t> hidden_dims;
  double overwrite_rate = 0.0;

  void validate(std::size_t k) const;
};

// Labels drawn Bernoulli(bad_rate), features from the class-conditional
// mixture via component sampling and a Cholesky transform. No accept flags.
Dataset sample_applicants(const MixtureSpec& spec, std::size_t n, RngSeed seed);

// Random symmetric matrix with entries uniform in [-range_max, range_max],
// projected to PSD by clipping eigenvalues at 1e-6, then scaled to unit
// diagonal. Returned row-major k x k.
std::vector<double> random_covariances(std::size_t k, double range_max, RngSeed seed);

// Swaps ceil(overwrite_rate * #accepted) random accepts for the rejected
// rows with the lowest hidden-feature values. Acceptance count is preserved
// exactly; ranking uses the first hidden dimension.
std::vector<std::int8_t> apply_mnar(const std::vector<std::int8_t>& decisions,
                                    const Dataset& batch, const MnarSpec& mnar, RngSeed seed);

// Drops the hidden dimensions; the view every scorecard sees.
Dataset mask_features(const Dataset& d, const std::vector<std::size_t>& hidden_dims);

// Desk-scale default population: k=3, two components per class, moderate
// class overlap. cov_range feeds random_covariances per component.
MixtureSpec default_mixture(std::size_t k = 3, double bad_rate = 0.3, double cov_range = 0.4,
                            RngSeed seed = {20240101, 0});

// Same means and weights, covariances regenerated at a new range (the
// classification-complexity knob of the sensitivity study).
MixtureSpec with_cov_range(const MixtureSpec& spec, double cov_range, RngSeed seed);

// MNAR population: the last dimension is an omitted variable, independent
// of the visible features and carrying its own class signal, so acceptance
// decisions driven by it cannot be explained by what scorecards see.
MixtureSpec default_mnar_mixture(std::size_t k = 3, double bad_rate = 0.3,
                                 double cov_range = 0.4, RngSeed seed = {20240102, 0});

}  // namespace biaslab
