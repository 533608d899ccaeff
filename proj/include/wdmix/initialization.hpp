#pragma once

#include <cstdint>
#include <vector>

#include "wdmix/core.hpp"

namespace wdmix {

struct KMeansResult {
  std::vector<int> labels;
  Matrix centers;  ///< K x d
  double inertia = 0.0;
};

/// Lloyd's algorithm from k-means++ seeds; the best of `restarts` runs by
/// within-cluster sum of squares. Deterministic for a given seed.
/// Throws KTooLarge when K exceeds the number of points.
KMeansResult kmeans(const Dataset& data, int K, int restarts, std::uint64_t seed, int max_iter = 300);

/// pi_k = n_k / n, mu_k = cluster mean, Sigma_k = cluster ML covariance plus
/// the ridge floor. Labels must lie in [0, K); K defaults to max label + 1.
/// Throws EmptyCluster when some label in [0, K) has no member.
MixtureModel params_from_clustering(const Dataset& data, const std::vector<int>& labels,
                                    CovarianceShape shape = CovarianceShape::Full, int K = -1);

/// K-means (10 restarts) followed by params_from_clustering.
MixtureModel initial_model(const Dataset& data, int K, std::uint64_t seed,
                           CovarianceShape shape = CovarianceShape::Full, int restarts = 10);

/// w_i = sum over the q nearest neighbours j != i of exp(-|x_i - x_j|^2 / sigma).
/// Weights that underflow are raised to kMinWeight so they stay usable as
/// gamma prior parameters. Throws QTooLarge unless q < n.
Vector init_weights_knn(const Dataset& data, int q, double sigma);

inline constexpr double kMinWeight = 1e-8;

struct GammaPriors {
  Vector alpha;
  Vector beta;
};

/// alpha_i = w_i^2, beta_i = w_i: prior mean w_i and variance 1.
GammaPriors gamma_priors_from_weights(const Vector& w);

/// WeightState::random built from gamma_priors_from_weights.
WeightState weight_priors(const Vector& w);

}  // namespace wdmix
