#pragma once

#include <cmath>
#include <span>

#include "wdmix/core.hpp"

namespace wdmix {

/// (x - mu)^T Sigma^{-1} (x - mu) through the cached Cholesky factor.
double mahalanobis_sq(const Eigen::Ref<const Vector>& x, const GaussianComponent& component);

/// Squared Mahalanobis distance of every row of `points` (n x d) to the
/// component, using the active SIMD kernels.
void mahalanobis_sq_batch(const Matrix& points, const GaussianComponent& component, std::span<double> out);
Vector mahalanobis_sq_batch(const Matrix& points, const GaussianComponent& component);

/// log N(x; mu, Sigma / w). Throws NonPositiveWeight for w <= 0.
double log_gauss_scaled(const Eigen::Ref<const Vector>& x, const GaussianComponent& component, double w);

/// Log density of the Pearson type VII distribution, the marginal of
/// N(x; mu, Sigma / w) under w ~ Gamma(alpha, beta):
///   lgamma(alpha + d/2) - lgamma(alpha) - logdet(Sigma)/2 - (d/2) log(2 pi beta)
///   - (alpha + d/2) log(1 + m / (2 beta)),  m = squared Mahalanobis distance.
double log_pearson7(const Eigen::Ref<const Vector>& x, const GaussianComponent& component, double alpha,
                    double beta);

/// log Gamma(w; alpha, beta) with rate parameterisation.
double log_gamma_pdf(double w, double alpha, double beta);

/// log sum_j exp(v_j), shifted by the maximum. Returns -inf when every entry
/// is -inf; throws EmptyInput for an empty span.
double log_sum_exp(std::span<const double> values);

inline constexpr double kLogTwoPi = 1.8378770664093454835606594728112;

/// Same density evaluated from a precomputed squared Mahalanobis distance.
/// `log_gamma_ratio` is lgamma(alpha + d/2) - lgamma(alpha).
inline double log_pearson7_from_distance(double mahalanobis, double log_det, int dim, double alpha,
                                         double beta, double log_gamma_ratio) {
  const double half_d = 0.5 * dim;
  return log_gamma_ratio - 0.5 * log_det - half_d * (kLogTwoPi + std::log(beta)) -
         (alpha + half_d) * std::log1p(mahalanobis / (2.0 * beta));
}

}  // namespace wdmix
