#pragma once

// Building blocks shared by the fixed-weight EM, the gamma-weight EM and the
// component-wise MML sweep. Not part of the public API.

#include "wdmix/core.hpp"

namespace wdmix::detail {

/// Squared Mahalanobis distance of every point to component k, written into
/// column k of `out` (n x K).
void mahalanobis_column(const Matrix& points, const GaussianComponent& component, Eigen::Ref<Vector> out);
Matrix mahalanobis_matrix(const Matrix& points, const MixtureModel& model);

/// log N(x_i; mu, Sigma / w_i) from precomputed distances.
void log_scaled_gauss_column(const Vector& mahalanobis, double log_det, int dim, const Vector& w,
                             Eigen::Ref<Vector> out);

/// Pearson VII log density per point with per-point shape `alpha` and scale
/// `beta`; `log_gamma_ratio` holds lgamma(alpha_i + d/2) - lgamma(alpha_i).
void log_pearson_column(const Vector& mahalanobis, double log_det, int dim, const Vector& alpha,
                        const Eigen::Ref<const Vector>& beta, const Vector& log_gamma_ratio,
                        Eigen::Ref<Vector> out);

Vector log_gamma_ratio(const Vector& alpha, int dim);

/// Adds log pi_k to each column of `log_density`, normalises every row with
/// log-sum-exp into `eta` and returns sum_i log sum_k pi_k p(x_i | k).
/// Components with pi_k = 0 receive exactly zero responsibility.
/// Throws DegenerateRow when a point has no finite density under any
/// component.
double normalize_rows(const Matrix& log_density, const Vector& proportions, Matrix& eta);

/// Precomputed per-dataset quantities for the covariance updates.
struct UpdateContext {
  const Matrix& points;
  CovarianceShape shape;
  double fallback_floor;
  Matrix global_covariance;

  UpdateContext(const Matrix& pts, CovarianceShape s);
};

/// Closed-form update of one component:
///   mu = sum_i c_i r_i x_i / sum_i c_i r_i,
///   Sigma = sum_i c_i r_i (x_i - mu)(x_i - mu)^T / sum_i r_i,
/// with c the per-point weights and r the responsibility column.
GaussianComponent weighted_component_update(const UpdateContext& ctx, const Eigen::Ref<const Vector>& resp,
                                            const Eigen::Ref<const Vector>& weight);

/// Full M-step for plain (non-MML) fits. `weights` is n x 1 (shared by all
/// components) or n x K. Components whose responsibility mass falls below
/// 1e-10 n are re-seeded at the point with the lowest maximum responsibility
/// with the global covariance and proportion 1/n before renormalisation.
MixtureModel weighted_m_step(const UpdateContext& ctx, const Matrix& eta, const Matrix& weights);

/// True when the column sum counts as an empty component.
bool is_empty_component(double resp_sum, std::size_t n);

}  // namespace wdmix::detail

namespace wdmix::detail {

/// Column k of the per-component log density used by the E-Z step.
/// Fixed weights: log N(x_i; mu, Sigma / w_i). Gamma weights: Pearson VII
/// with the prior (alpha_i, beta_i), or, when `posterior_shape` is set, with
/// the gamma posterior a_i = alpha_i + d/2, b_ik = beta_i + m_ik / 2 at the
/// same parameters. Also writes the weight means a_i / b_ik (or w_i) into
/// `weight_mean`.
struct DensityInputs {
  const WeightState& weights;
  Vector lg_prior;
  Vector lg_posterior;
  Vector post_a;
  bool posterior_shape = false;

  DensityInputs(const WeightState& w, int dim, bool posterior);
};

void component_log_density(const DensityInputs& in, const Vector& mahalanobis, const GaussianComponent& component,
                           Eigen::Ref<Vector> log_density, Eigen::Ref<Vector> weight_mean);

}  // namespace wdmix::detail
