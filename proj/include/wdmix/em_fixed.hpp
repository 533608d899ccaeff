#pragma once

#include <functional>

#include "wdmix/core.hpp"

namespace wdmix {

struct EmConfig {
  int max_iter = 400;
  /// Stop once |LL_r - LL_{r-1}| / |LL_r| drops below this.
  double rel_tol = 0.01;
  /// Observer invoked after every M-step with the 1-based iteration and the
  /// freshly updated model.
  std::function<void(int, const MixtureModel&)> on_iteration;
};

/// E-step with per-point weights held fixed:
///   eta_ik proportional to pi_k N(x_i; mu_k, Sigma_k / w_i).
Responsibilities fwd_e_step(const Dataset& data, const MixtureModel& model, const Vector& weights);

/// Observed-data log-likelihood sum_i log sum_k pi_k N(x_i; mu_k, Sigma_k / w_i).
double fwd_log_likelihood(const Dataset& data, const MixtureModel& model, const Vector& weights);

/// Closed-form M-step. Means are weighted by w_i eta_ik; the covariance
/// denominator is sum_i eta_ik without the weights.
MixtureModel fwd_m_step(const Dataset& data, const Responsibilities& resp, const Vector& weights,
                        CovarianceShape shape = CovarianceShape::Full);

/// Expected complete-data log-likelihood up to parameter-free constants:
///   sum_ik eta_ik (log pi_k - logdet(Sigma_k)/2 - w_i/2 (x_i-mu_k)^T Sigma_k^{-1} (x_i-mu_k)).
/// Components with pi_k = 0 are skipped.
double fwd_q_function(const Dataset& data, const MixtureModel& model, const Responsibilities& resp,
                      const Vector& weights);

FitReport fit_fwd(const Dataset& data, const MixtureModel& initial, const Vector& weights,
                  const EmConfig& config = {});

/// Standard Gaussian-mixture EM: fit_fwd with every weight equal to one.
FitReport fit_gmm(const Dataset& data, const MixtureModel& initial, const EmConfig& config = {});

}  // namespace wdmix
