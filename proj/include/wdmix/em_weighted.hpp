#pragma once

#include "wdmix/core.hpp"
#include "wdmix/em_fixed.hpp"

namespace wdmix {

/// E-Z step: eta_ik proportional to pi_k PearsonVII(x_i; mu_k, Sigma_k, alpha_i, beta_i)
/// using the prior gamma parameters of `weights` (Random mode).
Responsibilities wd_e_z_step(const Dataset& data, const MixtureModel& model, const WeightState& weights);

/// E-W step: a_i = alpha_i + d/2, b_ik = beta_i + m_ik / 2 and
/// post_mean_ik = a_i / b_ik, where m_ik is the squared Mahalanobis distance of
/// x_i to component k of `model`. The prior is left untouched.
WeightState wd_e_w_step(const Dataset& data, const MixtureModel& model, const WeightState& weights);

/// w_i = sum_k eta_ik * post_mean_ik.
Vector marginal_weight_means(const WeightState& weights, const Responsibilities& resp);

/// M-step of the fixed-weight form with w_i replaced by post_mean_ik.
MixtureModel wd_m_step(const Dataset& data, const Responsibilities& resp, const WeightState& weights,
                       CovarianceShape shape = CovarianceShape::Full);

/// Marginal log-likelihood sum_i log sum_k pi_k PearsonVII(x_i; ., alpha_i, beta_i).
double wd_log_likelihood(const Dataset& data, const MixtureModel& model, const WeightState& weights);

/// Expected complete-data log-likelihood up to parameter-free constants:
///   sum_ik eta_ik (log pi_k - logdet(Sigma_k)/2 - post_mean_ik/2 m_ik),
/// with m_ik measured under `model`. Components with pi_k = 0 are skipped.
double wd_q_function(const Dataset& data, const MixtureModel& model, const Responsibilities& resp,
                     const WeightState& weights);

/// Alternates E-Z, E-W and M steps. objective_trace holds the Pearson VII
/// marginal log-likelihood; final_weights carries the posterior and the
/// marginal means used for outlier scoring.
FitReport fit_wd(const Dataset& data, const MixtureModel& initial, const WeightState& priors,
                 const EmConfig& config = {});

}  // namespace wdmix
