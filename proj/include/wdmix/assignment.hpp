#pragma once

#include "wdmix/core.hpp"

namespace wdmix {

/// Which gamma shape feeds the Pearson VII density of the E-Z step.
enum class EzVariant {
  Prior,      ///< alpha_i, beta_i of the weight prior
  Posterior,  ///< a_i = alpha_i + d/2 and b_ik = beta_i + m_ik/2 at the current parameters
};

/// Responsibilities and weight posterior of a fitted model on a dataset.
struct PosteriorPass {
  Responsibilities resp;
  WeightState weights;
  double log_likelihood = 0.0;
};

/// One E step (E-Z and E-W for gamma weights) without touching the model.
/// Fixed weights give the scaled-Gaussian responsibilities; gamma weights
/// also fill post_a, post_b, post_mean and marginal_mean. This is the single
/// code path used to turn a stored model into hard assignments.
PosteriorPass posterior_pass(const Dataset& data, const MixtureModel& model, const WeightState& weights,
                             EzVariant variant = EzVariant::Prior);

}  // namespace wdmix
