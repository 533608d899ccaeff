#pragma once

#include <cstdint>
#include <vector>

#include "wdmix/assignment.hpp"
#include "wdmix/core.hpp"

namespace wdmix {

struct MmlConfig {
  int k_high = 15;
  int k_low = 1;
  /// Inner loop stops once |LEN_r - LEN_{r-1}| / |LEN_{r-1}| < epsilon.
  double epsilon = 1e-5;
  /// Cap on component-wise sweeps per inner loop. Hitting it marks the run as
  /// not converged but still checkpoints the current model.
  int max_outer_iter = 400;
  /// Shape used by the E-Z step. Posterior feeds the previous E-W result
  /// (a_i, b_ik) back into the Pearson VII density; Prior keeps the prior
  /// (alpha_i, beta_i) as in the plain gamma-weight EM. Ignored for fixed weights.
  EzVariant ez_variant = EzVariant::Posterior;
};

/// Message length of a model whose zero-proportion components are excluded:
///   (M/2) sum_{k in K+} log pi_k - Q + K+ (M+1)/2 (1 + log(n/12)),
/// with Q the expected complete-data log-likelihood (gamma weights: weighted by
/// post_mean_ik; fixed weights: by w_i) evaluated at `model`.
/// Throws NoActiveComponents when every proportion is zero.
double message_length(const Dataset& data, const MixtureModel& model, const Responsibilities& resp,
                      const WeightState& weights);

/// pi_k = max(0, s_k - M/2) / sum_l max(0, s_l - M/2). Throws AllAnnihilated
/// when no column sum exceeds M/2.
Vector mml_pi_update(const Vector& column_sums, int free_params);

struct MmlCheckpoint {
  int sweep = 0;
  int k_plus = 0;
  double length = 0.0;
  bool converged = false;
};

struct SelectionResult {
  /// objective_trace holds the message length of the initial model followed
  /// by one entry per sweep, k_plus_history the matching |K+|; final_*
  /// describe the state when the outer loop stopped.
  FitReport report;
  /// Minimum-length model; annihilated components keep proportion zero.
  MixtureModel best_model;
  WeightState best_weights;
  Responsibilities best_responsibilities;
  double best_length = 0.0;
  /// One entry per inner-loop convergence, in order.
  std::vector<MmlCheckpoint> checkpoints;
};

/// Component-wise EM with annihilation. `initial` must have k_high
/// components. Gamma-weight priors run the weighted-data variant; fixed
/// weights run the same sweep on the fixed-weight objective.
SelectionResult select_model(const Dataset& data, const MixtureModel& initial, const WeightState& weights,
                             const MmlConfig& config = {});

/// Same, starting from a K-means initialisation with k_high clusters.
SelectionResult select_model(const Dataset& data, const WeightState& weights, const MmlConfig& config,
                             std::uint64_t seed, CovarianceShape shape = CovarianceShape::Full);

}  // namespace wdmix
