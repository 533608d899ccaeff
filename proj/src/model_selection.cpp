#include "wdmix/model_selection.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "posterior.hpp"
#include "wdmix/initialization.hpp"

namespace wdmix {

namespace {

// Expected complete-data log-likelihood from precomputed distances and
// per-component weight means, over components with positive proportion.
double expected_complete_ll(const Matrix& eta, const Matrix& mah, const Matrix& weight_mean, const Vector& pi,
                            const std::vector<GaussianComponent>& comps) {
  double q = 0.0;
  for (Eigen::Index k = 0; k < pi.size(); ++k) {
    if (!(pi(k) > 0.0)) continue;
    const double base = std::log(pi(k)) - 0.5 * comps[static_cast<std::size_t>(k)].log_det();
    q += (eta.col(k).array() * (base - 0.5 * weight_mean.col(k).array() * mah.col(k).array())).sum();
  }
  return q;
}

double length_from_parts(double q, const Vector& pi, int free_params, std::size_t n) {
  int k_plus = 0;
  double log_pi_sum = 0.0;
  for (Eigen::Index k = 0; k < pi.size(); ++k) {
    if (pi(k) > 0.0) {
      ++k_plus;
      log_pi_sum += std::log(pi(k));
    }
  }
  if (k_plus == 0) throw Error(ErrorCode::NoActiveComponents, "message length needs at least one active component");
  const double M = free_params;
  return 0.5 * M * log_pi_sum - q + 0.5 * k_plus * (M + 1.0) * (1.0 + std::log(static_cast<double>(n) / 12.0));
}

int count_active(const std::vector<bool>& active) {
  int c = 0;
  for (bool a : active) c += a ? 1 : 0;
  return c;
}

}  // namespace

double message_length(const Dataset& data, const MixtureModel& model, const Responsibilities& resp,
                      const WeightState& weights) {
  if (model.dim() != data.dim()) throw Error(ErrorCode::DimensionMismatch, "model and data dimensions differ");
  if (resp.size() != data.size() || resp.num_components() != model.num_components()) {
    throw Error(ErrorCode::DimensionMismatch, "responsibilities do not match data and model");
  }
  const Matrix mah = detail::mahalanobis_matrix(data.points(), model);
  Matrix weight_mean;
  if (weights.mode == WeightMode::Fixed) {
    if (weights.size() != data.size()) throw Error(ErrorCode::LengthMismatch, "one weight per point required");
    weight_mean = weights.fixed_w.replicate(1, model.num_components());
  } else {
    if (weights.post_mean.rows() != mah.rows() || weights.post_mean.cols() != mah.cols()) {
      throw Error(ErrorCode::DimensionMismatch, "posterior weight means do not match the model");
    }
    weight_mean = weights.post_mean;
  }
  const double q = expected_complete_ll(resp.eta, mah, weight_mean, model.proportions(), model.components());
  return length_from_parts(q, model.proportions(), model.free_params_per_component(), data.size());
}

Vector mml_pi_update(const Vector& column_sums, int free_params) {
  const double half_m = 0.5 * free_params;
  Vector support(column_sums.size());
  for (Eigen::Index k = 0; k < column_sums.size(); ++k) {
    if (column_sums(k) < 0.0) throw Error(ErrorCode::InvalidArgument, "column sums must be non-negative");
    support(k) = std::max(0.0, column_sums(k) - half_m);
  }
  const double total = support.sum();
  if (!(total > 0.0)) throw Error(ErrorCode::AllAnnihilated, "no component has support above M/2");
  return support / total;
}

SelectionResult select_model(const Dataset& data, const MixtureModel& initial, const WeightState& weights,
                             const MmlConfig& config) {
  if (config.k_low < 1 || config.k_low > config.k_high) {
    throw Error(ErrorCode::InvalidArgument, "require 1 <= k_low <= k_high");
  }
  if (initial.num_components() != config.k_high) {
    throw Error(ErrorCode::InvalidArgument, "initial model must have k_high components");
  }
  if (initial.dim() != data.dim()) throw Error(ErrorCode::DimensionMismatch, "model and data dimensions differ");
  if (weights.size() != data.size()) throw Error(ErrorCode::LengthMismatch, "one weight entry per point required");
  if (!(config.epsilon >= 0.0)) throw Error(ErrorCode::InvalidArgument, "epsilon must be non-negative");

  const auto n = static_cast<Eigen::Index>(data.size());
  const int K = config.k_high;
  const int M = initial.free_params_per_component();
  const detail::UpdateContext ctx(data.points(), initial.shape());

  std::vector<GaussianComponent> comps = initial.components();
  Vector pi = initial.proportions();
  std::vector<bool> active(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k) active[static_cast<std::size_t>(k)] = pi(k) > 0.0;

  // The first E-Z uses the prior; every column refreshed after a parameter
  // update uses the configured shape.
  const detail::DensityInputs prior_in(weights, data.dim(), false);
  const detail::DensityInputs sweep_in(weights, data.dim(), config.ez_variant == EzVariant::Posterior);

  Matrix mah(n, K), log_density(n, K), weight_mean(n, K), eta;
  auto refresh = [&](int k, const detail::DensityInputs& in) {
    const auto& c = comps[static_cast<std::size_t>(k)];
    detail::mahalanobis_column(data.points(), c, mah.col(k));
    detail::component_log_density(in, mah.col(k), c, log_density.col(k), weight_mean.col(k));
  };
  for (int k = 0; k < K; ++k) refresh(k, prior_in);

  auto e_z = [&] { detail::normalize_rows(log_density, pi, eta); };
  auto current_length = [&] {
    return length_from_parts(expected_complete_ll(eta, mah, weight_mean, pi, comps), pi, M, data.size());
  };


  std::vector<double> trace;
  std::vector<int> k_plus_history;
  std::vector<AnnihilationEvent> log;
  std::vector<MmlCheckpoint> checkpoints;

  struct Best {
    std::vector<GaussianComponent> comps;
    Vector pi;
    Matrix eta;
    Matrix weight_mean;
    Matrix mah;
    double length;
  };
  std::optional<Best> best;

  e_z();
  double length = current_length();
  trace.push_back(length);
  k_plus_history.push_back(count_active(active));
  int sweep = 0;
  bool all_converged = true;

  while (true) {
    bool inner_converged = false;
    for (int inner = 0; inner < config.max_outer_iter; ++inner) {
      ++sweep;
      for (int k = 0; k < K; ++k) {
        if (!active[static_cast<std::size_t>(k)]) continue;
        e_z();
        const Vector updated = mml_pi_update(eta.colwise().sum().transpose(), M);
        const double before = pi(k);
        pi(k) = updated(k);
        pi /= pi.sum();
        if (pi(k) > 0.0) {
          comps[static_cast<std::size_t>(k)] = detail::weighted_component_update(ctx, eta.col(k), weight_mean.col(k));
          refresh(k, sweep_in);
        } else {
          active[static_cast<std::size_t>(k)] = false;
          log.push_back({sweep, k, before, AnnihilationCause::Starved});
        }
      }
      e_z();
      const double next = current_length();
      trace.push_back(next);
      k_plus_history.push_back(count_active(active));
      const double change = std::abs(next - length);
      const double scale = std::abs(length);
      length = next;
      if (change < config.epsilon * scale) {
        inner_converged = true;
        break;
      }
    }
    if (!inner_converged) all_converged = false;

    const int k_plus = count_active(active);
    checkpoints.push_back({sweep, k_plus, length, inner_converged});
    if (!best || length < best->length) best = Best{comps, pi, eta, weight_mean, mah, length};

    if (k_plus - 1 < config.k_low) break;
    int victim = -1;
    for (int k = 0; k < K; ++k) {
      if (active[static_cast<std::size_t>(k)] && (victim < 0 || pi(k) < pi(victim))) victim = k;
    }
    log.push_back({sweep, victim, pi(victim), AnnihilationCause::Forced});
    active[static_cast<std::size_t>(victim)] = false;
    pi(victim) = 0.0;
    pi /= pi.sum();
    e_z();
    length = current_length();
  }

  auto finish_weights = [&](const Matrix& wm, const Matrix& distances, const Matrix& resp) {
    WeightState w = weights;
    if (weights.mode == WeightMode::Random) {
      w.post_a = sweep_in.post_a;
      w.post_b = (0.5 * distances).colwise() + weights.prior_beta;
      w.post_mean = wm;
      w.marginal_mean = resp.cwiseProduct(wm).rowwise().sum();
    }
    return w;
  };

  FitReport report{std::move(trace),
                   MixtureModel(comps, pi),
                   Responsibilities{eta},
                   finish_weights(weight_mean, mah, eta),
                   sweep,
                   all_converged,
                   std::move(log),
                   std::move(k_plus_history)};
  WeightState best_weights = finish_weights(best->weight_mean, best->mah, best->eta);
  return SelectionResult{std::move(report),
                         MixtureModel(std::move(best->comps), std::move(best->pi)),
                         std::move(best_weights),
                         Responsibilities{std::move(best->eta)},
                         best->length,
                         std::move(checkpoints)};
}

SelectionResult select_model(const Dataset& data, const WeightState& weights, const MmlConfig& config,
                             std::uint64_t seed, CovarianceShape shape) {
  return select_model(data, initial_model(data, config.k_high, seed, shape), weights, config);
}

}  // namespace wdmix
