#include "wdmix/assignment.hpp"

#include "posterior.hpp"

namespace wdmix {

PosteriorPass posterior_pass(const Dataset& data, const MixtureModel& model, const WeightState& weights,
                             EzVariant variant) {
  if (model.dim() != data.dim()) throw Error(ErrorCode::DimensionMismatch, "model and data dimensions differ");
  if (weights.size() != data.size()) throw Error(ErrorCode::LengthMismatch, "one weight entry per point required");

  const auto n = static_cast<Eigen::Index>(data.size());
  const int K = model.num_components();
  const detail::DensityInputs in(weights, data.dim(), variant == EzVariant::Posterior);
  Matrix log_density(n, K);
  Matrix weight_mean(n, K);
  const Matrix mah = detail::mahalanobis_matrix(data.points(), model);
  for (int k = 0; k < K; ++k) {
    detail::component_log_density(in, mah.col(k), model.component(k), log_density.col(k), weight_mean.col(k));
  }

  PosteriorPass pass;
  pass.log_likelihood = detail::normalize_rows(log_density, model.proportions(), pass.resp.eta);
  pass.weights = weights;
  if (weights.mode == WeightMode::Random) {
    pass.weights.post_a = in.post_a;
    pass.weights.post_b = (0.5 * mah).colwise() + weights.prior_beta;
    pass.weights.post_mean = std::move(weight_mean);
    pass.weights.marginal_mean = pass.resp.eta.cwiseProduct(pass.weights.post_mean).rowwise().sum();
  }
  return pass;
}

}  // namespace wdmix
