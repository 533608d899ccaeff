#include "wdmix/em_weighted.hpp"

#include <cmath>

#include "posterior.hpp"

namespace wdmix {

namespace {

void check_random(const Dataset& data, const WeightState& w) {
  if (w.mode != WeightMode::Random) throw Error(ErrorCode::InvalidArgument, "weight state must be in Random mode");
  if (w.size() != data.size()) throw Error(ErrorCode::LengthMismatch, "one weight prior per point required");
}

void check_model(const Dataset& data, const MixtureModel& model) {
  if (model.dim() != data.dim()) throw Error(ErrorCode::DimensionMismatch, "model and data dimensions differ");
}

struct Posterior {
  Responsibilities resp;
  double log_likelihood = 0.0;
  WeightState weights;
};

Matrix pearson_log_density(const Matrix& mah, const MixtureModel& model, const WeightState& w,
                           const Vector& lg_ratio) {
  Matrix out(mah.rows(), mah.cols());
  for (int k = 0; k < model.num_components(); ++k) {
    const auto& c = model.component(k);
    detail::log_pearson_column(mah.col(k), c.log_det(), c.dim(), w.prior_alpha, w.prior_beta, lg_ratio, out.col(k));
  }
  return out;
}

WeightState posterior_weights(const Matrix& mah, int dim, const WeightState& prior) {
  WeightState w = prior;
  w.post_a = prior.prior_alpha.array() + 0.5 * dim;
  w.post_b = (0.5 * mah).colwise() + prior.prior_beta;
  w.post_mean = (1.0 / w.post_b.array()).colwise() * w.post_a.array();
  w.marginal_mean.resize(0);
  return w;
}

Posterior e_step(const Dataset& data, const MixtureModel& model, const WeightState& prior, const Vector& lg_ratio) {
  const Matrix mah = detail::mahalanobis_matrix(data.points(), model);
  Posterior p;
  p.log_likelihood =
      detail::normalize_rows(pearson_log_density(mah, model, prior, lg_ratio), model.proportions(), p.resp.eta);
  p.weights = posterior_weights(mah, data.dim(), prior);
  return p;
}

}  // namespace

Responsibilities wd_e_z_step(const Dataset& data, const MixtureModel& model, const WeightState& weights) {
  check_model(data, model);
  check_random(data, weights);
  const Matrix mah = detail::mahalanobis_matrix(data.points(), model);
  Responsibilities r;
  detail::normalize_rows(pearson_log_density(mah, model, weights, detail::log_gamma_ratio(weights.prior_alpha, data.dim())),
                         model.proportions(), r.eta);
  return r;
}

WeightState wd_e_w_step(const Dataset& data, const MixtureModel& model, const WeightState& weights) {
  check_model(data, model);
  check_random(data, weights);
  return posterior_weights(detail::mahalanobis_matrix(data.points(), model), data.dim(), weights);
}

Vector marginal_weight_means(const WeightState& weights, const Responsibilities& resp) {
  if (weights.post_mean.rows() != resp.eta.rows() || weights.post_mean.cols() != resp.eta.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "posterior weight means do not match responsibilities");
  }
  return resp.eta.cwiseProduct(weights.post_mean).rowwise().sum();
}

MixtureModel wd_m_step(const Dataset& data, const Responsibilities& resp, const WeightState& weights,
                       CovarianceShape shape) {
  if (resp.size() != data.size()) throw Error(ErrorCode::LengthMismatch, "responsibilities do not match data");
  if (weights.post_mean.rows() != resp.eta.rows() || weights.post_mean.cols() != resp.eta.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "run the E-W step before the M-step");
  }
  const detail::UpdateContext ctx(data.points(), shape);
  return detail::weighted_m_step(ctx, resp.eta, weights.post_mean);
}

double wd_log_likelihood(const Dataset& data, const MixtureModel& model, const WeightState& weights) {
  check_model(data, model);
  check_random(data, weights);
  return e_step(data, model, weights, detail::log_gamma_ratio(weights.prior_alpha, data.dim())).log_likelihood;
}

double wd_q_function(const Dataset& data, const MixtureModel& model, const Responsibilities& resp,
                     const WeightState& weights) {
  check_model(data, model);
  if (weights.post_mean.rows() != resp.eta.rows() || weights.post_mean.cols() != resp.eta.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "posterior weight means do not match responsibilities");
  }
  double q = 0.0;
  Vector mah(static_cast<Eigen::Index>(data.size()));
  for (int k = 0; k < model.num_components(); ++k) {
    const double pi = model.proportions()(k);
    if (!(pi > 0.0)) continue;
    const auto& c = model.component(k);
    detail::mahalanobis_column(data.points(), c, mah);
    const double base = std::log(pi) - 0.5 * c.log_det();
    for (Eigen::Index i = 0; i < mah.size(); ++i) {
      q += resp.eta(i, k) * (base - 0.5 * weights.post_mean(i, k) * mah(i));
    }
  }
  return q;
}

FitReport fit_wd(const Dataset& data, const MixtureModel& initial, const WeightState& priors, const EmConfig& config) {
  check_model(data, initial);
  check_random(data, priors);
  const detail::UpdateContext ctx(data.points(), initial.shape());
  const Vector lg_ratio = detail::log_gamma_ratio(priors.prior_alpha, data.dim());

  MixtureModel model = initial;
  Posterior post = e_step(data, model, priors, lg_ratio);
  FitReport report{{post.log_likelihood}, model, {}, {}, 0, false, {}, {}};

  for (int it = 1; it <= config.max_iter; ++it) {
    model = detail::weighted_m_step(ctx, post.resp.eta, post.weights.post_mean);
    if (config.on_iteration) config.on_iteration(it, model);
    const double prev = post.log_likelihood;
    post = e_step(data, model, priors, lg_ratio);
    report.objective_trace.push_back(post.log_likelihood);
    report.iterations = it;
    if (std::abs(post.log_likelihood - prev) < config.rel_tol * std::abs(post.log_likelihood)) {
      report.converged = true;
      break;
    }
  }
  post.weights.marginal_mean = marginal_weight_means(post.weights, post.resp);
  report.final_model = std::move(model);
  report.final_responsibilities = std::move(post.resp);
  report.final_weights = std::move(post.weights);
  return report;
}

}  // namespace wdmix
