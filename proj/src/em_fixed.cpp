#include "wdmix/em_fixed.hpp"

#include <cmath>

#include "posterior.hpp"

namespace wdmix {

namespace {

void check_weights(const Dataset& data, const Vector& w) {
  if (static_cast<std::size_t>(w.size()) != data.size()) {
    throw Error(ErrorCode::LengthMismatch, "one weight per point required");
  }
  if (!w.allFinite() || w.minCoeff() <= 0.0) throw Error(ErrorCode::NonPositiveWeight, "weights must be positive");
}

void check_model(const Dataset& data, const MixtureModel& model) {
  if (model.dim() != data.dim()) throw Error(ErrorCode::DimensionMismatch, "model and data dimensions differ");
}

Matrix log_density(const Dataset& data, const MixtureModel& model, const Vector& w) {
  Matrix out(static_cast<Eigen::Index>(data.size()), model.num_components());
  Vector mah(out.rows());
  for (int k = 0; k < model.num_components(); ++k) {
    const auto& c = model.component(k);
    detail::mahalanobis_column(data.points(), c, mah);
    detail::log_scaled_gauss_column(mah, c.log_det(), c.dim(), w, out.col(k));
  }
  return out;
}

struct EStep {
  Responsibilities resp;
  double log_likelihood;
};

EStep e_step(const Dataset& data, const MixtureModel& model, const Vector& w) {
  EStep s;
  s.log_likelihood = detail::normalize_rows(log_density(data, model, w), model.proportions(), s.resp.eta);
  return s;
}

bool converged(double prev, double cur, double rel_tol) {
  return std::abs(cur - prev) < rel_tol * std::abs(cur);
}

}  // namespace

Responsibilities fwd_e_step(const Dataset& data, const MixtureModel& model, const Vector& weights) {
  check_model(data, model);
  check_weights(data, weights);
  return e_step(data, model, weights).resp;
}

double fwd_log_likelihood(const Dataset& data, const MixtureModel& model, const Vector& weights) {
  check_model(data, model);
  check_weights(data, weights);
  return e_step(data, model, weights).log_likelihood;
}

MixtureModel fwd_m_step(const Dataset& data, const Responsibilities& resp, const Vector& weights,
                        CovarianceShape shape) {
  check_weights(data, weights);
  if (resp.size() != data.size()) throw Error(ErrorCode::LengthMismatch, "responsibilities do not match data");
  const detail::UpdateContext ctx(data.points(), shape);
  return detail::weighted_m_step(ctx, resp.eta, weights);
}

double fwd_q_function(const Dataset& data, const MixtureModel& model, const Responsibilities& resp,
                      const Vector& weights) {
  check_model(data, model);
  check_weights(data, weights);
  double q = 0.0;
  Vector mah(static_cast<Eigen::Index>(data.size()));
  for (int k = 0; k < model.num_components(); ++k) {
    const double pi = model.proportions()(k);
    if (!(pi > 0.0)) continue;
    const auto& c = model.component(k);
    detail::mahalanobis_column(data.points(), c, mah);
    const double base = std::log(pi) - 0.5 * c.log_det();
    for (Eigen::Index i = 0; i < mah.size(); ++i) {
      q += resp.eta(i, k) * (base - 0.5 * weights(i) * mah(i));
    }
  }
  return q;
}

FitReport fit_fwd(const Dataset& data, const MixtureModel& initial, const Vector& weights, const EmConfig& config) {
  check_model(data, initial);
  check_weights(data, weights);
  const detail::UpdateContext ctx(data.points(), initial.shape());

  MixtureModel model = initial;
  EStep step = e_step(data, model, weights);
  FitReport report{{step.log_likelihood}, model, {}, WeightState::fixed(weights), 0, false, {}, {}};

  for (int it = 1; it <= config.max_iter; ++it) {
    model = detail::weighted_m_step(ctx, step.resp.eta, weights);
    if (config.on_iteration) config.on_iteration(it, model);
    const double prev = step.log_likelihood;
    step = e_step(data, model, weights);
    report.objective_trace.push_back(step.log_likelihood);
    report.iterations = it;
    if (converged(prev, step.log_likelihood, config.rel_tol)) {
      report.converged = true;
      break;
    }
  }
  report.final_model = std::move(model);
  report.final_responsibilities = std::move(step.resp);
  return report;
}

FitReport fit_gmm(const Dataset& data, const MixtureModel& initial, const EmConfig& config) {
  return fit_fwd(data, initial, Vector::Ones(static_cast<Eigen::Index>(data.size())), config);
}

}  // namespace wdmix
