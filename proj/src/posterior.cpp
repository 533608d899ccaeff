#include "posterior.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "parallel.hpp"
#include "wdmix/densities.hpp"
#include "wdmix/kernels.hpp"

namespace wdmix::detail {

namespace {

constexpr double kEmptyMass = 1e-10;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

kernels::PointBlock block_of(const Matrix& points) {
  const auto n = static_cast<std::size_t>(points.rows());
  return kernels::PointBlock{points.data(), n, static_cast<std::size_t>(points.cols()), n};
}

}  // namespace

void mahalanobis_column(const Matrix& points, const GaussianComponent& component, Eigen::Ref<Vector> out) {
  mahalanobis_sq_batch(points, component, std::span<double>(out.data(), static_cast<std::size_t>(out.size())));
}

Matrix mahalanobis_matrix(const Matrix& points, const MixtureModel& model) {
  Matrix out(points.rows(), model.num_components());
  for (int k = 0; k < model.num_components(); ++k) mahalanobis_column(points, model.component(k), out.col(k));
  return out;
}

void log_scaled_gauss_column(const Vector& mahalanobis, double log_det, int dim, const Vector& w,
                             Eigen::Ref<Vector> out) {
  const double half_d = 0.5 * dim;
  const double base = -half_d * kLogTwoPi - 0.5 * log_det;
  for (Eigen::Index i = 0; i < mahalanobis.size(); ++i) {
    out(i) = base + half_d * std::log(w(i)) - 0.5 * w(i) * mahalanobis(i);
  }
}

void log_pearson_column(const Vector& mahalanobis, double log_det, int dim, const Vector& alpha,
                        const Eigen::Ref<const Vector>& beta, const Vector& log_gamma_ratio,
                        Eigen::Ref<Vector> out) {
  for (Eigen::Index i = 0; i < mahalanobis.size(); ++i) {
    out(i) = log_pearson7_from_distance(mahalanobis(i), log_det, dim, alpha(i), beta(i), log_gamma_ratio(i));
  }
}

Vector log_gamma_ratio(const Vector& alpha, int dim) {
  Vector out(alpha.size());
  for (Eigen::Index i = 0; i < alpha.size(); ++i) {
    out(i) = std::lgamma(alpha(i) + 0.5 * dim) - std::lgamma(alpha(i));
  }
  return out;
}

double normalize_rows(const Matrix& log_density, const Vector& proportions, Matrix& eta) {
  const Eigen::Index n = log_density.rows();
  const Eigen::Index K = log_density.cols();
  eta.resize(n, K);
  Vector log_pi(K);
  for (Eigen::Index k = 0; k < K; ++k) log_pi(k) = proportions(k) > 0.0 ? std::log(proportions(k)) : kNegInf;

  Vector row_lse(n);
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t b, std::size_t e) {
    for (auto i = static_cast<Eigen::Index>(b); i < static_cast<Eigen::Index>(e); ++i) {
      double top = kNegInf;
      for (Eigen::Index k = 0; k < K; ++k) {
        if (log_pi(k) == kNegInf) continue;
        const double t = log_pi(k) + log_density(i, k);
        if (t > top) top = t;
      }
      if (!std::isfinite(top)) {
        throw Error(ErrorCode::DegenerateRow, "point " + std::to_string(i) + " has no finite component density");
      }
      double acc = 0.0;
      for (Eigen::Index k = 0; k < K; ++k) {
        if (log_pi(k) == kNegInf) {
          eta(i, k) = 0.0;
          continue;
        }
        const double v = std::exp(log_pi(k) + log_density(i, k) - top);
        eta(i, k) = v;
        acc += v;
      }
      for (Eigen::Index k = 0; k < K; ++k) eta(i, k) /= acc;
      row_lse(i) = top + std::log(acc);
    }
  });
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) total += row_lse(i);
  return total;
}

UpdateContext::UpdateContext(const Matrix& pts, CovarianceShape s)
    : points(pts), shape(s), fallback_floor(covariance_fallback_floor(pts)), global_covariance(sample_covariance(pts)) {}

bool is_empty_component(double resp_sum, std::size_t n) {
  return !(resp_sum >= kEmptyMass * static_cast<double>(n));
}

GaussianComponent weighted_component_update(const UpdateContext& ctx, const Eigen::Ref<const Vector>& resp,
                                            const Eigen::Ref<const Vector>& weight) {
  const Matrix& x = ctx.points;
  const auto d = static_cast<std::size_t>(x.cols());
  const Vector cw = resp.cwiseProduct(weight);
  const double resp_sum = resp.sum();
  const double cw_sum = cw.sum();
  const auto block = block_of(x);
  const auto& k = kernels::active();

  Vector mean(static_cast<Eigen::Index>(d));
  k.weighted_sum(block, cw.data(), mean.data());
  mean /= cw_sum;

  Matrix cov(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  if (ctx.shape == CovarianceShape::Diagonal) {
    cov.setZero();
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      cov(j, j) = (cw.array() * (x.col(j).array() - mean(j)).square()).sum();
    }
  } else {
    k.weighted_scatter(block, cw.data(), mean.data(), cov.data());
  }
  cov /= resp_sum;
  apply_covariance_floor(cov, ctx.fallback_floor);
  return GaussianComponent(std::move(mean), std::move(cov), ctx.shape);
}

MixtureModel weighted_m_step(const UpdateContext& ctx, const Matrix& eta, const Matrix& weights) {
  const Eigen::Index n = eta.rows();
  const Eigen::Index K = eta.cols();
  if (weights.rows() != n || (weights.cols() != 1 && weights.cols() != K)) {
    throw Error(ErrorCode::DimensionMismatch, "weights must be n x 1 or n x K");
  }
  Vector pi = eta.colwise().sum().transpose() / static_cast<double>(n);

  std::vector<GaussianComponent> comps;
  comps.reserve(static_cast<std::size_t>(K));
  std::vector<bool> used_as_seed(static_cast<std::size_t>(n), false);
  bool reseeded = false;
  for (Eigen::Index k = 0; k < K; ++k) {
    const double mass = eta.col(k).sum();
    if (!is_empty_component(mass, static_cast<std::size_t>(n))) {
      comps.push_back(weighted_component_update(ctx, eta.col(k), weights.col(weights.cols() == 1 ? 0 : k)));
      continue;
    }
    // Re-seed at the worst-explained point not already taken by another seed.
    Eigen::Index seed = -1;
    double lowest = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < n; ++i) {
      if (used_as_seed[static_cast<std::size_t>(i)]) continue;
      const double m = eta.row(i).maxCoeff();
      if (m < lowest) {
        lowest = m;
        seed = i;
      }
    }
    if (seed < 0) seed = 0;
    used_as_seed[static_cast<std::size_t>(seed)] = true;
    Matrix cov = ctx.global_covariance;
    if (ctx.shape == CovarianceShape::Diagonal) cov = Matrix(cov.diagonal().asDiagonal());
    apply_covariance_floor(cov, ctx.fallback_floor);
    comps.emplace_back(Vector(ctx.points.row(seed).transpose()), std::move(cov), ctx.shape);
    pi(k) = 1.0 / static_cast<double>(n);
    reseeded = true;
  }
  if (reseeded) pi /= pi.sum();
  return MixtureModel(std::move(comps), std::move(pi));
}

DensityInputs::DensityInputs(const WeightState& w, int dim, bool posterior)
    : weights(w), posterior_shape(posterior && w.mode == WeightMode::Random) {
  if (w.mode == WeightMode::Random) {
    lg_prior = log_gamma_ratio(w.prior_alpha, dim);
    post_a = w.prior_alpha.array() + 0.5 * dim;
    if (posterior_shape) lg_posterior = log_gamma_ratio(post_a, dim);
  }
}

void component_log_density(const DensityInputs& in, const Vector& mahalanobis, const GaussianComponent& component,
                           Eigen::Ref<Vector> log_density, Eigen::Ref<Vector> weight_mean) {
  const WeightState& w = in.weights;
  if (w.mode == WeightMode::Fixed) {
    log_scaled_gauss_column(mahalanobis, component.log_det(), component.dim(), w.fixed_w, log_density);
    weight_mean = w.fixed_w;
    return;
  }
  const Vector b = w.prior_beta + 0.5 * mahalanobis;
  weight_mean = in.post_a.cwiseQuotient(b);
  if (in.posterior_shape) {
    log_pearson_column(mahalanobis, component.log_det(), component.dim(), in.post_a, b, in.lg_posterior, log_density);
  } else {
    log_pearson_column(mahalanobis, component.log_det(), component.dim(), w.prior_alpha, w.prior_beta, in.lg_prior,
                       log_density);
  }
}

}  // namespace wdmix::detail
