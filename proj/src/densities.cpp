#include "wdmix/densities.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "parallel.hpp"
#include "wdmix/kernels.hpp"

namespace wdmix {

namespace {

void check_dim(Eigen::Index got, const GaussianComponent& c) {
  if (got != c.dim()) throw Error(ErrorCode::DimensionMismatch, "point and component dimensions differ");
}

}  // namespace

double mahalanobis_sq(const Eigen::Ref<const Vector>& x, const GaussianComponent& component) {
  check_dim(x.size(), component);
  const Vector diff = x - component.mean();
  if (component.shape() == CovarianceShape::Diagonal) {
    return (diff.array().square() / component.covariance().diagonal().array()).sum();
  }
  const Vector z = component.cholesky().triangularView<Eigen::Lower>().solve(diff);
  return z.squaredNorm();
}

void mahalanobis_sq_batch(const Matrix& points, const GaussianComponent& component, std::span<double> out) {
  check_dim(points.cols(), component);
  const auto n = static_cast<std::size_t>(points.rows());
  if (out.size() != n) throw Error(ErrorCode::LengthMismatch, "output span must hold one value per point");
  const kernels::PointBlock all{points.data(), n, static_cast<std::size_t>(points.cols()), n};
  const auto& k = kernels::active();
  if (component.shape() == CovarianceShape::Diagonal) {
    const Vector inv_var = component.covariance().diagonal().cwiseInverse();
    detail::parallel_for(n, [&](std::size_t b, std::size_t e) {
      k.mahalanobis_sq_diag(all.slice(b, e), component.mean().data(), inv_var.data(), out.data() + b);
    });
  } else {
    detail::parallel_for(n, [&](std::size_t b, std::size_t e) {
      k.mahalanobis_sq(all.slice(b, e), component.mean().data(), component.cholesky().data(), out.data() + b);
    });
  }
}

Vector mahalanobis_sq_batch(const Matrix& points, const GaussianComponent& component) {
  Vector out(points.rows());
  mahalanobis_sq_batch(points, component, std::span<double>(out.data(), static_cast<std::size_t>(out.size())));
  return out;
}

double log_gauss_scaled(const Eigen::Ref<const Vector>& x, const GaussianComponent& component, double w) {
  if (!(w > 0.0) || !std::isfinite(w)) throw Error(ErrorCode::NonPositiveWeight, "weight must be positive");
  const double half_d = 0.5 * component.dim();
  return -half_d * kLogTwoPi + half_d * std::log(w) - 0.5 * component.log_det() -
         0.5 * w * mahalanobis_sq(x, component);
}

double log_pearson7(const Eigen::Ref<const Vector>& x, const GaussianComponent& component, double alpha,
                    double beta) {
  if (!(alpha > 0.0) || !(beta > 0.0)) {
    throw Error(ErrorCode::NonPositiveShape, "Pearson VII parameters must be positive");
  }
  const int d = component.dim();
  const double ratio = std::lgamma(alpha + 0.5 * d) - std::lgamma(alpha);
  return log_pearson7_from_distance(mahalanobis_sq(x, component), component.log_det(), d, alpha, beta, ratio);
}

double log_gamma_pdf(double w, double alpha, double beta) {
  if (!(w > 0.0) || !(alpha > 0.0) || !(beta > 0.0)) {
    throw Error(ErrorCode::NonPositiveArgument, "gamma density arguments must be positive");
  }
  return alpha * std::log(beta) - std::lgamma(alpha) + (alpha - 1.0) * std::log(w) - beta * w;
}

double log_sum_exp(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::EmptyInput, "log_sum_exp of an empty vector");
  const double top = *std::max_element(values.begin(), values.end());
  if (top == -std::numeric_limits<double>::infinity()) return top;
  if (!std::isfinite(top)) return top;
  double acc = 0.0;
  for (double v : values) acc += std::exp(v - top);
  return top + std::log(acc);
}

}  // namespace wdmix
