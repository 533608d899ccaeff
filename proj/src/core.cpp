#include "wdmix/core.hpp"

#include <cmath>
#include <string>

namespace wdmix {

namespace {

constexpr double kSymmetryTol = 1e-12;
constexpr double kProportionTol = 1e-10;
constexpr double kRidgeScale = 1e-10;

template <typename T>
void check_length(const std::optional<std::vector<T>>& v, std::size_t n, const char* what) {
  if (v && v->size() != n) {
    throw Error(ErrorCode::LengthMismatch, std::string(what) + " has " + std::to_string(v->size()) +
                                               " entries, expected " + std::to_string(n));
  }
}

}  // namespace

int free_params_per_component(CovarianceShape shape, int dim) noexcept {
  return shape == CovarianceShape::Full ? dim * (dim + 3) / 2 : 2 * dim;
}

Dataset::Dataset(Matrix points, std::optional<std::vector<int>> labels,
                 std::optional<std::vector<Modality>> modality,
                 std::optional<std::vector<bool>> outlier_flags)
    : points_(std::move(points)),
      labels_(std::move(labels)),
      modality_(std::move(modality)),
      outlier_flags_(std::move(outlier_flags)) {
  if (points_.rows() < 1 || points_.cols() < 1) {
    throw Error(ErrorCode::EmptyInput, "dataset needs at least one point and one dimension");
  }
  if (!points_.allFinite()) {
    throw Error(ErrorCode::NaNInput, "dataset contains NaN or infinite entries");
  }
  const auto n = size();
  check_length(labels_, n, "labels");
  check_length(modality_, n, "modality");
  check_length(outlier_flags_, n, "outlier flags");
}

Dataset validate_dataset(const std::vector<std::vector<double>>& rows,
                         std::optional<std::vector<int>> labels,
                         std::optional<std::vector<Modality>> modality,
                         std::optional<std::vector<bool>> outlier_flags) {
  if (rows.empty() || rows.front().empty()) {
    throw Error(ErrorCode::EmptyInput, "empty point table");
  }
  const std::size_t d = rows.front().size();
  Matrix points(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != d) {
      throw Error(ErrorCode::NonRectangular, "row " + std::to_string(i) + " has " +
                                                 std::to_string(rows[i].size()) + " columns, expected " +
                                                 std::to_string(d));
    }
    for (std::size_t j = 0; j < d; ++j) {
      points(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return Dataset(std::move(points), std::move(labels), std::move(modality), std::move(outlier_flags));
}

GaussianComponent::GaussianComponent(Vector mean, Matrix covariance, CovarianceShape shape)
    : mean_(std::move(mean)), covariance_(std::move(covariance)), shape_(shape) {
  const auto d = mean_.size();
  if (d < 1 || covariance_.rows() != d || covariance_.cols() != d) {
    throw Error(ErrorCode::DimensionMismatch, "covariance must be d x d with d = mean length");
  }
  if (!mean_.allFinite() || !covariance_.allFinite()) {
    throw Error(ErrorCode::NaNInput, "component parameters must be finite");
  }
  const double scale = covariance_.cwiseAbs().maxCoeff();
  if ((covariance_ - covariance_.transpose()).cwiseAbs().maxCoeff() > kSymmetryTol * scale) {
    throw Error(ErrorCode::NotSymmetric, "covariance is not symmetric");
  }
  covariance_ = 0.5 * (covariance_ + covariance_.transpose());

  if (shape_ == CovarianceShape::Diagonal) {
    Matrix off = covariance_;
    off.diagonal().setZero();
    if (off.cwiseAbs().maxCoeff() != 0.0) {
      throw Error(ErrorCode::InvalidArgument, "diagonal component with non-zero off-diagonal covariance");
    }
    chol_ = Matrix::Zero(d, d);
    for (Eigen::Index j = 0; j < d; ++j) {
      const double v = covariance_(j, j);
      if (!(v > 0.0)) throw Error(ErrorCode::NotPositiveDefinite, "non-positive variance");
      chol_(j, j) = std::sqrt(v);
    }
  } else {
    Eigen::LLT<Matrix> llt(covariance_);
    if (llt.info() != Eigen::Success) {
      throw Error(ErrorCode::NotPositiveDefinite, "covariance is not positive definite");
    }
    chol_ = llt.matrixL();
  }

  log_det_ = 0.0;
  for (Eigen::Index j = 0; j < d; ++j) {
    const double pivot = chol_(j, j);
    if (!(pivot > 0.0) || !std::isfinite(pivot)) {
      throw Error(ErrorCode::NotPositiveDefinite, "non-positive Cholesky pivot");
    }
    log_det_ += 2.0 * std::log(pivot);
  }
}

GaussianComponent GaussianComponent::diagonal(Vector mean, const Vector& variances) {
  Matrix cov = variances.asDiagonal();
  return GaussianComponent(std::move(mean), std::move(cov), CovarianceShape::Diagonal);
}

MixtureModel::MixtureModel(std::vector<GaussianComponent> components, Vector proportions)
    : components_(std::move(components)), proportions_(std::move(proportions)) {
  if (components_.empty()) {
    throw Error(ErrorCode::EmptyInput, "mixture needs at least one component");
  }
  if (proportions_.size() != static_cast<Eigen::Index>(components_.size())) {
    throw Error(ErrorCode::LengthMismatch, "one proportion per component required");
  }
  const int d = components_.front().dim();
  const auto shape = components_.front().shape();
  for (const auto& c : components_) {
    if (c.dim() != d) throw Error(ErrorCode::DimensionMismatch, "components differ in dimension");
    if (c.shape() != shape) throw Error(ErrorCode::InvalidArgument, "components differ in covariance shape");
  }
  if (!proportions_.allFinite() || proportions_.minCoeff() < 0.0 ||
      std::abs(proportions_.sum() - 1.0) > kProportionTol) {
    throw Error(ErrorCode::InvalidProportions, "proportions must be non-negative and sum to 1");
  }
}

std::vector<int> MixtureModel::active_components() const {
  std::vector<int> out;
  for (int k = 0; k < num_components(); ++k) {
    if (proportions_(k) > 0.0) out.push_back(k);
  }
  return out;
}

MixtureModel MixtureModel::compacted() const {
  const auto active = active_components();
  std::vector<GaussianComponent> comps;
  Vector pi(static_cast<Eigen::Index>(active.size()));
  for (std::size_t j = 0; j < active.size(); ++j) {
    comps.push_back(components_[static_cast<std::size_t>(active[j])]);
    pi(static_cast<Eigen::Index>(j)) = proportions_(active[j]);
  }
  pi /= pi.sum();
  return MixtureModel(std::move(comps), std::move(pi));
}

WeightState WeightState::fixed(Vector w) {
  if (w.size() == 0) throw Error(ErrorCode::EmptyInput, "no weights");
  if (!w.allFinite() || w.minCoeff() <= 0.0) {
    throw Error(ErrorCode::NonPositiveWeight, "fixed weights must be positive and finite");
  }
  WeightState s;
  s.mode = WeightMode::Fixed;
  s.fixed_w = std::move(w);
  return s;
}

WeightState WeightState::random(Vector alpha, Vector beta) {
  if (alpha.size() == 0) throw Error(ErrorCode::EmptyInput, "no weight priors");
  if (alpha.size() != beta.size()) throw Error(ErrorCode::LengthMismatch, "alpha and beta lengths differ");
  if (!alpha.allFinite() || !beta.allFinite() || alpha.minCoeff() <= 0.0 || beta.minCoeff() <= 0.0) {
    throw Error(ErrorCode::NonPositiveShape, "gamma prior parameters must be positive");
  }
  WeightState s;
  s.mode = WeightMode::Random;
  s.prior_alpha = std::move(alpha);
  s.prior_beta = std::move(beta);
  return s;
}

std::vector<int> Responsibilities::hard_assignments() const {
  std::vector<int> out(size());
  for (Eigen::Index i = 0; i < eta.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < eta.cols(); ++k) {
      if (eta(i, k) > eta(i, best)) best = k;
    }
    out[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return out;
}

void apply_covariance_floor(Matrix& covariance, double fallback) {
  const double d = static_cast<double>(covariance.rows());
  double ridge = kRidgeScale * covariance.trace() / d;
  if (!(ridge > 0.0)) ridge = fallback;
  const Eigen::LLT<Matrix> llt(covariance);
  if (llt.info() == Eigen::Success && llt.matrixLLT().diagonal().array().square().minCoeff() >= ridge) return;
  covariance.diagonal().array() += ridge;
}

Matrix sample_covariance(const Matrix& points) {
  const Vector mean = points.colwise().mean().transpose();
  const Matrix centered = points.rowwise() - mean.transpose();
  return (centered.transpose() * centered) / static_cast<double>(points.rows());
}

double covariance_fallback_floor(const Matrix& points) {
  const double trace = sample_covariance(points).trace();
  const double floor = kRidgeScale * trace / static_cast<double>(points.cols());
  return floor > 0.0 ? floor : kRidgeScale;
}

}  // namespace wdmix
