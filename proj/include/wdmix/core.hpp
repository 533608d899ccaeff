#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "wdmix/error.hpp"

namespace wdmix {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class Modality { Audio, Visual };

enum class CovarianceShape { Full, Diagonal };

/// Free parameters of one component: mean plus covariance.
int free_params_per_component(CovarianceShape shape, int dim) noexcept;

/// n observations in R^d (stored n x d, column-major so each coordinate is
/// contiguous across points) plus optional per-point annotations.
class Dataset {
 public:
  /// Validates and takes ownership of `points`. Throws Error with
  /// EmptyInput, NaNInput or LengthMismatch.
  explicit Dataset(Matrix points, std::optional<std::vector<int>> labels = std::nullopt,
                   std::optional<std::vector<Modality>> modality = std::nullopt,
                   std::optional<std::vector<bool>> outlier_flags = std::nullopt);

  std::size_t size() const noexcept { return static_cast<std::size_t>(points_.rows()); }
  int dim() const noexcept { return static_cast<int>(points_.cols()); }

  const Matrix& points() const noexcept { return points_; }
  auto point(std::size_t i) const { return points_.row(static_cast<Eigen::Index>(i)); }

  const std::optional<std::vector<int>>& labels() const noexcept { return labels_; }
  const std::optional<std::vector<Modality>>& modality() const noexcept { return modality_; }
  const std::optional<std::vector<bool>>& outlier_flags() const noexcept { return outlier_flags_; }

 private:
  Matrix points_;
  std::optional<std::vector<int>> labels_;
  std::optional<std::vector<Modality>> modality_;
  std::optional<std::vector<bool>> outlier_flags_;
};

/// Builds a Dataset from a row table. Throws NonRectangular for ragged rows.
Dataset validate_dataset(const std::vector<std::vector<double>>& rows,
                         std::optional<std::vector<int>> labels = std::nullopt,
                         std::optional<std::vector<Modality>> modality = std::nullopt,
                         std::optional<std::vector<bool>> outlier_flags = std::nullopt);

/// One Gaussian with a cached lower Cholesky factor and log-determinant.
class GaussianComponent {
 public:
  /// For Diagonal shape the off-diagonal entries of `covariance` must be zero.
  GaussianComponent(Vector mean, Matrix covariance,
                    CovarianceShape shape = CovarianceShape::Full);

  static GaussianComponent diagonal(Vector mean, const Vector& variances);

  int dim() const noexcept { return static_cast<int>(mean_.size()); }
  CovarianceShape shape() const noexcept { return shape_; }
  const Vector& mean() const noexcept { return mean_; }
  const Matrix& covariance() const noexcept { return covariance_; }
  /// Lower-triangular L with L L^T = covariance.
  const Matrix& cholesky() const noexcept { return chol_; }
  double log_det() const noexcept { return log_det_; }

 private:
  Vector mean_;
  Matrix covariance_;
  Matrix chol_;
  double log_det_ = 0.0;
  CovarianceShape shape_;
};

/// K weighted components sharing one covariance shape. Proportions may be
/// exactly zero for annihilated components.
class MixtureModel {
 public:
  MixtureModel(std::vector<GaussianComponent> components, Vector proportions);

  int num_components() const noexcept { return static_cast<int>(components_.size()); }
  int dim() const noexcept { return components_.front().dim(); }
  CovarianceShape shape() const noexcept { return components_.front().shape(); }
  int free_params_per_component() const noexcept {
    return wdmix::free_params_per_component(shape(), dim());
  }

  const std::vector<GaussianComponent>& components() const noexcept { return components_; }
  const GaussianComponent& component(int k) const { return components_.at(static_cast<std::size_t>(k)); }
  const Vector& proportions() const noexcept { return proportions_; }

  /// Indices with strictly positive proportion, ascending.
  std::vector<int> active_components() const;

  /// Same model restricted to the active components.
  MixtureModel compacted() const;

 private:
  std::vector<GaussianComponent> components_;
  Vector proportions_;
};

enum class WeightMode { Fixed, Random };

/// Per-point weight information. Fixed mode carries one scalar weight per
/// point; Random mode carries the gamma prior (alpha_i, beta_i) and, after an
/// E-W step, the gamma posterior a_i, b_ik and the means a_i / b_ik.
struct WeightState {
  WeightMode mode = WeightMode::Fixed;
  Vector fixed_w;
  Vector prior_alpha;
  Vector prior_beta;
  Vector post_a;
  Matrix post_b;
  Matrix post_mean;
  Vector marginal_mean;

  static WeightState fixed(Vector w);
  static WeightState random(Vector alpha, Vector beta);

  std::size_t size() const noexcept {
    return static_cast<std::size_t>(mode == WeightMode::Fixed ? fixed_w.size() : prior_alpha.size());
  }
};

/// Posterior membership probabilities, n x K.
struct Responsibilities {
  Matrix eta;

  std::size_t size() const noexcept { return static_cast<std::size_t>(eta.rows()); }
  int num_components() const noexcept { return static_cast<int>(eta.cols()); }
  /// Row-wise argmax; ties resolve to the lowest index.
  std::vector<int> hard_assignments() const;
  Vector column_sums() const { return eta.colwise().sum().transpose(); }
};

enum class AnnihilationCause {
  Starved,  ///< support fell to M/2 or below during a sweep
  Forced,   ///< least populated component removed to explore smaller K
};

struct AnnihilationEvent {
  int iteration = 0;
  int component = 0;
  double proportion = 0.0;
  AnnihilationCause cause = AnnihilationCause::Starved;
};

struct FitReport {
  std::vector<double> objective_trace;
  MixtureModel final_model;
  Responsibilities final_responsibilities;
  WeightState final_weights;
  int iterations = 0;
  bool converged = false;
  std::vector<AnnihilationEvent> annihilation_log;
  std::vector<int> k_plus_history;
};

/// Ridge of 1e-10 * trace / d (or `fallback` when the trace is zero), added to
/// the diagonal when a Cholesky pivot of `covariance` squares below it or the
/// factorisation fails. Well-conditioned updates are left untouched.
void apply_covariance_floor(Matrix& covariance, double fallback);

/// 1e-10 * trace(sample covariance) / d of the whole dataset (1e-10 when the
/// data has zero spread). Used as the fallback ridge for degenerate clusters.
double covariance_fallback_floor(const Matrix& points);

/// Maximum-likelihood covariance of all points.
Matrix sample_covariance(const Matrix& points);

}  // namespace wdmix
