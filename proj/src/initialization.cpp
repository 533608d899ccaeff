#include "wdmix/initialization.hpp"

#include <cmath>
#include <string>

#include "knn.hpp"

namespace wdmix {

MixtureModel params_from_clustering(const Dataset& data, const std::vector<int>& labels, CovarianceShape shape,
                                    int K) {
  if (labels.size() != data.size()) throw Error(ErrorCode::LengthMismatch, "one label per point required");
  int max_label = -1;
  for (int l : labels) {
    if (l < 0) throw Error(ErrorCode::InvalidArgument, "cluster labels must be non-negative");
    max_label = std::max(max_label, l);
  }
  if (K < 0) K = max_label + 1;
  if (max_label >= K) throw Error(ErrorCode::InvalidArgument, "label out of range");

  const Matrix& x = data.points();
  const double fallback = covariance_fallback_floor(x);
  std::vector<std::vector<Eigen::Index>> members(static_cast<std::size_t>(K));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    members[static_cast<std::size_t>(labels[i])].push_back(static_cast<Eigen::Index>(i));
  }

  std::vector<GaussianComponent> comps;
  Vector pi(K);
  for (int k = 0; k < K; ++k) {
    const auto& idx = members[static_cast<std::size_t>(k)];
    if (idx.empty()) throw Error(ErrorCode::EmptyCluster, "cluster " + std::to_string(k) + " has no points");
    const Matrix sub = x(idx, Eigen::all);
    const Vector mean = sub.colwise().mean().transpose();
    const Matrix centered = sub.rowwise() - mean.transpose();
    Matrix cov = centered.transpose() * centered / static_cast<double>(idx.size());
    if (shape == CovarianceShape::Diagonal) cov = Matrix(cov.diagonal().asDiagonal());
    apply_covariance_floor(cov, fallback);
    comps.emplace_back(mean, std::move(cov), shape);
    pi(k) = static_cast<double>(idx.size()) / static_cast<double>(data.size());
  }
  return MixtureModel(std::move(comps), std::move(pi));
}

MixtureModel initial_model(const Dataset& data, int K, std::uint64_t seed, CovarianceShape shape, int restarts) {
  const KMeansResult km = kmeans(data, K, restarts, seed);
  return params_from_clustering(data, km.labels, shape, K);
}

Vector init_weights_knn(const Dataset& data, int q, double sigma) {
  if (q < 1) throw Error(ErrorCode::InvalidArgument, "q must be at least 1");
  if (static_cast<std::size_t>(q) >= data.size()) {
    throw Error(ErrorCode::QTooLarge, "q = " + std::to_string(q) + " needs more than q points");
  }
  if (!(sigma > 0.0)) throw Error(ErrorCode::NonPositiveArgument, "sigma must be positive");
  const Matrix d2 = detail::knn_squared_distances(data.points(), q);
  Vector w = (-d2.array() / sigma).exp().rowwise().sum();
  return w.cwiseMax(kMinWeight);
}

GammaPriors gamma_priors_from_weights(const Vector& w) {
  if (!w.allFinite() || (w.size() > 0 && w.minCoeff() <= 0.0)) {
    throw Error(ErrorCode::NonPositiveWeight, "weights must be positive");
  }
  return {w.array().square(), w};
}

WeightState weight_priors(const Vector& w) {
  GammaPriors p = gamma_priors_from_weights(w);
  return WeightState::random(std::move(p.alpha), std::move(p.beta));
}

}  // namespace wdmix
