#include <limits>
#include <random>
#include <string>

#include "wdmix/initialization.hpp"
#include "wdmix/kernels.hpp"

namespace wdmix {

namespace {

kernels::PointBlock block_of(const Matrix& points) {
  const auto n = static_cast<std::size_t>(points.rows());
  return {points.data(), n, static_cast<std::size_t>(points.cols()), n};
}

// dist(i, k) = ||x_i - c_k||^2
Matrix distances_to(const Matrix& points, const Matrix& centers) {
  Matrix dist(points.rows(), centers.rows());
  const auto block = block_of(points);
  const auto& kern = kernels::active();
  Vector c(points.cols());
  for (Eigen::Index k = 0; k < centers.rows(); ++k) {
    c = centers.row(k).transpose();
    kern.squared_distances(block, c.data(), dist.col(k).data());
  }
  return dist;
}

Matrix plus_plus_seeds(const Matrix& x, int K, std::mt19937_64& rng) {
  const Eigen::Index n = x.rows();
  Matrix centers(K, x.cols());
  std::uniform_int_distribution<Eigen::Index> first(0, n - 1);
  centers.row(0) = x.row(first(rng));
  Vector best = distances_to(x, centers.topRows(1)).col(0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int k = 1; k < K; ++k) {
    const double total = best.sum();
    Eigen::Index pick = 0;
    if (total > 0.0) {
      const double target = unit(rng) * total;
      double acc = 0.0;
      pick = n - 1;
      for (Eigen::Index i = 0; i < n; ++i) {
        acc += best(i);
        if (acc > target && best(i) > 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = first(rng);
    }
    centers.row(k) = x.row(pick);
    best = best.cwiseMin(distances_to(x, centers.row(k)).col(0));
  }
  return centers;
}

KMeansResult lloyd(const Matrix& x, Matrix centers, int max_iter) {
  const Eigen::Index n = x.rows();
  const auto K = centers.rows();
  KMeansResult r;
  r.labels.assign(static_cast<std::size_t>(n), -1);
  Vector nearest(n);
  for (int it = 0; it <= max_iter; ++it) {
    const Matrix dist = distances_to(x, centers);
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::Index arg = 0;
      dist.row(i).minCoeff(&arg);
      nearest(i) = dist(i, arg);
      auto& l = r.labels[static_cast<std::size_t>(i)];
      if (l != static_cast<int>(arg)) {
        l = static_cast<int>(arg);
        changed = true;
      }
    }
    if (!changed || it == max_iter) break;

    Matrix sums = Matrix::Zero(K, x.cols());
    Vector counts = Vector::Zero(K);
    for (Eigen::Index i = 0; i < n; ++i) {
      const int l = r.labels[static_cast<std::size_t>(i)];
      sums.row(l) += x.row(i);
      counts(l) += 1.0;
    }
    for (Eigen::Index k = 0; k < K; ++k) {
      if (counts(k) > 0.0) {
        centers.row(k) = sums.row(k) / counts(k);
      } else {
        // Move an empty centre onto the point currently worst served.
        Eigen::Index far = 0;
        nearest.maxCoeff(&far);
        centers.row(k) = x.row(far);
        nearest(far) = 0.0;
      }
    }
  }
  r.centers = std::move(centers);
  r.inertia = nearest.sum();
  return r;
}

}  // namespace

KMeansResult kmeans(const Dataset& data, int K, int restarts, std::uint64_t seed, int max_iter) {
  if (K < 1) throw Error(ErrorCode::InvalidArgument, "K must be at least 1");
  if (static_cast<std::size_t>(K) > data.size()) {
    throw Error(ErrorCode::KTooLarge, "K = " + std::to_string(K) + " exceeds n = " + std::to_string(data.size()));
  }
  if (restarts < 1) throw Error(ErrorCode::InvalidArgument, "restarts must be at least 1");
  std::mt19937_64 rng(seed);
  KMeansResult best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (int r = 0; r < restarts; ++r) {
    KMeansResult run = lloyd(data.points(), plus_plus_seeds(data.points(), K, rng), max_iter);
    if (run.inertia < best.inertia) best = std::move(run);
  }
  return best;
}

}  // namespace wdmix
