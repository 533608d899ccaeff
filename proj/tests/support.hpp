#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "wdmix/core.hpp"

namespace wdmix::testing {

inline Matrix random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = n(rng);
  }
  return m;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Matrix random_spd(std::mt19937_64& rng, int d, double scale = 1.0) {
  const Matrix a = random_matrix(rng, d, d);
  Matrix s = scale * (a * a.transpose() / d + 0.5 * Matrix::Identity(d, d));
  return 0.5 * (s + s.transpose());
}

inline MixtureModel random_model(std::mt19937_64& rng, int K, int d, double spread = 5.0,
                                 CovarianceShape shape = CovarianceShape::Full) {
  std::vector<GaussianComponent> comps;
  Vector pi(K);
  for (int k = 0; k < K; ++k) {
    const Vector mu = random_matrix(rng, d, 1, spread);
    if (shape == CovarianceShape::Full) {
      comps.emplace_back(mu, random_spd(rng, d));
    } else {
      Vector var(d);
      for (int j = 0; j < d; ++j) var(j) = uniform(rng, 0.5, 2.0);
      comps.push_back(GaussianComponent::diagonal(mu, var));
    }
    pi(k) = uniform(rng, 0.5, 1.5);
  }
  return MixtureModel(std::move(comps), pi / pi.sum());
}

inline Dataset random_dataset(std::mt19937_64& rng, int n, int d, int clusters = 3, double spread = 5.0) {
  const Matrix centers = random_matrix(rng, clusters, d, spread);
  Matrix x = random_matrix(rng, n, d);
  std::uniform_int_distribution<int> pick(0, clusters - 1);
  for (int i = 0; i < n; ++i) x.row(i) += centers.row(pick(rng));
  return Dataset(std::move(x));
}

inline Vector random_weights(std::mt19937_64& rng, int n, double lo = 0.2, double hi = 3.0) {
  Vector w(n);
  for (int i = 0; i < n; ++i) w(i) = uniform(rng, lo, hi);
  return w;
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

/// Independent textbook Gaussian-mixture EM step on explicit inverses and
/// determinants, used as the reference for the weighted engines.
struct PlainGmm {
  std::vector<Vector> mu;
  std::vector<Matrix> sigma;
  Vector pi;

  Matrix responsibilities(const Matrix& x) const {
    const int K = static_cast<int>(mu.size());
    const int d = static_cast<int>(x.cols());
    Matrix r(x.rows(), K);
    for (int k = 0; k < K; ++k) {
      const Matrix inv = sigma[k].inverse();
      const double norm = std::pow(2.0 * M_PI, -0.5 * d) / std::sqrt(sigma[k].determinant());
      for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const Vector diff = x.row(i).transpose() - mu[k];
        r(i, k) = pi(k) * norm * std::exp(-0.5 * diff.dot(inv * diff));
      }
    }
    for (Eigen::Index i = 0; i < x.rows(); ++i) r.row(i) /= r.row(i).sum();
    return r;
  }

  void m_step(const Matrix& x, const Matrix& r) {
    const int K = static_cast<int>(r.cols());
    for (int k = 0; k < K; ++k) {
      const double nk = r.col(k).sum();
      mu[k] = (x.transpose() * r.col(k)) / nk;
      Matrix s = Matrix::Zero(x.cols(), x.cols());
      for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const Vector diff = x.row(i).transpose() - mu[k];
        s += r(i, k) * diff * diff.transpose();
      }
      sigma[k] = s / nk;
      pi(k) = nk / static_cast<double>(x.rows());
    }
  }
};

}  // namespace wdmix::testing
