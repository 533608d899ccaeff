#include "wdmix/kernels.hpp"

#include <vector>

namespace wdmix::kernels {

namespace {

void mahalanobis_sq_scalar(PointBlock p, const double* mean, const double* chol, double* out) {
  const std::size_t d = p.dim;
  std::vector<double> z(d);
  for (std::size_t i = 0; i < p.count; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      double r = p.data[j * p.stride + i] - mean[j];
      for (std::size_t l = 0; l < j; ++l) r -= chol[l * d + j] * z[l];
      r /= chol[j * d + j];
      z[j] = r;
      acc += r * r;
    }
    out[i] = acc;
  }
}

void mahalanobis_sq_diag_scalar(PointBlock p, const double* mean, const double* inv_var, double* out) {
  for (std::size_t i = 0; i < p.count; ++i) out[i] = 0.0;
  for (std::size_t j = 0; j < p.dim; ++j) {
    const double* col = p.data + j * p.stride;
    for (std::size_t i = 0; i < p.count; ++i) {
      const double r = col[i] - mean[j];
      out[i] += r * r * inv_var[j];
    }
  }
}

void squared_distances_scalar(PointBlock p, const double* query, double* out) {
  for (std::size_t i = 0; i < p.count; ++i) out[i] = 0.0;
  for (std::size_t j = 0; j < p.dim; ++j) {
    const double* col = p.data + j * p.stride;
    for (std::size_t i = 0; i < p.count; ++i) {
      const double r = col[i] - query[j];
      out[i] += r * r;
    }
  }
}

void weighted_sum_scalar(PointBlock p, const double* w, double* out) {
  for (std::size_t j = 0; j < p.dim; ++j) {
    const double* col = p.data + j * p.stride;
    double acc = 0.0;
    for (std::size_t i = 0; i < p.count; ++i) acc += w[i] * col[i];
    out[j] = acc;
  }
}

void weighted_scatter_scalar(PointBlock p, const double* w, const double* center, double* scatter) {
  const std::size_t d = p.dim;
  for (std::size_t a = 0; a < d; ++a) {
    const double* ca = p.data + a * p.stride;
    for (std::size_t b = 0; b <= a; ++b) {
      const double* cb = p.data + b * p.stride;
      double acc = 0.0;
      for (std::size_t i = 0; i < p.count; ++i) acc += w[i] * (ca[i] - center[a]) * (cb[i] - center[b]);
      scatter[b * d + a] = acc;
      scatter[a * d + b] = acc;
    }
  }
}

constexpr KernelTable kScalar{
    "scalar",
    &mahalanobis_sq_scalar,
    &mahalanobis_sq_diag_scalar,
    &squared_distances_scalar,
    &weighted_sum_scalar,
    &weighted_scatter_scalar,
};

}  // namespace

const KernelTable& scalar_kernels() noexcept { return kScalar; }

}  // namespace wdmix::kernels
