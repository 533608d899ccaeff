#pragma once

// Data-parallel inner loops shared by the EM engines, the neighbour search and
// the metrics. Every kernel has a portable scalar reference implementation and,
// where the build and CPU allow it, an AVX2/FMA variant. The variant is chosen
// once at first use; setting WDMIX_SIMD=scalar forces the reference path.

#include <cstddef>
#include <string_view>

namespace wdmix::kernels {

/// A run of points laid out column-major: coordinate j of point i lives at
/// data[j * stride + i]. Sub-ranges of an Eigen column-major matrix are
/// expressed by offsetting `data` and keeping the parent's row count as stride.
struct PointBlock {
  const double* data = nullptr;
  std::size_t count = 0;
  std::size_t dim = 0;
  std::size_t stride = 0;

  PointBlock slice(std::size_t begin, std::size_t end) const noexcept {
    return PointBlock{data + begin, end - begin, dim, stride};
  }
};

struct KernelTable {
  std::string_view name;

  /// out[i] = (x_i - mean)^T (L L^T)^{-1} (x_i - mean) via forward
  /// substitution. `chol` is the lower factor, column-major d x d.
  void (*mahalanobis_sq)(PointBlock points, const double* mean, const double* chol, double* out);

  /// Diagonal covariance: out[i] = sum_j (x_ij - mean_j)^2 * inv_var_j.
  void (*mahalanobis_sq_diag)(PointBlock points, const double* mean, const double* inv_var,
                              double* out);

  /// out[i] = ||x_i - query||^2.
  void (*squared_distances)(PointBlock points, const double* query, double* out);

  /// out[j] = sum_i weights[i] * x_ij.
  void (*weighted_sum)(PointBlock points, const double* weights, double* out);

  /// scatter (column-major d x d, fully written) =
  ///   sum_i weights[i] (x_i - center)(x_i - center)^T.
  void (*weighted_scatter)(PointBlock points, const double* weights, const double* center,
                           double* scatter);
};

const KernelTable& scalar_kernels() noexcept;

/// nullptr when the AVX2 variant was not compiled in.
const KernelTable* avx2_kernels() noexcept;

/// True when the running CPU can execute the AVX2/FMA variant.
bool cpu_supports_avx2() noexcept;

/// The table used by the library.
const KernelTable& active() noexcept;

}  // namespace wdmix::kernels
