#pragma once

#include <cstddef>
#include <vector>

#include "wdmix/core.hpp"

namespace wdmix::detail {

/// Squared distances from every point to its q nearest other points,
/// ascending per row (n x q). Brute force below `tree_threshold` points,
/// a k-d tree above.
Matrix knn_squared_distances(const Matrix& points, int q, std::size_t tree_threshold = 20000);

}  // namespace wdmix::detail
