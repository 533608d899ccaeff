#pragma once

#include <string>
#include <vector>

#include "wdmix/core.hpp"

namespace wdmix {

/// SVG scatter plot of 2-D points coloured by cluster with a 2-sigma ellipse
/// per component. With weights, each ellipse uses Sigma_k divided by the mean
/// weight of its members and points whose weight is below half the median
/// weight are drawn as crosses. Throws DimensionMismatch unless d = 2.
std::string scatter_svg(const Matrix& points, const std::vector<int>& clusters, const MixtureModel& model,
                        const Vector* weights = nullptr);

}  // namespace wdmix
