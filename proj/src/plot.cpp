#include "wdmix/plot.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include <cstdio>

namespace wdmix {

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

}  // namespace

std::string scatter_svg(const Matrix& points, const std::vector<int>& clusters, const MixtureModel& model,
                        const Vector* weights) {
  if (points.cols() != 2 || model.dim() != 2) throw Error(ErrorCode::DimensionMismatch, "plots need 2-D data");
  if (clusters.size() != static_cast<std::size_t>(points.rows())) {
    throw Error(ErrorCode::LengthMismatch, "one cluster per point required");
  }
  if (weights && weights->size() != points.rows()) throw Error(ErrorCode::LengthMismatch, "one weight per point required");

  constexpr double size = 600.0, pad = 20.0;
  const Eigen::Vector2d lo = points.colwise().minCoeff().transpose();
  const Eigen::Vector2d hi = points.colwise().maxCoeff().transpose();
  const double span = std::max({hi(0) - lo(0), hi(1) - lo(1), 1e-12});
  const double scale = (size - 2 * pad) / span;
  auto sx = [&](double x) { return pad + (x - lo(0)) * scale; };
  auto sy = [&](double y) { return size - pad - (y - lo(1)) * scale; };

  double low_cut = -1.0;
  if (weights && weights->size() > 0) {
    std::vector<double> w(weights->data(), weights->data() + weights->size());
    std::nth_element(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(w.size() / 2), w.end());
    low_cut = 0.5 * w[w.size() / 2];
  }

  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"600\" height=\"600\" viewBox=\"0 0 600 600\">\n";
  svg += "<rect width=\"600\" height=\"600\" fill=\"white\"/>\n";
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const int c = clusters[static_cast<std::size_t>(i)];
    const char* colour = c >= 0 ? kPalette[c % 10] : "#000000";
    const double x = sx(points(i, 0)), y = sy(points(i, 1));
    if (weights && (*weights)(i) < low_cut) {
      svg += "<path d=\"M" + fmt(x - 3) + ' ' + fmt(y - 3) + " L" + fmt(x + 3) + ' ' + fmt(y + 3) + " M" + fmt(x - 3) +
             ' ' + fmt(y + 3) + " L" + fmt(x + 3) + ' ' + fmt(y - 3) + "\" stroke=\"" + colour +
             "\" stroke-width=\"1\"/>\n";
    } else {
      svg += "<circle cx=\"" + fmt(x) + "\" cy=\"" + fmt(y) + "\" r=\"2\" fill=\"" + colour + "\"/>\n";
    }
  }

  for (int k = 0; k < model.num_components(); ++k) {
    if (!(model.proportions()(k) > 0.0)) continue;
    Matrix cov = model.component(k).covariance();
    if (weights) {
      double sum = 0.0;
      int count = 0;
      for (Eigen::Index i = 0; i < points.rows(); ++i) {
        if (clusters[static_cast<std::size_t>(i)] == k) {
          sum += (*weights)(i);
          ++count;
        }
      }
      if (count > 0 && sum > 0.0) cov /= sum / count;
    }
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
    const Vector ev = eig.eigenvalues().cwiseMax(0.0);
    const Eigen::Vector2d major = eig.eigenvectors().col(1);
    const double angle = -std::atan2(major(1), major(0)) * 180.0 / std::numbers::pi;
    const auto& mu = model.component(k).mean();
    svg += "<ellipse cx=\"" + fmt(sx(mu(0))) + "\" cy=\"" + fmt(sy(mu(1))) + "\" rx=\"" +
           fmt(2.0 * std::sqrt(ev(1)) * scale) + "\" ry=\"" + fmt(2.0 * std::sqrt(ev(0)) * scale) +
           "\" transform=\"rotate(" + fmt(angle) + ' ' + fmt(sx(mu(0))) + ' ' + fmt(sy(mu(1))) +
           ")\" fill=\"none\" stroke=\"" + kPalette[k % 10] + "\" stroke-width=\"1.5\"/>\n";
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace wdmix
