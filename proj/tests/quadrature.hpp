#pragma once

#include <algorithm>
#include <boost/math/distributions/gamma.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>

#include "wdmix/densities.hpp"

namespace wdmix::testing {

// log of the integral of N(x; mu, Sigma / w) Gamma(w; alpha, beta) over w,
// by adaptive Gauss-Kronrod on (0, w_max) where the gamma tail mass beyond
// w_max is below 1e-14.
inline double pearson_by_quadrature(const Vector& x, const GaussianComponent& c, double alpha, double beta) {
  const boost::math::gamma_distribution<double> g(alpha, 1.0 / beta);
  const double w_max = boost::math::quantile(boost::math::complement(g, 1e-14));
  // The integrand is proportional to Gamma(w; alpha + d/2, beta + m/2); scale
  // by its value at that mode and split there so both pieces are smooth.
  const double m = mahalanobis_sq(x, c);
  const double mode = std::max((alpha + 0.5 * c.dim() - 1.0) / (beta + 0.5 * m), 1e-3);
  const double peak = log_gauss_scaled(x, c, mode) + log_gamma_pdf(mode, alpha, beta);
  auto f = [&](double w) {
    if (w <= 0.0) return 0.0;
    return std::exp(log_gauss_scaled(x, c, w) + log_gamma_pdf(w, alpha, beta) - peak);
  };
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  const double split = std::min(mode, w_max);
  double total = GK::integrate(f, 0.0, split, 15, 1e-12);
  if (w_max > split) total += GK::integrate(f, split, w_max, 15, 1e-12);
  return std::log(total) + peak;
}

}  // namespace wdmix::testing
