#pragma once

#include <cmath>
#include <functional>

#include "wdmix/core.hpp"

namespace wdmix::testing {

/// Largest finite-difference derivative of `objective` with respect to every
/// mean entry and every (symmetric) covariance entry of every component,
/// evaluated at `model`. Central differences at steps h and h/2 are combined
/// by Richardson extrapolation, so the truncation error is O(h^4) even for
/// nearly singular covariances.
inline double max_parameter_gradient(const MixtureModel& model,
                                     const std::function<double(const MixtureModel&)>& objective,
                                     double h = 1e-5) {
  double worst = 0.0;
  const int d = model.dim();
  auto perturbed = [&](int k, const Vector& mu, const Matrix& sigma) {
    std::vector<GaussianComponent> comps = model.components();
    comps[static_cast<std::size_t>(k)] = GaussianComponent(mu, sigma);
    return MixtureModel(std::move(comps), model.proportions());
  };
  for (int k = 0; k < model.num_components(); ++k) {
    const auto& c = model.component(k);
    auto derivative = [&](const std::function<MixtureModel(double)>& at) {
      auto central = [&](double step) { return (objective(at(step)) - objective(at(-step))) / (2.0 * step); };
      return (4.0 * central(0.5 * h) - central(h)) / 3.0;
    };
    for (int j = 0; j < d; ++j) {
      const double g = derivative([&](double step) {
        Vector mu = c.mean();
        mu(j) += step;
        return perturbed(k, mu, c.covariance());
      });
      worst = std::max(worst, std::abs(g));
    }
    for (int j = 0; j < d; ++j) {
      for (int l = j; l < d; ++l) {
        const double g = derivative([&](double step) {
          Matrix sigma = c.covariance();
          sigma(j, l) += step;
          if (l != j) sigma(l, j) += step;
          return perturbed(k, c.mean(), sigma);
        });
        worst = std::max(worst, std::abs(g));
      }
    }
  }
  return worst;
}

}  // namespace wdmix::testing
