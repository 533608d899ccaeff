#include <doctest.h>

#include <random>

#include "fd.hpp"
#include "quadrature.hpp"
#include "support.hpp"
#include "wdmix/em_fixed.hpp"
#include "wdmix/em_weighted.hpp"
#include "wdmix/initialization.hpp"

using namespace wdmix;
using namespace wdmix::testing;

namespace {

WeightState random_priors(std::mt19937_64& rng, int n) {
  return WeightState::random(random_weights(rng, n, 0.5, 5.0), random_weights(rng, n, 0.5, 5.0));
}

}  // namespace

TEST_SUITE("em_weighted") {
  TEST_CASE("e-z step examples") {
    std::mt19937_64 rng(21);
    const Dataset data = random_dataset(rng, 30, 2);
    const WeightState priors = random_priors(rng, 30);
    CHECK(wd_e_z_step(data, random_model(rng, 1, 2), priors).eta.minCoeff() == 1.0);

    std::vector<GaussianComponent> comps{GaussianComponent(Vector::Constant(2, -1.0), Matrix::Identity(2, 2)),
                                         GaussianComponent(Vector::Constant(2, 1.0), Matrix::Identity(2, 2))};
    const MixtureModel sym(comps, Vector::Constant(2, 0.5));
    const Dataset mid = validate_dataset({{0.0, 0.0}, {1.0, -1.0}});
    const auto r = wd_e_z_step(mid, sym, WeightState::random(Vector::Constant(2, 0.3), Vector::Constant(2, 7.0)));
    CHECK(r.eta(0, 0) == doctest::Approx(0.5));
    CHECK(r.eta(1, 0) == doctest::Approx(0.5));

    CHECK_THROWS_AS(wd_e_z_step(data, sym, WeightState::fixed(Vector::Ones(30))), Error);
  }

  TEST_CASE("e-z step matches the quadrature oracle") {
    std::mt19937_64 rng(22);
    const Dataset data = random_dataset(rng, 12, 2, 2, 2.0);
    const MixtureModel model = random_model(rng, 3, 2, 2.0);
    const WeightState priors = random_priors(rng, 12);
    const Responsibilities r = wd_e_z_step(data, model, priors);
    for (std::size_t i = 0; i < data.size(); ++i) {
      const Vector x = data.point(i).transpose();
      Vector dens(3);
      for (int k = 0; k < 3; ++k) {
        dens(k) = model.proportions()(k) *
                  std::exp(pearson_by_quadrature(x, model.component(k), priors.prior_alpha(static_cast<Eigen::Index>(i)),
                                                 priors.prior_beta(static_cast<Eigen::Index>(i))));
      }
      dens /= dens.sum();
      for (int k = 0; k < 3; ++k) CHECK(std::abs(r.eta(static_cast<Eigen::Index>(i), k) - dens(k)) < 1e-6);
    }
  }

  TEST_CASE("e-w step arithmetic") {
    const MixtureModel m(std::vector<GaussianComponent>{GaussianComponent(Vector::Zero(2), Matrix::Identity(2, 2))},
                         Vector::Ones(1));
    const Dataset data = validate_dataset({{0.0, 0.0}, {1.0, 1.0}});
    const WeightState w = wd_e_w_step(data, m, WeightState::random(Vector::Constant(2, 2.0), Vector::Constant(2, 1.0)));
    CHECK(w.post_a(0) == 3.0);
    CHECK(w.post_b(0, 0) == 1.0);
    CHECK(w.post_mean(0, 0) == 3.0);
    CHECK(w.post_b(1, 0) == 2.0);
    CHECK(w.post_mean(1, 0) == 1.5);
    CHECK(w.prior_alpha(0) == 2.0);
  }

  TEST_CASE("e-w invariants") {
    std::mt19937_64 rng(23);
    const Dataset data = random_dataset(rng, 60, 3);
    const MixtureModel model = random_model(rng, 4, 3);
    const WeightState priors = random_priors(rng, 60);
    const WeightState w = wd_e_w_step(data, model, priors);
    for (Eigen::Index i = 0; i < 60; ++i) {
      CHECK(w.post_a(i) - priors.prior_alpha(i) == doctest::Approx(1.5));
      for (int k = 0; k < 4; ++k) {
        CHECK(std::abs(w.post_mean(i, k) - w.post_a(i) / w.post_b(i, k)) < 1e-12 * w.post_mean(i, k));
        for (int l = 0; l < 4; ++l) {
          const double mk = mahalanobis_sq(data.point(static_cast<std::size_t>(i)).transpose(), model.component(k));
          const double ml = mahalanobis_sq(data.point(static_cast<std::size_t>(i)).transpose(), model.component(l));
          if (mk < ml) CHECK(w.post_mean(i, k) > w.post_mean(i, l));
        }
      }
    }

    // Moving away from the mean along a ray strictly lowers the weight.
    const MixtureModel one(std::vector<GaussianComponent>{model.component(0)}, Vector::Ones(1));
    const Vector dir = random_matrix(rng, 3, 1);
    double prev = std::numeric_limits<double>::infinity();
    for (int step = 0; step < 10; ++step) {
      const Vector x = one.component(0).mean() + step * 0.5 * dir;
      const Dataset pt(Matrix(x.transpose()));
      const WeightState ws = wd_e_w_step(pt, one, WeightState::random(Vector::Ones(1), Vector::Ones(1)));
      CHECK(ws.post_mean(0, 0) < prev);
      prev = ws.post_mean(0, 0);
    }
  }

  TEST_CASE("marginal weight means") {
    std::mt19937_64 rng(24);
    const Dataset data = random_dataset(rng, 40, 2);
    const MixtureModel model = random_model(rng, 3, 2);
    const WeightState w = wd_e_w_step(data, model, random_priors(rng, 40));
    const Responsibilities r = wd_e_z_step(data, model, w);
    const Vector m = marginal_weight_means(w, r);
    for (Eigen::Index i = 0; i < 40; ++i) {
      CHECK(std::abs(m(i) - r.eta.row(i).dot(w.post_mean.row(i))) < 1e-10);
      CHECK(m(i) >= w.post_mean.row(i).minCoeff() - 1e-12);
      CHECK(m(i) <= w.post_mean.row(i).maxCoeff() + 1e-12);
    }

    WeightState two = w;
    two.post_mean = Matrix(1, 2);
    two.post_mean << 1.0, 3.0;
    Responsibilities half;
    half.eta = Matrix::Constant(1, 2, 0.5);
    CHECK(marginal_weight_means(two, half)(0) == doctest::Approx(2.0));

    // A far outlier receives a smaller weight than a point near the mean.
    const MixtureModel unit(std::vector<GaussianComponent>{GaussianComponent(Vector::Zero(1), Matrix::Identity(1, 1))},
                            Vector::Ones(1));
    const Dataset pts = validate_dataset({{0.1}, {25.0}});
    const WeightState pw = wd_e_w_step(pts, unit, WeightState::random(Vector::Ones(2), Vector::Ones(2)));
    Responsibilities single;
    single.eta = Matrix::Ones(2, 1);
    const Vector mm = marginal_weight_means(pw, single);
    CHECK(mm(1) < mm(0));
  }

  TEST_CASE("m-step examples and stationarity") {
    const Dataset data = validate_dataset({{0.0}, {2.0}});
    WeightState w = WeightState::random(Vector::Ones(2), Vector::Ones(2));
    w.post_a = Vector::Ones(2);
    w.post_b = Matrix::Ones(2, 1);
    w.post_mean = Matrix(2, 1);
    w.post_mean << 3.0, 1.0;
    Responsibilities r;
    r.eta = Matrix::Ones(2, 1);
    const MixtureModel m = wd_m_step(data, r, w);
    CHECK(m.component(0).mean()(0) == doctest::Approx(0.5));
    CHECK(m.component(0).covariance()(0, 0) == doctest::Approx(1.5));

    std::mt19937_64 rng(25);
    for (int trial = 0; trial < 5; ++trial) {
      const Dataset d = random_dataset(rng, 50, 2);
      const MixtureModel start = random_model(rng, 3, 2, 3.0);
      const WeightState post = wd_e_w_step(d, start, random_priors(rng, 50));
      const Responsibilities resp = wd_e_z_step(d, start, post);
      const MixtureModel updated = wd_m_step(d, resp, post);
      const double g = max_parameter_gradient(
          updated, [&](const MixtureModel& mm) { return wd_q_function(d, mm, resp, post); });
      CHECK(g < 1e-5);

      // Constant posterior weights reduce to the fixed-weight update.
      WeightState flat = post;
      flat.post_mean.setConstant(1.7);
      const MixtureModel a = wd_m_step(d, resp, flat);
      const MixtureModel b = fwd_m_step(d, resp, Vector::Constant(50, 1.7));
      for (int k = 0; k < 3; ++k) {
        CHECK(max_abs_diff(a.component(k).mean(), b.component(k).mean()) < 1e-12);
        CHECK(max_abs_diff(a.component(k).covariance(), b.component(k).covariance()) < 1e-12);
      }
    }
  }

  TEST_CASE("marginal likelihood trace is monotone") {
    std::mt19937_64 rng(26);
    for (int trial = 0; trial < 5; ++trial) {
      const int d = 1 + trial % 3;
      const Dataset data = random_dataset(rng, 200, d, 4, 3.0);
      EmConfig cfg;
      cfg.rel_tol = 0.0;
      cfg.max_iter = 100;
      const FitReport rep = fit_wd(data, initial_model(data, 3, trial), random_priors(rng, 200), cfg);
      for (std::size_t i = 1; i < rep.objective_trace.size(); ++i) {
        CHECK(rep.objective_trace[i] >= rep.objective_trace[i - 1] - 1e-8);
      }
      CHECK(rep.final_weights.marginal_mean.size() == 200);
    }
  }

  TEST_CASE("concentrated priors approach the plain GMM fit") {
    std::mt19937_64 rng(27);
    const Dataset data = random_dataset(rng, 200, 2, 3, 4.0);
    const MixtureModel init = initial_model(data, 3, 5);
    EmConfig cfg;
    cfg.rel_tol = 0.0;
    cfg.max_iter = 50;
    const FitReport gmm = fit_gmm(data, init, cfg);
    const FitReport wd = fit_wd(data, init, WeightState::random(Vector::Constant(200, 1e6), Vector::Constant(200, 1e6)), cfg);
    for (int k = 0; k < 3; ++k) {
      CHECK(max_abs_diff(gmm.final_model.component(k).mean(), wd.final_model.component(k).mean()) < 1e-3);
    }
  }

  TEST_CASE("planted outliers get lower weights") {
    std::mt19937_64 rng(28);
    std::normal_distribution<double> n(0.0, 1.0);
    std::uniform_real_distribution<double> u(-60.0, 60.0);
    std::vector<std::vector<double>> rows;
    std::vector<bool> flags;
    for (int i = 0; i < 200; ++i) {
      rows.push_back({(i % 2 ? -10.0 : 10.0) + n(rng)});
      flags.push_back(false);
    }
    for (int i = 0; i < 40; ++i) {
      rows.push_back({u(rng)});
      flags.push_back(true);
    }
    const Dataset data = validate_dataset(rows, std::nullopt, std::nullopt, flags);
    const FitReport rep = fit_wd(data, initial_model(data, 2, 1), weight_priors(init_weights_knn(data, 10, 4.0)));
    double in = 0, out = 0;
    for (int i = 0; i < 240; ++i) (i < 200 ? in : out) += rep.final_weights.marginal_mean(i);
    CHECK(out / 40 < in / 200);

    EmConfig none;
    none.max_iter = 0;
    const MixtureModel init = initial_model(data, 2, 1);
    const FitReport zero = fit_wd(data, init, weight_priors(Vector::Ones(240)), none);
    CHECK(max_abs_diff(zero.final_model.component(1).covariance(), init.component(1).covariance()) == 0.0);
    CHECK_THROWS_AS(fit_wd(data, init, WeightState::fixed(Vector::Ones(240))), Error);
  }
}
