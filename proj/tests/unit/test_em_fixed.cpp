#include <doctest.h>

#include <random>

#include "fd.hpp"
#include "support.hpp"
#include "wdmix/em_fixed.hpp"
#include "wdmix/initialization.hpp"

using namespace wdmix;
using namespace wdmix::testing;

namespace {

MixtureModel two_symmetric_1d() {
  std::vector<GaussianComponent> comps{GaussianComponent(Vector::Constant(1, -1.0), Matrix::Identity(1, 1)),
                                       GaussianComponent(Vector::Constant(1, 1.0), Matrix::Identity(1, 1))};
  return MixtureModel(std::move(comps), Vector::Constant(2, 0.5));
}

Dataset line(std::initializer_list<double> xs) {
  std::vector<std::vector<double>> rows;
  for (double x : xs) rows.push_back({x});
  return validate_dataset(rows);
}

}  // namespace

TEST_SUITE("em_fixed") {
  TEST_CASE("e-step examples") {
    std::mt19937_64 rng(11);
    const Dataset data = random_dataset(rng, 40, 2);
    const auto one = random_model(rng, 1, 2);
    const Responsibilities r1 = fwd_e_step(data, one, random_weights(rng, 40));
    CHECK(r1.eta.minCoeff() == 1.0);

    const auto sym = two_symmetric_1d();
    const Responsibilities rs = fwd_e_step(line({0.0, 0.0}), sym, Vector::LinSpaced(2, 0.3, 7.0));
    CHECK(rs.eta(0, 0) == doctest::Approx(0.5));
    CHECK(rs.eta(1, 1) == doctest::Approx(0.5));

    const auto model = random_model(rng, 3, 2);
    const Responsibilities r = fwd_e_step(data, model, Vector::Ones(40));
    PlainGmm ref;
    for (const auto& c : model.components()) {
      ref.mu.push_back(c.mean());
      ref.sigma.push_back(c.covariance());
    }
    ref.pi = model.proportions();
    CHECK(max_abs_diff(r.eta, ref.responsibilities(data.points())) < 1e-12);
    for (Eigen::Index i = 0; i < r.eta.rows(); ++i) CHECK(r.eta.row(i).sum() == doctest::Approx(1.0).epsilon(1e-12));
  }

  TEST_CASE("m-step hand evaluations") {
    const Dataset data = line({0.0, 2.0});
    Responsibilities r;
    r.eta = Matrix::Ones(2, 1);
    const MixtureModel plain = fwd_m_step(data, r, Vector::Ones(2));
    CHECK(plain.component(0).mean()(0) == doctest::Approx(1.0));
    CHECK(plain.component(0).covariance()(0, 0) == doctest::Approx(1.0));
    CHECK(plain.proportions()(0) == 1.0);

    Vector w(2);
    w << 3.0, 1.0;
    const MixtureModel weighted = fwd_m_step(data, r, w);
    CHECK(weighted.component(0).mean()(0) == doctest::Approx(0.5));
    CHECK(weighted.component(0).covariance()(0, 0) == doctest::Approx(1.5));
  }

  TEST_CASE("m-step is a stationary point of Q") {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 5; ++trial) {
      const Dataset data = random_dataset(rng, 50, 2);
      const Vector w = random_weights(rng, 50);
      const MixtureModel start = random_model(rng, 3, 2, 3.0);
      const Responsibilities r = fwd_e_step(data, start, w);
      const MixtureModel updated = fwd_m_step(data, r, w);
      const double g = max_parameter_gradient(updated, [&](const MixtureModel& m) { return fwd_q_function(data, m, r, w); });
      CHECK(g < 1e-5);
    }
  }

  TEST_CASE("diagonal m-step keeps the diagonal of the full update") {
    std::mt19937_64 rng(13);
    const Dataset data = random_dataset(rng, 80, 3);
    const Vector w = random_weights(rng, 80);
    const Responsibilities r = fwd_e_step(data, random_model(rng, 2, 3), w);
    const MixtureModel full = fwd_m_step(data, r, w);
    const MixtureModel diag = fwd_m_step(data, r, w, CovarianceShape::Diagonal);
    CHECK(diag.shape() == CovarianceShape::Diagonal);
    for (int k = 0; k < 2; ++k) {
      CHECK(max_abs_diff(diag.component(k).mean(), full.component(k).mean()) < 1e-12);
      CHECK(max_abs_diff(diag.component(k).covariance().diagonal(), full.component(k).covariance().diagonal()) < 1e-12);
    }
  }

  TEST_CASE("unit weights reproduce plain GMM EM iterate for iterate") {
    std::mt19937_64 rng(14);
    const Dataset data = random_dataset(rng, 300, 2);
    const MixtureModel init = initial_model(data, 3, 14);
    PlainGmm ref;
    for (const auto& c : init.components()) {
      ref.mu.push_back(c.mean());
      ref.sigma.push_back(c.covariance());
    }
    ref.pi = init.proportions();
    double worst = 0.0;
    EmConfig cfg;
    cfg.max_iter = 30;
    cfg.rel_tol = 0.0;
    cfg.on_iteration = [&](int, const MixtureModel& m) {
      ref.m_step(data.points(), ref.responsibilities(data.points()));
      for (int k = 0; k < 3; ++k) {
        worst = std::max(worst, max_abs_diff(m.component(k).mean(), ref.mu[static_cast<std::size_t>(k)]));
        worst = std::max(worst, max_abs_diff(m.component(k).covariance(), ref.sigma[static_cast<std::size_t>(k)]));
      }
      worst = std::max(worst, max_abs_diff(m.proportions(), ref.pi));
    };
    const FitReport rep = fit_gmm(data, init, cfg);
    CHECK(rep.iterations == 30);
    CHECK(worst < 1e-10);
  }

  TEST_CASE("log-likelihood trace is monotone") {
    std::mt19937_64 rng(15);
    for (int trial = 0; trial < 5; ++trial) {
      const int d = 1 + trial % 3;
      const Dataset data = random_dataset(rng, 200, d, 4, 3.0);
      const Vector w = random_weights(rng, 200);
      EmConfig cfg;
      cfg.rel_tol = 0.0;
      cfg.max_iter = 100;
      const FitReport rep = fit_fwd(data, initial_model(data, 3, trial), w, cfg);
      for (std::size_t i = 1; i < rep.objective_trace.size(); ++i) {
        CHECK(rep.objective_trace[i] >= rep.objective_trace[i - 1] - 1e-8);
      }
      CHECK(rep.objective_trace.back() == doctest::Approx(fwd_log_likelihood(data, rep.final_model, w)));
    }
  }

  TEST_CASE("fit examples") {
    std::mt19937_64 rng(16);
    std::normal_distribution<double> n(0.0, 1.0);
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    for (int i = 0; i < 200; ++i) {
      const int l = i % 2;
      rows.push_back({(l == 0 ? -20.0 : 20.0) + n(rng)});
      labels.push_back(l);
    }
    const Dataset data = validate_dataset(rows, labels);
    double sample[2] = {0, 0};
    for (int i = 0; i < 200; ++i) sample[labels[static_cast<std::size_t>(i)]] += rows[static_cast<std::size_t>(i)][0] / 100.0;
    const FitReport rep = fit_fwd(data, initial_model(data, 2, 1), Vector::Ones(200));
    CHECK(rep.converged);
    std::vector<double> means{rep.final_model.component(0).mean()(0), rep.final_model.component(1).mean()(0)};
    std::sort(means.begin(), means.end());
    CHECK(std::abs(means[0] - sample[0]) < 0.1);
    CHECK(std::abs(means[1] - sample[1]) < 0.1);

    EmConfig none;
    none.max_iter = 0;
    const MixtureModel init = initial_model(data, 2, 3);
    const FitReport zero = fit_fwd(data, init, Vector::Ones(200), none);
    CHECK_FALSE(zero.converged);
    CHECK(zero.iterations == 0);
    CHECK(max_abs_diff(zero.final_model.component(0).mean(), init.component(0).mean()) == 0.0);
  }

  TEST_CASE("an empty component is re-seeded") {
    std::mt19937_64 rng(17);
    const Dataset data = random_dataset(rng, 100, 2, 2);
    std::vector<GaussianComponent> comps = random_model(rng, 2, 2).components();
    comps.emplace_back(Vector::Constant(2, 1e6), Matrix::Identity(2, 2));
    const MixtureModel init(comps, Vector::Constant(3, 1.0 / 3.0));
    const Responsibilities r = fwd_e_step(data, init, Vector::Ones(100));
    CHECK(r.eta.col(2).sum() < 1e-10);
    const MixtureModel m = fwd_m_step(data, r, Vector::Ones(100));
    CHECK(m.component(2).mean().norm() < 100.0);
    CHECK(m.proportions()(2) > 0.0);
    CHECK(m.proportions().sum() == doctest::Approx(1.0).epsilon(1e-12));
  }

  TEST_CASE("input validation") {
    std::mt19937_64 rng(18);
    const Dataset data = random_dataset(rng, 10, 2);
    const auto model = random_model(rng, 2, 2);
    CHECK_THROWS_AS(fwd_e_step(data, model, Vector::Ones(9)), Error);
    CHECK_THROWS_AS(fwd_e_step(data, model, -Vector::Ones(10)), Error);
    CHECK_THROWS_AS(fwd_e_step(data, random_model(rng, 2, 3), Vector::Ones(10)), Error);
  }
}
