#include <doctest.h>

#include <random>
#include <set>

#include "support.hpp"
#include "wdmix/em_fixed.hpp"
#include "wdmix/em_weighted.hpp"
#include "wdmix/initialization.hpp"
#include "wdmix/model_selection.hpp"

using namespace wdmix;
using namespace wdmix::testing;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

Dataset blobs(std::uint64_t seed, int per_blob, const std::vector<std::array<double, 2>>& centers, double sd) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, sd);
  std::vector<std::vector<double>> rows;
  for (const auto& c : centers) {
    for (int i = 0; i < per_blob; ++i) rows.push_back({c[0] + n(rng), c[1] + n(rng)});
  }
  return validate_dataset(rows);
}

}  // namespace

TEST_SUITE("model_selection") {
  TEST_CASE("proportion update hand cases") {
    struct Case {
      Vector sums;
      int M;
      Vector expect;
    };
    const std::vector<Case> cases{
        {vec({10, 0.5, 4}), 5, vec({7.5 / 9, 0, 1.5 / 9})},
        {vec({10, 20}), 5, vec({0.3, 0.7})},
        {vec({2.5, 10}), 5, vec({0, 1})},
        {vec({3.5, 3.5, 3.0}), 5, vec({0.4, 0.4, 0.2})},
        {vec({100}), 5, vec({1})},
        {vec({0, 50, 50}), 4, vec({0, 0.5, 0.5})},
        {vec({12, 7, 1}), 2, vec({11.0 / 17, 6.0 / 17, 0})},
        {vec({6, 4.5, 1.5}), 3, vec({0.6, 0.4, 0})},
        {vec({20.25, 10.25, 5.25}), 9, vec({15.75 / 22.25, 5.75 / 22.25, 0.75 / 22.25})},
        {vec({8, 8, 8, 8}), 5, vec({0.25, 0.25, 0.25, 0.25})},
    };
    for (const auto& c : cases) {
      const Vector pi = mml_pi_update(c.sums, c.M);
      CHECK(max_abs_diff(pi, c.expect) < 1e-12);
    }
    // A column holding exactly M/2 is annihilated.
    CHECK(mml_pi_update(vec({2.5, 7.0}), 5)(0) == 0.0);
    CHECK_THROWS_AS(mml_pi_update(vec({3, 3}), 6), Error);
    try {
      mml_pi_update(vec({3, 3}), 6);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::AllAnnihilated);
    }
    CHECK_THROWS_AS(mml_pi_update(vec({-1, 5}), 2), Error);
  }

  TEST_CASE("message length on a hand-computed instance") {
    // n = 10, d = 1, two components, fixed unit weights.
    const std::vector<double> xs{-2.1, -1.7, -1.2, -0.9, -0.4, 0.3, 0.8, 1.1, 1.9, 2.6};
    std::vector<std::vector<double>> rows;
    for (double x : xs) rows.push_back({x});
    const Dataset data = validate_dataset(rows);
    const MixtureModel model({GaussianComponent(vec({-1.0}), Matrix::Constant(1, 1, 0.5)),
                              GaussianComponent(vec({1.2}), Matrix::Constant(1, 1, 0.8))},
                             vec({0.45, 0.55}));
    const Responsibilities r = fwd_e_step(data, model, Vector::Ones(10));

    double q = 0.0;
    const double mu[2] = {-1.0, 1.2}, var[2] = {0.5, 0.8}, pi[2] = {0.45, 0.55};
    for (int i = 0; i < 10; ++i) {
      for (int k = 0; k < 2; ++k) {
        const double dx = xs[static_cast<std::size_t>(i)] - mu[k];
        q += r.eta(i, k) * (std::log(pi[k]) - 0.5 * std::log(var[k]) - 0.5 * dx * dx / var[k]);
      }
    }
    const double M = 2.0;
    const double expect = 0.5 * M * (std::log(0.45) + std::log(0.55)) - q + 2.0 * (M + 1.0) / 2.0 * (1.0 + std::log(10.0 / 12.0));
    CHECK(std::abs(message_length(data, model, r, WeightState::fixed(Vector::Ones(10))) - expect) < 1e-8);
  }

  TEST_CASE("message length ignores empty components") {
    std::mt19937_64 rng(31);
    const Dataset data = random_dataset(rng, 50, 2);
    const MixtureModel one({GaussianComponent(Vector::Zero(2), random_spd(rng, 2))}, Vector::Ones(1));
    Responsibilities r1;
    r1.eta = Matrix::Ones(50, 1);
    const Vector w = random_weights(rng, 50);
    const double len1 = message_length(data, one, r1, WeightState::fixed(w));
    const double M = 5.0;
    const double expect = -fwd_q_function(data, one, r1, w) + (M + 1.0) / 2.0 * (1.0 + std::log(50.0 / 12.0));
    CHECK(len1 == doctest::Approx(expect).epsilon(1e-12));

    const MixtureModel two({one.component(0), GaussianComponent(Vector::Ones(2), Matrix::Identity(2, 2))}, vec({1.0, 0.0}));
    Responsibilities r2;
    r2.eta = Matrix::Zero(50, 2);
    r2.eta.col(0).setOnes();
    CHECK(message_length(data, two, r2, WeightState::fixed(w)) == doctest::Approx(len1).epsilon(1e-14));

    const MixtureModel dead({one.component(0), one.component(0)}, vec({1.0, 0.0}));
    CHECK_NOTHROW(message_length(data, dead, r2, WeightState::fixed(w)));
  }

  TEST_CASE("selection recovers well-separated blobs") {
    MmlConfig cfg;
    cfg.k_high = 8;
    int hits = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const Dataset data = blobs(seed, 100, {{0, 0}, {150, 0}, {0, 150}}, 20.0);
      hits += select_model(data, weight_priors(init_weights_knn(data, 20, 100.0)), cfg, seed)
                  .best_model.active_components()
                  .size() == 3;
    }
    CHECK(hits >= 9);

    const Dataset data = blobs(1, 100, {{0, 0}, {150, 0}, {0, 150}}, 20.0);
    const SelectionResult res = select_model(data, weight_priors(init_weights_knn(data, 20, 100.0)), cfg, 1);

    double best = std::numeric_limits<double>::infinity();
    for (const auto& c : res.checkpoints) best = std::min(best, c.length);
    CHECK(res.best_length == best);
    CHECK(res.best_model.proportions().sum() == doctest::Approx(1.0).epsilon(1e-10));

    std::set<int> dead;
    for (const auto& e : res.report.annihilation_log) {
      CHECK(dead.insert(e.component).second);
    }
    for (std::size_t i = 1; i < res.report.k_plus_history.size(); ++i) {
      CHECK(res.report.k_plus_history[i] <= res.report.k_plus_history[i - 1]);
    }
    CHECK(res.report.k_plus_history.back() == cfg.k_low);
    CHECK(res.report.objective_trace.size() == res.report.k_plus_history.size());

    // Rows renormalise over the survivors only.
    for (int k = 0; k < res.best_model.num_components(); ++k) {
      if (res.best_model.proportions()(k) == 0.0) CHECK(res.best_responsibilities.eta.col(k).maxCoeff() == 0.0);
    }
    for (Eigen::Index i = 0; i < res.best_responsibilities.eta.rows(); ++i) {
      CHECK(res.best_responsibilities.eta.row(i).sum() == doctest::Approx(1.0).epsilon(1e-10));
    }
  }

  TEST_CASE("a single blob selects one component") {
    // Blob spread is on the scale of the kernel width sigma = 100.
    int gamma_hits = 0, fixed_hits = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const Dataset data = blobs(seed, 300, {{5, 5}}, 20.0);
      const Vector w = init_weights_knn(data, 20, 100.0);
      MmlConfig cfg;
      cfg.k_high = 10;
      gamma_hits += select_model(data, weight_priors(w), cfg, seed).best_model.active_components().size() == 1;
      fixed_hits += select_model(data, WeightState::fixed(w), cfg, seed).best_model.active_components().size() == 1;
    }
    CHECK(gamma_hits >= 9);
    CHECK(fixed_hits >= 8);
  }

  TEST_CASE("fixed-weight variant") {
    MmlConfig cfg;
    cfg.k_high = 6;
    int hits = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const Dataset data = blobs(seed, 100, {{0, 0}, {200, 200}}, 20.0);
      hits += select_model(data, WeightState::fixed(init_weights_knn(data, 20, 100.0)), cfg, seed)
                  .best_model.active_components()
                  .size() == 2;
    }
    CHECK(hits >= 8);
  }

  TEST_CASE("k_high equal to k_low never annihilates by force") {
    const Dataset data = blobs(4, 100, {{0, 0}, {30, 0}, {15, 30}}, 2.0);
    MmlConfig cfg;
    cfg.k_high = 3;
    cfg.k_low = 3;
    const WeightState priors = weight_priors(init_weights_knn(data, 20, 100.0));
    const MixtureModel init = initial_model(data, 3, 2);
    const SelectionResult res = select_model(data, init, priors, cfg);
    CHECK(res.report.annihilation_log.empty());
    CHECK(res.checkpoints.size() == 1);
    const FitReport wd = fit_wd(data, init, priors);
    for (int k = 0; k < 3; ++k) {
      CHECK(max_abs_diff(res.best_model.component(k).mean(), wd.final_model.component(k).mean()) < 0.05);
    }
  }

  TEST_CASE("epsilon zero runs every inner loop to the cap") {
    const Dataset data = blobs(5, 60, {{0, 0}, {30, 0}}, 2.0);
    MmlConfig cfg;
    cfg.k_high = 2;
    cfg.k_low = 2;
    cfg.epsilon = 0.0;
    cfg.max_outer_iter = 7;
    const SelectionResult res = select_model(data, weight_priors(init_weights_knn(data, 20, 100.0)), cfg, 1);
    CHECK_FALSE(res.report.converged);
    CHECK(res.report.iterations == 7);
    CHECK_FALSE(res.checkpoints.front().converged);
  }

  TEST_CASE("configuration errors") {
    const Dataset data = blobs(6, 30, {{0, 0}}, 1.0);
    const WeightState w = WeightState::fixed(Vector::Ones(30));
    MmlConfig cfg;
    cfg.k_high = 3;
    cfg.k_low = 4;
    CHECK_THROWS_AS(select_model(data, w, cfg, 1), Error);
    cfg.k_low = 1;
    CHECK_THROWS_AS(select_model(data, initial_model(data, 2, 1), w, cfg), Error);
  }
}
