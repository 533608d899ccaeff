#include <doctest.h>

#include <filesystem>
#include <random>

#include "support.hpp"
#include "wdmix/datagen.hpp"
#include "wdmix/io.hpp"
#include "wdmix/plot.hpp"

using namespace wdmix;
using namespace wdmix::testing;

TEST_SUITE("io") {
  TEST_CASE("dataset csv round trip is exact") {
    const Dataset d = contaminate_uniform(generate_sim(SimProfile::Mixed, 200, 3), 0.3, 0.1, 4);
    const std::string text = dataset_to_csv(d);
    CHECK(text.rfind("x1,x2,label,outlier\n", 0) == 0);
    const Dataset back = parse_dataset_csv(text);
    CHECK(back.points() == d.points());
    CHECK(*back.labels() == *d.labels());
    CHECK(*back.outlier_flags() == *d.outlier_flags());
    CHECK(dataset_to_csv(back) == text);
  }

  TEST_CASE("dataset csv parsing") {
    const Dataset d = parse_dataset_csv("a,label,b\n1.5,3,2\n-1e3,0,4\n");
    CHECK(d.dim() == 2);
    CHECK(d.points()(1, 0) == -1000.0);
    CHECK((*d.labels())[0] == 3);
    CHECK_FALSE(d.outlier_flags().has_value());
    const Dataset f = parse_dataset_csv("x,outlier\n1,true\n2,0\n");
    CHECK((*f.outlier_flags())[0]);
    CHECK_FALSE((*f.outlier_flags())[1]);

    auto code = [](const std::string& text) {
      try {
        parse_dataset_csv(text);
      } catch (const Error& e) {
        return e.code();
      }
      return ErrorCode::InvalidArgument;
    };
    CHECK(code("x,y\n1,2\n3\n") == ErrorCode::NonRectangular);
    CHECK(code("x,y\n1,abc\n") == ErrorCode::Parse);
    CHECK(code("x,y\n1,nan\n") == ErrorCode::NaNInput);
    CHECK(code("") == ErrorCode::EmptyInput);
    CHECK_THROWS_AS(read_dataset_csv("/nonexistent/file.csv"), Error);
  }

  TEST_CASE("model json round trip") {
    std::mt19937_64 rng(71);
    for (auto shape : {CovarianceShape::Full, CovarianceShape::Diagonal}) {
      std::vector<GaussianComponent> comps = random_model(rng, 3, 3, 5.0, shape).components();
      Vector pi(3);
      pi << 0.3, 0.0, 0.7;
      const MixtureModel m(comps, pi);
      const AssignmentRule rule{"select", 50, 12.5, EzVariant::Posterior};
      const auto doc = model_to_json(m, rule);
      CHECK(doc["schema_version"] == kModelSchemaVersion);
      const StoredModel back = model_from_json(nlohmann::json::parse(dump_json(doc)));
      CHECK(back.model.shape() == shape);
      CHECK(back.model.proportions() == m.proportions());
      for (int k = 0; k < 3; ++k) {
        CHECK(back.model.component(k).mean() == m.component(k).mean());
        CHECK(back.model.component(k).covariance() == m.component(k).covariance());
      }
      CHECK(back.rule.algorithm == "select");
      CHECK(back.rule.q == 50);
      CHECK(back.rule.sigma == 12.5);
      CHECK(back.rule.ez_variant == EzVariant::Posterior);
    }
    auto bad = nlohmann::json::parse(dump_json(model_to_json(random_model(rng, 1, 2), {})));
    bad["schema_version"] = 99;
    CHECK_THROWS_AS(model_from_json(bad), Error);
    CHECK_THROWS_AS(model_from_json(nlohmann::json::parse("{}")), Error);
  }

  TEST_CASE("report json") {
    std::mt19937_64 rng(72);
    FitReport rep{{-10.0, -5.0}, random_model(rng, 2, 2), {}, {}, 1, true, {}, {2, 1}};
    rep.annihilation_log.push_back({3, 1, 0.01, AnnihilationCause::Forced});
    const auto doc = report_to_json(rep);
    CHECK(doc["iterations"] == 1);
    CHECK(doc["converged"] == true);
    CHECK(doc["objective_trace"].size() == 2);
    CHECK(doc["annihilation_log"][0]["cause"] == "forced");
    CHECK(doc["k_plus_history"][1] == 1);
  }

  TEST_CASE("segments, ground truth and assignments") {
    const Dataset s = parse_segment_csv("x,y,modality\n1,2,a\n3,4,v\n");
    CHECK((*s.modality())[0] == Modality::Audio);
    CHECK((*s.modality())[1] == Modality::Visual);
    CHECK_THROWS_AS(parse_segment_csv("x,y,modality\n1,2,q\n"), Error);

    const auto gt = parse_ground_truth_csv("segment_id,x_g,y_g\nseg01,10.5,20\n");
    REQUIRE(gt.size() == 1);
    CHECK(gt[0].segment_id == "seg01");
    CHECK(gt[0].y == 20.0);

    Vector w(3);
    w << 0.5, 1.0 / 3.0, 2.0;
    const std::string csv = assignments_to_csv({2, 0, 1}, &w);
    CHECK(csv.rfind("index,cluster,weight\n0,2,0.5\n", 0) == 0);
    CHECK(parse_assignments_csv(csv) == std::vector<int>{2, 0, 1});
    CHECK(assignments_to_csv({1}) == "index,cluster\n0,1\n");
    CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
  }

  TEST_CASE("svg scatter") {
    std::mt19937_64 rng(73);
    const Dataset d = random_dataset(rng, 30, 2);
    const MixtureModel m = random_model(rng, 2, 2);
    std::vector<int> c(30, 0);
    c[3] = 1;
    Vector w = Vector::Ones(30);
    w(5) = 1e-4;
    const std::string svg = scatter_svg(d.points(), c, m, &w);
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("<ellipse") != std::string::npos);
    CHECK(svg.find("</svg>") != std::string::npos);
    CHECK_THROWS_AS(scatter_svg(random_matrix(rng, 5, 3), std::vector<int>(5, 0), random_model(rng, 1, 3)), Error);
  }

  TEST_CASE("text files") {
    const auto path = std::filesystem::temp_directory_path() / "wdmix_io_test.txt";
    write_text(path, "hello\n");
    CHECK(read_text(path) == "hello\n");
    std::filesystem::remove(path);
    CHECK_THROWS_AS(write_text("/nonexistent/dir/file", "x"), Error);
  }
}
