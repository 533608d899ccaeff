#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "wdmix/assignment.hpp"
#include "wdmix/av_fusion.hpp"
#include "wdmix/datagen.hpp"
#include "wdmix/em_fixed.hpp"
#include "wdmix/em_weighted.hpp"
#include "wdmix/evaluation.hpp"
#include "wdmix/initialization.hpp"
#include "wdmix/io.hpp"
#include "wdmix/model_selection.hpp"
#include "wdmix/plot.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace wdmix;

namespace {

struct GenerateOptions {
  std::string profile;
  std::size_t n = 600;
  double outlier_fraction = 0.0;
  double margin = 0.1;
  std::uint64_t seed = 0;
  std::string out = "-";
};

struct FitOptions {
  std::string input;
  std::string algorithm = "wd";
  int k = 0;
  int q = 20;
  double sigma = 100.0;
  int max_iter = 400;
  double tol = 0.01;
  std::uint64_t seed = 0;
  int restarts = 10;
  std::string shape = "full";
  std::string out;
};

struct SelectOptions {
  std::string input;
  int k_high = 15;
  int k_low = 1;
  double epsilon = 1e-5;
  int max_outer_iter = 400;
  int q = 20;
  double sigma = 100.0;
  std::uint64_t seed = 0;
  int restarts = 10;
  std::string shape = "full";
  std::string ez = "posterior";
  bool fixed_weights = false;
  std::string out;
};

struct EvaluateOptions {
  std::string data;
  std::string model;
  std::string assignments;
  std::string metrics = "db,f1,outliers";
  std::string plot;
  std::string write_assignments;
  std::string out = "-";
};

struct AvOptions {
  std::vector<std::string> segments;
  std::string truth;
  double threshold = 0.05;
  double sigma = 100.0;
  int k_high = 10;
  double epsilon = 1e-5;
  std::uint64_t seed = 0;
  std::string out = "-";
};

void emit(const std::string& target, const std::string& text) {
  if (target == "-") {
    std::cout << text;
  } else {
    write_text(target, text);
  }
}

CovarianceShape parse_shape(const std::string& s) {
  return s == "diagonal" ? CovarianceShape::Diagonal : CovarianceShape::Full;
}

// Weights (fixed or gamma priors) implied by a stored assignment rule.
WeightState weights_for(const AssignmentRule& rule, const Dataset& data) {
  if (rule.algorithm == "gmm") return WeightState::fixed(Vector::Ones(static_cast<Eigen::Index>(data.size())));
  const Vector w = init_weights_knn(data, rule.q, rule.sigma);
  if (rule.algorithm == "fwd" || rule.algorithm == "select-fwd") return WeightState::fixed(w);
  return weight_priors(w);
}

const Vector* point_weights(const PosteriorPass& pass) {
  return pass.weights.mode == WeightMode::Random ? &pass.weights.marginal_mean : &pass.weights.fixed_w;
}

// Writes the model and derives the assignments from the serialized model, so
// that `evaluate` on the same files reproduces them exactly.
PosteriorPass write_model_and_assignments(const fs::path& dir, const Dataset& data, const MixtureModel& model,
                                          const AssignmentRule& rule) {
  const std::string model_text = dump_json(model_to_json(model, rule));
  write_text(dir / "model.json", model_text);
  const StoredModel stored = model_from_json(nlohmann::json::parse(model_text));
  PosteriorPass pass = posterior_pass(data, stored.model, weights_for(stored.rule, data), stored.rule.ez_variant);
  const Vector* w = rule.algorithm == "gmm" ? nullptr : point_weights(pass);
  write_text(dir / "assignments.csv", assignments_to_csv(pass.resp.hard_assignments(), w));
  return pass;
}

json vector_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

int run_generate(const GenerateOptions& o) {
  const Dataset inliers = generate_sim(parse_sim_profile(o.profile), o.n, o.seed);
  // Outliers use a separate stream derived from the same seed.
  const Dataset data = contaminate_uniform(inliers, o.outlier_fraction, o.margin, o.seed ^ 0x9e3779b97f4a7c15ULL);
  emit(o.out, dataset_to_csv(data));
  return 0;
}

int run_fit(const FitOptions& o) {
  const Dataset data = read_dataset_csv(o.input);
  const fs::path dir(o.out);
  fs::create_directories(dir);
  const AssignmentRule rule{o.algorithm, o.q, o.sigma, EzVariant::Prior};
  const WeightState weights = weights_for(rule, data);
  const MixtureModel init = initial_model(data, o.k, o.seed, parse_shape(o.shape), o.restarts);
  EmConfig cfg;
  cfg.max_iter = o.max_iter;
  cfg.rel_tol = o.tol;

  FitReport report = o.algorithm == "wd"    ? fit_wd(data, init, weights, cfg)
                     : o.algorithm == "fwd" ? fit_fwd(data, init, weights.fixed_w, cfg)
                                            : fit_gmm(data, init, cfg);
  const PosteriorPass pass = write_model_and_assignments(dir, data, report.final_model, rule);

  json doc = report_to_json(report);
  doc["algorithm"] = o.algorithm;
  doc["k"] = o.k;
  doc["seed"] = o.seed;
  if (o.algorithm == "wd") {
    doc["weights"] = vector_json(pass.weights.marginal_mean);
  } else if (o.algorithm == "fwd") {
    doc["weights"] = vector_json(pass.weights.fixed_w);
  }
  write_text(dir / "report.json", dump_json(doc));
  return 0;
}

int run_select(const SelectOptions& o) {
  const Dataset data = read_dataset_csv(o.input);
  const fs::path dir(o.out);
  fs::create_directories(dir);
  const EzVariant ez = o.ez == "prior" ? EzVariant::Prior : EzVariant::Posterior;
  const AssignmentRule rule{o.fixed_weights ? "select-fwd" : "select", o.q, o.sigma, ez};
  const WeightState weights = weights_for(rule, data);
  MmlConfig cfg;
  cfg.k_high = o.k_high;
  cfg.k_low = o.k_low;
  cfg.epsilon = o.epsilon;
  cfg.max_outer_iter = o.max_outer_iter;
  cfg.ez_variant = ez;
  const MixtureModel init = initial_model(data, o.k_high, o.seed, parse_shape(o.shape), o.restarts);
  const SelectionResult sel = select_model(data, init, weights, cfg);

  const MixtureModel best = sel.best_model.compacted();
  const PosteriorPass pass = write_model_and_assignments(dir, data, best, rule);

  json doc = report_to_json(sel.report);
  doc["message_length_trace"] = sel.report.objective_trace;
  doc["selected_k"] = best.num_components();
  doc["best_length"] = sel.best_length;
  doc["best_components"] = sel.best_model.active_components();
  auto cps = json::array();
  for (const auto& c : sel.checkpoints) {
    cps.push_back({{"sweep", c.sweep}, {"k_plus", c.k_plus}, {"length", c.length}, {"converged", c.converged}});
  }
  doc["checkpoints"] = cps;
  doc["seed"] = o.seed;
  doc["weights"] = vector_json(*point_weights(pass));
  write_text(dir / "report.json", dump_json(doc));
  return 0;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

int run_evaluate(const EvaluateOptions& o) {
  const Dataset data = read_dataset_csv(o.data);
  const StoredModel stored = model_from_json(nlohmann::json::parse(read_text(o.model)));
  const PosteriorPass pass =
      posterior_pass(data, stored.model, weights_for(stored.rule, data), stored.rule.ez_variant);
  const std::vector<int> computed = pass.resp.hard_assignments();
  const Vector* w = stored.rule.algorithm == "gmm" ? nullptr : point_weights(pass);
  if (!o.write_assignments.empty()) write_text(o.write_assignments, assignments_to_csv(computed, w));

  std::vector<int> clusters = computed;
  json doc;
  if (!o.assignments.empty()) {
    clusters = parse_assignments_csv(read_text(o.assignments));
    if (clusters.size() != data.size()) throw Error(ErrorCode::LengthMismatch, "assignments do not match the data");
    doc["assignments_match_model"] = clusters == computed;
  }

  for (const auto& metric : split_list(o.metrics)) {
    if (metric == "db") {
      Responsibilities hard;
      hard.eta = Matrix::Zero(static_cast<Eigen::Index>(clusters.size()), stored.model.num_components());
      for (std::size_t i = 0; i < clusters.size(); ++i) {
        if (clusters[i] < 0 || clusters[i] >= stored.model.num_components()) {
          throw Error(ErrorCode::InvalidArgument, "assignment refers to a component the model does not have");
        }
        hard.eta(static_cast<Eigen::Index>(i), clusters[i]) = 1.0;
      }
      const DbReport db = davies_bouldin_report(data, stored.model, hard);
      doc["db"] = db.all_points;
      doc["db_inliers"] = db.inliers_only ? json(*db.inliers_only) : json(nullptr);
    } else if (metric == "f1") {
      if (!data.labels()) throw Error(ErrorCode::InvalidArgument, "f1 needs a label column in the data");
      doc["f1"] = micro_f1(clusters, *data.labels());
      doc["f1_greedy"] = micro_f1(clusters, *data.labels(), LabelMatching::Greedy);
    } else if (metric == "outliers") {
      if (pass.weights.mode != WeightMode::Random || !data.outlier_flags()) {
        doc["outliers"] = nullptr;
        continue;
      }
      const OutlierReport r = outlier_score_report(pass.weights, data.outlier_flags());
      auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
      doc["outliers"] = {{"mean_weight_inliers", opt(r.mean_weight_inliers)},
                         {"mean_weight_outliers", opt(r.mean_weight_outliers)},
                         {"auc", opt(r.auc)}};
    } else {
      throw Error(ErrorCode::InvalidArgument, "unknown metric '" + metric + "'");
    }
  }

  if (!o.plot.empty()) {
    if (data.dim() != 2) {
      std::cerr << "warning: plotting needs 2-D data (got d = " << data.dim() << "); plot skipped\n";
    } else {
      const Vector* pw = pass.weights.mode == WeightMode::Random ? &pass.weights.marginal_mean : nullptr;
      write_text(o.plot, scatter_svg(data.points(), clusters, stored.model, pw));
    }
  }
  emit(o.out, dump_json(doc));
  return 0;
}

const char* tag_name(AvTag t) {
  switch (t) {
    case AvTag::AudioVisual: return "audio_visual";
    case AvTag::AudioOnly: return "audio_only";
    case AvTag::VisualOnly: return "visual_only";
  }
  return "audio_only";
}

int run_av(const AvOptions& o) {
  std::vector<GroundTruth> truth;
  if (!o.truth.empty()) truth = parse_ground_truth_csv(read_text(o.truth));
  AvConfig cfg;
  cfg.sigma = o.sigma;
  cfg.threshold = o.threshold;
  cfg.k_high = o.k_high;
  cfg.epsilon = o.epsilon;
  cfg.seed = o.seed;

  json doc;
  auto segs = json::array();
  int evaluated = 0, detected = 0;
  for (const auto& path : o.segments) {
    const std::string id = fs::path(path).stem().string();
    const Dataset seg = parse_segment_csv(read_text(path));
    std::optional<Vector> xg;
    for (const auto& t : truth) {
      if (t.segment_id == id) {
        xg = Vector(2);
        (*xg) << t.x, t.y;
      }
    }
    const SegmentResult r = process_segment(seg, cfg, xg);
    json s;
    s["segment_id"] = id;
    auto comps = json::array();
    for (int k = 0; k < r.model.num_components(); ++k) {
      if (!(r.model.proportions()(k) > 0.0)) continue;
      const auto& mu = r.model.component(k).mean();
      comps.push_back({{"component", k},
                       {"weight", r.model.proportions()(k)},
                       {"mean", {mu(0), mu(1)}},
                       {"audio", r.relevance.audio_count[static_cast<std::size_t>(k)]},
                       {"visual", r.relevance.visual_count[static_cast<std::size_t>(k)]},
                       {"relevance", r.relevance.relevance[static_cast<std::size_t>(k)]},
                       {"tag", tag_name(r.relevance.tags[static_cast<std::size_t>(k)])}});
    }
    s["components"] = comps;
    if (r.detection) {
      ++evaluated;
      detected += r.detection->detected ? 1 : 0;
      s["detection"] = {{"detected", r.detection->detected},
                        {"component", r.detection->component},
                        {"posterior", r.detection->posterior}};
    }
    segs.push_back(s);
  }
  doc["segments"] = segs;
  doc["threshold"] = o.threshold;
  if (evaluated > 0) {
    doc["correct_detection_rate"] = static_cast<double>(detected) / evaluated;
  } else {
    doc["correct_detection_rate"] = nullptr;
  }
  emit(o.out, dump_json(doc));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weighted-data Gaussian mixture clustering"};
  app.require_subcommand(1);

  GenerateOptions gen;
  auto* g = app.add_subcommand("generate", "Write a synthetic benchmark dataset as CSV");
  g->add_option("--profile", gen.profile, "easy, unbalanced, overlapped or mixed")
      ->required()
      ->check(CLI::IsMember({"easy", "unbalanced", "overlapped", "mixed"}, CLI::ignore_case));
  g->add_option("--n", gen.n, "Number of inliers")->check(CLI::PositiveNumber);
  g->add_option("--outlier-fraction", gen.outlier_fraction, "Outliers as a fraction of the inlier count")
      ->check(CLI::Range(0.0, 1.0));
  g->add_option("--margin", gen.margin, "Relative widening of the outlier box")->check(CLI::NonNegativeNumber);
  g->add_option("--seed", gen.seed);
  g->add_option("--out", gen.out, "Output CSV ('-' for stdout)");

  FitOptions fit;
  auto* f = app.add_subcommand("fit", "Fit a mixture with a fixed number of components");
  f->add_option("--input", fit.input)->required();
  f->add_option("--algorithm", fit.algorithm)->check(CLI::IsMember({"fwd", "wd", "gmm"}));
  f->add_option("--k", fit.k)->required()->check(CLI::PositiveNumber);
  f->add_option("--q", fit.q, "Neighbours for the weight initialisation")->check(CLI::PositiveNumber);
  f->add_option("--sigma", fit.sigma, "Kernel width of the weight initialisation")->check(CLI::PositiveNumber);
  f->add_option("--max-iter", fit.max_iter)->check(CLI::NonNegativeNumber);
  f->add_option("--tol", fit.tol, "Relative log-likelihood tolerance")->check(CLI::NonNegativeNumber);
  f->add_option("--seed", fit.seed);
  f->add_option("--restarts", fit.restarts, "K-means restarts")->check(CLI::PositiveNumber);
  f->add_option("--shape", fit.shape)->check(CLI::IsMember({"full", "diagonal"}));
  f->add_option("--out", fit.out, "Output directory")->required();

  SelectOptions sel;
  auto* s = app.add_subcommand("select", "Choose the number of components by message length");
  s->add_option("--input", sel.input)->required();
  s->add_option("--k-high", sel.k_high)->check(CLI::PositiveNumber);
  s->add_option("--k-low", sel.k_low)->check(CLI::PositiveNumber);
  s->add_option("--epsilon", sel.epsilon)->check(CLI::NonNegativeNumber);
  s->add_option("--max-outer-iter", sel.max_outer_iter)->check(CLI::NonNegativeNumber);
  s->add_option("--q", sel.q)->check(CLI::PositiveNumber);
  s->add_option("--sigma", sel.sigma)->check(CLI::PositiveNumber);
  s->add_option("--seed", sel.seed);
  s->add_option("--restarts", sel.restarts)->check(CLI::PositiveNumber);
  s->add_option("--shape", sel.shape)->check(CLI::IsMember({"full", "diagonal"}));
  s->add_option("--ez-variant", sel.ez)->check(CLI::IsMember({"posterior", "prior"}));
  s->add_flag("--fixed-weights", sel.fixed_weights, "Run the sweep with fixed kNN weights");
  s->add_option("--out", sel.out, "Output directory")->required();

  EvaluateOptions ev;
  auto* e = app.add_subcommand("evaluate", "Score a stored model against a labelled dataset");
  e->add_option("--data", ev.data, "Dataset CSV with label/outlier columns")->required();
  e->add_option("--model", ev.model)->required();
  e->add_option("--assignments", ev.assignments, "Assignments CSV to score instead of recomputing");
  e->add_option("--metrics", ev.metrics, "Comma-separated subset of db,f1,outliers");
  e->add_option("--plot", ev.plot, "SVG output (2-D data only)");
  e->add_option("--write-assignments", ev.write_assignments, "Write the recomputed assignments CSV");
  e->add_option("--out", ev.out, "Metrics JSON ('-' for stdout)");

  AvOptions av;
  auto* a = app.add_subcommand("av", "Cluster audio-visual segments and detect the active speaker");
  a->add_option("--segments", av.segments, "Segment CSV files (x,y,modality)")->required();
  a->add_option("--truth", av.truth, "Ground truth CSV (segment_id,x_g,y_g)");
  a->add_option("--threshold", av.threshold, "Audio-visual relevance threshold s")->check(CLI::NonNegativeNumber);
  a->add_option("--sigma", av.sigma)->check(CLI::PositiveNumber);
  a->add_option("--k-high", av.k_high)->check(CLI::PositiveNumber);
  a->add_option("--epsilon", av.epsilon)->check(CLI::NonNegativeNumber);
  a->add_option("--seed", av.seed);
  a->add_option("--out", av.out, "Result JSON ('-' for stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*g) return run_generate(gen);
    if (*f) return run_fit(fit);
    if (*s) return run_select(sel);
    if (*e) return run_evaluate(ev);
    if (*a) return run_av(av);
  } catch (const Error& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 1;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 1;
  }
  return 2;
}
