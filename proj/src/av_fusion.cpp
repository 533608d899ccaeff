#include "wdmix/av_fusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "wdmix/densities.hpp"
#include "wdmix/initialization.hpp"
#include "wdmix/kernels.hpp"
#include "wdmix/model_selection.hpp"

namespace wdmix {

namespace {

const std::vector<Modality>& require_modality(const Dataset& data) {
  if (!data.modality()) throw Error(ErrorCode::InvalidArgument, "dataset has no modality tags");
  return *data.modality();
}

}  // namespace

double cross_modal_weight_at(const Eigen::Ref<const Vector>& x, const Dataset& data, Modality against, double sigma) {
  if (!(sigma > 0.0)) throw Error(ErrorCode::NonPositiveArgument, "sigma must be positive");
  if (x.size() != data.dim()) throw Error(ErrorCode::DimensionMismatch, "location dimension differs from data");
  const auto& mod = require_modality(data);
  double w = 0.0;
  for (std::size_t j = 0; j < data.size(); ++j) {
    if (mod[j] != against) continue;
    w += std::exp(-(data.point(j).transpose() - x).squaredNorm() / sigma);
  }
  return w;
}

Vector cross_modal_weights(const Dataset& data, double sigma) {
  if (!(sigma > 0.0)) throw Error(ErrorCode::NonPositiveArgument, "sigma must be positive");
  const auto& mod = require_modality(data);
  const bool has_audio = std::find(mod.begin(), mod.end(), Modality::Audio) != mod.end();
  const bool has_visual = std::find(mod.begin(), mod.end(), Modality::Visual) != mod.end();
  if (!has_audio || !has_visual) throw Error(ErrorCode::SingleModality, "both audio and visual points are required");

  const auto n = static_cast<std::size_t>(data.size());
  const Matrix& x = data.points();
  const kernels::PointBlock block{x.data(), n, static_cast<std::size_t>(x.cols()), n};
  const auto& kern = kernels::active();
  std::vector<double> dist(n);
  Vector query(x.cols());
  Vector w(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    query = x.row(static_cast<Eigen::Index>(i)).transpose();
    kern.squared_distances(block, query.data(), dist.data());
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (mod[j] != mod[i]) acc += std::exp(-dist[j] / sigma);
    }
    w(static_cast<Eigen::Index>(i)) = std::max(acc, kMinWeight);
  }
  return w;
}

ComponentRelevance classify_components(const Responsibilities& resp, const std::vector<Modality>& modality,
                                       double threshold) {
  if (modality.size() != resp.size()) throw Error(ErrorCode::LengthMismatch, "one modality tag per point required");
  const int K = resp.num_components();
  ComponentRelevance out;
  out.audio_count.assign(static_cast<std::size_t>(K), 0);
  out.visual_count.assign(static_cast<std::size_t>(K), 0);
  const auto hard = resp.hard_assignments();
  for (std::size_t i = 0; i < hard.size(); ++i) {
    auto& counts = modality[i] == Modality::Audio ? out.audio_count : out.visual_count;
    ++counts[static_cast<std::size_t>(hard[i])];
  }
  const double total = static_cast<double>(modality.size());
  for (std::size_t k = 0; k < static_cast<std::size_t>(K); ++k) {
    const int a = out.audio_count[k];
    const int v = out.visual_count[k];
    const double r = static_cast<double>(std::min(a, v)) / total;
    out.relevance.push_back(r);
    if (a > 0 && v > 0 && r >= threshold) {
      out.tags.push_back(AvTag::AudioVisual);
    } else {
      out.tags.push_back(v > a ? AvTag::VisualOnly : AvTag::AudioOnly);
    }
  }
  return out;
}

Detection correct_detection(const Eigen::Ref<const Vector>& x_g, const MixtureModel& model, double alpha,
                            double beta, const std::vector<AvTag>& tags) {
  if (tags.size() != static_cast<std::size_t>(model.num_components())) {
    throw Error(ErrorCode::LengthMismatch, "one tag per component required");
  }
  const int K = model.num_components();
  std::vector<double> logp(static_cast<std::size_t>(K), -std::numeric_limits<double>::infinity());
  int k_plus = 0;
  for (int k = 0; k < K; ++k) {
    const double pi = model.proportions()(k);
    if (!(pi > 0.0)) continue;
    ++k_plus;
    logp[static_cast<std::size_t>(k)] = std::log(pi) + log_pearson7(x_g, model.component(k), alpha, beta);
  }
  if (k_plus == 0) throw Error(ErrorCode::NoActiveComponents, "model has no active component");
  const double norm = log_sum_exp(logp);
  Detection d;
  for (int k = 0; k < K; ++k) {
    const double p = std::exp(logp[static_cast<std::size_t>(k)] - norm);
    if (d.component < 0 || p > d.posterior) {
      d.component = k;
      d.posterior = p;
    }
  }
  d.detected = tags[static_cast<std::size_t>(d.component)] == AvTag::AudioVisual &&
               d.posterior >= 1.0 / static_cast<double>(k_plus);
  return d;
}

SegmentResult process_segment(const Dataset& segment, const AvConfig& config, const std::optional<Vector>& x_g) {
  const Vector w = cross_modal_weights(segment, config.sigma);
  const WeightState priors = weight_priors(w);
  MmlConfig mml;
  mml.k_high = std::min<int>(config.k_high, static_cast<int>(segment.size()));
  mml.k_low = std::min(config.k_low, mml.k_high);
  mml.epsilon = config.epsilon;
  mml.max_outer_iter = config.max_outer_iter;
  mml.ez_variant = config.ez_variant;
  SelectionResult sel = select_model(segment, priors, mml, config.seed);

  ComponentRelevance rel = classify_components(sel.best_responsibilities, *segment.modality(), config.threshold);
  std::optional<Detection> det;
  if (x_g) {
    const double wg = std::max(cross_modal_weight_at(*x_g, segment, Modality::Audio, config.sigma), kMinWeight);
    det = correct_detection(*x_g, sel.best_model, wg * wg, wg, rel.tags);
  }
  return SegmentResult{std::move(sel.best_model), std::move(sel.best_responsibilities), std::move(rel), w, det};
}

}  // namespace wdmix
