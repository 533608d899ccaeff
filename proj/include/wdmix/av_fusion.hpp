#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "wdmix/assignment.hpp"
#include "wdmix/core.hpp"

namespace wdmix {

/// Audio point weights sum exp(-|a_i - v_j|^2 / sigma) over every visual
/// point, visual weights the same over every audio point. Results are
/// raised to kMinWeight. Throws SingleModality unless both modalities occur
/// and InvalidArgument when the dataset has no modality tags.
Vector cross_modal_weights(const Dataset& data, double sigma);

/// Weight of an arbitrary location against every point of `against`.
double cross_modal_weight_at(const Eigen::Ref<const Vector>& x, const Dataset& data, Modality against, double sigma);

enum class AvTag { AudioVisual, AudioOnly, VisualOnly };

struct ComponentRelevance {
  std::vector<AvTag> tags;
  std::vector<double> relevance;  ///< r_k = min(n_a^k, n_v^k) / (n_a + n_v)
  std::vector<int> audio_count;
  std::vector<int> visual_count;
};

/// Counts each modality per component from argmax responsibilities. A
/// component is AudioVisual when it holds points of both modalities and
/// r_k >= threshold; otherwise it takes its dominant modality, with ties
/// (including empty components) going to AudioOnly.
ComponentRelevance classify_components(const Responsibilities& resp, const std::vector<Modality>& modality,
                                       double threshold = 0.05);

struct Detection {
  bool detected = false;
  int component = -1;
  double posterior = 0.0;
};

/// Posterior of x_g under the Pearson VII mixture with gamma prior
/// (alpha, beta); detected when the argmax component is AudioVisual and its
/// posterior is at least 1 / K+, K+ counting components with pi_k > 0.
Detection correct_detection(const Eigen::Ref<const Vector>& x_g, const MixtureModel& model, double alpha,
                            double beta, const std::vector<AvTag>& tags);

struct AvConfig {
  double sigma = 100.0;
  double threshold = 0.05;
  int k_high = 10;
  int k_low = 1;
  double epsilon = 1e-5;
  int max_outer_iter = 400;
  EzVariant ez_variant = EzVariant::Posterior;
  std::uint64_t seed = 0;
};

struct SegmentResult {
  MixtureModel model;  ///< minimum-length model, zero-proportion components kept
  Responsibilities resp;
  ComponentRelevance relevance;
  Vector weights;  ///< cross-modal weights
  std::optional<Detection> detection;
};

/// Cross-modal weights, K-means start with min(k_high, n) components, model
/// selection, component classification and, when x_g is given, detection.
SegmentResult process_segment(const Dataset& segment, const AvConfig& config,
                              const std::optional<Vector>& x_g = std::nullopt);

}  // namespace wdmix
