#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "wdmix/core.hpp"

namespace wdmix {

enum class SimProfile { Easy, Unbalanced, Overlapped, Mixed };

/// Accepts "easy", "unbalanced", "overlapped", "mixed" (any case).
/// Throws InvalidArgument otherwise.
SimProfile parse_sim_profile(std::string_view name);
std::string_view to_string(SimProfile profile);

/// Generator mixture of a profile from the built-in parameter file, or from
/// `json_text` with the same layout ({"profiles": {"easy": {"components":
/// [{"weight", "mean", "covariance"}, ...]}, ...}}).
MixtureModel sim_profile_model(SimProfile profile);
MixtureModel sim_profile_model(SimProfile profile, const std::string& json_text);

/// n points from `model`, labelled by component. Per-component counts are
/// floor(pi_k n) topped up by largest remainder, and every component with
/// pi_k > 0 gets at least one point when n allows.
Dataset sample_mixture(const MixtureModel& model, std::size_t n, std::uint64_t seed);

/// sample_mixture on the profile's generator; labels 0..K-1, no outliers.
Dataset generate_sim(SimProfile profile, std::size_t n_inliers, std::uint64_t seed);

/// Appends round(fraction * n_inliers) points drawn uniformly from the inlier
/// bounding box widened by `margin` times its extent on every side. Added
/// points carry label -1 and outlier flag true.
Dataset contaminate_uniform(const Dataset& data, double fraction, double margin, std::uint64_t seed);

}  // namespace wdmix
