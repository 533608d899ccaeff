#include "wdmix/datagen.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <random>

#include <json.hpp>

#include "sim_profiles_embedded.hpp"

namespace wdmix {

namespace {

std::vector<std::size_t> component_counts(const Vector& pi, std::size_t n) {
  const auto K = static_cast<std::size_t>(pi.size());
  std::vector<std::size_t> counts(K);
  std::vector<double> remainder(K);
  std::size_t assigned = 0;
  for (std::size_t k = 0; k < K; ++k) {
    const double exact = pi(static_cast<Eigen::Index>(k)) * static_cast<double>(n);
    counts[k] = static_cast<std::size_t>(std::floor(exact));
    remainder[k] = exact - std::floor(exact);
    assigned += counts[k];
  }
  std::vector<std::size_t> order(K);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t t = 0; assigned < n; t = (t + 1) % K) {
    ++counts[order[t]];
    ++assigned;
  }
  // Give empty components one point taken from the largest one.
  for (std::size_t k = 0; k < K; ++k) {
    if (counts[k] > 0 || !(pi(static_cast<Eigen::Index>(k)) > 0.0)) continue;
    auto big = std::max_element(counts.begin(), counts.end());
    if (*big <= 1) break;
    --*big;
    counts[k] = 1;
  }
  return counts;
}

}  // namespace

SimProfile parse_sim_profile(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "easy") return SimProfile::Easy;
  if (lower == "unbalanced") return SimProfile::Unbalanced;
  if (lower == "overlapped") return SimProfile::Overlapped;
  if (lower == "mixed") return SimProfile::Mixed;
  throw Error(ErrorCode::InvalidArgument, "unknown profile '" + std::string(name) + "'");
}

std::string_view to_string(SimProfile profile) {
  switch (profile) {
    case SimProfile::Easy: return "easy";
    case SimProfile::Unbalanced: return "unbalanced";
    case SimProfile::Overlapped: return "overlapped";
    case SimProfile::Mixed: return "mixed";
  }
  return "easy";
}

MixtureModel sim_profile_model(SimProfile profile) {
  return sim_profile_model(profile, detail::kSimProfilesJson);
}

MixtureModel sim_profile_model(SimProfile profile, const std::string& json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("profile file: ") + e.what());
  }
  const std::string key(to_string(profile));
  try {
    const auto& comps = doc.at("profiles").at(key).at("components");
    std::vector<GaussianComponent> out;
    Vector pi(static_cast<Eigen::Index>(comps.size()));
    Eigen::Index k = 0;
    for (const auto& c : comps) {
      const auto mean = c.at("mean").get<std::vector<double>>();
      const auto cov = c.at("covariance").get<std::vector<std::vector<double>>>();
      const auto d = static_cast<Eigen::Index>(mean.size());
      Matrix sigma(d, d);
      if (static_cast<Eigen::Index>(cov.size()) != d) throw Error(ErrorCode::Parse, "covariance size mismatch");
      for (Eigen::Index r = 0; r < d; ++r) {
        if (static_cast<Eigen::Index>(cov[static_cast<std::size_t>(r)].size()) != d) {
          throw Error(ErrorCode::Parse, "covariance size mismatch");
        }
        for (Eigen::Index s = 0; s < d; ++s) sigma(r, s) = cov[static_cast<std::size_t>(r)][static_cast<std::size_t>(s)];
      }
      out.emplace_back(Eigen::Map<const Vector>(mean.data(), d), std::move(sigma));
      pi(k++) = c.at("weight").get<double>();
    }
    pi /= pi.sum();
    return MixtureModel(std::move(out), std::move(pi));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, "profile '" + key + "': " + e.what());
  }
}

Dataset sample_mixture(const MixtureModel& model, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw Error(ErrorCode::EmptyInput, "cannot sample zero points");
  const auto counts = component_counts(model.proportions(), n);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int d = model.dim();
  Matrix x(static_cast<Eigen::Index>(n), d);
  std::vector<int> labels;
  labels.reserve(n);
  Vector z(d);
  Eigen::Index row = 0;
  for (int k = 0; k < model.num_components(); ++k) {
    const auto& c = model.component(k);
    for (std::size_t t = 0; t < counts[static_cast<std::size_t>(k)]; ++t) {
      for (int j = 0; j < d; ++j) z(j) = normal(rng);
      x.row(row++) = (c.mean() + c.cholesky() * z).transpose();
      labels.push_back(k);
    }
  }
  return Dataset(std::move(x), std::move(labels), std::nullopt, std::vector<bool>(n, false));
}

Dataset generate_sim(SimProfile profile, std::size_t n_inliers, std::uint64_t seed) {
  const MixtureModel model = sim_profile_model(profile);
  if (n_inliers < static_cast<std::size_t>(model.num_components())) {
    throw Error(ErrorCode::InvalidArgument, "need at least one point per generator component");
  }
  return sample_mixture(model, n_inliers, seed);
}

Dataset contaminate_uniform(const Dataset& data, double fraction, double margin, std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw Error(ErrorCode::InvalidArgument, "fraction must lie in [0, 1]");
  if (!(margin >= 0.0)) throw Error(ErrorCode::InvalidArgument, "margin must be non-negative");
  if (data.modality()) throw Error(ErrorCode::InvalidArgument, "modality-tagged data cannot be contaminated");

  const auto n = static_cast<Eigen::Index>(data.size());
  const int d = data.dim();
  std::vector<bool> flags = data.outlier_flags().value_or(std::vector<bool>(data.size(), false));
  std::vector<Eigen::Index> inliers;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!flags[static_cast<std::size_t>(i)]) inliers.push_back(i);
  }
  const auto extra = static_cast<Eigen::Index>(std::llround(fraction * static_cast<double>(inliers.size())));
  if (extra == 0) return data;
  if (inliers.empty()) throw Error(ErrorCode::EmptyInput, "no inliers to bound the outlier box");

  const Matrix in = data.points()(inliers, Eigen::all);
  const Vector lo0 = in.colwise().minCoeff().transpose();
  const Vector hi0 = in.colwise().maxCoeff().transpose();
  const Vector pad = margin * (hi0 - lo0);
  const Vector lo = lo0 - pad;
  const Vector hi = hi0 + pad;

  Matrix x(n + extra, d);
  x.topRows(n) = data.points();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (Eigen::Index i = n; i < n + extra; ++i) {
    for (int j = 0; j < d; ++j) x(i, j) = lo(j) + unit(rng) * (hi(j) - lo(j));
  }

  std::vector<int> labels = data.labels().value_or(std::vector<int>(data.size(), 0));
  labels.resize(static_cast<std::size_t>(n + extra), -1);
  flags.resize(static_cast<std::size_t>(n + extra), true);
  return Dataset(std::move(x), std::move(labels), std::nullopt, std::move(flags));
}

}  // namespace wdmix
