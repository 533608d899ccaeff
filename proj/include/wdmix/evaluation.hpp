#pragma once

#include <optional>
#include <vector>

#include "wdmix/core.hpp"

namespace wdmix {

/// Davies-Bouldin index, (1/K) sum_k max_{l != k} (S_k + S_l) / |mu_k - mu_l|,
/// with S_k the mean (unsquared) distance of the members of cluster k to
/// centers.row(k). Assignments outside [0, K) are ignored.
/// Throws SingleCluster for K < 2 and EmptyCluster when a centre has no members.
double davies_bouldin(const Matrix& points, const std::vector<int>& assignments, const Matrix& centers);

/// Hard argmax assignments of a fitted mixture, with components that receive
/// no point dropped and the rest renumbered in index order; `centers` holds
/// the fitted means of the kept components.
struct HardClustering {
  std::vector<int> assignments;
  Matrix centers;
  std::vector<int> component_of_cluster;
};

HardClustering hard_clustering(const MixtureModel& model, const Responsibilities& resp);

struct DbReport {
  double all_points = 0.0;
  /// Same index restricted to points not flagged as outliers; absent without
  /// flags or when fewer than two clusters keep an inlier.
  std::optional<double> inliers_only;
};

DbReport davies_bouldin_report(const Dataset& data, const MixtureModel& model, const Responsibilities& resp);

enum class LabelMatching { Optimal, Greedy };

/// Micro-averaged F1 after a one-to-one cluster-to-class matching. Unmatched
/// clusters count as wrong, so with single-label data the score equals the
/// fraction of points whose matched class is correct (accuracy). Optimal
/// matching maximises total overlap; Greedy repeatedly takes the largest
/// remaining overlap. Label values are arbitrary integers (-1 included).
double micro_f1(const std::vector<int>& predicted, const std::vector<int>& truth,
                LabelMatching matching = LabelMatching::Optimal);

struct OutlierReport {
  std::optional<double> mean_weight_inliers;
  std::optional<double> mean_weight_outliers;
  /// ROC AUC of -w as an outlier score (ties count one half).
  std::optional<double> auc;
};

/// Scores the marginal posterior weight means of a gamma-weight fit.
/// Throws MissingFlags when there are no flags or their count differs.
OutlierReport outlier_score_report(const WeightState& weights, const std::optional<std::vector<bool>>& outlier_flags);
OutlierReport outlier_score_report(const Vector& weight_means, const std::optional<std::vector<bool>>& outlier_flags);

/// Solves the rectangular assignment problem: maximum total `score` with each
/// row and column used at most once. Returns the matched column per row, -1
/// for unmatched rows.
std::vector<int> max_weight_matching(const Matrix& score);

}  // namespace wdmix
