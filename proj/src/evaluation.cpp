#include "wdmix/evaluation.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <string>

namespace wdmix {

double davies_bouldin(const Matrix& points, const std::vector<int>& assignments, const Matrix& centers) {
  if (assignments.size() != static_cast<std::size_t>(points.rows())) {
    throw Error(ErrorCode::LengthMismatch, "one assignment per point required");
  }
  if (centers.cols() != points.cols()) throw Error(ErrorCode::DimensionMismatch, "centre dimension differs from data");
  const Eigen::Index K = centers.rows();
  if (K < 2) throw Error(ErrorCode::SingleCluster, "Davies-Bouldin needs at least two clusters");

  Vector spread = Vector::Zero(K);
  Vector count = Vector::Zero(K);
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const int k = assignments[static_cast<std::size_t>(i)];
    if (k < 0 || k >= K) continue;
    spread(k) += (points.row(i) - centers.row(k)).norm();
    count(k) += 1.0;
  }
  for (Eigen::Index k = 0; k < K; ++k) {
    if (count(k) == 0.0) throw Error(ErrorCode::EmptyCluster, "cluster " + std::to_string(k) + " has no members");
  }
  spread = spread.cwiseQuotient(count);

  double total = 0.0;
  for (Eigen::Index k = 0; k < K; ++k) {
    double worst = 0.0;
    for (Eigen::Index l = 0; l < K; ++l) {
      if (l == k) continue;
      const double sep = (centers.row(k) - centers.row(l)).norm();
      const double ratio = sep > 0.0 ? (spread(k) + spread(l)) / sep : std::numeric_limits<double>::infinity();
      worst = std::max(worst, ratio);
    }
    total += worst;
  }
  return total / static_cast<double>(K);
}

HardClustering hard_clustering(const MixtureModel& model, const Responsibilities& resp) {
  if (resp.num_components() != model.num_components()) {
    throw Error(ErrorCode::DimensionMismatch, "responsibilities do not match the model");
  }
  const std::vector<int> raw = resp.hard_assignments();
  std::vector<int> used(static_cast<std::size_t>(model.num_components()), 0);
  for (int k : raw) used[static_cast<std::size_t>(k)] = 1;

  HardClustering h;
  std::vector<int> remap(used.size(), -1);
  for (std::size_t k = 0; k < used.size(); ++k) {
    if (!used[k]) continue;
    remap[k] = static_cast<int>(h.component_of_cluster.size());
    h.component_of_cluster.push_back(static_cast<int>(k));
  }
  h.centers.resize(static_cast<Eigen::Index>(h.component_of_cluster.size()), model.dim());
  for (std::size_t c = 0; c < h.component_of_cluster.size(); ++c) {
    h.centers.row(static_cast<Eigen::Index>(c)) = model.component(h.component_of_cluster[c]).mean().transpose();
  }
  h.assignments.reserve(raw.size());
  for (int k : raw) h.assignments.push_back(remap[static_cast<std::size_t>(k)]);
  return h;
}

DbReport davies_bouldin_report(const Dataset& data, const MixtureModel& model, const Responsibilities& resp) {
  if (resp.size() != data.size()) throw Error(ErrorCode::LengthMismatch, "responsibilities do not match data");
  const HardClustering h = hard_clustering(model, resp);
  DbReport report;
  report.all_points = davies_bouldin(data.points(), h.assignments, h.centers);

  if (!data.outlier_flags()) return report;
  const auto& flags = *data.outlier_flags();
  std::vector<int> members(static_cast<std::size_t>(h.centers.rows()), 0);
  std::vector<Eigen::Index> keep;
  for (std::size_t i = 0; i < flags.size(); ++i) {
    if (flags[i]) continue;
    keep.push_back(static_cast<Eigen::Index>(i));
    ++members[static_cast<std::size_t>(h.assignments[i])];
  }
  std::vector<int> remap(members.size(), -1);
  std::vector<Eigen::Index> centre_rows;
  for (std::size_t c = 0; c < members.size(); ++c) {
    if (members[c] == 0) continue;
    remap[c] = static_cast<int>(centre_rows.size());
    centre_rows.push_back(static_cast<Eigen::Index>(c));
  }
  if (centre_rows.size() < 2) return report;
  std::vector<int> assign;
  assign.reserve(keep.size());
  for (Eigen::Index i : keep) assign.push_back(remap[static_cast<std::size_t>(h.assignments[static_cast<std::size_t>(i)])]);
  report.inliers_only = davies_bouldin(data.points()(keep, Eigen::all), assign,
                                       h.centers(centre_rows, Eigen::all));
  return report;
}

std::vector<int> max_weight_matching(const Matrix& score) {
  const bool transposed = score.rows() > score.cols();
  const Matrix s = transposed ? Matrix(score.transpose()) : score;
  const auto n = static_cast<int>(s.rows());
  const auto m = static_cast<int>(s.cols());
  std::vector<int> row_match(static_cast<std::size_t>(n), -1);
  if (n == 0) return transposed ? std::vector<int>(static_cast<std::size_t>(score.rows()), -1) : row_match;

  // Shortest augmenting path Hungarian method on cost = max - score, rows
  // and columns 1-based with 0 as the virtual root.
  const double top = s.maxCoeff();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(static_cast<std::size_t>(n + 1), 0.0), v(static_cast<std::size_t>(m + 1), 0.0);
  std::vector<int> p(static_cast<std::size_t>(m + 1), 0), way(static_cast<std::size_t>(m + 1), 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(static_cast<std::size_t>(m + 1), inf);
    std::vector<char> used(static_cast<std::size_t>(m + 1), 0);
    do {
      used[static_cast<std::size_t>(j0)] = 1;
      const int i0 = p[static_cast<std::size_t>(j0)];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= m; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        const double cur = (top - s(i0 - 1, j - 1)) - u[static_cast<std::size_t>(i0)] - v[static_cast<std::size_t>(j)];
        if (cur < minv[static_cast<std::size_t>(j)]) {
          minv[static_cast<std::size_t>(j)] = cur;
          way[static_cast<std::size_t>(j)] = j0;
        }
        if (minv[static_cast<std::size_t>(j)] < delta) {
          delta = minv[static_cast<std::size_t>(j)];
          j1 = j;
        }
      }
      for (int j = 0; j <= m; ++j) {
        if (used[static_cast<std::size_t>(j)]) {
          u[static_cast<std::size_t>(p[static_cast<std::size_t>(j)])] += delta;
          v[static_cast<std::size_t>(j)] -= delta;
        } else {
          minv[static_cast<std::size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (p[static_cast<std::size_t>(j0)] != 0);
    do {
      const int j1 = way[static_cast<std::size_t>(j0)];
      p[static_cast<std::size_t>(j0)] = p[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }
  for (int j = 1; j <= m; ++j) {
    if (p[static_cast<std::size_t>(j)] > 0) row_match[static_cast<std::size_t>(p[static_cast<std::size_t>(j)] - 1)] = j - 1;
  }
  if (!transposed) return row_match;
  std::vector<int> out(static_cast<std::size_t>(score.rows()), -1);
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(row_match[static_cast<std::size_t>(i)])] = i;
  return out;
}

double micro_f1(const std::vector<int>& predicted, const std::vector<int>& truth, LabelMatching matching) {
  if (predicted.size() != truth.size()) throw Error(ErrorCode::LengthMismatch, "label vectors differ in length");
  if (predicted.empty()) throw Error(ErrorCode::EmptyInput, "no labels to compare");
  std::map<int, int> pred_id, true_id;
  for (int p : predicted) pred_id.emplace(p, 0);
  for (int t : truth) true_id.emplace(t, 0);
  int next = 0;
  for (auto& [label, id] : pred_id) id = next++;
  next = 0;
  for (auto& [label, id] : true_id) id = next++;

  Matrix overlap = Matrix::Zero(static_cast<Eigen::Index>(pred_id.size()), static_cast<Eigen::Index>(true_id.size()));
  for (std::size_t i = 0; i < predicted.size(); ++i) overlap(pred_id[predicted[i]], true_id[truth[i]]) += 1.0;

  double matched = 0.0;
  if (matching == LabelMatching::Optimal) {
    const auto match = max_weight_matching(overlap);
    for (std::size_t r = 0; r < match.size(); ++r) {
      if (match[r] >= 0) matched += overlap(static_cast<Eigen::Index>(r), match[r]);
    }
  } else {
    Matrix remaining = overlap;
    const Eigen::Index pairs = std::min(overlap.rows(), overlap.cols());
    for (Eigen::Index t = 0; t < pairs; ++t) {
      Eigen::Index r = 0, c = 0;
      const double best = remaining.maxCoeff(&r, &c);
      if (best < 0.0) break;
      matched += best;
      remaining.row(r).setConstant(-1.0);
      remaining.col(c).setConstant(-1.0);
    }
  }
  return matched / static_cast<double>(predicted.size());
}

OutlierReport outlier_score_report(const Vector& weight_means, const std::optional<std::vector<bool>>& outlier_flags) {
  if (!outlier_flags || outlier_flags->size() != static_cast<std::size_t>(weight_means.size())) {
    throw Error(ErrorCode::MissingFlags, "one outlier flag per point required");
  }
  const auto& flags = *outlier_flags;
  const auto n = static_cast<std::size_t>(weight_means.size());
  double sum_in = 0.0, sum_out = 0.0;
  std::size_t n_in = 0, n_out = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = weight_means(static_cast<Eigen::Index>(i));
    if (flags[i]) {
      sum_out += w;
      ++n_out;
    } else {
      sum_in += w;
      ++n_in;
    }
  }
  OutlierReport r;
  if (n_in > 0) r.mean_weight_inliers = sum_in / static_cast<double>(n_in);
  if (n_out == 0 || n_in == 0) return r;
  r.mean_weight_outliers = sum_out / static_cast<double>(n_out);

  // Mann-Whitney statistic on the score -w with average ranks for ties.
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return -weight_means(static_cast<Eigen::Index>(a)) < -weight_means(static_cast<Eigen::Index>(b));
  });
  double rank_sum_out = 0.0;
  for (std::size_t t = 0; t < n;) {
    std::size_t e = t + 1;
    const double s = -weight_means(static_cast<Eigen::Index>(order[t]));
    while (e < n && -weight_means(static_cast<Eigen::Index>(order[e])) == s) ++e;
    const double avg_rank = 0.5 * static_cast<double>(t + 1 + e);
    for (std::size_t u = t; u < e; ++u) {
      if (flags[order[u]]) rank_sum_out += avg_rank;
    }
    t = e;
  }
  const double no = static_cast<double>(n_out), ni = static_cast<double>(n_in);
  r.auc = (rank_sum_out - no * (no + 1.0) / 2.0) / (no * ni);
  return r;
}

OutlierReport outlier_score_report(const WeightState& weights, const std::optional<std::vector<bool>>& outlier_flags) {
  if (weights.mode != WeightMode::Random || weights.marginal_mean.size() == 0) {
    throw Error(ErrorCode::InvalidArgument, "outlier scoring needs marginal posterior weight means");
  }
  return outlier_score_report(weights.marginal_mean, outlier_flags);
}

}  // namespace wdmix
