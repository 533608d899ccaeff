#include "knn.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <queue>

#include "parallel.hpp"
#include "wdmix/kernels.hpp"

namespace wdmix::detail {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void brute_force(const Matrix& points, int q, Matrix& out) {
  const auto n = static_cast<std::size_t>(points.rows());
  const kernels::PointBlock block{points.data(), n, static_cast<std::size_t>(points.cols()), n};
  const auto& k = kernels::active();
  parallel_for(
      n,
      [&](std::size_t begin, std::size_t end) {
        std::vector<double> dist(n);
        Vector query(points.cols());
        for (std::size_t i = begin; i < end; ++i) {
          query = points.row(static_cast<Eigen::Index>(i)).transpose();
          k.squared_distances(block, query.data(), dist.data());
          dist[i] = kInf;
          std::partial_sort(dist.begin(), dist.begin() + q, dist.end());
          for (int j = 0; j < q; ++j) out(static_cast<Eigen::Index>(i), j) = dist[static_cast<std::size_t>(j)];
        }
      },
      64);
}

class KdTree {
 public:
  explicit KdTree(const Matrix& points) : points_(points), index_(static_cast<std::size_t>(points.rows())) {
    std::iota(index_.begin(), index_.end(), Eigen::Index{0});
    nodes_.reserve(2 * index_.size() / kLeafSize + 2);
    build(0, index_.size());
  }

  /// Squared distances to the q nearest points other than `self`, ascending.
  void query(Eigen::Index self, int q, double* out) const {
    std::priority_queue<double> heap;
    search(0, self, static_cast<std::size_t>(q), heap);
    for (int j = q - 1; j >= 0; --j) {
      out[j] = heap.top();
      heap.pop();
    }
  }

 private:
  static constexpr std::size_t kLeafSize = 16;

  struct Node {
    std::size_t begin, end;
    int axis = -1;  // -1 marks a leaf
    double split = 0.0;
    std::size_t left = 0, right = 0;
  };

  std::size_t build(std::size_t begin, std::size_t end) {
    const std::size_t id = nodes_.size();
    nodes_.push_back({begin, end});
    if (end - begin <= kLeafSize) return id;

    int axis = 0;
    double widest = -1.0;
    for (Eigen::Index j = 0; j < points_.cols(); ++j) {
      double lo = kInf, hi = -kInf;
      for (std::size_t t = begin; t < end; ++t) {
        const double v = points_(index_[t], j);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      if (hi - lo > widest) {
        widest = hi - lo;
        axis = static_cast<int>(j);
      }
    }
    const std::size_t mid = begin + (end - begin) / 2;
    std::nth_element(index_.begin() + static_cast<std::ptrdiff_t>(begin),
                     index_.begin() + static_cast<std::ptrdiff_t>(mid),
                     index_.begin() + static_cast<std::ptrdiff_t>(end),
                     [&](Eigen::Index a, Eigen::Index b) { return points_(a, axis) < points_(b, axis); });
    const double split = points_(index_[mid], axis);
    const std::size_t left = build(begin, mid);
    const std::size_t right = build(mid, end);
    nodes_[id].axis = axis;
    nodes_[id].split = split;
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
  }

  void search(std::size_t id, Eigen::Index self, std::size_t q, std::priority_queue<double>& heap) const {
    const Node& node = nodes_[id];
    if (node.axis < 0) {
      for (std::size_t t = node.begin; t < node.end; ++t) {
        const Eigen::Index j = index_[t];
        if (j == self) continue;
        const double d2 = (points_.row(j) - points_.row(self)).squaredNorm();
        if (heap.size() < q) {
          heap.push(d2);
        } else if (d2 < heap.top()) {
          heap.pop();
          heap.push(d2);
        }
      }
      return;
    }
    const double diff = points_(self, node.axis) - node.split;
    const std::size_t near = diff < 0.0 ? node.left : node.right;
    const std::size_t far = diff < 0.0 ? node.right : node.left;
    search(near, self, q, heap);
    if (heap.size() < q || diff * diff <= heap.top()) search(far, self, q, heap);
  }

  const Matrix& points_;
  std::vector<Eigen::Index> index_;
  std::vector<Node> nodes_;
};

}  // namespace

Matrix knn_squared_distances(const Matrix& points, int q, std::size_t tree_threshold) {
  Matrix out(points.rows(), q);
  if (q <= 0) return out;
  if (static_cast<std::size_t>(points.rows()) < tree_threshold) {
    brute_force(points, q, out);
    return out;
  }
  const KdTree tree(points);
  parallel_for(
      static_cast<std::size_t>(points.rows()),
      [&](std::size_t begin, std::size_t end) {
        std::vector<double> row(static_cast<std::size_t>(q));
        for (std::size_t i = begin; i < end; ++i) {
          tree.query(static_cast<Eigen::Index>(i), q, row.data());
          for (int j = 0; j < q; ++j) out(static_cast<Eigen::Index>(i), j) = row[static_cast<std::size_t>(j)];
        }
      },
      256);
  return out;
}

}  // namespace wdmix::detail
