#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <vector>

#include "dstpll/error.hpp"
#include "dstpll/matrix.hpp"

namespace dstpll {

struct Neighbor {
  std::size_t index = 0;
  double distance = 0.0;

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

namespace detail {

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double diff = a[j] - b[j];
    sum += diff * diff;
  }
  return sum;
}

/// Squared distance, abandoned once the partial sum exceeds `limit`. The
/// partial sums only grow, so an abandoned candidate is strictly worse.
inline double squared_distance_bounded(std::span<const double> a, std::span<const double> b, double limit) {
  double sum = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double diff = a[j] - b[j];
    sum += diff * diff;
    if (sum > limit) return sum;
  }
  return sum;
}

inline void check_finite(std::span<const double> values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteFeature, std::string("non-finite value in ") + what);
  }
}

/// Candidate ordering for k-NN results: squared distance, then index.
struct Candidate {
  double d2;
  std::size_t index;
  friend bool operator<(const Candidate& a, const Candidate& b) {
    return a.d2 < b.d2 || (a.d2 == b.d2 && a.index < b.index);
  }
};

/// Bounded max-heap keeping the k best candidates seen so far.
class KBest {
 public:
  explicit KBest(std::size_t k) : k_(k) {}

  void offer(Candidate c) {
    if (heap_.size() < k_) {
      heap_.push(c);
    } else if (c < heap_.top()) {
      heap_.pop();
      heap_.push(c);
    }
  }

  bool full() const { return heap_.size() == k_; }
  double worst_d2() const { return heap_.top().d2; }

  std::vector<Neighbor> take() {
    std::vector<Neighbor> out(heap_.size());
    for (std::size_t i = out.size(); i-- > 0;) {
      out[i] = {heap_.top().index, std::sqrt(heap_.top().d2)};
      heap_.pop();
    }
    return out;
  }

 private:
  std::size_t k_;
  std::priority_queue<Candidate> heap_;
};

inline void check_query(const Matrix& points, std::span<const double> x, std::size_t k,
                        std::optional<std::size_t> exclude) {
  if (x.size() != points.cols()) {
    throw Error(ErrorCode::DimensionMismatch,
                "query has " + std::to_string(x.size()) + " features, data has " + std::to_string(points.cols()));
  }
  check_finite(x, "query");
  const std::size_t available = points.rows() - (exclude && *exclude < points.rows() ? 1 : 0);
  if (k > available) {
    throw Error(ErrorCode::KTooLarge, "k=" + std::to_string(k) + " but only " + std::to_string(available) +
                                          " candidate points");
  }
}

}  // namespace detail

/// Exact k-NN by exhaustive scan. Results ascend by (distance, index).
/// `exclude` removes one row from consideration (self-prediction diagnostics).
inline std::vector<Neighbor> linear_scan(const Matrix& points, std::span<const double> x, std::size_t k,
                                         std::optional<std::size_t> exclude = std::nullopt) {
  detail::check_query(points, x, k, exclude);
  detail::KBest best(k);
  if (k == 0) return {};
  for (std::size_t i = 0; i < points.rows(); ++i) {
    if (exclude && *exclude == i) continue;
    best.offer({detail::squared_distance(points.row(i), x), i});
  }
  return best.take();
}

/// Ball tree over an owned copy of the points. Nodes split on the dimension of
/// largest spread at the median; leaves hold at most kLeafSize points.
class BallTree {
 public:
  static constexpr std::size_t kLeafSize = 16;

  struct Node {
    std::vector<double> center;
    double radius = 0.0;
    std::size_t begin = 0;  // range into order()
    std::size_t end = 0;
    std::size_t left = 0;  // child node ids; both 0 for leaves
    std::size_t right = 0;
    bool leaf() const { return left == 0 && right == 0; }
  };

  static BallTree build(Matrix points) {
    if (points.rows() == 0 || points.cols() == 0) throw Error(ErrorCode::EmptyInput, "no points to index");
    detail::check_finite(points.data(), "training features");
    BallTree tree;
    tree.points_ = std::move(points);
    tree.order_.resize(tree.points_.rows());
    for (std::size_t i = 0; i < tree.order_.size(); ++i) tree.order_[i] = i;
    tree.nodes_.reserve(2 * tree.order_.size() / kLeafSize + 2);
    tree.build_node(0, tree.order_.size());
    tree.sorted_ = Matrix(tree.points_.rows(), tree.points_.cols());
    for (std::size_t p = 0; p < tree.order_.size(); ++p) {
      const auto src = tree.points_.row(tree.order_[p]);
      std::copy(src.begin(), src.end(), tree.sorted_.row(p).begin());
    }
    return tree;
  }

  const Matrix& points() const noexcept { return points_; }
  std::size_t size() const noexcept { return points_.rows(); }
  std::size_t dim() const noexcept { return points_.cols(); }
  std::span<const Node> nodes() const noexcept { return nodes_; }
  std::span<const std::size_t> order() const noexcept { return order_; }

  /// Same contract as linear_scan.
  std::vector<Neighbor> query(std::span<const double> x, std::size_t k,
                              std::optional<std::size_t> exclude = std::nullopt) const {
    detail::check_query(points_, x, k, exclude);
    if (k == 0) return {};
    detail::KBest best(k);
    search(0, x, exclude, best);
    return best.take();
  }

 private:
  std::size_t build_node(std::size_t begin, std::size_t end) {
    const std::size_t id = nodes_.size();
    nodes_.emplace_back();
    const std::size_t d = points_.cols();
    std::vector<double> center(d, 0.0);
    for (std::size_t p = begin; p < end; ++p) {
      const auto r = points_.row(order_[p]);
      for (std::size_t j = 0; j < d; ++j) center[j] += r[j];
    }
    for (double& c : center) c /= static_cast<double>(end - begin);
    double radius = 0.0;
    for (std::size_t p = begin; p < end; ++p) {
      radius = std::max(radius, std::sqrt(detail::squared_distance(points_.row(order_[p]), center)));
    }

    std::size_t left = 0;
    std::size_t right = 0;
    if (end - begin > kLeafSize) {
      std::size_t split_dim = 0;
      double best_spread = -1.0;
      for (std::size_t j = 0; j < d; ++j) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (std::size_t p = begin; p < end; ++p) {
          lo = std::min(lo, points_(order_[p], j));
          hi = std::max(hi, points_(order_[p], j));
        }
        if (hi - lo > best_spread) {
          best_spread = hi - lo;
          split_dim = j;
        }
      }
      const std::size_t mid = begin + (end - begin) / 2;
      std::nth_element(order_.begin() + static_cast<std::ptrdiff_t>(begin), order_.begin() + static_cast<std::ptrdiff_t>(mid),
                       order_.begin() + static_cast<std::ptrdiff_t>(end), [&](std::size_t a, std::size_t b) {
                         const double va = points_(a, split_dim);
                         const double vb = points_(b, split_dim);
                         return va < vb || (va == vb && a < b);
                       });
      left = build_node(begin, mid);
      right = build_node(mid, end);
    }
    Node& node = nodes_[id];
    node.center = std::move(center);
    node.radius = radius;
    node.begin = begin;
    node.end = end;
    node.left = left;
    node.right = right;
    return id;
  }

  void search(std::size_t id, std::span<const double> x, std::optional<std::size_t> exclude, detail::KBest& best) const {
    const Node& node = nodes_[id];
    if (node.leaf()) {
      for (std::size_t p = node.begin; p < node.end; ++p) {
        const std::size_t i = order_[p];
        if (exclude && *exclude == i) continue;
        const double limit = best.full() ? best.worst_d2() : std::numeric_limits<double>::infinity();
        best.offer({detail::squared_distance_bounded(sorted_.row(p), x, limit), i});
      }
      return;
    }
    const Node& l = nodes_[node.left];
    const Node& r = nodes_[node.right];
    const double dl = std::sqrt(detail::squared_distance(l.center, x));
    const double dr = std::sqrt(detail::squared_distance(r.center, x));
    const std::size_t first = dl <= dr ? node.left : node.right;
    const std::size_t second = dl <= dr ? node.right : node.left;
    const double lb_first = std::max(0.0, std::min(dl, dr) - nodes_[first].radius);
    const double lb_second = std::max(0.0, std::max(dl, dr) - nodes_[second].radius);
    if (!prunable(lb_first, best)) search(first, x, exclude, best);
    if (!prunable(lb_second, best)) search(second, x, exclude, best);
  }

  // Equal distances must still be visited for index tie-breaking, so the
  // bound is compared strictly and padded against rounding in the radius.
  static bool prunable(double lower_bound, const detail::KBest& best) {
    if (!best.full()) return false;
    const double worst = std::sqrt(best.worst_d2());
    return lower_bound > worst * (1.0 + 1e-12) + 1e-12;
  }

  Matrix points_;
  Matrix sorted_;  // rows of points_ in tree order, so leaves scan contiguously
  std::vector<std::size_t> order_;
  std::vector<Node> nodes_;
};

}  // namespace dstpll
