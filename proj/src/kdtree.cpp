#include "pcbench/kdtree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace pcbench {

KdIndex::KdIndex(const PointCloud& cloud, std::uint32_t leaf_size)
    : points_(cloud.points), leaf_size_(std::max<std::uint32_t>(leaf_size, 1)) {
  if (cloud.empty()) throw EmptyCloud();
  order_.resize(points_.size());
  std::iota(order_.begin(), order_.end(), 0u);
  nodes_.reserve(2 * points_.size() / leaf_size_ + 2);
  root_ = build(0, static_cast<std::uint32_t>(points_.size()));
}

std::uint32_t KdIndex::build(std::uint32_t begin, std::uint32_t end) {
  const std::uint32_t id = static_cast<std::uint32_t>(nodes_.size());
  nodes_.emplace_back();
  nodes_[id].begin = begin;
  nodes_[id].end = end;
  if (end - begin <= leaf_size_) return id;

  Point3 lo = points_[order_[begin]], hi = lo;
  for (std::uint32_t i = begin + 1; i < end; ++i) {
    lo = lo.cwiseMin(points_[order_[i]]);
    hi = hi.cwiseMax(points_[order_[i]]);
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);
  if (hi[axis] == lo[axis]) return id;  // all points identical: keep as leaf

  const std::uint32_t mid = begin + (end - begin) / 2;
  // (coordinate, id) is a total order, so the partition is deterministic.
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     const double ca = points_[a][axis], cb = points_[b][axis];
                     return ca < cb || (ca == cb && a < b);
                   });
  const double split = points_[order_[mid]][axis];

  const std::uint32_t left = build(begin, mid);
  const std::uint32_t right = build(mid, end);
  nodes_[id].axis = axis;
  nodes_[id].split = split;
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

void KdIndex::search_nearest(std::uint32_t node, const Point3& q, double& best_d2,
                             std::uint32_t& best_id) const {
  const Node& n = nodes_[node];
  if (n.axis < 0) {
    for (std::uint32_t i = n.begin; i < n.end; ++i) {
      const std::uint32_t id = order_[i];
      const double d2 = (points_[id] - q).squaredNorm();
      if (d2 < best_d2 || (d2 == best_d2 && id < best_id)) {
        best_d2 = d2;
        best_id = id;
      }
    }
    return;
  }
  const double diff = q[n.axis] - n.split;
  const std::uint32_t near = diff < 0 ? n.left : n.right;
  const std::uint32_t far = diff < 0 ? n.right : n.left;
  search_nearest(near, q, best_d2, best_id);
  // <= so an equal-distance, lower-id point across the plane is still found
  if (diff * diff <= best_d2) search_nearest(far, q, best_d2, best_id);
}

void KdIndex::search_knearest(
    std::uint32_t node, const Point3& q, std::uint32_t k,
    std::vector<std::pair<double, std::uint32_t>>& heap) const {
  const Node& n = nodes_[node];
  if (n.axis < 0) {
    for (std::uint32_t i = n.begin; i < n.end; ++i) {
      const std::uint32_t id = order_[i];
      const std::pair<double, std::uint32_t> cand{(points_[id] - q).squaredNorm(), id};
      if (heap.size() < k) {
        heap.push_back(cand);
        std::push_heap(heap.begin(), heap.end());
      } else if (cand < heap.front()) {
        std::pop_heap(heap.begin(), heap.end());
        heap.back() = cand;
        std::push_heap(heap.begin(), heap.end());
      }
    }
    return;
  }
  const double diff = q[n.axis] - n.split;
  const std::uint32_t near = diff < 0 ? n.left : n.right;
  const std::uint32_t far = diff < 0 ? n.right : n.left;
  search_knearest(near, q, k, heap);
  if (heap.size() < k || diff * diff <= heap.front().first)
    search_knearest(far, q, k, heap);
}

bool KdIndex::search_within(std::uint32_t node, const Point3& q, double r2) const {
  const Node& n = nodes_[node];
  if (n.axis < 0) {
    for (std::uint32_t i = n.begin; i < n.end; ++i)
      if ((points_[order_[i]] - q).squaredNorm() < r2) return true;
    return false;
  }
  const double diff = q[n.axis] - n.split;
  const std::uint32_t near = diff < 0 ? n.left : n.right;
  const std::uint32_t far = diff < 0 ? n.right : n.left;
  if (search_within(near, q, r2)) return true;
  // strict: a subtree whose minimum possible distance equals r holds nothing < r
  if (diff * diff < r2) return search_within(far, q, r2);
  return false;
}

KdIndex::Hit KdIndex::nearest(const Point3& query) const {
  double best_d2 = std::numeric_limits<double>::infinity();
  std::uint32_t best_id = 0;
  search_nearest(root_, query, best_d2, best_id);
  return {best_id, std::sqrt(best_d2)};
}

bool KdIndex::has_within(const Point3& query, double radius) const {
  if (radius <= 0) return false;
  return search_within(root_, query, radius * radius);
}

std::vector<KdIndex::Hit> KdIndex::knearest(const Point3& query,
                                            std::uint32_t k) const {
  k = std::min<std::uint32_t>(k, static_cast<std::uint32_t>(points_.size()));
  std::vector<std::pair<double, std::uint32_t>> heap;
  heap.reserve(k);
  if (k > 0) search_knearest(root_, query, k, heap);
  std::sort(heap.begin(), heap.end());
  std::vector<Hit> hits;
  hits.reserve(heap.size());
  for (const auto& [d2, id] : heap) hits.push_back({id, std::sqrt(d2)});
  return hits;
}

}  // namespace pcbench
