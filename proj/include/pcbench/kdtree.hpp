#pragma once

#include <cstdint>
#include <vector>

#include "pcbench/cloud.hpp"

namespace pcbench {

// Exact nearest-neighbor index over an immutable snapshot of a cloud.
// Queries are thread-safe after construction. Ties are broken by the lowest
// point id so results are deterministic.
class KdIndex {
 public:
  struct Hit {
    std::uint32_t index = 0;
    double distance = 0.0;
  };

  explicit KdIndex(const PointCloud& cloud, std::uint32_t leaf_size = 16);

  Hit nearest(const Point3& query) const;

  // True iff some point lies strictly closer than `radius` to the query.
  bool has_within(const Point3& query, double radius) const;

  // k nearest points, ascending by (distance, id). k is clamped to size().
  std::vector<Hit> knearest(const Point3& query, std::uint32_t k) const;

  std::size_t size() const { return points_.size(); }

 private:
  struct Node {
    double split = 0.0;
    std::int32_t axis = -1;  // -1 marks a leaf
    std::uint32_t left = 0, right = 0;
    std::uint32_t begin = 0, end = 0;
  };

  std::uint32_t build(std::uint32_t begin, std::uint32_t end);
  void search_nearest(std::uint32_t node, const Point3& q, double& best_d2,
                      std::uint32_t& best_id) const;
  bool search_within(std::uint32_t node, const Point3& q, double r2) const;
  void search_knearest(std::uint32_t node, const Point3& q, std::uint32_t k,
                       std::vector<std::pair<double, std::uint32_t>>& heap) const;

  std::vector<Point3> points_;        // by original id
  std::vector<std::uint32_t> order_;  // permutation, partitioned by build()
  std::vector<Node> nodes_;
  std::uint32_t root_ = 0;
  std::uint32_t leaf_size_;
};

}  // namespace pcbench
