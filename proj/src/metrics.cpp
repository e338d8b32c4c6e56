#include "pcbench/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace pcbench {

MetricValue benchmark_metric(const PointCloud& cloud, const RigidTransform& t_est,
                             const RigidTransform& t_gt) {
  if (cloud.empty()) throw EmptyCloud();
  const std::size_t n = cloud.size();

  Point3 p_centroid = Point3::Zero();
  Point3 p_min, p_max;
  for (std::size_t i = 0; i < n; ++i) {
    const Point3 p = t_est * cloud.points[i];
    p_centroid += p;
    if (i == 0) {
      p_min = p_max = p;
    } else {
      p_min = p_min.cwiseMin(p);
      p_max = p_max.cwiseMax(p);
    }
  }
  p_centroid /= static_cast<double>(n);
  const double extent = (p_max - p_min).norm();
  if (extent == 0.0) throw DegenerateCloud();
  const double eps_den = 1e-6 * extent;

  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Point3 p = t_est * cloud.points[i];
    const Point3 g = t_gt * cloud.points[i];
    const double numer = (p - g).norm();
    const double denom = std::max((p - p_centroid).norm(), eps_den);
    sum += numer / denom;
  }
  return {sum / static_cast<double>(n), n};
}

MetricValue unnormalized_metric(const PointCloud& cloud, const RigidTransform& t_est,
                                const RigidTransform& t_gt) {
  if (cloud.empty()) throw EmptyCloud();
  double sum = 0.0;
  for (const Point3& c : cloud.points) sum += (t_est * c - t_gt * c).norm();
  return {sum / static_cast<double>(cloud.size()), cloud.size()};
}

OverlapValue overlap(const PointCloud& source, const KdIndex& target_index,
                     double threshold) {
  if (source.empty()) throw EmptyCloud();
  if (threshold <= 0.0) throw NonPositiveThreshold();
  std::size_t hits = 0;
  for (const Point3& p : source.points)
    if (target_index.has_within(p, threshold)) ++hits;
  return {static_cast<double>(hits) / static_cast<double>(source.size()), threshold};
}

OverlapValue overlap(const PointCloud& source, const PointCloud& target,
                     double threshold) {
  if (target.empty()) throw EmptyCloud();
  return overlap(source, KdIndex(target), threshold);
}

}  // namespace pcbench
