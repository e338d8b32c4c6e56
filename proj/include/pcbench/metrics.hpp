#pragma once

#include "pcbench/cloud.hpp"
#include "pcbench/kdtree.hpp"
#include "pcbench/transform.hpp"

namespace pcbench {

class NonPositiveThreshold : public Error {
 public:
  NonPositiveThreshold() : Error("overlap threshold must be > 0") {}
};

struct MetricValue {
  double delta = 0.0;       // dimensionless (normalized) or meters (unnormalized)
  std::size_t n_used = 0;   // points entering the mean
};

struct OverlapValue {
  double fraction = 0.0;    // in [0, 1], direction source -> target
  double threshold = 0.0;   // meters
};

// Scale-invariant pose distance: with P = t_est * cloud and G = t_gt * cloud
// paired by index, delta is the mean of |p_i - g_i| / |p_i - centroid(P)|.
// Denominators are clamped at 1e-6 x the extent of P so points coinciding
// with the centroid cannot blow up the mean.
MetricValue benchmark_metric(const PointCloud& cloud, const RigidTransform& t_est,
                             const RigidTransform& t_gt);

// Same mean displacement without the centroid normalization; meters. Used for
// ground-truth auditing where absolute values are needed.
MetricValue unnormalized_metric(const PointCloud& cloud, const RigidTransform& t_est,
                                const RigidTransform& t_gt);

// Fraction of source points with a target point strictly closer than
// `threshold`; both clouds must be at their ground-truth poses.
OverlapValue overlap(const PointCloud& source, const KdIndex& target_index,
                     double threshold);
OverlapValue overlap(const PointCloud& source, const PointCloud& target,
                     double threshold);

}  // namespace pcbench
