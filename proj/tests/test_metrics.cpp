#include <doctest.h>

#include <cmath>

#include "pcbench/metrics.hpp"
#include "test_util.hpp"

using namespace pcbench;

namespace {

PointCloud unit_cross() {
  PointCloud cloud;
  cloud.points = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}};
  return cloud;
}

PointCloud line_cloud(double offset) {
  PointCloud cloud;
  for (int i = 0; i < 10; ++i) cloud.points.emplace_back(offset + i, 0.0, 0.0);
  return cloud;
}

}  // namespace

TEST_CASE("delta is zero when the poses coincide") {
  Rng rng(50);
  const PointCloud cloud = test::random_cloud(rng, 40);
  const RigidTransform t = test::random_transform(rng);
  CHECK(benchmark_metric(cloud, t, t).delta == 0.0);
  CHECK(unnormalized_metric(cloud, t, t).delta == 0.0);
}

TEST_CASE("hand value: 0.1 translation of the unit cross gives delta 0.1") {
  const PointCloud cloud = unit_cross();
  RigidTransform shift;
  shift.translation = {0.1, 0, 0};
  const MetricValue v = benchmark_metric(cloud, shift, RigidTransform::identity());
  CHECK(std::abs(v.delta - 0.1) < 1e-12);
  CHECK(v.n_used == 4);
}

TEST_CASE("hand value: 90 degree spin about the centroid gives sqrt(2)") {
  const PointCloud cloud = unit_cross();  // centroid at the origin
  const RigidTransform rz =
      axis_angle_transform({0, 0, 1}, std::numbers::pi / 2, {0, 0, 0});
  const MetricValue v = benchmark_metric(cloud, rz, RigidTransform::identity());
  CHECK(std::abs(v.delta - std::sqrt(2.0)) < 1e-12);

  const MetricValue u = unnormalized_metric(cloud, rz, RigidTransform::identity());
  CHECK(std::abs(u.delta - std::sqrt(2.0)) < 1e-12);
}

TEST_CASE("unnormalized metric of a pure translation is its length") {
  Rng rng(51);
  for (int trial = 0; trial < 10; ++trial) {
    const PointCloud cloud = test::random_cloud(rng, 30);
    RigidTransform shift;
    shift.translation = {0.1, 0, 0};
    const MetricValue v = unnormalized_metric(cloud, shift, RigidTransform::identity());
    CHECK(std::abs(v.delta - 0.1) < 1e-12);
  }
}

TEST_CASE("degenerate cloud is rejected by the normalized metric") {
  PointCloud cloud;
  cloud.points = {{1, 1, 1}, {1, 1, 1}};
  CHECK_THROWS_AS(
      benchmark_metric(cloud, RigidTransform::identity(), RigidTransform::identity()),
      DegenerateCloud);
  CHECK_THROWS_AS(
      benchmark_metric(PointCloud{}, RigidTransform::identity(), RigidTransform::identity()),
      EmptyCloud);
}

TEST_CASE("metric symmetry under rigid displacements") {
  Rng rng(52);
  for (int trial = 0; trial < 50; ++trial) {
    const PointCloud cloud = test::random_cloud(rng, 50);
    const RigidTransform a = test::random_transform(rng);
    const RigidTransform b = test::random_transform(rng);
    const double ab = benchmark_metric(cloud, a, b).delta;
    const double ba = benchmark_metric(cloud, b, a).delta;
    CHECK(std::abs(ab - ba) <= 1e-9 * std::max(ab, 1e-30));
  }
}

TEST_CASE("metric triangle inequality") {
  Rng rng(53);
  for (int trial = 0; trial < 50; ++trial) {
    const PointCloud cloud = test::random_cloud(rng, 40);
    const RigidTransform a = test::random_transform(rng);
    const RigidTransform b = test::random_transform(rng);
    const RigidTransform c = test::random_transform(rng);
    const double ac = benchmark_metric(cloud, a, c).delta;
    const double ab = benchmark_metric(cloud, a, b).delta;
    const double bc = benchmark_metric(cloud, b, c).delta;
    CHECK(ac <= ab + bc + 1e-9);
  }
}

TEST_CASE("metric scale invariance") {
  Rng rng(54);
  for (double s : {0.1, 10.0}) {
    for (int trial = 0; trial < 20; ++trial) {
      const PointCloud cloud = test::random_cloud(rng, 40);
      const RigidTransform a = test::random_transform(rng);
      const RigidTransform b = test::random_transform(rng);
      PointCloud scaled = cloud;
      for (Point3& p : scaled.points) p *= s;
      RigidTransform as = a, bs = b;
      as.translation *= s;
      bs.translation *= s;
      const double base = benchmark_metric(cloud, a, b).delta;
      const double other = benchmark_metric(scaled, as, bs).delta;
      CHECK(std::abs(base - other) <= 1e-9 * std::max(base, 1e-30));
    }
  }
}

TEST_CASE("metric is invariant to a common left-composed motion") {
  Rng rng(55);
  for (int trial = 0; trial < 30; ++trial) {
    const PointCloud cloud = test::random_cloud(rng, 40);
    const RigidTransform a = test::random_transform(rng);
    const RigidTransform b = test::random_transform(rng);
    const RigidTransform g = test::random_transform(rng);
    const double base = benchmark_metric(cloud, a, b).delta;
    const double moved = benchmark_metric(cloud, compose(g, a), compose(g, b)).delta;
    CHECK(std::abs(base - moved) <= 1e-9 * std::max(base, 1e-30));
  }
}

TEST_CASE("positive definiteness") {
  Rng rng(56);
  const PointCloud cloud = test::random_cloud(rng, 40);
  for (int trial = 0; trial < 20; ++trial) {
    const RigidTransform a = test::random_transform(rng);
    RigidTransform b = a;
    b.translation += Point3(1e-3, 0, 0);
    CHECK(benchmark_metric(cloud, a, b).delta > 0.0);
    CHECK(benchmark_metric(cloud, a, a).delta <= 1e-12);
  }
}

TEST_CASE("overlap of a cloud with itself is 1") {
  Rng rng(57);
  const PointCloud cloud = test::random_cloud(rng, 100);
  CHECK(overlap(cloud, cloud, 0.5).fraction == 1.0);
  CHECK(overlap(cloud, cloud, 1e-9).fraction == 1.0);  // distance 0 < any r
}

TEST_CASE("distant clouds do not overlap") {
  Rng rng(58);
  const PointCloud a = test::random_cloud(rng, 50, 1.0);
  PointCloud b = a;
  for (Point3& p : b.points) p += Point3(1000.0, 0, 0);
  CHECK(overlap(a, b, 0.5).fraction == 0.0);
}

TEST_CASE("line-shift overlap hand oracle") {
  const PointCloud source = line_cloud(0);
  const PointCloud target = line_cloud(5);  // x in {5..14}
  const OverlapValue v = overlap(source, target, 0.5);
  CHECK(v.fraction == 0.5);
  CHECK(v.threshold == 0.5);
}

TEST_CASE("overlap is monotone in the threshold") {
  Rng rng(59);
  const PointCloud a = test::random_cloud(rng, 200, 2.0);
  const PointCloud b = test::random_cloud(rng, 200, 2.0);
  double prev = 0.0;
  for (double r : {0.05, 0.1, 0.2, 0.5, 1.0, 2.0}) {
    const double f = overlap(a, b, r).fraction;
    CHECK(f >= prev);
    prev = f;
  }
}

TEST_CASE("overlap rejects bad inputs") {
  Rng rng(60);
  const PointCloud cloud = test::random_cloud(rng, 10);
  CHECK_THROWS_AS(overlap(cloud, cloud, 0.0), NonPositiveThreshold);
  CHECK_THROWS_AS(overlap(PointCloud{}, cloud, 0.5), EmptyCloud);
  CHECK_THROWS_AS(overlap(cloud, PointCloud{}, 0.5), EmptyCloud);
}
