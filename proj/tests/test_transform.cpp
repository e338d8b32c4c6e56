#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "pcbench/transform.hpp"
#include "test_util.hpp"

using namespace pcbench;

namespace {

// Kolmogorov-Smirnov statistic of samples against U[lo, hi].
double ks_vs_uniform(std::vector<double> samples, double lo, double hi) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = (samples[i] - lo) / (hi - lo);
    d = std::max(d, std::abs((static_cast<double>(i) + 1.0) / n - f));
    d = std::max(d, std::abs(static_cast<double>(i) / n - f));
  }
  return d;
}

}  // namespace

TEST_CASE("compose with inverse yields identity") {
  Rng rng(5);
  for (int trial = 0; trial < 25; ++trial) {
    const RigidTransform t = test::random_transform(rng);
    const RigidTransform id = compose(t, invert(t));
    CHECK((id.rotation - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(id.translation.norm() < 1e-12);
  }
}

TEST_CASE("identity transform leaves clouds untouched") {
  Rng rng(6);
  const PointCloud cloud = test::random_cloud(rng, 30);
  const PointCloud moved = apply(RigidTransform::identity(), cloud);
  for (std::size_t i = 0; i < cloud.size(); ++i)
    CHECK(moved.points[i] == cloud.points[i]);
}

TEST_CASE("90 degree z rotation maps x onto y") {
  const RigidTransform rz =
      axis_angle_transform({0, 0, 1}, std::numbers::pi / 2, {0, 0, 0});
  const Point3 p = rz * Point3(1, 0, 0);
  CHECK((p - Point3(0, 1, 0)).norm() < 1e-12);
}

TEST_CASE("apply preserves pairwise distances") {
  Rng rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    const RigidTransform t = test::random_transform(rng);
    const Point3 p(rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5));
    const Point3 q(rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5));
    CHECK(std::abs((t * p - t * q).norm() - (p - q).norm()) < 1e-9);
  }
}

TEST_CASE("row-major-12 of identity") {
  const auto v = to_row_major12(RigidTransform::identity());
  const std::array<double, 12> expected{1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0};
  CHECK(v == expected);
}

TEST_CASE("row-major-12 round-trips exactly") {
  Rng rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    const RigidTransform t = test::random_transform(rng);
    const RigidTransform back = from_row_major12(to_row_major12(t));
    CHECK(back.rotation == t.rotation);
    CHECK(back.translation == t.translation);
  }
}

TEST_CASE("reflection is rejected as NotARotation") {
  std::array<double, 12> v{-1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0};  // det -1
  CHECK_THROWS_AS(from_row_major12(v), NotARotation);
}

TEST_CASE("non-orthogonal block is rejected") {
  std::array<double, 12> v{1, 0.5, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0};
  CHECK_THROWS_AS(from_row_major12(v), NotARotation);
}

TEST_CASE("sampled axes are unit length") {
  Rng rng(10);
  for (int i = 0; i < 1000; ++i)
    CHECK(std::abs(sample_unit_axis(rng).norm() - 1.0) < 1e-12);
}

TEST_CASE("axis samples are isotropic") {
  Rng rng(12);
  const int n = 100000;
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  std::array<int, 8> octants{};
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector3d v = sample_unit_axis(rng);
    mean += v;
    const int o = (v.x() > 0 ? 1 : 0) | (v.y() > 0 ? 2 : 0) | (v.z() > 0 ? 4 : 0);
    ++octants[static_cast<std::size_t>(o)];
  }
  mean /= n;
  CHECK(mean.norm() < 0.02);  // CLT bound ~3/sqrt(3n)

  const double expected = n / 8.0;
  const double sigma = std::sqrt(n * (1.0 / 8.0) * (7.0 / 8.0));
  for (int count : octants) CHECK(std::abs(count - expected) < 5.0 * sigma);
}

TEST_CASE("zero bounds give the identity perturbation") {
  Rng rng(13);
  const PerturbationBounds bounds = PerturbationBounds::local(0, 0, 0, 0);
  const RigidTransform t = sample_perturbation(bounds, {1, 2, 3}, rng);
  CHECK((t.rotation - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(t.translation.norm() < 1e-15);
}

TEST_CASE("degenerate bounds fix the magnitudes exactly") {
  Rng rng(14);
  const double a = 0.7, b = 1.3;
  const PerturbationBounds bounds{a, a, b, b, Regime::local};
  const Point3 pivot(0.5, -2, 4);
  for (int trial = 0; trial < 50; ++trial) {
    const RigidTransform t = sample_perturbation(bounds, pivot, rng);
    CHECK(std::abs(rotation_angle(t) - a) < 1e-12);
    CHECK(std::abs((t * pivot - pivot).norm() - b) < 1e-12);
  }
}

TEST_CASE("the pivot moves only by the translation") {
  Rng rng(15);
  const PerturbationBounds bounds = PerturbationBounds::local(0.2, 2.0, 0.1, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const Point3 pivot(rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5));
    const RigidTransform t = sample_perturbation(bounds, pivot, rng);
    // t * pivot - pivot is the sampled translation; rotating about the pivot
    // contributes nothing there.
    const Point3 displaced = t * pivot;
    const Eigen::Vector3d trans_part = displaced - pivot;
    CHECK((t.translation - (pivot - t.rotation * pivot + trans_part)).norm() < 1e-9);
    CHECK(trans_part.norm() >= bounds.trans_min - 1e-9);
    CHECK(trans_part.norm() <= bounds.trans_max + 1e-9);
  }
}

TEST_CASE("rotation magnitudes are uniform (KS test)") {
  Rng rng(16);
  const double hi = 45.0 * std::numbers::pi / 180.0;
  const PerturbationBounds bounds = PerturbationBounds::local(0, 0, 0, hi);
  std::vector<double> angles;
  for (int i = 0; i < 3000; ++i)
    angles.push_back(rotation_angle(sample_perturbation(bounds, {0, 0, 0}, rng)));
  CHECK(ks_vs_uniform(angles, 0.0, hi) < 0.035);  // 1% critical ~ 1.63/sqrt(3000)
}

TEST_CASE("translation magnitudes are uniform (KS test)") {
  Rng rng(17);
  const PerturbationBounds bounds = PerturbationBounds::local(0.5, 2.5);
  std::vector<double> mags;
  for (int i = 0; i < 3000; ++i)
    mags.push_back(
        (sample_perturbation(bounds, {0, 0, 0}, rng) * Point3(0, 0, 0)).norm());
  CHECK(ks_vs_uniform(mags, 0.5, 2.5) < 0.035);
}

TEST_CASE("invalid bounds are rejected") {
  Rng rng(18);
  PerturbationBounds bad = PerturbationBounds::local(2.0, 1.0);  // min > max
  CHECK_THROWS_AS(sample_perturbation(bad, {0, 0, 0}, rng), InvalidBounds);
  PerturbationBounds negative = PerturbationBounds::local(0.0, 1.0, -0.1, 0.5);
  CHECK_THROWS_AS(sample_perturbation(negative, {0, 0, 0}, rng), InvalidBounds);
}

TEST_CASE("global bounds default to the 45-180 degree rotation range") {
  const PerturbationBounds g = PerturbationBounds::global(0, 1);
  CHECK(g.rot_min == doctest::Approx(std::numbers::pi / 4));
  CHECK(g.rot_max == doctest::Approx(std::numbers::pi));
}
