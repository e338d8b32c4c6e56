#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <array>
#include <span>

#include "pcbench/cloud.hpp"
#include "pcbench/errors.hpp"
#include "pcbench/rng.hpp"

namespace pcbench {

class NotARotation : public Error {
 public:
  using Error::Error;
  NotARotation() : Error("matrix is not a proper rotation") {}
};

class InvalidBounds : public Error {
 public:
  using Error::Error;
  InvalidBounds() : Error("perturbation bounds must satisfy 0 <= min <= max") {}
};

// SE(3) element: x -> rotation * x + translation.
struct RigidTransform {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  static RigidTransform identity() { return {}; }

  Point3 operator*(const Point3& p) const { return rotation * p + translation; }
};

// compose(a, b): apply b first, then a (matrix product a*b).
RigidTransform compose(const RigidTransform& a, const RigidTransform& b);
RigidTransform invert(const RigidTransform& t);
PointCloud apply(const RigidTransform& t, const PointCloud& cloud);

bool is_rotation(const Eigen::Matrix3d& m, double tol);
double rotation_angle(const RigidTransform& t);  // radians, in [0, pi]
RigidTransform axis_angle_transform(const Eigen::Vector3d& axis, double angle,
                                    const Eigen::Vector3d& translation);

// 4x4 homogeneous matrix flattened row-major, last row (0 0 0 1) implicit:
// t1..t4 = first row, t5..t8 = second, t9..t12 = third.
std::array<double, 12> to_row_major12(const RigidTransform& t);
RigidTransform from_row_major12(std::span<const double, 12> values);  // validates

enum class Regime { local, global };
const char* to_string(Regime r);

constexpr double kDefaultLocalRotMin = 0.0;
constexpr double kDefaultLocalRotMax = 45.0 * std::numbers::pi / 180.0;
constexpr double kDefaultGlobalRotMin = 45.0 * std::numbers::pi / 180.0;
constexpr double kDefaultGlobalRotMax = 180.0 * std::numbers::pi / 180.0;

struct PerturbationBounds {
  double rot_min = 0.0;    // radians
  double rot_max = 0.0;
  double trans_min = 0.0;  // meters
  double trans_max = 0.0;
  Regime regime = Regime::local;

  void validate() const {
    if (rot_min < 0 || rot_max < rot_min || trans_min < 0 || trans_max < trans_min)
      throw InvalidBounds();
  }

  static PerturbationBounds local(double trans_min, double trans_max,
                                  double rot_min = kDefaultLocalRotMin,
                                  double rot_max = kDefaultLocalRotMax) {
    return {rot_min, rot_max, trans_min, trans_max, Regime::local};
  }
  static PerturbationBounds global(double trans_min, double trans_max,
                                   double rot_min = kDefaultGlobalRotMin,
                                   double rot_max = kDefaultGlobalRotMax) {
    return {rot_min, rot_max, trans_min, trans_max, Regime::global};
  }
};

// Unit vector uniform on the sphere: isotropic Gaussian direction,
// normalized; draws with norm < 1e-6 are rejected and redrawn.
Eigen::Vector3d sample_unit_axis(Rng& rng);

// Rotation of uniform magnitude about a uniform axis through `pivot`,
// composed with a translation of uniform magnitude along an independent
// uniform direction; returned as a single world-frame transform.
// Draw order: rotation axis, rotation angle, translation axis, magnitude.
RigidTransform sample_perturbation(const PerturbationBounds& bounds,
                                   const Point3& pivot, Rng& rng);

}  // namespace pcbench
